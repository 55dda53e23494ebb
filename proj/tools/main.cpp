#include "semiclassical/cli.hpp"

int main(int argc, char** argv) { return semiclassical::cli_main(argc, argv); }
