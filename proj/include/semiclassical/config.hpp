#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace semiclassical {

// A flat key = value configuration whose allowed keys and defaults come from a schema.
// Syntax: one `dotted.key = value` per line, `#` starts a comment, blank lines ignored.
// Unknown keys and malformed lines raise Parse errors; typed reads of bad values raise
// Validation errors.
class ScenarioConfig {
 public:
  struct Key {
    std::string name;
    std::string default_value;
    std::string help;
  };
  using Schema = std::vector<Key>;

  explicit ScenarioConfig(Schema schema);

  const Schema& schema() const { return schema_; }
  bool has_key(std::string_view key) const;

  // Applies every assignment in `text`; `source` labels error messages.
  void merge_text(std::string_view text, std::string_view source = "<config>");
  void merge_file(const std::filesystem::path& path);
  // "key=value" from the command line.
  void apply_override(std::string_view assignment);
  void set(std::string_view key, std::string value);

  const std::string& raw(std::string_view key) const;
  std::string get_string(std::string_view key) const { return raw(key); }
  double get_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<double> get_list(std::string_view key) const;

  // Canonical text: every key in schema order, one per line.
  std::string emit() const;
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.values_ == b.values_;
  }

 private:
  Schema schema_;
  std::map<std::string, std::string, std::less<>> values_;
};

// Subcommands of the CLI, each with its own schema.
enum class Command { HopfLax, ElAction, Deterministic, Schrod, Bohm, DoubleSlit, Sweep };

std::string_view to_string(Command command);
Command command_from_string(std::string_view name);
const ScenarioConfig::Schema& schema_for(Command command);
ScenarioConfig default_config(Command command);

}  // namespace semiclassical
