"""Min-plus Hamilton-Jacobi actions, semiclassical wave mechanics and Bohm trajectories."""

from ._semiclassical import (
    Axis,
    Grid,
    Lagrangian,
    SemiclassicalError,
    WaveFunction,
    bohm,
    coherent_state,
    coherent_sweep,
    delta,
    double_slit,
    el_action,
    el_action_numeric,
    feynman_propagate,
    gaussian_packet,
    hopf_lax,
    indiscerned_sweep,
    l2_distance,
    madelung,
    sample_equilibrium,
    split_step,
    velocity_field,
)

__all__ = [
    "Axis",
    "Grid",
    "Lagrangian",
    "SemiclassicalError",
    "WaveFunction",
    "bohm",
    "coherent_state",
    "coherent_sweep",
    "delta",
    "double_slit",
    "el_action",
    "el_action_numeric",
    "feynman_propagate",
    "gaussian_packet",
    "hopf_lax",
    "indiscerned_sweep",
    "l2_distance",
    "madelung",
    "sample_equilibrium",
    "split_step",
    "velocity_field",
]
