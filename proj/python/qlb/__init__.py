"""Quantum lattice Boltzmann solver for the Dirac equation.

Fields are NumPy arrays of shape (sites, 4), complex128, sites ordered with x
fastest. Models are FreeModel, NjlModel and EmModel; the command functions
(run, bench, converge, check) take a RunConfig and mirror the `qlb` CLI.
"""

from ._qlb import (
    Axis,
    Boundary,
    Branch,
    ConfigError,
    EmModel,
    FreeModel,
    Grid,
    NjlModel,
    NumericalError,
    Potential,
    PotentialSample,
    RunConfig,
    bench,
    check,
    collision_matrix_em,
    collision_matrix_free,
    collision_matrix_njl,
    constant_vector_potential,
    converge,
    dirac_set,
    evolve,
    expm_antihermitian,
    gaussian_packet,
    norm2,
    observe,
    plane_wave,
    plane_wave_vector_potential,
    run,
    theory_group_velocity,
    uniform_scalar_potential,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
