"""Exact Kohn-Sham DFT laboratory for spinless fermions on the unit interval.

Ground states of few-fermion Schrödinger operators with distributional
external potentials, density classes and v-representability checks,
density-to-potential inversion, and the exact exchange-correlation
self-consistent field loop, all on a uniform P1 discretization of [0, 1].
"""

from . import _threads  # noqa: F401  (thread cap; must precede numpy users)

from .grid import (BoundaryCondition, Density, ExternalPotential, Grid,
                   GridFunction, Interaction, InteractionKind,
                   cumulative_distribution, h1_norm_sq, integrate,
                   pair_external, pair_interaction)
from .singleparticle import (EigenSolution, SingleParticleOperator, SolverError,
                             assemble_h, degeneracy_profile, eigensolve_lowest)
from .manybody import (GroundState, ManyBodyModel, ManyBodyProblem,
                       SpectralBasis, WaveFunction, apply_pair_kernel,
                       assemble_many_body, build_basis, density, ground_state,
                       pair_density, two_body_integrals, wrap_translate)
from .representability import (RepresentabilityReport, classify_density,
                               kinetic_bound_check, orbital_kinetic_energy,
                               slater_from_density)
from .inversion import (ConvergenceError, InversionProblem, InversionResult,
                        TargetClassError, dual_objective, hk_uniqueness_check,
                        invert, parity_matches)
from .kohnsham import (FunctionalValue, KSResult, hartree_energy,
                       hartree_potential, ks_kinetic, ks_scf, levy_lieb,
                       noninteracting_solve, xc_energy, xc_potential)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "Density", "ExternalPotential", "Grid",
    "GridFunction", "Interaction", "InteractionKind",
    "cumulative_distribution", "h1_norm_sq", "integrate", "pair_external",
    "pair_interaction",
    "EigenSolution", "SingleParticleOperator", "SolverError", "assemble_h",
    "degeneracy_profile", "eigensolve_lowest",
    "GroundState", "ManyBodyModel", "ManyBodyProblem", "SpectralBasis",
    "WaveFunction", "apply_pair_kernel", "assemble_many_body", "build_basis",
    "density", "ground_state", "pair_density", "two_body_integrals",
    "wrap_translate",
    "RepresentabilityReport", "classify_density", "kinetic_bound_check",
    "orbital_kinetic_energy", "slater_from_density",
    "ConvergenceError", "InversionProblem", "InversionResult",
    "TargetClassError", "dual_objective", "hk_uniqueness_check", "invert",
    "parity_matches",
    "FunctionalValue", "KSResult", "hartree_energy", "hartree_potential",
    "ks_kinetic", "ks_scf", "levy_lieb", "noninteracting_solve", "xc_energy",
    "xc_potential",
]
