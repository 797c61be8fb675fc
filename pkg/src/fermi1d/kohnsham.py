"""Exact density functionals and the exact-exchange-correlation SCF loop.

The constrained-search energy of a density is evaluated through the dual:
invert the density, then read off the value as the recovered ground-state
energy minus the potential-density pairing.  With the interaction switched
off the same search gives the Kohn-Sham kinetic energy, and the
exchange-correlation energy is the computed difference

    E_xc = F_LL - T_KS - E_H            (exact, no model functional).

Its potential is obtained by double inversion: the interacting and
non-interacting potentials representing the same density differ by the
Hartree plus exchange-correlation potential, all in the zero-mean gauge.
The self-consistent loop iterates the non-interacting problem with the
effective potential v + v_H + v_xc under linear density mixing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grid import (BoundaryCondition, Density, ExternalPotential, Grid,
                   GridFunction, Interaction, integrate, pair_external,
                   pair_interaction)
from .inversion import (ConvergenceError, InversionProblem, InversionResult,
                        invert, validate_target)
from .manybody import GAP_TOL, SpectralBasis, build_basis
from .singleparticle import canonicalize_eigenvectors

__all__ = [
    "ConstrainedSearchResult",
    "FunctionalValue",
    "KSResult",
    "levy_lieb",
    "ks_kinetic",
    "hartree_energy",
    "hartree_potential",
    "xc_energy",
    "xc_potential",
    "noninteracting_solve",
    "ks_scf",
]


@dataclass
class ConstrainedSearchResult:
    value: float
    potential: ExternalPotential
    inversion: InversionResult


def levy_lieb(rho: Density, w: Interaction, bc: BoundaryCondition,
              basis: SpectralBasis, grad_tol: float = 1e-8,
              max_iters: int = 600, v0=None, strict: bool = True,
              search_space: str = "resolved") -> ConstrainedSearchResult:
    """Constrained-search energy of ``rho`` with interaction ``w``.

    The minimum over wave functions with density rho of kinetic plus
    interaction energy, computed by inverting rho and evaluating the dual.
    """
    prob = InversionProblem(target=rho, w=w, bc=bc, basis=basis,
                            grad_tol=grad_tol, max_iters=max_iters,
                            search_space=search_space)
    res = invert(prob, v0=v0)
    if strict and not res.converged:
        raise ConvergenceError(
            f"constrained-search inversion stalled at residual "
            f"{res.residual_history[-1]:.3e} (> {grad_tol})")
    value = res.lambda1 - pair_external(res.v, rho)
    return ConstrainedSearchResult(float(value), res.v, res)


def ks_kinetic(rho: Density, bc: BoundaryCondition, basis: SpectralBasis,
               **kwargs) -> ConstrainedSearchResult:
    """Kohn-Sham kinetic energy: the constrained search without interaction."""
    return levy_lieb(rho, Interaction.zero(), bc, basis, **kwargs)


def hartree_energy(rho: Density, w: Interaction) -> float:
    """Interaction paired with the product density rho(x) rho(y)."""
    return pair_interaction(w, np.outer(rho.values, rho.values), rho.grid)


def hartree_potential(rho: Density, w: Interaction) -> GridFunction:
    """Nodal function realizing the derivative of the Hartree energy."""
    grid = rho.grid
    if w.is_zero:
        return GridFunction.zeros(grid)
    kern = w.kernel_matrix(grid)
    vals = 2.0 * kern @ (grid.trapezoid_weights * rho.values)
    return GridFunction(grid, vals)


@dataclass
class FunctionalValue:
    """Exact functional values at one density, with the dual potentials."""

    f_ll: float
    t_ks: float
    e_h: float
    e_xc: float
    v_int: ExternalPotential
    v_ks: ExternalPotential
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "f_ll": self.f_ll,
            "t_ks": self.t_ks,
            "e_h": self.e_h,
            "e_xc": self.e_xc,
            "v_int": self.v_int.to_dict(),
            "v_ks": self.v_ks.to_dict(),
            "diagnostics": self.diagnostics,
        }


def xc_energy(rho: Density, w: Interaction, bc: BoundaryCondition,
              basis: SpectralBasis, grad_tol: float = 1e-8,
              max_iters: int = 600, strict: bool = True,
              seed_int=None, seed_ks=None,
              search_space: str = "resolved") -> FunctionalValue:
    """Exchange-correlation energy by double constrained search."""
    kin = ks_kinetic(rho, bc, basis, grad_tol=grad_tol, max_iters=max_iters,
                     v0=seed_ks, strict=strict, search_space=search_space)
    if w.is_zero:
        # the interacting and non-interacting searches coincide
        inter = kin
    else:
        inter = levy_lieb(rho, w, bc, basis, grad_tol=grad_tol,
                          max_iters=max_iters, v0=seed_int, strict=strict,
                          search_space=search_space)
    e_h = hartree_energy(rho, w)
    return FunctionalValue(
        f_ll=inter.value,
        t_ks=kin.value,
        e_h=e_h,
        e_xc=inter.value - kin.value - e_h,
        v_int=inter.potential,
        v_ks=kin.potential,
        diagnostics={
            "interacting_residual": inter.inversion.residual_history[-1],
            "noninteracting_residual": kin.inversion.residual_history[-1],
            "interacting_converged": inter.inversion.converged,
            "noninteracting_converged": kin.inversion.converged,
        },
    )


def _zero_mean(grid: Grid, values: np.ndarray) -> np.ndarray:
    return values - grid.trapezoid_weights @ values


def xc_potential(rho: Density, w: Interaction, bc: BoundaryCondition,
                 basis: SpectralBasis, functional: FunctionalValue | None = None,
                 **kwargs):
    """Exchange-correlation potential in the zero-mean gauge.

    Realizes the derivative of the exchange-correlation energy as the
    difference of the non-interacting dual potential, the Hartree potential
    and the interacting dual potential.
    """
    if functional is None:
        functional = xc_energy(rho, w, bc, basis, **kwargs)
    grid = rho.grid
    vals = (functional.v_ks.regular_values(grid)
            - hartree_potential(rho, w).values
            - functional.v_int.regular_values(grid))
    return GridFunction(grid, _zero_mean(grid, vals)), functional


@dataclass
class KohnShamSolve:
    """One non-interacting solve in the spectral basis."""

    eigenvalues: np.ndarray          # all basis-resolved levels, ascending
    orbitals: list[GridFunction]     # the N occupied orbitals
    density: Density


def noninteracting_solve(basis: SpectralBasis, v: ExternalPotential,
                         n_particles: int) -> KohnShamSolve:
    """Occupy the lowest levels of the one-body operator with potential v."""
    k = basis.size
    t = np.diag(basis.energies) + basis.potential_matrix(v)
    evals, vecs = scipy.linalg.eigh(t)
    vecs = canonicalize_eigenvectors(evals, vecs, np.ones(k))
    occ = vecs[:, :n_particles]
    orbital_values = occ.T @ basis.modes
    rho_vals = (orbital_values ** 2).sum(axis=0)
    rho = Density(basis.grid, rho_vals, n_particles)
    orbitals = [GridFunction(basis.grid, ov) for ov in orbital_values]
    return KohnShamSolve(evals, orbitals, rho)


@dataclass
class KSResult:
    """Converged (or abandoned) self-consistent Kohn-Sham state."""

    orbitals: list[GridFunction]
    orbital_eigenvalues: np.ndarray
    density: Density
    v_xc: GridFunction
    v_h: GridFunction
    scf_residuals: list[float]
    converged: bool
    aufbau_ok: bool | None
    ks_energy: float
    functional: FunctionalValue | None
    iterations: int
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "aufbau_ok": self.aufbau_ok,
            "ks_energy": self.ks_energy,
            "orbital_eigenvalues": self.orbital_eigenvalues.tolist(),
            "density": self.density.to_dict(),
            "v_xc": self.v_xc.to_dict(),
            "v_h": self.v_h.to_dict(),
            "orbitals": [o.to_dict() for o in self.orbitals],
            "scf_residuals": list(self.scf_residuals),
            "functional": None if self.functional is None
            else self.functional.to_dict(),
            "trace": self.trace,
        }


def _l2(grid: Grid, values: np.ndarray) -> float:
    return float(np.sqrt(grid.trapezoid_weights @ values ** 2))


def ks_scf(v: ExternalPotential, w: Interaction, bc: BoundaryCondition,
           n_particles: int, grid: Grid | None = None,
           basis: SpectralBasis | None = None, k: int = 10,
           mixing: float = 0.5, max_iters: int = 60, scf_tol: float = 1e-6,
           inner_tol: float = 1e-8, inner_max_iters: int = 400,
           enforce_parity: bool = True, mix_densities: bool = False) -> KSResult:
    """Self-consistent solution of the exact Kohn-Sham equations.

    Each cycle evaluates the Hartree and exchange-correlation potentials at
    the current density and re-solves the non-interacting problem with the
    effective potential; the loop is declared converged when the output
    density agrees with the iterate in L2 within ``scf_tol``.

    By default the Hartree-plus-xc part of the effective potential is mixed
    linearly, so every iterate density is exactly an N-lowest-orbital
    density and stays inside the domain where the double inversion behind
    the xc potential is well posed.  ``mix_densities=True`` mixes output
    densities directly instead; such mixtures can leave the representable
    set at second order in the step, in which case the inner searches stop
    at their attainable floor and return the nearest potential found.
    """
    if not 0.0 < mixing <= 1.0:
        raise ValueError("mixing must lie in (0, 1]")
    if basis is None:
        if grid is None:
            raise ValueError("provide either a grid or a prebuilt basis")
        basis = build_basis(bc, grid, k)
    if basis.size < n_particles + 1:
        raise ValueError("basis must resolve at least one virtual level")
    grid = basis.grid

    start = noninteracting_solve(basis, v, n_particles)
    rho = start.density
    validate_target(rho, bc, enforce_parity)

    residuals: list[float] = []
    trace: list[dict] = []
    seed_int = seed_ks = None
    converged = False
    fv = None
    solve = start
    u_mix = np.zeros(grid.n_nodes)   # mixed Hartree + xc part of the potential

    for it in range(1, max_iters + 1):
        if w.is_zero:
            fv = None
            u_target = np.zeros(grid.n_nodes)
        else:
            fv = xc_energy(rho, w, bc, basis, grad_tol=inner_tol,
                           max_iters=inner_max_iters, strict=False,
                           seed_int=seed_int, seed_ks=seed_ks)
            seed_int = fv.v_int.regular
            seed_ks = fv.v_ks.regular
            vxc, fv = xc_potential(rho, w, bc, basis, functional=fv)
            u_target = hartree_potential(rho, w).values + vxc.values
        v_eff = v + ExternalPotential(GridFunction(grid, u_target))
        solve = noninteracting_solve(basis, v_eff, n_particles)
        res = _l2(grid, solve.density.values - rho.values)
        residuals.append(res)
        trace.append({"iteration": it, "residual": res,
                      "energy": _total_energy(v, w, bc, basis, solve, v_eff, fv)})
        if res <= scf_tol:
            converged = True
            rho = solve.density
            break
        if mix_densities:
            mixed = (1.0 - mixing) * rho.values + mixing * solve.density.values
            rho = Density(grid, mixed, n_particles)
        else:
            u_mix = (1.0 - mixing) * u_mix + mixing * u_target
            damped = v + ExternalPotential(GridFunction(grid, u_mix))
            rho = noninteracting_solve(basis, damped, n_particles).density

    # final functional evaluation at the self-consistent density
    if w.is_zero:
        final_fv = xc_energy(rho, w, bc, basis, grad_tol=inner_tol,
                             max_iters=inner_max_iters, strict=False)
    else:
        final_fv = xc_energy(rho, w, bc, basis, grad_tol=inner_tol,
                             max_iters=inner_max_iters, strict=False,
                             seed_int=seed_int, seed_ks=seed_ks)
    vxc_final, final_fv = xc_potential(rho, w, bc, basis, functional=final_fv)
    vh_final = hartree_potential(rho, w)
    v_eff = v + ExternalPotential(GridFunction(grid, vh_final.values
                                               + vxc_final.values))
    solve = noninteracting_solve(basis, v_eff, n_particles)
    if converged:
        drift = _l2(grid, solve.density.values - rho.values)
        if drift > 10.0 * scf_tol:
            warnings.warn(f"self-consistent density drifted by {drift:.2e} "
                          "after the final functional evaluation")

    evals = solve.eigenvalues
    fermi_gap = float(evals[n_particles] - evals[n_particles - 1])
    aufbau_ok: bool | None = True if fermi_gap > GAP_TOL else None

    energy = _total_energy(v, w, bc, basis, solve, v_eff, final_fv)
    if not converged:
        warnings.warn(f"Kohn-Sham SCF did not reach {scf_tol} in "
                      f"{max_iters} iterations (residual "
                      f"{residuals[-1]:.3e})")
    return KSResult(
        orbitals=solve.orbitals,
        orbital_eigenvalues=evals,
        density=solve.density,
        v_xc=vxc_final,
        v_h=vh_final,
        scf_residuals=residuals,
        converged=converged,
        aufbau_ok=aufbau_ok,
        ks_energy=energy,
        functional=final_fv,
        iterations=len(residuals),
        trace=trace,
    )


def _total_energy(v, w, bc, basis, solve: KohnShamSolve, v_eff,
                  fv: FunctionalValue | None) -> float:
    """Kinetic + Hartree + exchange-correlation + external energy."""
    n = len(solve.orbitals)
    rho = solve.density
    band = float(solve.eigenvalues[:n].sum())
    t_ks = band - pair_external(v_eff, rho)
    e_h = hartree_energy(rho, w)
    e_xc = 0.0 if fv is None else fv.e_xc
    return t_ks + e_h + e_xc + pair_external(v, rho)
