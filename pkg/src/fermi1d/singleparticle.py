"""Weak-form assembly and diagonalization of -d2/dx2 + v on the interval.

The operator is assembled from the quadratic form on P1 elements.  The
regular potential part enters through nodal (trapezoid) quadrature, every
Dirac delta contributes a rank-one term built from the P1 evaluation vector
at its (snapped) position, and the additive constant contributes a multiple
of the mass matrix.  Periodic and anti-periodic conditions identify the
endpoint degrees of freedom with sign +1 / -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import BoundaryCondition, ExternalPotential, Grid, GridFunction

__all__ = [
    "SingleParticleOperator",
    "EigenSolution",
    "assemble_h",
    "eigensolve_lowest",
    "degeneracy_profile",
    "SolverError",
]

CLUSTER_TOL = 1e-9  # absolute eigenvalue gap treated as a degenerate cluster


class SolverError(RuntimeError):
    """Eigенsolver breakdown with diagnostic payload."""


def _dof_layout(grid: Grid, bc: BoundaryCondition):
    """Map node index -> (dof index, sign) under the wrap identification."""
    n = grid.n_cells
    if bc.wrap_sign is None:
        return np.arange(n + 1), np.ones(n + 1), n + 1
    dof = np.concatenate([np.arange(n), [0]])
    sign = np.ones(n + 1)
    sign[n] = bc.wrap_sign
    return dof, sign, n


def free_matrices(grid: Grid, bc: BoundaryCondition):
    """Consistent P1 stiffness and mass matrices in dof space."""
    dof, sign, ndof = _dof_layout(grid, bc)
    h = grid.h
    s_loc = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    m_loc = np.array([[2.0, 1.0], [1.0, 2.0]]) * (h / 6.0)
    S = np.zeros((ndof, ndof))
    M = np.zeros((ndof, ndof))
    for k in range(grid.n_cells):
        idx = (k, k + 1)
        for a in range(2):
            for b in range(2):
                fac = sign[idx[a]] * sign[idx[b]]
                S[dof[idx[a]], dof[idx[b]]] += fac * s_loc[a, b]
                M[dof[idx[a]], dof[idx[b]]] += fac * m_loc[a, b]
    return S, M


def lumped_weights(grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    """Trapezoid (row-sum lumped) quadrature weights in dof space."""
    dof, _sign, ndof = _dof_layout(grid, bc)
    w = np.zeros(ndof)
    np.add.at(w, dof, grid.trapezoid_weights)
    return w


def dof_evaluation_vector(grid: Grid, bc: BoundaryCondition, x: float) -> np.ndarray:
    """P1 evaluation vector at the snapped point, folded into dof space."""
    b = grid.hat_values(grid.snap(x))
    dof, sign, ndof = _dof_layout(grid, bc)
    out = np.zeros(ndof)
    np.add.at(out, dof, sign * b)
    return out


@dataclass
class SingleParticleOperator:
    """Assembled quadratic-form matrices for one particle."""

    grid: Grid
    bc: BoundaryCondition
    stiffness: np.ndarray  # kinetic + potential part
    mass: np.ndarray

    @property
    def dim(self) -> int:
        return self.stiffness.shape[0]


def assemble_h(v: ExternalPotential, bc: BoundaryCondition,
               grid: Grid) -> SingleParticleOperator:
    """Assemble the operator for external potential ``v`` under ``bc``."""
    S, M = free_matrices(grid, bc)
    dof, _sign, _ndof = _dof_layout(grid, bc)
    reg = v.regular_values(grid)
    if np.any(reg):
        diag = np.zeros(S.shape[0])
        np.add.at(diag, dof, grid.trapezoid_weights * reg)
        S = S + np.diag(diag)
    for pos, alpha in v.deltas:
        b = dof_evaluation_vector(grid, bc, pos)
        S = S + alpha * np.outer(b, b)
    if v.constant:
        S = S + v.constant * M
    return SingleParticleOperator(grid, bc, S, M)


def _nodal_from_dof(grid: Grid, bc: BoundaryCondition, u: np.ndarray) -> np.ndarray:
    if bc.wrap_sign is None:
        return u.copy()
    return np.concatenate([u, [bc.wrap_sign * u[0]]])


def canonicalize_eigenvectors(evals: np.ndarray, vecs: np.ndarray,
                              metric: np.ndarray,
                              cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Fix the basis inside degenerate clusters deterministically.

    Within each cluster the span is kept but the basis is rebuilt by metric
    Gram-Schmidt on the projections of the coordinate vectors e_0, e_1, ...
    in index order; afterwards every vector gets sign-fixed so that its
    largest-magnitude component is positive.
    """
    vecs = vecs.copy()
    apply_metric = (lambda x: metric * x) if metric.ndim == 1 else (lambda x: metric @ x)
    i = 0
    while i < len(evals):
        j = i + 1
        while j < len(evals) and evals[j] - evals[j - 1] <= cluster_tol:
            j += 1
        if j - i > 1:
            V = vecs[:, i:j]
            picked = []
            col = 0
            while len(picked) < V.shape[1] and col < V.shape[0]:
                coeff = V.T @ apply_metric(np.eye(V.shape[0])[:, col])
                p = V @ coeff
                for q in picked:
                    p = p - q * (q @ apply_metric(p))
                norm = np.sqrt(p @ apply_metric(p))
                if norm > 1e-8:
                    picked.append(p / norm)
                col += 1
            if len(picked) == V.shape[1]:
                vecs[:, i:j] = np.column_stack(picked)
        i = j
    for k in range(vecs.shape[1]):
        mags = np.abs(vecs[:, k])
        # first near-maximal component, so roundoff ties break deterministically
        idx = int(np.argmax(mags >= (1.0 - 1e-9) * mags.max()))
        if vecs[idx, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vecs


def solve_lowest_pairs(S: np.ndarray, metric: np.ndarray, k: int):
    """Lowest k eigenpairs of the symmetric pencil (S, metric).

    ``metric`` may be a diagonal supplied as a 1-d array.  Eigenvectors come
    back metric-orthonormal with deterministic degenerate clusters.
    """
    dim = S.shape[0]
    if not 1 <= k <= dim:
        raise ValueError(f"requested {k} eigenpairs of a dimension-{dim} operator")
    # solve a few extra pairs so clusters straddling the cut are canonicalized
    k_solve = min(dim, k + 3)
    try:
        if metric.ndim == 1:
            scale = 1.0 / np.sqrt(metric)
            A = S * scale[:, None] * scale[None, :]
            A = 0.5 * (A + A.T)
            evals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, k_solve - 1])
            vecs = vecs * scale[:, None]
        else:
            evals, vecs = scipy.linalg.eigh(S, metric, subset_by_index=[0, k_solve - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare breakdown
        raise SolverError(f"generalized eigensolver failed: {exc}") from exc
    vecs = canonicalize_eigenvectors(evals, vecs, metric)
    return evals[:k], vecs[:, :k]


@dataclass
class EigenSolution:
    """Ascending eigenvalues with mass-orthonormal eigenfunctions."""

    eigenvalues: np.ndarray
    eigenfunctions: list[GridFunction]
    bc: BoundaryCondition

    def to_dict(self) -> dict:
        return {
            "bc": self.bc.value,
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenfunctions": [f.to_dict() for f in self.eigenfunctions],
        }


def eigensolve_lowest(op: SingleParticleOperator, k: int) -> EigenSolution:
    """Lowest ``k`` eigenpairs of the assembled operator."""
    evals, vecs = solve_lowest_pairs(op.stiffness, op.mass, k)
    funcs = [GridFunction(op.grid, _nodal_from_dof(op.grid, op.bc, vecs[:, j]))
             for j in range(k)]
    return EigenSolution(evals, funcs, op.bc)


def degeneracy_profile(solution, tol: float = 1e-6) -> list[int]:
    """Multiplicities of eigenvalue clusters under the gap tolerance."""
    evals = np.asarray(solution.eigenvalues
                       if isinstance(solution, EigenSolution) else solution)
    if len(evals) == 0:
        return []
    sizes = [1]
    for prev, cur in zip(evals[:-1], evals[1:]):
        if cur - prev <= tol * max(1.0, abs(prev)):
            sizes[-1] += 1
        else:
            sizes.append(1)
    return sizes
