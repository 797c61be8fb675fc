"""Density-to-potential inversion by concave dual maximization.

For a target density the dual objective

    v  ->  lambda_1(v, w) - <v, rho_target>

is concave in the potential: the ground-state energy is an infimum of
functions affine in v.  Its supergradient at v is the ground-state density
of v minus the target, so supergradient ascent with a backtracking line
search and a limited-memory curvature correction drives the ground-state
density onto the target.  At a maximizer, the recovered potential is the
(zero-mean gauge-fixed) potential representing the target, and the dual
value equals the constrained-search energy of the target.

The search runs in the subspace of nodal potentials actually resolved by
the spectral basis, namely the span of mode pair products with the mean
removed; components outside the span cannot change the objective and are
projected away so independent seeds land on the same representative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import (BoundaryCondition, Density, ExternalPotential, Grid,
                   GridFunction, Interaction, integrate)
from .manybody import GAP_TOL, ManyBodyModel, SpectralBasis, _lowest_cluster
from .representability import classify_density

__all__ = [
    "InversionProblem",
    "InversionResult",
    "dual_objective",
    "invert",
    "hk_uniqueness_check",
    "ConvergenceError",
    "TargetClassError",
    "parity_matches",
]


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""


class TargetClassError(ValueError):
    """The target density is outside the representable class."""


def parity_matches(bc: BoundaryCondition, n_particles: int) -> bool:
    """Particle-count parity under which the wrapped-case guarantees hold."""
    if bc is BoundaryCondition.PERIODIC:
        return n_particles % 2 == 1
    if bc is BoundaryCondition.ANTIPERIODIC:
        return n_particles % 2 == 0
    return True


def validate_target(rho: Density, bc: BoundaryCondition,
                    enforce_parity: bool = True) -> None:
    """Reject targets outside the ground-state density class for ``bc``."""
    report = classify_density(rho, bc)
    if bc.wrap_sign is None:
        if not report.in_DN:
            raise TargetClassError(
                f"target is not strictly positive with mass N "
                f"(min {report.min_value:.3e}, integral {report.integral!r})")
        return
    if not report.in_DN_plus:
        raise TargetClassError(
            f"target fails the wrapped-boundary density class "
            f"(min {report.min_value:.3e}, endpoints match: "
            f"{report.endpoint_match})")
    if not parity_matches(bc, rho.n_particles):
        msg = (f"{rho.n_particles} particles with {bc.value} boundary "
               "conditions are outside the parity regime where uniqueness "
               "and representability are guaranteed")
        if enforce_parity:
            raise TargetClassError(msg)
        warnings.warn(msg, stacklevel=3)


@dataclass
class InversionProblem:
    """Target density plus the model and solver controls for inversion."""

    target: Density
    w: Interaction
    bc: BoundaryCondition
    basis: SpectralBasis
    grad_tol: float = 1e-7          # L2 density residual declaring success
    max_iters: int = 600
    memory: int = 25                # curvature pairs kept by the ascent
    armijo: float = 1e-4
    backtrack_max: int = 40
    stall_window: int = 40
    stall_rtol: float = 1e-3
    gauge: str = "zero_mean"
    enforce_parity: bool = True
    stationary_tol: float | None = None   # projected-gradient exit; auto if None
    # tiny concave damping -mu/2 |v|^2 on the dual: near-flat response
    # directions leave the representing potential ill-determined, and the
    # damping selects the smallest representative without moving the
    # density residual beyond grad_tol
    prox_weight: float = 1e-9
    # "resolved": every potential direction the basis can pair with (largest
    # representable set, best residual floor); "identifiable": only products
    # involving an occupied free mode, i.e. directions with first-order
    # density response, which pins the recovered potential itself
    search_space: str = "resolved"

    _model: ManyBodyModel | None = field(default=None, repr=False)
    _projector: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.gauge != "zero_mean":
            raise ValueError("only the zero-mean gauge is implemented")
        if self.target.grid != self.basis.grid:
            raise ValueError("target and basis live on different grids")

    @property
    def grid(self) -> Grid:
        return self.basis.grid

    @property
    def n_particles(self) -> int:
        return self.target.n_particles

    def model(self) -> ManyBodyModel:
        if self._model is None:
            self._model = ManyBodyModel(self.basis, self.n_particles, self.w)
        return self._model

    def projector(self) -> np.ndarray:
        """Orthonormal basis (quadrature metric) of the search subspace."""
        if self._projector is None:
            tw = self.grid.trapezoid_weights
            sqw = np.sqrt(tw)
            if self.search_space == "identifiable":
                n_occ = min(self.n_particles, self.basis.size)
                rows = np.concatenate(
                    [self.basis.pair_products[j] for j in range(n_occ)], axis=0)
            elif self.search_space == "resolved":
                rows = self.basis._products_flat
            else:
                raise ValueError(f"unknown search space {self.search_space!r}")
            rows = rows * sqw[None, :]
            const = sqw / np.linalg.norm(sqw)
            rows = rows - np.outer(rows @ const, const)
            _u, sig, vt = np.linalg.svd(rows, full_matrices=False)
            rank = int((sig > 1e-10 * sig[0]).sum()) if len(sig) else 0
            self._projector = vt[:rank].T
        return self._projector

    def project(self, values: np.ndarray) -> np.ndarray:
        """Project nodal values onto the zero-mean resolved subspace."""
        q = self.projector()
        sqw = np.sqrt(self.grid.trapezoid_weights)
        u = values * sqw
        return (q @ (q.T @ u)) / sqw

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(self.grid.trapezoid_weights @ (a * b))

    def l2_norm(self, a: np.ndarray) -> float:
        return float(np.sqrt(self.inner(a, a)))


def _ascent_state(prob: InversionProblem, v_values: np.ndarray):
    """Dual value, full residual vector and projected supergradient at v."""
    model = prob.model()
    basis = prob.basis
    t = model.kinetic + (basis._products_weighted @ v_values).reshape(
        basis.size, basis.size)
    h = model.hw + model.space.one_body_hamiltonian(t)
    evals, vecs, m = _lowest_cluster(h, GAP_TOL)
    if m == 1:
        g1 = _one_rdm(model.space, vecs[:, 0])
    else:
        # supergradient surrogate inside a degenerate cluster: the average
        # of the eigenspace densities is a valid element of the superset
        g1 = np.zeros((basis.size, basis.size))
        for j in range(m):
            g1 += _one_rdm(model.space, vecs[:, j])
        g1 /= m
    rho_v = g1.ravel() @ basis._products_flat
    value = float(evals[0]) - prob.inner(v_values, prob.target.values)
    residual = rho_v - prob.target.values
    return value, residual, float(evals[0])


def _one_rdm(space, c):
    g = np.zeros((space.n_modes, space.n_modes))
    np.fill_diagonal(g, space.occupancy.T @ c ** 2)
    contrib = space.single_sign * c[space.single_rows] * c[space.single_cols]
    np.add.at(g, (space.single_p, space.single_q), contrib)
    return g


def dual_objective(v_values: np.ndarray, prob: InversionProblem):
    """Dual value and zero-mean supergradient at a nodal potential."""
    value, residual, _lam = _ascent_state(prob, np.asarray(v_values, dtype=float))
    grad = prob.project(residual)
    return value, GridFunction(prob.grid, grad)


@dataclass
class InversionResult:
    """Recovered potential with its residual history."""

    v: ExternalPotential
    lambda1: float
    residual_history: list[float]
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "potential": self.v.to_dict(),
            "lambda1": self.lambda1,
            "residual_history": list(self.residual_history),
            "iterations": self.iterations,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


def _seed_values(prob: InversionProblem, v0) -> np.ndarray:
    if v0 is None:
        return np.zeros(prob.grid.n_nodes)
    if isinstance(v0, ExternalPotential):
        if v0.deltas or v0.constant:
            raise ValueError("inversion seeds carry a regular part only")
        return v0.regular_values(prob.grid).astype(float)
    if isinstance(v0, GridFunction):
        return v0.values.astype(float)
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (prob.grid.n_nodes,):
        raise ValueError("seed has wrong number of nodal values")
    return v0


def invert(prob: InversionProblem, v0=None) -> InversionResult:
    """Maximize the dual objective until the density residual is small.

    Ascends along projected supergradients with an Armijo backtracking line
    search; limited-memory curvature pairs accelerate the tail.  Objective
    values never decrease along accepted iterates.  Runs are deterministic
    given the seed.
    """
    validate_target(prob.target, prob.bc, prob.enforce_parity)
    pg_tol = prob.stationary_tol
    if pg_tol is None:
        pg_tol = max(0.02 * prob.grad_tol, 1e-11)

    mu = prob.prox_weight

    def evaluate(vv):
        raw_value, residual, lam = _ascent_state(prob, vv)
        value = raw_value - 0.5 * mu * prob.inner(vv, vv)
        grad = prob.project(residual) - mu * vv
        return value, grad, residual, lam

    v = prob.project(_seed_values(prob, v0))
    value, grad, residual, lam = evaluate(v)
    res_norm = prob.l2_norm(residual)
    history = [res_norm]
    mem: list[tuple[np.ndarray, np.ndarray, float]] = []
    stop_reason = "max_iters"
    it = 0
    # the residual is not monotone along the ascent (ill-conditioned valleys
    # are crossed on the way), and for targets slightly outside the
    # representable set it bottoms out above the tolerance; keep the iterate
    # of least residual and judge progress by it
    best = (res_norm, v.copy(), value, lam)
    best_track = [res_norm]

    for it in range(1, prob.max_iters + 1):
        if res_norm <= prob.grad_tol:
            stop_reason = "residual"
            break
        pg_norm = prob.l2_norm(grad)
        if pg_norm <= pg_tol:
            stop_reason = "stationary"
            break
        if (len(best_track) > prob.stall_window
                and best_track[-1] > (1.0 - prob.stall_rtol)
                * best_track[-1 - prob.stall_window]):
            stop_reason = "stalled"
            break

        d = _two_loop_direction(grad, mem, prob)
        slope = prob.inner(grad, d)
        if slope <= 0.0:
            mem.clear()
            d = grad.copy()
            slope = prob.inner(grad, d)

        alpha = 1.0
        accepted = False
        trial = None
        for _bt in range(prob.backtrack_max):
            trial = evaluate(v + alpha * d)
            if trial[0] >= value + prob.armijo * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            stop_reason = "line_search"
            break
        if not mem and alpha == 1.0:
            # no curvature information yet: greedily expand the first step
            for _ in range(10):
                wider = evaluate(v + 2.0 * alpha * d)
                if wider[0] <= trial[0]:
                    break
                alpha *= 2.0
                trial = wider

        v_new = prob.project(v + alpha * d)
        new_value, new_grad, new_residual, new_lam = trial
        s = v_new - v
        y = grad - new_grad            # curvature pair for the concave dual
        sy = prob.inner(s, y)
        if sy > 1e-14 * max(prob.inner(y, y), 1e-300):
            mem.append((s, y, sy))
            if len(mem) > prob.memory:
                mem.pop(0)
        v, value, residual, grad, lam = v_new, new_value, new_residual, new_grad, new_lam
        res_norm = prob.l2_norm(residual)
        history.append(res_norm)
        if res_norm < best[0]:
            best = (res_norm, v.copy(), value, lam)
        best_track.append(best[0])

    if res_norm > best[0]:
        res_norm, v, value, lam = best
    converged = res_norm <= prob.grad_tol
    pot = ExternalPotential(GridFunction(prob.grid, v))
    return InversionResult(
        v=pot,
        lambda1=lam,
        residual_history=history,
        iterations=it,
        converged=converged,
        diagnostics={
            "stop_reason": stop_reason,
            "dual_value": value,
            "best_residual": res_norm,
            "projected_gradient": prob.l2_norm(grad),
        },
    )


def _two_loop_direction(grad: np.ndarray, mem, prob: InversionProblem) -> np.ndarray:
    """L-BFGS two-loop recursion in the quadrature inner product."""
    q = grad.copy()
    if not mem:
        return q
    alphas = []
    for s, y, sy in reversed(mem):
        a = prob.inner(s, q) / sy
        alphas.append(a)
        q -= a * y
    s, y, sy = mem[-1]
    q *= sy / prob.inner(y, y)
    for (s, y, sy), a in zip(mem, reversed(alphas)):
        b = prob.inner(y, q) / sy
        q += (a - b) * s
    return q


def hk_uniqueness_check(prob: InversionProblem, seeds) -> float:
    """Largest pairwise sup deviation of potentials recovered from seeds.

    All runs must converge; a small deviation is numerical evidence that the
    target determines its potential up to an additive constant.
    """
    if len(seeds) < 2:
        raise ValueError("uniqueness check needs at least two seeds")
    recovered = []
    failures = []
    for i, seed in enumerate(seeds):
        res = invert(prob, v0=seed)
        if not res.converged:
            failures.append((i, res.diagnostics["best_residual"]))
        recovered.append(res.v.regular_values(prob.grid))
    if failures:
        raise ConvergenceError(
            "inversion did not converge for seeds "
            + ", ".join(f"{i} (residual {r:.3e})" for i, r in failures))
    worst = 0.0
    for i in range(len(recovered)):
        for j in range(i + 1, len(recovered)):
            worst = max(worst, float(np.abs(recovered[i] - recovered[j]).max()))
    return worst
