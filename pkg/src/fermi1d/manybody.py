"""Antisymmetric N-particle problems in a truncated spectral basis.

The N-fermion Hamiltonian with one-body potential v and symmetric two-body
kernel w is assembled over all C(K, N) Slater determinants built from the K
lowest free modes of the chosen boundary condition.  Matrix elements follow
the Slater-Condon rules; two-body integrals are precomputed as a four-index
table over modes by two-dimensional nodal quadrature.

The free modes are orthonormalized against the trapezoid inner product (the
package-wide quadrature), which makes the reduced-density identities exact
at machine precision: densities integrate to N, pair densities marginalize
to (N-1) times the density, and a constant shift of the potential moves all
eigenvalues by exactly that constant times N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grid import (BoundaryCondition, Density, ExternalPotential, Grid,
                   GridFunction, Interaction)
from .singleparticle import (SolverError, canonicalize_eigenvectors,
                             free_matrices, lumped_weights, solve_lowest_pairs)

__all__ = [
    "SpectralBasis",
    "build_basis",
    "SlaterSpace",
    "two_body_integrals",
    "ManyBodyModel",
    "ManyBodyProblem",
    "assemble_many_body",
    "WaveFunction",
    "GroundState",
    "ground_state",
    "density",
    "pair_density",
    "apply_pair_kernel",
    "wrap_translate",
]

DENSITY_FLOOR = 1e-8   # min nodal value, times N, for a strictly positive density
GAP_TOL = 1e-8         # numerical non-degeneracy threshold


class SpectralBasis:
    """K lowest free modes under a boundary condition, quadrature-orthonormal."""

    def __init__(self, bc: BoundaryCondition, grid: Grid,
                 modes: np.ndarray, energies: np.ndarray):
        self.bc = bc
        self.grid = grid
        self.modes = modes            # (K, n_nodes) nodal values
        self.energies = energies      # (K,) free kinetic eigenvalues
        self.size = modes.shape[0]
        tw = grid.trapezoid_weights
        k, n = self.size, grid.n_nodes
        self.pair_products = modes[:, None, :] * modes[None, :, :]  # (K, K, n)
        self._products_flat = self.pair_products.reshape(k * k, n)
        self._products_weighted = self._products_flat * tw[None, :]

    def mode_functions(self) -> list[GridFunction]:
        return [GridFunction(self.grid, m) for m in self.modes]

    def eval_at(self, x: float) -> np.ndarray:
        """All mode values at a (snapped) point."""
        b = self.grid.hat_values(self.grid.snap(x))
        return self.modes @ b

    def potential_matrix(self, v: ExternalPotential) -> np.ndarray:
        """Mode-space matrix of the multiplicative pairing with v."""
        k = self.size
        t = np.zeros((k, k))
        if v.regular is not None:
            reg = v.regular_values(self.grid)
            if np.any(reg):
                t += (self._products_weighted @ reg).reshape(k, k)
        for pos, alpha in v.deltas:
            e = self.eval_at(pos)
            t += alpha * np.outer(e, e)
        if v.constant:
            t += v.constant * np.eye(k)
        return t


def build_basis(bc: BoundaryCondition, grid: Grid, k: int) -> SpectralBasis:
    """Diagonalize the free operator and keep the lowest ``k`` modes.

    The eigenproblem uses the trapezoid (lumped) weights as the metric so the
    returned modes are exactly orthonormal under the package quadrature.
    """
    if k < 1:
        raise ValueError("basis size must be >= 1")
    S, _ = free_matrices(grid, bc)
    w = lumped_weights(grid, bc)
    if k > len(w):
        raise ValueError(f"basis size {k} exceeds {len(w)} degrees of freedom")
    evals, vecs = solve_lowest_pairs(S, w, k)
    sign = bc.wrap_sign
    if sign is None:
        modes = vecs.T.copy()
    else:
        modes = np.concatenate([vecs, sign * vecs[:1, :]], axis=0).T
    return SpectralBasis(bc, grid, modes, evals)


class SlaterSpace:
    """All C(K, N) ordered determinants plus their excitation tables.

    Directed single and double excitation lists carry the fermionic phases,
    so Hamiltonians and reduced density matrices assemble by fancy indexing.
    """

    def __init__(self, n_modes: int, n_particles: int):
        if n_particles < 1:
            raise ValueError("need at least one particle")
        if n_particles > n_modes:
            raise ValueError(f"{n_particles} particles do not fit in "
                             f"{n_modes} modes")
        self.n_modes = n_modes
        self.n_particles = n_particles
        self.dets = list(itertools.combinations(range(n_modes), n_particles))
        self.index = {d: i for i, d in enumerate(self.dets)}
        self.dim = len(self.dets)
        occ = np.zeros((self.dim, n_modes))
        for i, det in enumerate(self.dets):
            occ[i, list(det)] = 1.0
        self.occupancy = occ
        self._build_excitations()

    def _build_excitations(self):
        rows, cols, ps, qs, signs = [], [], [], [], []
        d_rows, d_cols, d_orbs, d_signs = [], [], [], []
        for ia, det in enumerate(self.dets):
            occupied = set(det)
            virtual = [r for r in range(self.n_modes) if r not in occupied]
            for pa, p in enumerate(det):
                rest = det[:pa] + det[pa + 1:]
                for q in virtual:
                    # bra det keeps p, ket det has q instead
                    b = tuple(sorted(rest + (q,)))
                    ib = self.index[b]
                    sign = (-1) ** (pa + b.index(q))
                    rows.append(ia); cols.append(ib)
                    ps.append(p); qs.append(q); signs.append(sign)
            for (pa1, p1), (pa2, p2) in itertools.combinations(enumerate(det), 2):
                rest = tuple(o for o in det if o != p1 and o != p2)
                for q1, q2 in itertools.combinations(virtual, 2):
                    b = tuple(sorted(rest + (q1, q2)))
                    ib = self.index[b]
                    sign = (-1) ** (pa1 + pa2 + b.index(q1) + b.index(q2))
                    d_rows.append(ia); d_cols.append(ib)
                    d_orbs.append((p1, p2, q1, q2)); d_signs.append(sign)
        self.single_rows = np.array(rows, dtype=np.intp)
        self.single_cols = np.array(cols, dtype=np.intp)
        self.single_p = np.array(ps, dtype=np.intp)
        self.single_q = np.array(qs, dtype=np.intp)
        self.single_sign = np.array(signs, dtype=float)
        self.double_rows = np.array(d_rows, dtype=np.intp)
        self.double_cols = np.array(d_cols, dtype=np.intp)
        self.double_orbs = np.array(d_orbs, dtype=np.intp).reshape(-1, 4)
        self.double_sign = np.array(d_signs, dtype=float)

    def one_body_hamiltonian(self, t: np.ndarray) -> np.ndarray:
        """Determinant-space matrix of sum_i t(x_i) for a mode-space t."""
        h = np.zeros((self.dim, self.dim))
        np.fill_diagonal(h, self.occupancy @ np.diag(t))
        h[self.single_rows, self.single_cols] = \
            self.single_sign * t[self.single_p, self.single_q]
        return h


def two_body_integrals(w: Interaction, basis: SpectralBasis) -> np.ndarray:
    """Four-index table V[p, q, r, s] = <pq|w|rs> over basis modes.

    V[p, q, r, s] pairs the kernel with the product (phi_p phi_r)(x) times
    (phi_q phi_s)(y) under two-dimensional trapezoid quadrature.
    """
    grid = basis.grid
    k = basis.size
    if w.is_zero:
        return np.zeros((k, k, k, k))
    kern = w.kernel_matrix(grid)
    a = basis._products_weighted           # (K*K, n) with quadrature weights
    m = a @ kern @ a.T                     # [(p,r), (q,s)]
    return m.reshape(k, k, k, k).transpose(0, 2, 1, 3)


def _interaction_hamiltonian(space: SlaterSpace, v4: np.ndarray) -> np.ndarray:
    """Determinant-space matrix of sum_{i != j} w(x_i, x_j)."""
    dim, occ = space.dim, space.occupancy
    jmx = np.einsum("pqpq->pq", v4) - np.einsum("pqqp->pq", v4)
    hw = np.zeros((dim, dim))
    np.fill_diagonal(hw, np.einsum("ap,pq,aq->a", occ, jmx, occ))
    if len(space.single_rows):
        # common-orbital sums: occupancy of the bra det minus its unique orbital
        vs = np.einsum("pcqc->pqc", v4) - np.einsum("pccq->pqc", v4)
        common = occ[space.single_rows].copy()
        common[np.arange(len(space.single_rows)), space.single_p] -= 1.0
        vals = 2.0 * space.single_sign * np.einsum(
            "nc,nc->n", vs[space.single_p, space.single_q], common)
        hw[space.single_rows, space.single_cols] = vals
    if len(space.double_rows):
        p1, p2, q1, q2 = space.double_orbs.T
        vals = 2.0 * space.double_sign * (v4[p1, p2, q1, q2] - v4[p1, p2, q2, q1])
        hw[space.double_rows, space.double_cols] = vals
    return hw


class ManyBodyModel:
    """Assembly machinery for fixed (basis, particle count, interaction).

    Everything independent of the external potential is precomputed once, so
    iterative potential searches only pay for a small dense rebuild per step.
    """

    def __init__(self, basis: SpectralBasis, n_particles: int, w: Interaction):
        self.basis = basis
        self.n_particles = n_particles
        self.w = w
        self.space = SlaterSpace(basis.size, n_particles)
        self.kinetic = np.diag(basis.energies)
        if w.is_zero:
            self.v4 = None
            self.hw = np.zeros((self.space.dim, self.space.dim))
        else:
            self.v4 = two_body_integrals(w, basis)
            self.hw = _interaction_hamiltonian(self.space, self.v4)

    def one_body_matrix(self, v: ExternalPotential) -> np.ndarray:
        return self.kinetic + self.basis.potential_matrix(v)

    def hamiltonian(self, v: ExternalPotential) -> np.ndarray:
        return self.hw + self.space.one_body_hamiltonian(self.one_body_matrix(v))

    def problem(self, v: ExternalPotential) -> "ManyBodyProblem":
        return ManyBodyProblem(self.basis, self.n_particles, self.w,
                               self.space.dets, self.hamiltonian(v), self)


@dataclass
class ManyBodyProblem:
    """Assembled N-particle Hamiltonian over the determinant basis."""

    basis: SpectralBasis
    n_particles: int
    w: Interaction
    slater_index: list[tuple]
    hamiltonian: np.ndarray
    model: ManyBodyModel

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def assemble_many_body(v: ExternalPotential, w: Interaction,
                       basis: SpectralBasis, n_particles: int) -> ManyBodyProblem:
    """Build the N-particle Hamiltonian for (v, w) over the basis."""
    return ManyBodyModel(basis, n_particles, w).problem(v)


class WaveFunction:
    """Unit coefficient vector over the determinant basis."""

    def __init__(self, problem: ManyBodyProblem, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        norm = np.linalg.norm(coeffs)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coefficients have norm {norm}, expected 1")
        self.problem = problem
        self.coeffs = coeffs
        self._one_rdm = None

    @property
    def n_particles(self) -> int:
        return self.problem.n_particles

    def one_rdm(self) -> np.ndarray:
        """Mode-space one-particle reduced density matrix."""
        if self._one_rdm is None:
            space = self.problem.model.space
            c = self.coeffs
            g = np.zeros((space.n_modes, space.n_modes))
            np.fill_diagonal(g, space.occupancy.T @ c ** 2)
            contrib = space.single_sign * c[space.single_rows] * c[space.single_cols]
            np.add.at(g, (space.single_p, space.single_q), contrib)
            self._one_rdm = g
        return self._one_rdm

    def two_rdm(self) -> np.ndarray:
        """Mode-space two-particle reduced density matrix (trace N(N-1))."""
        space = self.problem.model.space
        if self.n_particles < 2:
            raise ValueError("pair quantities are undefined for one particle")
        k = space.n_modes
        c = self.coeffs
        g2 = np.zeros((k, k, k, k))
        w_occ = np.einsum("a,ap,aq->pq", c ** 2, space.occupancy, space.occupancy)
        np.fill_diagonal(w_occ, 0.0)
        p_idx, q_idx = np.nonzero(w_occ)
        g2[p_idx, q_idx, p_idx, q_idx] += w_occ[p_idx, q_idx]
        g2[p_idx, q_idx, q_idx, p_idx] -= w_occ[p_idx, q_idx]
        for ia, ib, p, q, sgn in zip(space.single_rows, space.single_cols,
                                     space.single_p, space.single_q,
                                     space.single_sign):
            amp = sgn * c[ia] * c[ib]
            if amp == 0.0:
                continue
            cs = np.array([o for o in space.dets[ia] if o != p], dtype=np.intp)
            g2[p, cs, q, cs] += amp
            g2[cs, p, cs, q] += amp
            g2[p, cs, cs, q] -= amp
            g2[cs, p, q, cs] -= amp
        for ia, ib, (p1, p2, q1, q2), sgn in zip(space.double_rows,
                                                 space.double_cols,
                                                 space.double_orbs,
                                                 space.double_sign):
            amp = sgn * c[ia] * c[ib]
            if amp == 0.0:
                continue
            g2[p1, p2, q1, q2] += amp
            g2[p2, p1, q2, q1] += amp
            g2[p1, p2, q2, q1] -= amp
            g2[p2, p1, q1, q2] -= amp
        return g2

    def to_dict(self) -> dict:
        return {"coefficients": self.coeffs.tolist(),
                "determinants": [list(d) for d in self.problem.slater_index]}


@dataclass
class GroundState:
    """Lowest eigenpair of a many-body problem."""

    energy: float
    psi: WaveFunction
    gap: float

    def to_dict(self) -> dict:
        d = {"energy": self.energy, "gap": self.gap}
        d.update(self.psi.to_dict())
        d["density"] = density(self.psi).values.tolist()
        return d


def _lowest_cluster(h: np.ndarray, cluster_tol: float = 1e-9):
    dim = h.shape[0]
    k = min(dim, 8)
    try:
        evals, vecs = scipy.linalg.eigh(h, subset_by_index=[0, k - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise SolverError(f"dense eigensolver failed: {exc}") from exc
    vecs = canonicalize_eigenvectors(evals, vecs, np.ones(dim))
    m = 1
    while m < len(evals) and evals[m] - evals[0] <= cluster_tol:
        m += 1
    return evals, vecs, m


def ground_state(problem: ManyBodyProblem) -> GroundState:
    """Ground state of the assembled Hamiltonian, deterministic phase."""
    evals, vecs, _m = _lowest_cluster(problem.hamiltonian)
    gap = float(evals[1] - evals[0]) if len(evals) > 1 else np.inf
    psi = WaveFunction(problem, vecs[:, 0])
    return GroundState(float(evals[0]), psi, gap)


def density(psi: WaveFunction) -> Density:
    """Single-particle density of a wave function."""
    basis = psi.problem.basis
    values = psi.one_rdm().ravel() @ basis._products_flat
    return Density(basis.grid, values, psi.n_particles)


def pair_density(psi: WaveFunction) -> np.ndarray:
    """Pair density on the tensor grid; integrates to N(N-1)."""
    basis = psi.problem.basis
    k = basis.size
    g2 = psi.two_rdm().transpose(0, 2, 1, 3).reshape(k * k, k * k)
    p = basis._products_flat
    return p.T @ g2 @ p


def apply_pair_kernel(f: GridFunction, psi: WaveFunction) -> GridFunction:
    """Integrate f against the pair density over the density: the map
    f -> integral of rho2(x, y) f(y) / rho(y) dy."""
    rho = density(psi)
    n = psi.n_particles
    if rho.values.min() <= DENSITY_FLOOR * n:
        raise ValueError("density vanishes; pair kernel operator undefined")
    rho2 = pair_density(psi)
    tw = f.grid.trapezoid_weights
    vals = rho2 @ (tw * f.values / rho.values)
    return GridFunction(f.grid, vals)


def _shift_cells(grid: Grid, x_star: float):
    s = grid.snap(x_star)
    j = round(s / grid.h)
    exact = abs(s - j * grid.h) == 0.0
    return s, (j if exact else None)


def _translate_values_back(grid: Grid, values: np.ndarray, x_star: float,
                           sign: int) -> np.ndarray:
    """Values of x -> sign^m * f([x + x_star]) at the nodes."""
    n = grid.n_cells
    s, j = _shift_cells(grid, x_star)
    out = np.empty_like(values)
    if j is not None:
        for i in range(n + 1):
            t = i + j
            if t < n:
                out[i] = values[t]
            else:
                out[i] = sign * values[t - n]
        return out
    y = grid.nodes + s
    wrapped = y >= 1.0
    y = np.where(wrapped, y - 1.0, y)
    f = GridFunction(grid, values)
    out = f(y)
    out[wrapped] *= sign
    return out


def _translate_values_forward(grid: Grid, values: np.ndarray,
                              x_star: float) -> np.ndarray:
    """Values of y -> f([y - x_star]) at the nodes (plain graph shift)."""
    n = grid.n_cells
    s, j = _shift_cells(grid, x_star)
    out = np.empty_like(values)
    if j is not None:
        base = values[:n]
        rolled = np.roll(base, j)
        out[:n] = rolled
        out[n] = rolled[0]
        return out
    y = grid.nodes - s
    y = np.where(y < 0.0, y + 1.0, y)
    f = GridFunction(grid, values)
    return f(y)


def wrap_translate(target, x_star: float, sign: int):
    """Rearrangement translating around the wrapped interval.

    For wave-like grid functions this is the isometry
    ``f(x) -> sign^m f([x + x_star])`` where m flips exactly on the wrapped
    part (sign -1 belongs with anti-periodic functions, +1 with periodic).
    Potentials and kernels transform by the induced adjoint map, a plain
    translation of the graph by ``x_star``, which leaves the spectrum of the
    many-body operator unchanged.
    """
    if not 0.0 < x_star < 1.0:
        raise ValueError(f"translation offset {x_star} outside (0, 1)")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if isinstance(target, GridFunction):
        vals = _translate_values_back(target.grid, target.values, x_star, sign)
        return GridFunction(target.grid, vals)
    if isinstance(target, ExternalPotential):
        reg = target.regular
        if reg is not None:
            reg = GridFunction(reg.grid, _translate_values_forward(
                reg.grid, reg.values, x_star))
        deltas = [((pos + x_star) % 1.0, alpha) for pos, alpha in target.deltas]
        return ExternalPotential(reg, deltas, target.constant)
    if isinstance(target, Interaction):
        if target.is_zero or target.kind.value == "convolution":
            return target
        samples = target.samples
        n = samples.shape[0] - 1
        grid = Grid(n)
        _s, j = _shift_cells(grid, x_star)
        if j is None:
            raise ValueError("general kernels translate only by node offsets")
        base = samples[:n, :n]
        rolled = np.roll(np.roll(base, j, axis=0), j, axis=1)
        out = np.empty_like(samples)
        out[:n, :n] = rolled
        out[n, :n] = rolled[0, :]
        out[:n, n] = rolled[:, 0]
        out[n, n] = rolled[0, 0]
        return Interaction.general(out)
    raise TypeError(f"cannot rearrange object of type {type(target)!r}")
