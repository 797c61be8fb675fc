"""Uniform piecewise-linear (P1) discretization of the unit interval.

Everything else in the package lives on this grid: densities, orbitals and
the regular part of external potentials are nodal-valued grid functions,
interpreted as their continuous piecewise-linear interpolants.  External
potentials carry an additional finite list of Dirac deltas and an additive
constant; two-body interactions are symmetric kernels on the unit square.

Quadrature conventions
----------------------
* ``integrate`` is the composite trapezoid rule on the nodes.  It is exact
  for P1 interpolants, and it is the single definition of "the integral"
  used by every pairing in the package.
* ``h1_norm_sq`` integrates the interpolant and its piecewise-constant
  derivative exactly (per-element closed forms), so polynomial identities
  such as ``h1_norm_sq(x) == 4/3`` hold to machine precision.
* Dirac deltas are evaluated by P1 interpolation; positions within
  ``h/100`` of a node snap onto it so that midpoint deltas on even grids
  assemble reproducibly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundaryCondition",
    "Grid",
    "GridFunction",
    "Density",
    "ExternalPotential",
    "Interaction",
    "InteractionKind",
    "integrate",
    "h1_norm_sq",
    "cumulative_distribution",
    "pair_external",
    "pair_interaction",
]

SNAP_FRACTION = 0.01  # delta positions snap to a node within h/100


class BoundaryCondition(enum.Enum):
    """Self-adjoint realization selected for the kinetic form."""

    NEUMANN = "neumann"
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"

    @property
    def wrap_sign(self):
        """Endpoint identification sign: +1, -1, or None for Neumann."""
        if self is BoundaryCondition.PERIODIC:
            return 1
        if self is BoundaryCondition.ANTIPERIODIC:
            return -1
        return None

    @classmethod
    def parse(cls, name: str) -> "BoundaryCondition":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for bc in cls:
            if bc.value == key:
                return bc
        raise ValueError(f"unknown boundary condition {name!r}; "
                         f"expected one of {[b.value for b in cls]}")


class Grid:
    """Uniform mesh of ``n_cells`` elements on [0, 1]."""

    def __init__(self, n_cells: int):
        if n_cells < 2:
            raise ValueError("grid needs at least 2 cells")
        self.n_cells = int(n_cells)
        self.h = 1.0 / self.n_cells
        self.nodes = np.linspace(0.0, 1.0, self.n_cells + 1)
        # trapezoid weights; exact for P1 interpolants
        w = np.full(self.n_cells + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        self.trapezoid_weights = w

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    def snap(self, x: float) -> float:
        """Snap ``x`` to the nearest node if it lies within h/100 of it."""
        i = round(x / self.h)
        if 0 <= i <= self.n_cells and abs(x - i * self.h) < SNAP_FRACTION * self.h:
            return i * self.h
        return float(x)

    def hat_values(self, x: float) -> np.ndarray:
        """Nodal P1 evaluation vector b with f(x) = b @ values."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"evaluation point {x} outside [0, 1]")
        b = np.zeros(self.n_nodes)
        k = min(int(x / self.h), self.n_cells - 1)
        t = x / self.h - k
        b[k] = 1.0 - t
        b[k + 1] = t
        return b

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n_cells == self.n_cells

    def __hash__(self):
        return hash(("Grid", self.n_cells))

    def __repr__(self):
        return f"Grid(n_cells={self.n_cells})"


class GridFunction:
    """Nodal values on a :class:`Grid`, read as the P1 interpolant."""

    def __init__(self, grid: Grid, values):
        values = np.asarray(values)
        if values.shape != (grid.n_nodes,):
            raise ValueError(f"expected {grid.n_nodes} nodal values, "
                             f"got shape {values.shape}")
        if not np.iscomplexobj(values):
            values = values.astype(float)
        self.grid = grid
        self.values = values

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes)) * np.ones(grid.n_nodes))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_nodes))

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.iscomplexobj(self.values):
            re = np.interp(xs, self.grid.nodes, self.values.real)
            im = np.interp(xs, self.grid.nodes, self.values.imag)
            return re + 1j * im
        return np.interp(xs, self.grid.nodes, self.values)

    def respects(self, bc: BoundaryCondition, tol: float = 1e-10) -> bool:
        s = bc.wrap_sign
        if s is None:
            return True
        return abs(self.values[-1] - s * self.values[0]) <= tol

    def to_dict(self) -> dict:
        d = {"n_cells": self.grid.n_cells}
        if np.iscomplexobj(self.values):
            d["values_re"] = self.values.real.tolist()
            d["values_im"] = self.values.imag.tolist()
        else:
            d["values"] = self.values.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GridFunction":
        grid = Grid(d["n_cells"])
        if "values" in d:
            return cls(grid, np.asarray(d["values"], dtype=float))
        vals = np.asarray(d["values_re"], dtype=float) \
            + 1j * np.asarray(d["values_im"], dtype=float)
        return cls(grid, vals)

    def __repr__(self):
        return f"GridFunction(n_cells={self.grid.n_cells})"


def integrate(f: GridFunction) -> float:
    """Trapezoid integral of the interpolant (exact for P1)."""
    return f.grid.trapezoid_weights @ f.values


def _l2_sq(grid: Grid, values: np.ndarray) -> float:
    # exact integral of |interpolant|^2: per cell h/3 (|a|^2 + Re(conj(a) b) + |b|^2)
    a, b = values[:-1], values[1:]
    cell = np.abs(a) ** 2 + np.real(np.conj(a) * b) + np.abs(b) ** 2
    return float(grid.h / 3.0 * cell.sum())


def h1_norm_sq(f: GridFunction) -> float:
    """Squared Sobolev norm of the interpolant: L2 part plus derivative part."""
    d = np.diff(f.values)
    deriv = float((np.abs(d) ** 2).sum() / f.grid.h)
    return _l2_sq(f.grid, f.values) + deriv


class Density(GridFunction):
    """Nonnegative grid function integrating to the particle count."""

    def __init__(self, grid: Grid, values, n_particles: int):
        values = np.asarray(values, dtype=float)
        if n_particles < 1:
            raise ValueError("particle count must be >= 1")
        floor = -1e-12 * max(n_particles, 1)
        if values.min() < floor:
            raise ValueError(f"density has negative nodal value {values.min()}")
        values = np.maximum(values, 0.0)
        super().__init__(grid, values)
        self.n_particles = int(n_particles)
        total = integrate(self)
        if abs(total - n_particles) > 1e-10 * n_particles:
            raise ValueError(
                f"density integrates to {total}, expected {n_particles}; "
                "use Density.from_samples to normalize")

    @classmethod
    def from_samples(cls, grid: Grid, values, n_particles: int,
                     normalize: bool = True) -> "Density":
        """Build a density, rescaling the samples to integrate to N."""
        values = np.maximum(np.asarray(values, dtype=float), 0.0)
        if normalize:
            total = grid.trapezoid_weights @ values
            if total <= 0:
                raise ValueError("cannot normalize a density with zero mass")
            values = values * (n_particles / total)
        return cls(grid, values, n_particles)

    @classmethod
    def from_callable(cls, grid: Grid, fn, n_particles: int) -> "Density":
        return cls.from_samples(grid, fn(grid.nodes) * np.ones(grid.n_nodes),
                                n_particles)


def cumulative_distribution(rho: Density) -> GridFunction:
    """Normalized cumulative mass x -> (1/N) * integral of rho over [0, x].

    Monotone nondecreasing with F(0) = 0 and F(1) = 1; the curve used to
    build density-realizing Slater determinants by change of variables.
    """
    v = rho.values
    if v.min() < 0:
        raise ValueError("density has negative nodal values")
    h = rho.grid.h
    cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (v[:-1] + v[1:]))))
    return GridFunction(rho.grid, cum / rho.n_particles)


class ExternalPotential:
    """Regular multiplicative part + finite list of Dirac deltas + constant.

    The pairing with a grid function f is
    ``integrate(regular * f) + sum_j alpha_j f(x_j) + constant * integrate(f)``.
    """

    def __init__(self, regular: GridFunction | None = None,
                 deltas=(), constant: float = 0.0):
        for pos, _weight in deltas:
            if not 0.0 <= pos <= 1.0:
                raise ValueError(f"delta position {pos} outside [0, 1]")
        self.regular = regular
        self.deltas = tuple((float(p), float(a)) for p, a in deltas)
        self.constant = float(constant)

    @classmethod
    def zero(cls) -> "ExternalPotential":
        return cls()

    @classmethod
    def from_callable(cls, grid: Grid, fn, deltas=(), constant: float = 0.0):
        return cls(GridFunction.from_callable(grid, fn), deltas, constant)

    def regular_values(self, grid: Grid) -> np.ndarray:
        if self.regular is None:
            return np.zeros(grid.n_nodes)
        if self.regular.grid != grid:
            raise ValueError("potential sampled on a different grid")
        return self.regular.values

    def __add__(self, other: "ExternalPotential") -> "ExternalPotential":
        if not isinstance(other, ExternalPotential):
            return NotImplemented
        if self.regular is None:
            reg = other.regular
        elif other.regular is None:
            reg = self.regular
        else:
            if self.regular.grid != other.regular.grid:
                raise ValueError("cannot add potentials on different grids")
            reg = GridFunction(self.regular.grid,
                               self.regular.values + other.regular.values)
        return ExternalPotential(reg, self.deltas + other.deltas,
                                 self.constant + other.constant)

    def to_dict(self) -> dict:
        return {
            "regular": None if self.regular is None else self.regular.to_dict(),
            "deltas": [list(d) for d in self.deltas],
            "constant": self.constant,
        }

    def __repr__(self):
        return (f"ExternalPotential(regular={self.regular!r}, "
                f"deltas={self.deltas}, constant={self.constant})")


def pair_external(v: ExternalPotential, f: GridFunction):
    """Duality pairing of an external potential with a grid function."""
    grid = f.grid
    out = f.values @ (grid.trapezoid_weights * v.regular_values(grid)) \
        if v.regular is not None else 0.0
    for pos, alpha in v.deltas:
        out = out + alpha * f(grid.snap(pos))
    if v.constant:
        out = out + v.constant * integrate(f)
    if not np.iscomplexobj(f.values):
        out = float(out)
    return out


class InteractionKind(enum.Enum):
    ZERO = "zero"
    CONVOLUTION = "convolution"
    GENERAL = "general"


class Interaction:
    """Symmetric two-body kernel w(x, y) paired against pair densities.

    Three representations are supported: the zero interaction, a convolution
    kernel w(x - y) sampled uniformly on [-1, 1], and a general symmetric
    kernel sampled on the nodal tensor grid.
    """

    def __init__(self, kind: InteractionKind, samples=None):
        self.kind = kind
        self.samples = None if samples is None else np.asarray(samples, dtype=float)
        if kind is InteractionKind.GENERAL:
            s = self.samples
            if s is None or s.ndim != 2 or s.shape[0] != s.shape[1]:
                raise ValueError("general kernel needs square nodal samples")
            scale = max(np.abs(s).max(), 1.0)
            if np.abs(s - s.T).max() > 1e-12 * scale:
                raise ValueError("general kernel samples are not symmetric")
        elif kind is InteractionKind.CONVOLUTION:
            s = self.samples
            if s is None or s.ndim != 1 or len(s) < 3 or len(s) % 2 == 0:
                raise ValueError("convolution kernel needs an odd number of "
                                 "uniform samples covering [-1, 1]")
            scale = max(np.abs(s).max(), 1.0)
            if np.abs(s - s[::-1]).max() > 1e-12 * scale:
                raise ValueError("convolution profile must be even for the "
                                 "kernel to be symmetric")

    @classmethod
    def zero(cls) -> "Interaction":
        return cls(InteractionKind.ZERO)

    @classmethod
    def general(cls, samples) -> "Interaction":
        return cls(InteractionKind.GENERAL, samples)

    @classmethod
    def general_from_callable(cls, grid: Grid, fn) -> "Interaction":
        x = grid.nodes
        return cls(InteractionKind.GENERAL, fn(x[:, None], x[None, :]))

    @classmethod
    def convolution(cls, samples) -> "Interaction":
        return cls(InteractionKind.CONVOLUTION, samples)

    @classmethod
    def convolution_from_callable(cls, grid: Grid, fn) -> "Interaction":
        s = np.linspace(-1.0, 1.0, 2 * grid.n_cells + 1)
        return cls(InteractionKind.CONVOLUTION, fn(s))

    @property
    def is_zero(self) -> bool:
        return self.kind is InteractionKind.ZERO

    def kernel_matrix(self, grid: Grid) -> np.ndarray:
        """Nodal samples w(x_i, y_j) on the tensor grid."""
        n = grid.n_nodes
        if self.kind is InteractionKind.ZERO:
            return np.zeros((n, n))
        if self.kind is InteractionKind.GENERAL:
            if self.samples.shape != (n, n):
                raise ValueError(f"kernel sampled for {self.samples.shape[0] - 1} "
                                 f"cells, grid has {grid.n_cells}")
            return self.samples
        lattice = np.linspace(-1.0, 1.0, len(self.samples))
        diff = grid.nodes[:, None] - grid.nodes[None, :]
        return np.interp(diff, lattice, self.samples)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.samples is not None:
            d["samples"] = self.samples.tolist()
        return d

    def __repr__(self):
        return f"Interaction(kind={self.kind.value})"


def pair_interaction(w: Interaction, g: np.ndarray, grid: Grid) -> float:
    """Two-dimensional trapezoid pairing of a kernel with nodal samples g."""
    g = np.asarray(g)
    n = grid.n_nodes
    if g.shape != (n, n):
        raise ValueError(f"expected ({n}, {n}) tensor-grid samples, got {g.shape}")
    if w.is_zero:
        return 0.0
    tw = grid.trapezoid_weights
    return float(np.einsum("i,j,ij,ij->", tw, tw, w.kernel_matrix(grid), g))
