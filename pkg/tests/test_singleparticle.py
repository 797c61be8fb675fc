import numpy as np
import pytest

from fermi1d import (BoundaryCondition, ExternalPotential, Grid, GridFunction,
                     assemble_h, degeneracy_profile, eigensolve_lowest)
from fermi1d.singleparticle import free_matrices

NEUMANN = BoundaryCondition.NEUMANN
PERIODIC = BoundaryCondition.PERIODIC
ANTIPERIODIC = BoundaryCondition.ANTIPERIODIC


def lowest(v, bc, grid, k):
    return eigensolve_lowest(assemble_h(v, bc, grid), k)


def test_free_neumann_stencil():
    g = Grid(8)
    op = assemble_h(ExternalPotential.zero(), NEUMANN, g)
    h = g.h
    assert op.stiffness[0, 0] == pytest.approx(1 / h)
    assert op.stiffness[3, 3] == pytest.approx(2 / h)
    assert op.stiffness[3, 4] == pytest.approx(-1 / h)
    assert np.abs(op.stiffness - op.stiffness.T).max() == 0.0


def test_delta_is_rank_one_update():
    g = Grid(8)
    free = assemble_h(ExternalPotential.zero(), ANTIPERIODIC, g).stiffness
    alpha = 2.5
    with_delta = assemble_h(ExternalPotential(deltas=[(0.5, alpha)]),
                            ANTIPERIODIC, g).stiffness
    diff = with_delta - free
    expected = np.zeros_like(diff)
    expected[4, 4] = alpha
    assert np.abs(diff - expected).max() < 1e-14


def test_constant_adds_mass():
    g = Grid(16)
    c = 1.7
    op0 = assemble_h(ExternalPotential.zero(), NEUMANN, g)
    opc = assemble_h(ExternalPotential(constant=c), NEUMANN, g)
    assert np.abs(opc.stiffness - op0.stiffness - c * op0.mass).max() < 1e-14


def test_neumann_free_spectrum():
    sol = lowest(ExternalPotential.zero(), NEUMANN, Grid(400), 3)
    exact = np.array([0.0, np.pi ** 2, 4 * np.pi ** 2])
    assert abs(sol.eigenvalues[0]) < 1e-6
    assert np.abs(sol.eigenvalues[1:] / exact[1:] - 1).max() < 1e-3


def test_antiperiodic_free_two_fold():
    sol = lowest(ExternalPotential.zero(), ANTIPERIODIC, Grid(400), 2)
    assert np.abs(sol.eigenvalues / np.pi ** 2 - 1).max() < 1e-3
    assert degeneracy_profile(sol, 1e-6) == [2]


def test_midpoint_delta_keeps_cosine_ground_state():
    g = Grid(400)
    sol = lowest(ExternalPotential(deltas=[(0.5, 10.0)]), ANTIPERIODIC, g, 2)
    assert sol.eigenvalues[0] == pytest.approx(np.pi ** 2, rel=1e-3)
    cos = np.sqrt(2) * np.cos(np.pi * g.nodes)
    vals = sol.eigenfunctions[0].values
    sign = np.sign(vals @ cos)
    assert np.abs(sign * vals - cos).max() < 1e-3


def test_degeneracy_profiles_free():
    g = Grid(400)
    assert degeneracy_profile(lowest(ExternalPotential.zero(), NEUMANN, g, 4),
                              1e-6) == [1, 1, 1, 1]
    assert degeneracy_profile(lowest(ExternalPotential.zero(), PERIODIC, g, 5),
                              1e-6) == [1, 2, 2]
    assert degeneracy_profile(lowest(ExternalPotential.zero(), ANTIPERIODIC, g, 4),
                              1e-6) == [2, 2]


def test_eigenpair_residuals_and_orthonormality(rng):
    g = Grid(200)
    v = ExternalPotential(GridFunction(g, rng.normal(size=g.n_nodes)),
                          [(0.3, 0.8)])
    op = assemble_h(v, PERIODIC, g)
    sol = eigensolve_lowest(op, 6)
    scale = np.linalg.norm(op.stiffness)
    for lam, func in zip(sol.eigenvalues, sol.eigenfunctions):
        u = func.values[:-1]
        res = np.linalg.norm(op.stiffness @ u - lam * (op.mass @ u))
        assert res <= 1e-9 * (scale + abs(lam) * np.linalg.norm(op.mass))
    vecs = np.array([f.values[:-1] for f in sol.eigenfunctions]).T
    gram = vecs.T @ op.mass @ vecs
    assert np.abs(gram - np.eye(6)).max() < 1e-10


@pytest.mark.parametrize("bc", [PERIODIC, ANTIPERIODIC])
def test_wrapped_clusters_at_most_two(bc, rng):
    g = Grid(300)
    for _ in range(4):
        vals = sum(rng.uniform(-2, 2) * np.cos(2 * np.pi * k * g.nodes)
                   + rng.uniform(-2, 2) * np.sin(2 * np.pi * k * g.nodes)
                   for k in range(1, 4))
        deltas = [(g.snap(float(rng.integers(1, g.n_cells)) * g.h),
                   float(rng.uniform(-1.5, 1.5)))
                  for _ in range(rng.integers(0, 3))]
        sol = lowest(ExternalPotential(GridFunction(g, vals), deltas), bc, g, 8)
        assert max(degeneracy_profile(sol, 1e-6)) <= 2


def test_ground_energy_monotone_under_bumps(rng):
    g = Grid(200)
    base_vals = rng.normal(size=g.n_nodes)
    v = ExternalPotential(GridFunction(g, base_vals))
    lam0 = lowest(v, NEUMANN, g, 1).eigenvalues[0]
    for _ in range(5):
        c = rng.uniform(0, 1)
        bump = rng.uniform(0.05, 0.5) * np.exp(-60 * (g.nodes - c) ** 2)
        vb = ExternalPotential(GridFunction(g, base_vals + bump))
        lam = lowest(vb, NEUMANN, g, 1).eigenvalues[0]
        assert lam > lam0 + 1e-9


def test_ground_energy_concave_midpoint(rng):
    g = Grid(200)
    a = rng.normal(size=g.n_nodes)
    b = rng.normal(size=g.n_nodes)
    lam = {}
    for key, vals in {"a": a, "b": b, "mid": 0.5 * (a + b)}.items():
        lam[key] = lowest(ExternalPotential(GridFunction(g, vals)),
                          NEUMANN, g, 1).eigenvalues[0]
    assert lam["mid"] >= 0.5 * (lam["a"] + lam["b"]) - 1e-10


def test_shift_covariance():
    g = Grid(150)
    c = 2.31
    base = lowest(ExternalPotential.zero(), PERIODIC, g, 4).eigenvalues
    shifted = lowest(ExternalPotential(constant=c), PERIODIC, g, 4).eigenvalues
    assert np.abs(shifted - base - c).max() < 1e-9


def test_wrapped_dof_reduction():
    g = Grid(20)
    S, M = free_matrices(g, PERIODIC)
    assert S.shape == (20, 20)
    S, M = free_matrices(g, NEUMANN)
    assert S.shape == (21, 21)
