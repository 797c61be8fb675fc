import numpy as np
import pytest

from fermi1d import (BoundaryCondition, Density, ExternalPotential, Grid,
                     GridFunction, Interaction, assemble_many_body,
                     build_basis, classify_density, density, ground_state,
                     h1_norm_sq, kinetic_bound_check, orbital_kinetic_energy,
                     slater_from_density)


NEUMANN = BoundaryCondition.NEUMANN
PERIODIC = BoundaryCondition.PERIODIC
ANTIPERIODIC = BoundaryCondition.ANTIPERIODIC


def gram_matrix(orbitals, grid):
    vals = np.array([o.values for o in orbitals])
    return (vals.conj() * grid.trapezoid_weights) @ vals.T


def test_classify_positive_density(grid400):
    rho = Density.from_callable(grid400,
                                lambda x: 1 + 2 * np.cos(np.pi * x) ** 2, 2)
    report = classify_density(rho, NEUMANN)
    assert report.in_RN and report.in_DN
    assert report.integral == pytest.approx(2.0, abs=1e-10)


def test_classify_vanishing_density(grid400):
    rho = Density.from_callable(grid400, lambda x: 2 * np.cos(np.pi * x) ** 2, 1)
    report = classify_density(rho, ANTIPERIODIC)
    assert report.in_RN
    assert not report.in_DN
    assert not report.in_DN_plus
    assert report.endpoint_match


def test_classify_uniform_density(grid400):
    rho = Density.from_callable(grid400, lambda x: np.ones_like(x), 2)
    report = classify_density(rho, PERIODIC)
    assert report.in_DN_plus


def test_report_serializes(grid200):
    rho = Density.from_callable(grid200, lambda x: np.ones_like(x), 1)
    d = classify_density(rho, NEUMANN).to_dict()
    assert set(d) >= {"integral", "min_value", "h1_norm", "endpoint_match",
                      "in_RN", "in_DN", "in_DN_plus"}


def test_uniform_single_particle_periodic_orbital(grid400):
    rho = Density.from_callable(grid400, lambda x: np.ones_like(x), 1)
    orb, = slater_from_density(rho, PERIODIC)
    exact = np.exp(-2j * np.pi * grid400.nodes)
    assert np.abs(orb.values - exact).max() < 1e-12


def test_uniform_two_particles_kinetic(grid400):
    rho = Density.from_callable(grid400, lambda x: 2 * np.ones_like(x), 2)
    orbs = slater_from_density(rho, PERIODIC)
    t = orbital_kinetic_energy(orbs)
    # windings k = 1, 2 on a flat profile: kinetic 2 * ((2 pi)^2 + (4 pi)^2) / 2
    exact = (2 * np.pi) ** 2 + (4 * np.pi) ** 2
    assert t == pytest.approx(exact, rel=1e-3)


def test_construction_orthonormal_and_reproduces_density():
    # the orthonormalization feeds an O(h^2) correction back into the
    # density, so the pointwise tolerance needs the finer grid
    g = Grid(1600)
    rho = Density.from_callable(g, lambda x: 1 + 2 * np.cos(np.pi * x) ** 2, 2)
    orbs = slater_from_density(rho, NEUMANN)
    gram = gram_matrix(orbs, g)
    assert np.abs(gram - np.eye(2)).max() < 1e-8
    rebuilt = sum(np.abs(o.values) ** 2 for o in orbs)
    assert np.abs(rebuilt - rho.values).max() < 1e-6


@pytest.mark.parametrize("bc,n,fn", [
    (NEUMANN, 2, lambda x: np.exp(-(x - 0.4) ** 2)),
    (PERIODIC, 3, lambda x: 1 + 0.5 * np.cos(2 * np.pi * x)),
    (ANTIPERIODIC, 2, lambda x: 1 + 0.4 * np.sin(2 * np.pi * x)),
    (ANTIPERIODIC, 4, lambda x: 1 + 0.2 * np.cos(4 * np.pi * x)),
])
def test_roundtrip_within_discretization(bc, n, fn, grid400):
    rho = Density.from_callable(grid400, fn, n)
    orbs = slater_from_density(rho, bc)
    gram = gram_matrix(orbs, grid400)
    assert np.abs(gram - np.eye(n)).max() < 1e-8
    rebuilt = sum(np.abs(o.values) ** 2 for o in orbs)
    rel_l1 = (grid400.trapezoid_weights @ np.abs(rebuilt - rho.values)) / n
    assert rel_l1 <= 10 * grid400.h ** 2
    for orb in orbs:
        assert orb.respects(bc, tol=1e-8)


def test_construction_rejects_mismatched_endpoints(grid200):
    rho = Density.from_samples(grid200, 1.0 + grid200.nodes, 1)
    with pytest.raises(ValueError):
        slater_from_density(rho, PERIODIC)


def test_kinetic_bound_family(grid400):
    ratios = []
    for eps in (0.0, 0.3, 0.6):
        rho = Density.from_callable(
            grid400, lambda x: 2 * (1 + eps * np.cos(2 * np.pi * x)), 2)
        t, bound = kinetic_bound_check(rho, PERIODIC)
        assert np.isfinite(t) and np.isfinite(bound)
        ratios.append(t / bound)
    assert max(ratios) < 120


def test_kinetic_bound_touching_zero(grid400):
    rho = Density.from_callable(grid400, lambda x: 2 * np.cos(np.pi * x) ** 2, 1)
    t, bound = kinetic_bound_check(rho, ANTIPERIODIC)
    assert np.isfinite(t)
    sqrt_rho = GridFunction(grid400, np.sqrt(rho.values))
    assert bound == pytest.approx(1 + h1_norm_sq(sqrt_rho), abs=1e-12)


def test_ground_densities_pass_classification(grid200, rng):
    w = Interaction.convolution_from_callable(
        grid200, lambda s: 0.4 * np.cos(2 * np.pi * s))
    basis_n = build_basis(NEUMANN, grid200, 7)
    vals = 1.2 * np.cos(np.pi * grid200.nodes)
    v = ExternalPotential(GridFunction(grid200, vals))
    rho = density(ground_state(assemble_many_body(v, w, basis_n, 2)).psi)
    assert classify_density(rho, NEUMANN).in_DN

    basis_p = build_basis(PERIODIC, grid200, 7)
    vp = ExternalPotential(GridFunction(
        grid200, 0.8 * np.cos(2 * np.pi * grid200.nodes)))
    rho = density(ground_state(assemble_many_body(vp, w, basis_p, 3)).psi)
    assert classify_density(rho, PERIODIC).in_DN_plus

    basis_a = build_basis(ANTIPERIODIC, grid200, 8)
    rho = density(ground_state(assemble_many_body(vp, w, basis_a, 2)).psi)
    assert classify_density(rho, ANTIPERIODIC).in_DN_plus
