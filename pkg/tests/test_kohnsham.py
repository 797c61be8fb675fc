import numpy as np
import pytest

from fermi1d import (BoundaryCondition, Density, ExternalPotential, Grid,
                     GridFunction, Interaction, assemble_many_body,
                     build_basis, density, ground_state, hartree_energy,
                     hartree_potential, integrate, ks_kinetic, ks_scf,
                     levy_lieb, noninteracting_solve, pair_external,
                     slater_from_density, xc_energy, xc_potential)
from fermi1d.representability import orbital_kinetic_energy

NEUMANN = BoundaryCondition.NEUMANN
PERIODIC = BoundaryCondition.PERIODIC
ANTIPERIODIC = BoundaryCondition.ANTIPERIODIC

ZERO_V = ExternalPotential.zero()
ZERO_W = Interaction.zero()


def forward_density(v, w, basis, n):
    return density(ground_state(assemble_many_body(v, w, basis, n)).psi)


def l2(grid, values):
    return float(np.sqrt(grid.trapezoid_weights @ values ** 2))


@pytest.fixture(scope="module")
def smooth_kernel(grid400):
    return Interaction.convolution_from_callable(
        grid400, lambda s: 0.5 * np.cos(2 * np.pi * s))


# --- constrained-search values ---------------------------------------------

def test_levy_lieb_free_density(grid400, neumann_basis):
    rho = forward_density(ZERO_V, ZERO_W, neumann_basis, 2)
    res = levy_lieb(rho, ZERO_W, NEUMANN, neumann_basis)
    assert res.value == pytest.approx(np.pi ** 2, abs=2e-3)


def test_levy_lieb_uniform_periodic(grid400, periodic_basis):
    rho = Density.from_callable(grid400, lambda x: 3 * np.ones_like(x), 3)
    res = levy_lieb(rho, ZERO_W, PERIODIC, periodic_basis)
    assert res.value == pytest.approx(8 * np.pi ** 2, abs=1e-2)


def test_levy_lieb_rejects_vanishing(grid400, antiperiodic_basis):
    rho = Density.from_callable(grid400, lambda x: 2 * np.cos(np.pi * x) ** 2, 1)
    from fermi1d import TargetClassError
    with pytest.raises(TargetClassError):
        levy_lieb(rho, ZERO_W, ANTIPERIODIC, antiperiodic_basis)


def test_ks_kinetic_below_explicit_determinant(grid400, neumann_basis):
    rho = forward_density(ZERO_V, ZERO_W, neumann_basis, 2)
    kin = ks_kinetic(rho, NEUMANN, neumann_basis)
    t_explicit = orbital_kinetic_energy(slater_from_density(rho, NEUMANN))
    assert kin.value <= t_explicit + 1e-8


def test_ks_kinetic_equals_levy_lieb_without_interaction(grid400, neumann_basis):
    rho = forward_density(ZERO_V, ZERO_W, neumann_basis, 2)
    a = ks_kinetic(rho, NEUMANN, neumann_basis)
    b = levy_lieb(rho, ZERO_W, NEUMANN, neumann_basis)
    assert a.value == b.value


# --- Hartree ---------------------------------------------------------------

def test_hartree_constant_kernel(grid400):
    rho = Density.from_callable(grid400,
                                lambda x: 1 + np.cos(2 * np.pi * x) ** 2, 3)
    w = Interaction.general(np.ones((grid400.n_nodes, grid400.n_nodes)))
    assert hartree_energy(rho, w) == pytest.approx(9.0, abs=1e-6)
    vh = hartree_potential(rho, w)
    assert np.abs(vh.values - 6.0).max() < 1e-6


def test_hartree_zero_interaction(grid400):
    rho = Density.from_callable(grid400, lambda x: np.ones_like(x), 2)
    assert hartree_energy(rho, ZERO_W) == 0.0
    assert np.abs(hartree_potential(rho, ZERO_W).values).max() == 0.0


def test_hartree_cos_kernel_on_uniform(grid400):
    w = Interaction.convolution_from_callable(
        grid400, lambda s: np.cos(2 * np.pi * s))
    rho = Density.from_callable(grid400, lambda x: 2 * np.ones_like(x), 2)
    assert hartree_energy(rho, w) == pytest.approx(0.0, abs=1e-8)
    assert np.abs(hartree_potential(rho, w).values).max() < 1e-8


def test_hartree_potential_linear(grid400, smooth_kernel, rng):
    r1 = rng.uniform(0.5, 1.5, size=grid400.n_nodes)
    r2 = rng.uniform(0.5, 1.5, size=grid400.n_nodes)
    a, b = 0.7, 1.9
    d1 = Density.from_samples(grid400, r1, 2)
    d2 = Density.from_samples(grid400, r2, 2)
    combo = GridFunction(grid400, a * d1.values + b * d2.values)

    kern = smooth_kernel.kernel_matrix(grid400)
    tw = grid400.trapezoid_weights
    lhs = 2.0 * kern @ (tw * combo.values)
    rhs = a * hartree_potential(d1, smooth_kernel).values \
        + b * hartree_potential(d2, smooth_kernel).values
    assert np.abs(lhs - rhs).max() < 1e-12


# --- exchange-correlation ---------------------------------------------------

def test_xc_identity_holds_exactly(grid400, neumann_basis, smooth_kernel):
    v = ExternalPotential(GridFunction(grid400,
                                       0.5 * np.cos(np.pi * grid400.nodes)))
    rho = forward_density(v, smooth_kernel, neumann_basis, 2)
    fv = xc_energy(rho, smooth_kernel, NEUMANN, neumann_basis, strict=False)
    assert fv.e_xc == fv.f_ll - fv.t_ks - fv.e_h


def test_xc_vanishes_without_interaction(grid400, neumann_basis):
    rho = forward_density(ZERO_V, ZERO_W, neumann_basis, 2)
    fv = xc_energy(rho, ZERO_W, NEUMANN, neumann_basis)
    assert fv.e_xc == 0.0
    vxc, _ = xc_potential(rho, ZERO_W, NEUMANN, neumann_basis, functional=fv)
    assert np.abs(vxc.values).max() == 0.0


def test_xc_potential_symmetric_problem(grid400, neumann_basis):
    # mirror-symmetric density and kernel give a mirror-symmetric potential
    w = Interaction.general_from_callable(
        grid400, lambda x, y: 0.5 * np.cos(np.pi * x) * np.cos(np.pi * y)
        + 0.5)
    rho = forward_density(ZERO_V, w, neumann_basis, 2)
    assert np.abs(rho.values - rho.values[::-1]).max() < 1e-9
    vxc, _fv = xc_potential(rho, w, NEUMANN, neumann_basis, strict=False,
                            search_space="identifiable")
    assert np.abs(vxc.values - vxc.values[::-1]).max() < 1e-6


def test_xc_finite_difference_direction(grid400, neumann_basis, smooth_kernel):
    from fermi1d import InversionProblem
    v = ExternalPotential(GridFunction(grid400,
                                       0.6 * np.cos(np.pi * grid400.nodes)))
    rho = forward_density(v, smooth_kernel, neumann_basis, 2)
    fv0 = xc_energy(rho, smooth_kernel, NEUMANN, neumann_basis, strict=False)
    vxc, fv0 = xc_potential(rho, smooth_kernel, NEUMANN, neumann_basis,
                            functional=fv0)
    prob = InversionProblem(target=rho, w=smooth_kernel, bc=NEUMANN,
                            basis=neumann_basis)
    delta = prob.project(np.cos(np.pi * grid400.nodes))
    exact = grid400.trapezoid_weights @ (vxc.values * delta)
    errs = []
    for eps in (1e-2, 1e-3):
        rho_eps = Density(grid400, rho.values + eps * delta, 2)
        fv_eps = xc_energy(rho_eps, smooth_kernel, NEUMANN, neumann_basis,
                           strict=False)
        errs.append(abs((fv_eps.e_xc - fv0.e_xc) / eps - exact))
    assert 5.0 <= errs[0] / errs[1] <= 20.0


# --- self-consistent loop ---------------------------------------------------

def test_scf_zero_interaction_single_step(grid400, neumann_basis):
    v = ExternalPotential(GridFunction(grid400,
                                       np.cos(np.pi * grid400.nodes)))
    ks = ks_scf(v, ZERO_W, NEUMANN, 2, basis=neumann_basis)
    assert ks.converged
    assert ks.iterations == 1
    ref = noninteracting_solve(neumann_basis, v, 2)
    assert l2(grid400, ks.density.values - ref.density.values) < 1e-12


def test_scf_matches_many_body_density(grid400, neumann_basis, smooth_kernel):
    gs = ground_state(assemble_many_body(ZERO_V, smooth_kernel,
                                         neumann_basis, 2))
    rho_ref = density(gs.psi)
    ks = ks_scf(ZERO_V, smooth_kernel, NEUMANN, 2, basis=neumann_basis)
    assert ks.converged
    assert ks.aufbau_ok
    assert l2(grid400, ks.density.values - rho_ref.values) < 1e-4
    assert abs(ks.ks_energy - gs.energy) < 2e-4


def test_scf_density_mixing_variant(grid400, neumann_basis, smooth_kernel):
    ks = ks_scf(ZERO_V, smooth_kernel, NEUMANN, 2, basis=neumann_basis,
                mix_densities=True, max_iters=80)
    assert ks.converged
    gs = ground_state(assemble_many_body(ZERO_V, smooth_kernel,
                                         neumann_basis, 2))
    rho_ref = density(gs.psi)
    assert l2(grid400, ks.density.values - rho_ref.values) < 1e-4


def test_scf_total_energy_identity(grid400, neumann_basis, smooth_kernel):
    v = ExternalPotential(GridFunction(grid400,
                                       0.4 * np.cos(np.pi * grid400.nodes)))
    ks = ks_scf(v, smooth_kernel, NEUMANN, 2, basis=neumann_basis)
    assert ks.converged
    fv = ks.functional
    total = fv.t_ks + fv.e_h + fv.e_xc + pair_external(v, ks.density)
    assert ks.ks_energy == pytest.approx(total, abs=2e-4)


def test_scf_gauge_shift(grid400, neumann_basis, smooth_kernel):
    v = ExternalPotential(GridFunction(grid400,
                                       0.4 * np.cos(np.pi * grid400.nodes)))
    c = 1.25
    ks0 = ks_scf(v, smooth_kernel, NEUMANN, 2, basis=neumann_basis)
    ks1 = ks_scf(v + ExternalPotential(constant=c), smooth_kernel, NEUMANN, 2,
                 basis=neumann_basis)
    # agreement is limited by the self-consistency stopping tolerance
    assert l2(grid400, ks0.density.values - ks1.density.values) < 5e-6
    assert np.abs(ks1.orbital_eigenvalues - ks0.orbital_eigenvalues - c).max() < 1e-5
    assert ks1.ks_energy - ks0.ks_energy == pytest.approx(2 * c, abs=1e-5)


def test_scf_density_is_orbital_sum(grid400, neumann_basis, smooth_kernel):
    ks = ks_scf(ZERO_V, smooth_kernel, NEUMANN, 2, basis=neumann_basis)
    rebuilt = sum(np.abs(o.values) ** 2 for o in ks.orbitals)
    assert np.abs(rebuilt - ks.density.values).max() < 1e-12
    tw = grid400.trapezoid_weights
    gram = np.array([[tw @ (a.values * b.values) for b in ks.orbitals]
                     for a in ks.orbitals])
    assert np.abs(gram - np.eye(2)).max() < 1e-8


def test_scf_parity_validation(grid400, periodic_basis, smooth_kernel):
    from fermi1d import TargetClassError
    with pytest.raises(TargetClassError):
        ks_scf(ZERO_V, smooth_kernel, PERIODIC, 2, basis=periodic_basis)


def test_scf_reports_nonconvergence(grid400, neumann_basis, smooth_kernel):
    with pytest.warns(UserWarning):
        ks = ks_scf(ZERO_V, smooth_kernel, NEUMANN, 2, basis=neumann_basis,
                    max_iters=2)
    assert not ks.converged
    assert len(ks.scf_residuals) == 2
