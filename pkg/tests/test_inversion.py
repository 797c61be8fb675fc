import numpy as np
import pytest

from fermi1d import (BoundaryCondition, Density, ExternalPotential, Grid,
                     GridFunction, Interaction, InversionProblem,
                     TargetClassError, assemble_many_body, build_basis,
                     density, dual_objective, ground_state,
                     hk_uniqueness_check, invert, parity_matches)

NEUMANN = BoundaryCondition.NEUMANN
PERIODIC = BoundaryCondition.PERIODIC
ANTIPERIODIC = BoundaryCondition.ANTIPERIODIC

ZERO_W = Interaction.zero()


def forward_density(v, w, basis, n):
    return density(ground_state(assemble_many_body(v, w, basis, n)).psi)


@pytest.fixture(scope="module")
def free_neumann_problem(neumann_basis):
    target = forward_density(ExternalPotential.zero(), ZERO_W, neumann_basis, 2)
    return InversionProblem(target=target, w=ZERO_W, bc=NEUMANN,
                            basis=neumann_basis)


def test_dual_stationary_at_truth(free_neumann_problem, grid400):
    _value, grad = dual_objective(np.zeros(grid400.n_nodes),
                                  free_neumann_problem)
    assert np.abs(grad.values).max() < 1e-8


def test_dual_gauge_invariance(free_neumann_problem, grid400, rng):
    prob = free_neumann_problem
    v = prob.project(rng.normal(size=grid400.n_nodes))
    v1, _ = dual_objective(v, prob)
    v2, _ = dual_objective(v + 3.7, prob)
    # adding a constant shifts the energy by c N and the pairing by c N
    assert v2 == pytest.approx(v1, abs=2e-9)


def test_dual_midpoint_concavity(free_neumann_problem, grid400, rng):
    prob = free_neumann_problem
    a = prob.project(rng.normal(size=grid400.n_nodes))
    b = prob.project(rng.normal(size=grid400.n_nodes))
    va, _ = dual_objective(a, prob)
    vb, _ = dual_objective(b, prob)
    vm, _ = dual_objective(0.5 * (a + b), prob)
    assert vm >= 0.5 * (va + vb) - 1e-10


def test_invert_free_target(free_neumann_problem, grid400):
    res = invert(free_neumann_problem)
    assert res.converged
    assert res.residual_history[-1] <= 1e-7
    assert np.abs(res.v.regular_values(grid400)).max() < 1e-4
    assert res.v.deltas == () and res.v.constant == 0.0


def test_invert_recovers_cosine_potential(grid400, periodic_basis):
    vals = np.cos(2 * np.pi * grid400.nodes)
    v = ExternalPotential(GridFunction(grid400, vals))
    target = forward_density(v, ZERO_W, periodic_basis, 3)
    prob = InversionProblem(target=target, w=ZERO_W, bc=PERIODIC,
                            basis=periodic_basis)
    res = invert(prob)
    assert res.converged
    truth = prob.project(vals)
    assert np.abs(res.v.regular_values(grid400) - truth).max() < 1e-3


def test_invert_rejects_vanishing_target(grid400, antiperiodic_basis):
    rho = Density.from_callable(grid400, lambda x: 2 * np.cos(np.pi * x) ** 2, 1)
    with pytest.raises(TargetClassError):
        InversionProblem(target=rho, w=ZERO_W, bc=ANTIPERIODIC,
                         basis=antiperiodic_basis, enforce_parity=False)
        invert(InversionProblem(target=rho, w=ZERO_W, bc=ANTIPERIODIC,
                                basis=antiperiodic_basis,
                                enforce_parity=False))


def test_parity_rule():
    assert parity_matches(PERIODIC, 3)
    assert not parity_matches(PERIODIC, 2)
    assert parity_matches(ANTIPERIODIC, 2)
    assert not parity_matches(ANTIPERIODIC, 1)
    assert parity_matches(NEUMANN, 1)


def test_invert_enforces_parity(grid400, periodic_basis):
    target = forward_density(ExternalPotential.zero(), ZERO_W,
                             periodic_basis, 2)
    with pytest.raises(TargetClassError):
        invert(InversionProblem(target=target, w=ZERO_W, bc=PERIODIC,
                                basis=periodic_basis))
    with pytest.warns(UserWarning):
        res = invert(InversionProblem(target=target, w=ZERO_W, bc=PERIODIC,
                                      basis=periodic_basis,
                                      enforce_parity=False))
    # outside the parity regime the ground state is shell-degenerate and the
    # averaged supergradient cannot steer onto a pure-state density
    assert not res.converged


def test_objective_monotone_along_iterates(grid400, neumann_basis):
    vals = 1.2 * np.cos(np.pi * grid400.nodes) + 0.5 * np.cos(3 * np.pi * grid400.nodes)
    v = ExternalPotential(GridFunction(grid400, vals))
    w = Interaction.convolution_from_callable(
        grid400, lambda s: 0.5 * np.cos(2 * np.pi * s))
    target = forward_density(v, w, neumann_basis, 2)
    prob = InversionProblem(target=target, w=w, bc=NEUMANN,
                            basis=neumann_basis)
    res = invert(prob)
    assert res.converged
    # replay the dual values along the residual history by re-walking from
    # scratch would be expensive; the recorded dual value must dominate the
    # seed value instead
    seed_value, _ = dual_objective(np.zeros(grid400.n_nodes), prob)
    assert res.diagnostics["dual_value"] >= seed_value - 1e-12


def test_gauge_invariance_of_optimizer(grid400, neumann_basis, rng):
    target = forward_density(ExternalPotential.zero(), ZERO_W,
                             neumann_basis, 2)
    prob = InversionProblem(target=target, w=ZERO_W, bc=NEUMANN,
                            basis=neumann_basis)
    seed = rng.normal(size=grid400.n_nodes)
    r1 = invert(prob, v0=seed)
    r2 = invert(prob, v0=seed + 4.2)
    assert len(r1.residual_history) == len(r2.residual_history)
    assert np.allclose(r1.residual_history, r2.residual_history,
                       rtol=1e-9, atol=1e-12)
    assert np.abs(r1.v.regular_values(grid400)
                  - r2.v.regular_values(grid400)).max() < 1e-9


def test_interaction_independence_of_targets(grid400, neumann_basis):
    w = Interaction.convolution_from_callable(
        grid400, lambda s: 0.5 * np.cos(2 * np.pi * s))
    vals = 0.8 * np.cos(np.pi * grid400.nodes)
    v = ExternalPotential(GridFunction(grid400, vals))
    rho_free = forward_density(v, ZERO_W, neumann_basis, 2)
    rho_int = forward_density(v, w, neumann_basis, 2)
    res_a = invert(InversionProblem(target=rho_free, w=w, bc=NEUMANN,
                                    basis=neumann_basis, grad_tol=1e-6))
    res_b = invert(InversionProblem(target=rho_int, w=ZERO_W, bc=NEUMANN,
                                    basis=neumann_basis, grad_tol=1e-6))
    assert res_a.converged and res_b.converged


def test_hk_uniqueness_needs_two_seeds(free_neumann_problem):
    with pytest.raises(ValueError):
        hk_uniqueness_check(free_neumann_problem, [None])


def test_hk_uniqueness_small_deviation(grid400, neumann_basis, rng):
    vals = 1.0 * np.cos(np.pi * grid400.nodes)
    v = ExternalPotential(GridFunction(grid400, vals))
    target = forward_density(v, ZERO_W, neumann_basis, 2)
    prob = InversionProblem(target=target, w=ZERO_W, bc=NEUMANN,
                            basis=neumann_basis, search_space="identifiable")
    seeds = [None, rng.normal(size=grid400.n_nodes) * 0.5]
    dev = hk_uniqueness_check(prob, seeds)
    assert dev <= 1e-3


def test_inversion_result_serializes(free_neumann_problem):
    res = invert(free_neumann_problem)
    d = res.to_dict()
    assert d["converged"] is True
    assert isinstance(d["residual_history"], list)
