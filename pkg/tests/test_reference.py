import numpy as np
import pytest

from mehdsg.analysis import error_norms, function_statistics, output_grid
from mehdsg.mesh import Mesh
from mehdsg.reference import (
    CollocationError,
    McPlan,
    collocation_plan,
    monte_carlo_sod,
    sod_exact_statistics,
    stochastic_collocation_run,
)
from mehdsg.scenarios import SodIC, build_problem, manufactured_scenario, sod_scenario


def test_collocation_plan_layout():
    plan = collocation_plan(((0.1, 1.0),), 3, 2)
    assert plan.nodes.shape == (2, 4, 1) and plan.n_nodes == 8
    assert plan.weights.sum() == pytest.approx(1.0)
    assert plan.probabilities == pytest.approx([0.5, 0.5])
    assert np.all((plan.nodes[0] > 0.1) & (plan.nodes[0] < 0.55)) and np.all(plan.nodes[1] > 0.55)
    plan3 = collocation_plan(((0, 1), (0, 1), (0, 1)), 1, 1)
    assert plan3.nodes.shape == (1, 8, 3)


def test_sc_with_xi_independent_data_has_zero_variance():
    sc = manufactured_scenario(ic="constant", constant_state="1,0.2,0,2.5", bc="periodic", nx=4, K_G=2,
                               t_end=0.01)
    st = stochastic_collocation_run(sc)
    assert np.abs(st.var).max() < 1e-28
    assert np.allclose(st.mean, [1, 0.2, 0, 2.5], atol=1e-13)


def test_sc_at_t0_matches_gauss_statistics_of_the_projection():
    """t_end = 0: K_G+1 Gauss nodes reproduce function_statistics of the frozen projections."""
    sc = manufactured_scenario(nx=6, K_D=3, K_G=5, t_end=0.0)
    prob = build_problem(sc)
    grid = output_grid(prob.space.mesh, 5)
    st = stochastic_collocation_run(sc, grid=grid)
    ref = function_statistics(prob.exact, 0.0, grid, prob.space.grid, 6)
    assert error_norms(st, ref, "L2") < 1e-4  # spatial projection error of K_D = 3 on 6 cells
    # the mean of rho is xi independent at t = 0, so its variance vanishes
    assert np.abs(st.var[:, 0]).max() < 1e-20


def test_sc_threads_give_identical_results():
    sc = sod_scenario(nx=20, t_end=0.01, K_G=1, n_elements=2)
    a = stochastic_collocation_run(sc, threads=1)
    b = stochastic_collocation_run(sc, threads=2)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.var, b.var)


def test_collocation_error_names_the_node():
    sc = manufactured_scenario(nx=4, t_end=0.1, max_steps=1)
    with pytest.raises(CollocationError) as exc:
        stochastic_collocation_run(sc)
    assert exc.value.node[0] == 0 and "element 0" in str(exc.value)


def test_mc_single_sample_equals_deterministic_solution():
    ic = SodIC()
    grid = output_grid(Mesh(1, 10), 3)
    plan = McPlan(1, seed=5)
    st, err = monte_carlo_sod(ic, plan, grid, 0.2)
    xi = plan.samples()
    ref = ic.exact(0.2, grid.x, 0.0, (np.full_like(grid.x, xi[0]),))
    assert np.allclose(st.mean, ref) and np.all(st.var == 0.0)
    with pytest.raises(ValueError):
        McPlan(0)


def test_mc_zero_width_has_no_variance():
    ic = SodIC(width=0.0)
    grid = output_grid(Mesh(1, 10), 3)
    st, err = monte_carlo_sod(ic, McPlan(200), grid, 0.2)
    assert np.all(st.var < 1e-26) and np.all(err < 1e-13)


def test_mc_standard_error_scaling_and_midpoint_agreement():
    """MC 2e5 vs the midpoint reference within a 5-sigma band; stderr halves from 5e4 to 2e5."""
    ic = SodIC()
    grid = output_grid(Mesh(1, 20), 2)
    mid = sod_exact_statistics(ic, grid, 0.2, 10_000)
    a, ea = monte_carlo_sod(ic, McPlan(50_000, seed=1), grid, 0.2)
    b, eb = monte_carlo_sod(ic, McPlan(200_000, seed=2), grid, 0.2)
    active = ea[:, 0] > 1e-8
    assert np.median(ea[active, 0] / eb[active, 0]) == pytest.approx(2.0, rel=0.05)
    assert np.all(np.abs(b.mean - mid.mean) <= 5 * eb + 1e-12)


def test_midpoint_reference_converges():
    """1D xi: 1e4 and 1e5 midpoint points agree far below the scheme errors."""
    ic = SodIC()
    grid = output_grid(Mesh(1, 50), 3)
    a = sod_exact_statistics(ic, grid, 0.2, 10_000)
    b = sod_exact_statistics(ic, grid, 0.2, 100_000)
    assert error_norms(a, b, "L1") < 1e-5
    assert error_norms(a, b, "L1", "variance") < 1e-5
