import numpy as np
import pytest

from huckel_vqd import optim as O


def quad(x):
    x = np.asarray(x)
    return float(np.sum((x - 0.3) ** 2) + 1.0)


def quad_vg(x):
    return quad(x), 2 * (np.asarray(x) - 0.3)


@pytest.mark.parametrize("kind", ["quasi_newton", "cg", "nelder_mead"])
def test_deterministic_optimizers_find_minimum(kind):
    res = O.minimize(quad, np.full(3, 2.0), O.OptimizerConfig(kind, max_evals=5000))
    assert res.fun == pytest.approx(1.0, abs=1e-7)
    assert np.allclose(res.theta, 0.3, atol=1e-3)
    assert res.n_evals <= 5000


def test_analytic_gradient_path():
    res = O.minimize(quad, np.full(4, -1.0), O.OptimizerConfig(), value_and_grad=quad_vg)
    assert res.converged
    assert np.allclose(res.theta, 0.3, atol=1e-6)


def test_spsa_descends_and_respects_budget():
    cfg = O.OptimizerConfig("spsa", max_evals=2000, seed=4)
    res = O.minimize(quad, np.full(3, 2.0), cfg)
    assert res.n_evals <= 2000
    assert res.fun < 1.01
    again = O.minimize(quad, np.full(3, 2.0), cfg)
    assert np.array_equal(res.theta, again.theta)


def test_quasi_newton_trace_is_monotone():
    res = O.minimize(lambda x: float(np.sum(np.cos(x)) + 0.1 * np.sum(x ** 2)), np.full(3, 0.5),
                     O.OptimizerConfig())
    vals = [v for _, v in res.trace]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert res.trace_csv().startswith("iteration,value\n")


def test_budget_is_hard():
    calls = []

    def f(x):
        calls.append(1)
        return quad(x)

    res = O.minimize(f, np.full(5, 2.0), O.OptimizerConfig("nelder_mead", max_evals=37))
    assert len(calls) <= 37 and res.n_evals == len(calls)
    assert not res.converged


def test_non_finite_objective_raises():
    with pytest.raises(O.NonFiniteObjective):
        O.minimize(lambda x: float("nan"), np.zeros(2), O.OptimizerConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        O.OptimizerConfig("adam")
    with pytest.raises(ValueError):
        O.OptimizerConfig(max_evals=0)
    with pytest.raises(ValueError):
        O.OptimizerConfig(gradient_mode="magic")


def test_shift_rule_on_trig_objective(rng):
    # f is a sum of sinusoids with unit frequency per coordinate, so the +-pi/2 rule is exact
    w = rng.normal(size=4)
    f = lambda x: float(np.sum(w * np.sin(x)) + np.prod(np.cos(x)))
    x = rng.uniform(-3, 3, 4)
    ps = O.gradient(f, x, "parameter_shift")
    fd = O.gradient(f, x, "finite_diff")
    assert np.allclose(ps, fd, atol=1e-6)


def test_multistart_deterministic_and_order_free(monkeypatch):
    f = lambda x: float(np.sum(np.sin(3 * x)) + 0.05 * np.sum(x ** 2))
    cfg = O.OptimizerConfig("nelder_mead", max_evals=400)
    a = O.multistart(f, 3, cfg, restarts=4, seed=9)
    monkeypatch.setenv("HUCKEL_VQD_THREADS", "3")
    b = O.multistart(f, 3, cfg, restarts=4, seed=9)
    assert np.array_equal(a.theta, b.theta) and a.fun == b.fun and a.n_evals == b.n_evals
    with pytest.raises(ValueError):
        O.multistart(f, 3, cfg, restarts=0)
