import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from rgda.errors import ConfigError, ContractError, DomainError, NumericError
from rgda.problems import GradPair, make_dro, make_quadratic_saddle, synthetic_dro_samples
from rgda.sets import simplex
from rgda.solvers import (SolverConfig, SolverState, gda_step, mvr_estimate, run, run_mvr_rsgda, run_rgda,
                          run_rsgda, schedule_eta, select_output, gda_step_sizes, mvr_parameters,
                          validate_config)

X0 = np.array([1.0, 1.0]) / np.sqrt(2)


@pytest.fixture
def quad():
    return make_quadratic_saddle(A=np.diag([2.0, 1.0]), mu=1.0, x0=X0)


@pytest.fixture
def noisy():
    return make_quadratic_saddle(A=np.diag([2.0, 1.0]), mu=1.0, n=64, sigma=0.5, seed=1, x0=X0)


# -- schedule and output selection --------------------------------------------

def test_schedule_example_and_monotone():
    assert schedule_eta(1, 0.5, 8) == pytest.approx(0.5 / 9 ** (1 / 3))
    assert schedule_eta(1, 0.5, 8) == pytest.approx(0.240375, abs=1e-6)
    etas = [schedule_eta(t, 0.5, 8) for t in range(1, 200)]
    assert all(a > b for a, b in zip(etas, etas[1:]))
    assert max(etas) <= 0.5 / 8 ** (1 / 3)
    assert schedule_eta(0, 2.0, 8.0) == pytest.approx(1.0)


def test_select_output():
    assert select_output(1, 0) == 1
    assert select_output(100, 7) == select_output(100, 7)
    rng = np.random.default_rng(0)
    draws = np.array([select_output(10, rng) for _ in range(100_000)])
    counts = np.bincount(draws, minlength=11)[1:]
    assert draws.min() == 1 and draws.max() == 10
    assert stats.chisquare(counts).pvalue > 0.01


# -- single step ------------------------------------------------------------------

def test_gda_step_fixed_point(quad):
    st_ = SolverState(4, X0.copy(), np.array([0.2, 0.1]))
    new, _ = gda_step(quad, st_, GradPair(np.zeros(2), np.zeros(2)), 0.5, 0.5, 0.7)
    assert new.t == 5
    assert np.array_equal(new.x, st_.x) and np.array_equal(new.y, st_.y)


def test_gda_step_free_set_eta_one(quad):
    y, w = np.array([0.3, -0.4]), np.array([1.0, 2.0])
    new, _ = gda_step(quad, SolverState(1, X0, y), GradPair(np.zeros(2), w), 0.1, 0.25, 1.0)
    np.testing.assert_array_equal(new.y, y + 0.25 * w)


@given(g=st.floats(0.01, 3.0))
def test_gda_step_sphere_retraction(g):
    quad = make_quadratic_saddle(A=np.diag([2.0, 1.0]), mu=1.0)
    x, v = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    new, _ = gda_step(quad, SolverState(1, x, np.zeros(2)), GradPair(v, np.zeros(2)), g, 0.1, 1.0)
    np.testing.assert_allclose(new.x, np.array([1.0, -g]) / np.sqrt(1 + g * g), atol=1e-15)


def test_gda_step_errors(quad):
    s = SolverState(1, np.array([1.0, 0.0]), np.zeros(2))
    with pytest.raises(DomainError):
        gda_step(quad, s, GradPair(np.array([1.0, 0.0]), np.zeros(2)), 0.1, 0.1, 0.5)
    with pytest.raises(DomainError):
        gda_step(quad, s, GradPair(np.zeros(2), np.zeros(2)), 0.1, 0.1, 1.5)


# -- estimator --------------------------------------------------------------------

def _dro():
    return make_dro(synthetic_dro_samples(20, 5, rank=2, seed=2), "stiefel", r=2)


def test_mvr_alpha_one_is_fresh_gradient():
    p = _dro()
    rng = np.random.default_rng(0)
    x0 = p.manifold.random_point(0)
    y0 = rng.dirichlet(np.ones(20))
    u = p.manifold.random_tangent(x0, 1, 0.1)
    x1, y1 = p.manifold.retr(x0, u), rng.dirichlet(np.ones(20))
    batch = p.sample(rng, 5)
    prev = p.stoch_grads(x0, y0, p.sample(rng, 5))
    new, old = p.stoch_grads(x1, y1, batch), p.stoch_grads(x0, y0, batch)
    est = mvr_estimate(p.manifold, x0, u, prev, new, old, 1.0, 1.0)
    assert np.array_equal(est.v, new.v) and np.array_equal(est.w, new.w)


def test_mvr_alpha_zero_frozen_iterate_keeps_estimate():
    p = _dro()
    rng = np.random.default_rng(1)
    x = p.manifold.random_point(3)
    y = rng.dirichlet(np.ones(20))
    prev = p.stoch_grads(x, y, p.sample(rng, 4))
    b = p.sample(rng, 4)
    g = p.stoch_grads(x, y, b)
    est = mvr_estimate(p.manifold, x, p.manifold.zero(x), prev, g, g, 0.0, 0.0)
    np.testing.assert_allclose(est.v, prev.v, atol=1e-15)
    np.testing.assert_allclose(est.w, prev.w, atol=1e-15)


@given(alpha=st.floats(0, 1), beta=st.floats(0, 1), seed=st.integers(0, 10 ** 6))
def test_mvr_full_batch_exactness(alpha, beta, seed):
    p = _dro()
    rng = np.random.default_rng(seed)
    x0 = p.manifold.random_point(seed)
    y0 = rng.dirichlet(np.ones(20))
    u = p.manifold.random_tangent(x0, seed + 1, 0.3)
    x1, y1 = p.manifold.retr(x0, u), rng.dirichlet(np.ones(20))
    est = mvr_estimate(p.manifold, x0, u, p.grads(x0, y0), p.grads(x1, y1), p.grads(x0, y0), alpha, beta)
    exact = p.grads(x1, y1)
    assert np.linalg.norm(est.v - exact.v) <= 1e-12
    assert np.linalg.norm(est.w - exact.w) <= 1e-12
    assert p.manifold.tangent_error(x1, est.v) <= 1e-10


def test_mvr_contracts():
    p = _dro()
    x = p.manifold.random_point(0)
    y = np.full(20, 1 / 20)
    a, b = p.stoch_grads(x, y, [0, 1]), p.stoch_grads(x, y, [0, 2])
    with pytest.raises(ContractError):
        mvr_estimate(p.manifold, x, p.manifold.zero(x), a, a, b, 0.5, 0.5)
    with pytest.raises(DomainError):
        mvr_estimate(p.manifold, x, p.manifold.zero(x), a, a, a, 1.5, 0.5)


# -- runs ------------------------------------------------------------------------

def test_rgda_identity_coupling_stays_stationary():
    p = make_quadratic_saddle(A=np.eye(2), mu=1.0, x0=X0)
    res = run_rgda(p, SolverConfig(gamma=0.1, lam=0.1, T=50))
    assert np.all(res.column("grad_phi") <= 1e-15)


def test_rgda_decreases_stationarity(quad):
    g, lam, eta = gda_step_sizes(quad.constants)
    res = run_rgda(quad, SolverConfig(gamma=g, lam=lam, eta=eta, T=3000, stationarity_every=1))
    assert res.warnings == []
    gp = res.column("grad_phi")
    assert gp[-1] < 0.5 * gp[0]
    assert res.samples == 3000 and len(res.trace) == 3000
    assert [r.t for r in res.trace] == list(range(1, 3001))


def test_rsgda_full_batch_without_replacement_equals_rgda(noisy):
    kw = dict(gamma=0.05, lam=0.3, eta=0.8, T=200, seed=5)
    a = run_rgda(noisy, SolverConfig(algorithm="rgda", **kw))
    b = run_rsgda(noisy, SolverConfig(algorithm="rsgda", batch_size=64, replace=False, **kw))
    assert a.trace == b.trace
    assert np.array_equal(a.x_final, b.x_final) and np.array_equal(a.y_final, b.y_final)


def test_rsgda_batch_larger_than_n_without_replacement(noisy):
    with pytest.raises(DomainError):
        run_rsgda(noisy, SolverConfig(algorithm="rsgda", batch_size=65, replace=False, T=3))


def test_sample_accounting(noisy):
    r = run_rsgda(noisy, SolverConfig(algorithm="rsgda", batch_size=7, T=30))
    assert r.samples == 7 * 30
    m = run_mvr_rsgda(noisy, SolverConfig(algorithm="mvr_rsgda", batch_size=7, T=30, b=0.5, m=8, c1=1, c2=1))
    assert m.samples == 7 * 30 + 7
    assert m.trace[0].samples == 7


def test_determinism_and_zeta(noisy):
    cfg = SolverConfig(algorithm="mvr_rsgda", batch_size=4, T=100, seed=11, c1=2, c2=2)
    a, b = run(noisy, cfg), run(noisy, cfg)
    assert a.trace == b.trace and a.zeta == b.zeta
    assert 1 <= a.zeta <= 100
    assert a.zeta == select_output(100, 11)


def test_feasibility_on_simplex():
    p = make_dro(synthetic_dro_samples(30, 6, seed=1), "stiefel", r=2)
    res = run_mvr_rsgda(p, SolverConfig(algorithm="mvr_rsgda", gamma=0.5, lam=0.1, batch_size=8, T=200,
                                        keep_iterates=True, stationarity_every=0))
    for x, y in zip(res.iterates["x"], res.iterates["y"]):
        assert p.manifold.point_error(x) <= 1e-10
        assert simplex(30).contains(y, 1e-10)


def test_zero_noise_mvr_estimator_exact(quad):
    res = run_mvr_rsgda(quad, SolverConfig(algorithm="mvr_rsgda", gamma=0.1, lam=0.5, c1=0.5, c2=0.5,
                                           batch_size=3, T=1000, keep_iterates=True, stationarity_every=0))
    it = res.iterates
    for x, y, v, w in zip(it["x"], it["y"], it["v"], it["w"]):
        g = quad.grads(x, y)
        assert np.linalg.norm(v - g.v) <= 1e-10 and np.linalg.norm(w - g.w) <= 1e-10


def test_blowup_guard(quad):
    with pytest.raises(NumericError):
        run_rgda(quad, SolverConfig(gamma=1.0, lam=1.0, T=5, blowup=1e-3))


def test_lyapunov_column_logged_for_stochastic_runs(noisy):
    r = run_mvr_rsgda(noisy, SolverConfig(algorithm="mvr_rsgda", T=20, c1=1, c2=1, lyapunov=True))
    assert np.all(np.isfinite(r.column("lyapunov")))


# -- config validation -------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(algorithm="sgd").validate()
    with pytest.raises(ConfigError):
        SolverConfig(eta=0.0).validate()
    with pytest.raises(ConfigError):
        SolverConfig(algorithm="mvr_rsgda", b=3.0, m=8.0).validate()
    with pytest.raises(ConfigError):
        SolverConfig.from_dict({"gama": 0.1})
    SolverConfig(algorithm="mvr_rsgda", b=2.0, m=8.0).validate()


def test_validate_config_gda_boundary(quad):
    c = quad.constants
    g, lam, eta = gda_step_sizes(c)
    assert validate_config(c, SolverConfig(gamma=g, lam=1 / (6 * c.L_tilde), eta=eta)) == []
    w = validate_config(c, SolverConfig(gamma=g, lam=1 / c.L_tilde, eta=eta))
    assert any("lambda" in s and "rgda step condition" in s for s in w)


def test_validate_config_mvr():
    p = make_dro(synthetic_dro_samples(10, 4, seed=0), "sphere")
    c = p.constants.with_(L11=1.0, L12=1.0, L21=1.0, L=5.0)
    cfg = SolverConfig(algorithm="mvr_rsgda", b=0.5, c1=512, c2=512)
    assert not any("mvr condition: c1" in s for s in validate_config(c, cfg))
    assert 2 / (3 * 0.125) + 2 * 4 == pytest.approx(13.333, abs=1e-3)
    assert any("mvr condition: c1" in s for s in validate_config(c, SolverConfig(algorithm="mvr_rsgda", c1=10.0)))
    params = mvr_parameters(c, batch_size=4)
    cfg = SolverConfig(algorithm="mvr_rsgda", batch_size=4, **params)
    assert [s for s in validate_config(c, cfg) if "mvr condition" in s] == []
    assert validate_config(None, cfg)[-1].startswith("problem constants unavailable")
