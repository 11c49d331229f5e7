import numpy as np
import pytest

from recest import History, SplitMix64, derive_seed, get_model, iid_scheme, initial_state, run_trajectory, step
from recest.harness import (
    Ensemble,
    InsufficientData,
    MonteCarloConfig,
    default_workers,
    ReplicationError,
    ar1_batch_ols,
    ergodic_ratio_series,
    estimate_rate,
    log_info_ratio,
    loglog_slope,
    ols_discrepancy,
    run_monte_carlo,
)


def _cfg(**kw):
    base = dict(reps=30, t_max=400, checkpoints=(50, 100, 400), master_seed=7,
                theta_true=(1.0,), theta0=(0.0,))
    base.update(kw)
    return MonteCarloConfig(**base)


@pytest.mark.parametrize("kw", [
    dict(reps=0), dict(t_max=0), dict(checkpoints=(100, 50, 400)), dict(checkpoints=(50, 500)),
    dict(delta=0.5), dict(delta=0.0), dict(a_choice="n"), dict(master_seed=-1),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        _cfg(**kw)


def test_single_replication_matches_trajectory():
    cfg = _cfg(reps=1)
    ens = run_monte_carlo(get_model("cauchy"), cfg)
    recs = run_trajectory(get_model("cauchy"), 1.0, 0.0, 400, derive_seed(7, 0))
    assert ens.seeds[0] == derive_seed(7, 0)
    for k, t in enumerate(cfg.checkpoints):
        assert ens.theta_hat[0, k, 0] == recs[t - 1].theta_hat[0]


def _same(a: Ensemble, b: Ensemble):
    return all(np.array_equal(getattr(a, f), getattr(b, f))
               for f in ("seeds", "checkpoints", "theta_hat", "a", "info"))


@pytest.mark.parametrize("model,theta", [("cauchy", 1.0), ("ar1", 0.5)])
def test_ensemble_deterministic_across_workers(model, theta):
    cfg = _cfg(theta_true=(theta,))
    one = run_monte_carlo(get_model(model), cfg, workers=1)
    assert _same(one, run_monte_carlo(get_model(model), cfg, workers=1))
    assert _same(one, run_monte_carlo(get_model(model), cfg, workers=3))
    assert one.to_csv() == run_monte_carlo(get_model(model), cfg, workers=2).to_csv()


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("RECEST_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("RECEST_WORKERS", "junk")
    assert default_workers() == 1


def test_replication_error_carries_index():
    bad = iid_scheme(lambda th, x: np.array([np.inf]), lambda th: np.eye(1),
                     sampler=lambda th, rng: 0.0)
    with pytest.raises(ReplicationError) as exc:
        run_monte_carlo(bad, _cfg(reps=2))
    assert exc.value.rep == 0 and exc.value.t == 1


def test_csv_schema():
    ens = run_monte_carlo(get_model("cauchy"), _cfg(reps=2))
    lines = ens.to_csv().splitlines()
    assert lines[0] == "rep,t,delta_abs,scaled,ratio"
    assert len(lines) == 1 + 2 * 3
    rep, t, da, sc, _ = lines[2].split(",")
    assert (rep, t) == ("0", "100")
    assert float(sc) == pytest.approx(100**0.4 * float(da), rel=1e-15)


def test_loglog_slope_exact():
    t = np.array([100.0, 316.0, 1000.0, 3162.0, 10_000.0])
    slope, se = loglog_slope(t, t**-0.5)
    assert abs(slope + 0.5) < 1e-12 and se < 1e-12
    with pytest.raises(InsufficientData):
        loglog_slope([1.0], [1.0])


def test_estimate_rate_requirements():
    ens = run_monte_carlo(get_model("cauchy"), _cfg(reps=29))
    with pytest.raises(InsufficientData):
        estimate_rate(ens)
    ens = run_monte_carlo(get_model("cauchy"), _cfg(checkpoints=(100, 400)))
    with pytest.raises(InsufficientData):
        estimate_rate(ens)
    rep = estimate_rate(run_monte_carlo(get_model("cauchy"), _cfg()))
    d = rep.to_dict()
    assert d["spec_version"] and len(d["abs_error_quantiles"]) == 3 and "slope" in d
    assert np.all(np.diff(rep.abs_quantiles, axis=1) >= 0)


def test_batch_ols_examples():
    est = ar1_batch_ols([0.8, 1.0])
    assert np.isnan(est[0]) and est[1] == pytest.approx(1.25, rel=1e-15)
    x, xs = 1.0, []
    for _ in range(20):
        x *= 0.7
        xs.append(x)
    est = ar1_batch_ols(xs, x0=1.0)
    assert np.allclose(est, 0.7, rtol=1e-14)


def test_ols_identity_on_random_trajectories():
    for seed in range(20):
        recs = run_trajectory(get_model("ar1"), 0.5, 0.3, 1000, seed)
        out = ols_discrepancy(recs)
        assert out["t0"] == 2 and out["ok"], out


def test_ols_identity_after_perturbation():
    # restart at t = 50 from a shifted estimate: the gap to OLS must decay like I_t0 / I_t
    scheme = get_model("ar1")
    xs = scheme.sample_path(np.array([0.5]), 600, SplitMix64(3))
    hist, state, recs = History(0.0), initial_state(scheme, 0.0), []
    for t, x in enumerate(xs, start=1):
        state, rec = step(scheme, state, x, hist)
        hist.append(x)
        if t == 50:
            state.theta_hat = state.theta_hat + 0.25
            rec.theta_hat = state.theta_hat
        recs.append(rec)
    th = np.array([r.theta_hat[0] for r in recs])
    star = ar1_batch_ols(xs)
    info = np.array([r.acc for r in recs])
    gap = th[49:] - star[49:]
    assert gap[0] == pytest.approx(0.25, rel=1e-12)
    assert np.allclose(gap, info[49] / info[49:] * gap[0], rtol=1e-10, atol=0)


def test_ergodic_ratio_white_noise():
    cfg = _cfg(reps=30, t_max=5000, checkpoints=(1000, 2500, 5000), theta_true=(0.0,))
    ens = run_monte_carlo(get_model("ar1"), cfg)
    assert abs(ergodic_ratio_series(ens, 0.0)[-1] - 1.0) < 0.05
    with pytest.raises(ValueError):
        ergodic_ratio_series(ens, 1.0)


def test_explosive_ratio_stabilizes(explosive_ensemble):
    lr = log_info_ratio(explosive_ensemble, 1.2)
    change = np.abs(np.expm1(lr[:, 1] - lr[:, 0]))
    assert np.mean(change < 0.01) >= 0.95


@pytest.mark.slow
def test_cauchy_error_decays(cauchy_ensemble):
    med = np.median(cauchy_ensemble.errors, axis=0)
    assert med[-1] < med[0] / 5


@pytest.mark.slow
def test_ar1_ergodic_ratio(ar1_ensemble):
    sub = ar1_ensemble.first(200)
    assert abs(ergodic_ratio_series(sub, 0.5)[-1] / (4 / 3) - 1) < 0.05
