import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recest import History, SplitMix64, gaussian_ar1, get_model, iid_scheme, initial_state, run_trajectory, step
from recest.diagnostics import (
    ConditionReport,
    GridSpec,
    MaxDepth,
    adaptive_simpson,
    additive_lambda,
    check_B1,
    check_B2,
    check_M_conditions,
    check_R_conditions,
    conditional_moments,
    estimate_B_matrix,
    k_trace,
    ktrace_csv,
    neg_term,
    plateaus,
    prop_A2_bound,
    prop_A2_sums,
    quadrature,
    r_condition_inputs,
    robbins_siegmund_monitor,
    script_N,
    script_n_trace,
)
from recest.models import cauchy_density, cauchy_psi

PI2_6_MINUS_1 = 0.64493406684822643647
SUM2_AT_1E6 = 0.64493306684972643431   # sum_{n=1}^{1e6} 1/(n+1)^2, mpmath
SUM1_AT_1E4 = 8.7877060260453821642    # H_10001 - 1, mpmath


def _zero_scheme():
    return iid_scheme(lambda th, x: np.zeros(1), lambda th: np.eye(1),
                      sampler=lambda th, rng: rng.random(),
                      drift_fn=lambda th, u: np.zeros(1), moment_fn=lambda th, u: np.zeros((1, 1)))


# --- grids and reports -------------------------------------------------------

def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1.0, -1.0)
    with pytest.raises(ValueError):
        GridSpec(0.0, math.inf)
    g = GridSpec.symmetric(2.0, 5)
    assert np.array_equal(g.points(), [-2.0, -1.0, 0.0, 1.0, 2.0])


def test_report_json_round_trip():
    rep = check_B1(get_model("cauchy"), np.eye(1), GridSpec.symmetric(1.0, 5))
    d = json.loads(rep.to_json())
    assert d["spec_version"] and d["condition"] == "B1" and d["verdict"] is True
    assert set(d) >= {"condition", "region", "verdict", "witnesses", "parameters"}


def test_plateaus():
    assert plateaus(np.cumsum(1.0 / np.arange(1, 1000) ** 3))
    assert not plateaus(np.cumsum(1.0 / np.arange(1, 1000)))
    assert plateaus([])


# --- B1 / B2 / B matrix -----------------------------------------------------

def test_B1_holds_inside_region():
    rep = check_B1(get_model("cauchy"), np.eye(1), GridSpec.symmetric(1.9, 41))
    assert rep.holds
    assert rep.region["holds_for_abs_u_le"] == pytest.approx(1.9)


def test_B1_violation_outside_region():
    rep = check_B1(get_model("cauchy"), np.eye(1), GridSpec.symmetric(3.0, 41))
    assert not rep.holds
    bad = rep.violations()
    assert 3.0 in bad["u"] and -3.0 in bad["u"]
    i = int(np.flatnonzero(rep.witnesses["u"] == 3.0)[0])
    assert rep.witnesses["lhs"][i] == pytest.approx(-36 / 13, rel=1e-14)
    assert rep.witnesses["rhs"][i] == -4.5
    # every violation lies beyond the analytic boundary |u| = 2
    assert np.all(np.abs(bad["u"]) > 2.0)
    assert rep.region["holds_for_abs_u_le"] < 2.0


def test_B1_at_origin():
    rep = check_B1(get_model("cauchy"), np.eye(1), GridSpec.symmetric(1.0, 3))
    assert rep.witnesses["u"][1] == 0.0 and rep.witnesses["lhs"][1] == 0.0
    assert rep.verdicts[1]


def test_B1_without_closed_form_uses_quadrature():
    s = iid_scheme(lambda th, x: np.array([cauchy_psi(th[0], x)]), lambda th: 0.5 * np.eye(1),
                   density=cauchy_density)
    rep = check_B1(s, np.eye(1), GridSpec.symmetric(1.9, 5))
    assert rep.holds and rep.parameters["drift_source"] == ["quadrature"]
    assert any("quadrature" in n for n in rep.notes)


def test_B2_values():
    rep = check_B2(get_model("cauchy"), GridSpec.symmetric(1.0, 41))
    i0 = int(np.flatnonzero(rep.witnesses["u"] == 0.0)[0])
    assert rep.witnesses["normalized_moment"][i0] == pytest.approx(2.0, rel=1e-15)
    # 4 m2(u) increases on |u| <= 2/sqrt(3); the grid sup sits at |u| = 1
    assert rep.witnesses["sup"] == pytest.approx(56 / 25, rel=1e-14)
    assert abs(rep.witnesses["argsup"]) == 1.0
    assert rep.holds
    assert not check_B2(get_model("cauchy"), GridSpec.symmetric(1.0, 41), threshold=2.0).holds


def test_B2_zero_scheme():
    rep = check_B2(_zero_scheme(), GridSpec.symmetric(1.0, 11))
    assert rep.witnesses["sup"] == 0.0


def test_B_matrix():
    B, st_ = estimate_B_matrix(get_model("cauchy"))
    assert B[0, 0] == pytest.approx(-1.0, abs=1e-6)
    assert st_.stable and st_.spectral_abscissa == pytest.approx(-0.5, abs=1e-6)
    B, st_ = estimate_B_matrix(lambda u: -u / 2)
    assert B[0, 0] == pytest.approx(-0.5) and not st_.stable
    B, st_ = estimate_B_matrix(lambda u: -u)
    assert st_.stable


def test_B_matrix_higher_dim():
    A = np.array([[-2.0, 0.3, 0.1], [0.2, -1.5, 0.0], [0.0, 0.4, -3.0]])
    B, st_ = estimate_B_matrix(lambda u: A @ u, dim=3)
    assert np.allclose(B, A, atol=1e-8)
    assert st_.stable and "sufficient" in st_.method
    rot = np.array([[-0.4, 2.0], [-2.0, -0.4]])
    _, st2 = estimate_B_matrix(lambda u: rot @ u, dim=2)
    assert not st2.stable and st2.spectral_abscissa == pytest.approx(0.1)


# --- M and R ----------------------------------------------------------------

def test_M_conditions_ar1():
    rep = check_M_conditions(gaussian_ar1(), GridSpec(-5.0, 5.0, 41))
    w = rep.witnesses
    assert w["linear_gdot"] and rep.holds
    assert w["m2_inf"] == w["m2_sup"] == 1.0
    assert w["m3_B"] == 1.0


@pytest.mark.slow
def test_M1_stationary_ar1():
    fam, scheme = gaussian_ar1(), get_model("ar1")
    grid = GridSpec(-5.0, 5.0, 11)
    ok = 0
    for seed in range(100):
        xs = scheme.sample_path(np.array([0.5]), 10_000, SplitMix64(seed))
        ok += check_M_conditions(fam, grid, xs).witnesses["m1_tail_max"] < 0.01
    assert ok >= 95


def test_neg_term_example():
    assert neg_term(1.0, 10.0, 0.1) == pytest.approx(-0.0679, rel=1e-12)
    assert 0.1 - additive_lambda(1.0, 10.0, 0.1) == pytest.approx(-0.0679, rel=1e-12)


def test_R_conditions_identity_normalizer():
    t = np.arange(1, 4001, dtype=float)
    rep = check_R_conditions(t, 1.0 / t, np.zeros_like(t), 1.0 / t**2, epsilon=0.5)
    r1 = rep.witnesses["r1_ratio"]
    assert math.isnan(r1[0]) and np.allclose(r1[1:], 1.0 / (t[1:] - 1.0))
    assert rep.witnesses["r1_tail_max"] == pytest.approx(1.0 / 3000)
    assert rep.verdicts[0] and rep.verdicts[1]
    with pytest.raises(ValueError):
        check_R_conditions(t[::-1], t, t, t)
    with pytest.raises(ValueError):
        check_R_conditions(t, t, t, t, epsilon=1.0)


def test_R_inputs_along_ar1():
    recs = run_trajectory(get_model("ar1"), 0.5, 0.0, 3000, 4)
    s = r_condition_inputs(get_model("ar1"), recs, 0.5, 0.0)
    assert s["a"][0] == 0.0 and np.all(np.diff(s["a"]) >= 0)
    rep = check_R_conditions(s["a"], s["lambda"], s["P"], s["moment"], epsilon=0.5)
    assert rep.verdicts[0]


# --- K and N traces ---------------------------------------------------------

def test_k_trace_hand_example():
    # theta = 0, theta_0 = 0, X_1 = 1 gives theta_1 = 2, so Delta_1 = 2
    scheme = get_model("cauchy")
    hist = History()
    state = initial_state(scheme, 0.0)
    recs = []
    for x in (1.0, 0.3):
        state, r = step(scheme, state, x, hist)
        hist.append(x)
        recs.append(r)
    kt = k_trace(scheme, recs, 0.0, 0.0, C=1.0, delta=0.0)
    assert kt.dV[1] == 0.0
    assert kt.drift[1] == pytest.approx(-2.0, rel=1e-14)
    assert kt.moment[1] == pytest.approx(0.5, rel=1e-14)
    assert kt.K[1] == pytest.approx(-1.5, rel=1e-14)


def test_k_trace_zero_scheme():
    s = _zero_scheme()
    recs = run_trajectory(s, 0.0, 1.5, 50, 1)
    kt = k_trace(s, recs, 0.0, 1.5, delta=0.3)
    assert np.array_equal(kt.K, kt.dV)
    assert kt.dV[0] == pytest.approx(1.0 ** 0.6 * 2.25)


def test_k_trace_rejects_bad_delta():
    recs = run_trajectory(get_model("cauchy"), 1.0, 0.0, 5, 1)
    with pytest.raises(ValueError):
        k_trace(get_model("cauchy"), recs, 1.0, 0.0, delta=0.5)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32))
def test_k_trace_positive_part_envelope(seed):
    # with |Delta_{t-1}| <= 2 and t >= 2 the drift cancels dV, leaving
    # K_t <= moment <= t^0.8 (2/t)^2 (9/16) = 2.25 t^-1.2
    scheme = get_model("cauchy")
    recs = run_trajectory(scheme, 1.0, 0.0, 1000, seed)
    kt = k_trace(scheme, recs, 1.0, 0.0, delta=0.4)
    prev = np.concatenate([[0.0], [r.theta_hat[0] for r in recs[:-1]]]) - 1.0
    t = kt.t.astype(float)
    sel = (t >= 2) & (np.abs(prev) <= 2.0)
    assert np.all(kt.K[sel] <= 2.25 * t[sel] ** -1.2 * (1 + 1e-12))


def test_k_trace_delta_zero_plateau():
    scheme = get_model("cauchy")
    recs = run_trajectory(scheme, 1.0, 0.0, 1000, 2)
    kt = k_trace(scheme, recs, 1.0, 0.0, delta=0.0)
    rs = robbins_siegmund_monitor(kt.V_prev, np.zeros(len(kt.t)), kt.premise_terms, kt.zeta)
    assert rs.premise_holds and rs.x_converges


def test_ktrace_csv_columns():
    recs = run_trajectory(get_model("ar1"), 0.5, 0.0, 20, 3)
    kt = k_trace(get_model("ar1"), recs, 0.5, 0.0)
    nt = script_n_trace(get_model("ar1"), recs, 0.5, 0.0)
    lines = ktrace_csv(kt, nt).splitlines()
    assert lines[0] == "t,V,dV,drift,moment,K,premise_partial_sum,scriptN"
    assert len(lines) == 21 and np.all(np.isfinite(nt.N))


def test_script_N_examples():
    fam = gaussian_ar1()
    assert script_N(fam, 0.3, 1.0, 1.0, 2.0) == pytest.approx(-0.5, rel=1e-14)
    assert script_N(fam, 0.3, 0.0, 1.5, 2.0) == pytest.approx(1.5 / 4.0, rel=1e-15)
    with pytest.raises(ValueError):
        script_N(fam, 0.3, 0.1, 1.0, 0.0)


def test_script_n_trace_ar1_signs():
    recs = run_trajectory(get_model("ar1"), 0.5, 0.0, 2000, 8)
    nt = script_n_trace(get_model("ar1"), recs, 0.5, 0.0, epsilon=0.1)
    assert nt.N[0] == 0.0     # H_1 = 0
    assert plateaus(nt.g3_partial_sum)
    assert not plateaus(nt.g2_partial_sum)


# --- quadrature -------------------------------------------------------------

def test_quadrature_examples():
    assert abs(quadrature(lambda x: cauchy_density(0.0, x)) - 1.0) < 1e-9
    assert abs(quadrature(lambda x: cauchy_psi(1.0, x) * cauchy_density(0.0, x)) + 0.4) < 1e-6
    assert abs(quadrature(lambda x: cauchy_psi(0.0, x) ** 2 * cauchy_density(0.0, x)) - 0.5) < 1e-6
    assert abs(quadrature(lambda x: math.exp(-x * x)) - math.sqrt(math.pi)) < 1e-9


def test_adaptive_simpson():
    assert adaptive_simpson(lambda x: x**3 - 2 * x, 0.0, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-11)
    with pytest.raises(MaxDepth):
        adaptive_simpson(lambda x: math.sin(1.0 / x) if x else 0.0, 0.0, 1.0, 1e-14, max_depth=8)
    with pytest.raises(ValueError):
        quadrature(math.exp, tol=1e-14)


def test_conditional_moments_sources():
    b, M, src = conditional_moments(get_model("cauchy"), 0.0, 1.0)
    assert src == "closed-form" and b[0] == pytest.approx(-0.4) and M[0, 0] == pytest.approx(0.56)


# --- monitors ---------------------------------------------------------------

def test_robbins_siegmund_examples():
    n = np.arange(1, 2001, dtype=float)
    z = np.zeros_like(n)
    rep = robbins_siegmund_monitor(1.0 / n, z, z, z)
    assert rep.premise_holds and rep.x_converges and rep.conclusion_holds
    assert rep.beta_sums[-1] == 0.0
    rep = robbins_siegmund_monitor(1.0 / n, z, 1.0 / n, z)
    assert not rep.premise_holds
    with pytest.raises(ValueError):
        robbins_siegmund_monitor(n, -n, z, z)


def test_prop_A2_examples():
    d = np.arange(1, 10**6 + 2, dtype=float)   # d_n = n + 1
    s1, s2 = prop_A2_sums(d, 1.0)
    assert s2[-1] == pytest.approx(SUM2_AT_1E6, rel=1e-12)
    assert abs(s2[-1] - PI2_6_MINUS_1) < 1e-3
    assert np.all(s2 <= prop_A2_bound(1.0, 1.0))
    assert s1[10**4 - 1] == pytest.approx(SUM1_AT_1E4, rel=1e-12)
    c1, c2 = prop_A2_sums(np.full(10, 3.0), 0.5)
    assert np.all(c1 == 0) and np.all(c2 == 0)
    with pytest.raises(ValueError):
        prop_A2_sums([0.0, 1.0], 1.0)


@given(st.lists(st.floats(0, 100), min_size=1, max_size=200), st.floats(0.01, 5.0),
       st.floats(0.1, 10))
def test_prop_A2_bound_holds(increments, eps, d0):
    d = d0 + np.concatenate([[0.0], np.cumsum(increments)])
    _, s2 = prop_A2_sums(d, eps)
    assert np.all(s2 <= prop_A2_bound(d0, eps) * (1 + 1e-12))
