"""Block-length cost accounting: waterline exponents, second-order
coefficients, per-edge bounds, budget optimization, and chart data."""

import numpy as np
import pytest

from treecost import (
    EnumerationCapExceeded,
    InvalidEpsilon,
    InvalidEta,
    InvalidGrid,
    Spectrum,
    ThresholdBudgetExceeded,
    approx_bounds,
    decompose,
    exact_edge_cost,
    figure_data,
    inverse_normal_cdf,
    make_named_state,
    normal_cdf,
    normal_pdf,
    optimize_thresholds,
    schmidt_wrt_edge,
    second_order,
    spectrum_entropy,
)

from helpers import (
    brute_waterline_bits,
    entropy_longdouble,
    line_tree,
    random_pure_state,
    series_inverse_cdf,
    series_normal_cdf,
    std_log_longdouble,
)

QUARTER_SPEC = Spectrum(values=(0.75, 0.25), multiplicities=(1, 1))
# frozen references, recomputed below through a wider float path
QUARTER_ENTROPY = 0.8112781244591328
QUARTER_STD = 0.6863088948351165


# ----------------------------------------------------------------- spectra


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(values=(0.5, 0.5), multiplicities=(1,))
    with pytest.raises(ValueError):
        Spectrum(values=(), multiplicities=())
    with pytest.raises(ValueError):
        Spectrum(values=(0.5, -0.5), multiplicities=(1, 1))
    with pytest.raises(ValueError):
        Spectrum(values=(0.25, 0.75), multiplicities=(1, 1))  # ascending
    with pytest.raises(ValueError):
        Spectrum(values=(0.6, 0.6), multiplicities=(1, 1))  # not descending
    with pytest.raises(ValueError):
        Spectrum(values=(0.9, 0.2), multiplicities=(1, 1))  # mass 1.1
    with pytest.raises(ValueError):
        Spectrum(values=(0.5,), multiplicities=(0,))


def test_from_eigenvalues_merges_and_drops():
    spectrum = Spectrum.from_eigenvalues([0.5, 0.5 - 1e-15, 2e-17])
    assert spectrum.values == (0.5,)
    assert spectrum.multiplicities == (2,)
    spec2 = Spectrum.from_eigenvalues([0.7, 0.3])
    assert spec2.values == (0.7, 0.3)
    assert spec2.support_size == 2
    with pytest.raises(ValueError):
        Spectrum.from_eigenvalues([])
    with pytest.raises(ValueError):
        Spectrum.from_eigenvalues([0.0, -1.0])


def test_from_edge_squares_schmidt_coefficients():
    t = line_tree(4)
    s = make_named_state("w", 4)
    e = t.edge_by_label(2)
    spectrum = Spectrum.from_edge(s, t, e)
    sd = schmidt_wrt_edge(s, t, e)
    assert np.allclose(
        sorted(np.repeat(spectrum.values, spectrum.multiplicities), reverse=True),
        sorted(sd.coefficients**2, reverse=True),
    )


def test_entropy_and_std_match_longdouble_recomputation():
    rng = np.random.default_rng(301)
    for _ in range(10):
        raw = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
        spectrum = Spectrum.from_eigenvalues(raw)
        flat = np.repeat(spectrum.values, spectrum.multiplicities)
        assert abs(spectrum.entropy - entropy_longdouble(flat)) < 1e-12
        assert abs(spectrum.std_log - std_log_longdouble(flat)) < 1e-10
    assert abs(QUARTER_SPEC.entropy - QUARTER_ENTROPY) < 1e-15
    assert abs(QUARTER_SPEC.std_log - QUARTER_STD) < 1e-15


def test_flat_spectrum_has_zero_spread():
    flat = Spectrum(values=(0.25,), multiplicities=(4,))
    assert abs(flat.entropy - 2.0) < 1e-15
    assert flat.std_log == 0.0


# --------------------------------------------------------------- waterline


def test_waterline_closed_form_for_pure_spectrum():
    pure = Spectrum(values=(1.0,), multiplicities=(1,))
    for eps in (0.01, 0.1, 0.5):
        for n in (1, 3, 7):
            want = np.log2(1.0 / eps)
            assert abs(spectrum_entropy(pure, n, eps) - want) < 1e-12


def test_waterline_closed_form_for_flat_spectra():
    # d levels of weight 1/d: the line sits at eps/d^n
    for d, n, eps in [(4, 1, 0.5), (2, 3, 0.3), (3, 2, 0.125)]:
        flat = Spectrum(values=(1.0 / d,), multiplicities=(d,))
        want = n * np.log2(d) + np.log2(1.0 / eps)
        assert abs(spectrum_entropy(flat, n, eps) - want) < 1e-12
    assert abs(spectrum_entropy(
        Spectrum(values=(0.25,), multiplicities=(4,)), 1, 0.5
    ) - 3.0) < 1e-12


def test_waterline_matches_brute_force_products():
    rng = np.random.default_rng(307)
    for _ in range(25):
        d = int(rng.integers(2, 4))
        raw = rng.dirichlet(np.ones(d))
        spectrum = Spectrum.from_eigenvalues(raw)
        flat = np.repeat(spectrum.values, spectrum.multiplicities)
        n = int(rng.integers(1, 9))
        eps = float(rng.uniform(0.01, 0.95))
        got = spectrum_entropy(spectrum, n, eps)
        want = brute_waterline_bits(flat, n, eps)
        assert abs(got - want) < 1e-9


def test_waterline_monotonicity_in_eps():
    vals = [spectrum_entropy(QUARTER_SPEC, 4, e) for e in (0.02, 0.1, 0.4, 0.8)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_per_copy_exponent_decreases_toward_the_entropy():
    # finite-block overhead shrinks with n, approaching the entropy per copy
    eps = 0.05
    per_copy = [
        spectrum_entropy(QUARTER_SPEC, n, eps) / n for n in (25, 50, 100, 200, 400)
    ]
    assert all(a > b for a, b in zip(per_copy, per_copy[1:]))
    assert per_copy[0] > QUARTER_ENTROPY
    assert per_copy[-1] - QUARTER_ENTROPY < 0.09
    gaps = [p - QUARTER_ENTROPY for p in per_copy]
    assert gaps[-1] < 0.5 * gaps[0]


def test_waterline_rejects_bad_arguments():
    with pytest.raises(InvalidEpsilon):
        spectrum_entropy(QUARTER_SPEC, 2, 0.0)
    with pytest.raises(InvalidEpsilon):
        spectrum_entropy(QUARTER_SPEC, 2, 1.0)
    with pytest.raises(ValueError):
        spectrum_entropy(QUARTER_SPEC, 0, 0.5)


def test_type_class_enumeration_cap():
    # three distinct levels; equal levels would merge and dodge the cap
    wide = Spectrum(values=(0.5, 0.3, 0.2), multiplicities=(1, 1, 1))
    with pytest.raises(EnumerationCapExceeded):
        spectrum_entropy(wide, 50_000, 0.5)


# ------------------------------------------------------------ second order


def test_second_order_coefficients_frozen_values():
    so = second_order(QUARTER_SPEC, 0.04)
    assert abs(so.a - QUARTER_ENTROPY) < 1e-12
    assert abs(so.s - QUARTER_STD) < 1e-12
    assert abs(so.b - 2.3010528804172163) < 1e-9


def test_second_order_b_via_independent_inverse():
    for eps in (0.01, 0.04, 0.2, 0.6):
        so = second_order(QUARTER_SPEC, eps)
        want = -QUARTER_STD * series_inverse_cdf(eps * eps / 4.0)
        assert abs(so.b - want) < 1e-8
        assert so.b > 0.0


def test_second_order_b_decreases_with_looser_budgets():
    bs = [second_order(QUARTER_SPEC, e).b for e in (0.01, 0.05, 0.2, 0.5)]
    assert all(a > b for a, b in zip(bs, bs[1:]))


def test_second_order_on_flat_spectrum_is_flat():
    so = second_order(Spectrum(values=(0.25,), multiplicities=(4,)), 0.1)
    assert so.a == 2.0
    assert so.s == 0.0
    assert so.b == 0.0


def test_second_order_rejects_bad_eps():
    with pytest.raises(InvalidEpsilon):
        second_order(QUARTER_SPEC, 0.0)
    with pytest.raises(InvalidEpsilon):
        second_order(QUARTER_SPEC, 1.5)


# ---------------------------------------------------------------- quantile


def test_normal_cdf_matches_series_oracle():
    for x in np.linspace(-8, 8, 101):
        assert abs(normal_cdf(x) - series_normal_cdf(x)) < 1e-14


def test_quantile_round_trips():
    for p in [1e-12, 1e-6, 0.02425, 0.3, 0.5, 0.8, 0.97575, 1 - 1e-9]:
        x = inverse_normal_cdf(p)
        assert abs(normal_cdf(x) - p) < 1e-12 * p + 1e-15
    # the upper tail loses resolution because p saturates toward 1, so the
    # x round trip is only checked where the float grid can support it
    for x in np.linspace(-4.5, 4.5, 29):
        assert abs(inverse_normal_cdf(normal_cdf(x)) - x) < 1e-9
    for x in (-9.0, -7.0, -5.5):
        assert abs(inverse_normal_cdf(normal_cdf(x)) - x) < 1e-9


def test_quantile_symmetry_and_center():
    assert inverse_normal_cdf(0.5) == pytest.approx(0.0, abs=1e-12)
    for p in (0.001, 0.1, 0.25):
        assert abs(
            inverse_normal_cdf(p) + inverse_normal_cdf(1.0 - p)
        ) < 1e-10


def test_quantile_rejects_boundary():
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError):
            inverse_normal_cdf(bad)
    assert normal_pdf(0.0) == pytest.approx(1.0 / np.sqrt(2 * np.pi))


# ------------------------------------------------------------------ bounds


def test_exact_edge_cost_is_log_rank():
    t = line_tree(4)
    dec = decompose(make_named_state("w", 4), t)
    assert exact_edge_cost(dec) == {1: 1.0, 2: 1.0, 3: 1.0}
    dec5 = decompose(make_named_state("random", 5, seed=1), line_tree(5))
    want = {lab: float(np.log2(r)) for lab, r in dec5.ranks.items()}
    assert exact_edge_cost(dec5) == want


def test_approx_bounds_bracket_the_exact_cost():
    t = line_tree(4)
    s = make_named_state("w", 4)
    rep = approx_bounds(s, t, n=100, eps=0.04)
    assert rep.n == 100
    assert len(rep.rows) == 3
    for row in rep.rows:
        assert row.lower <= row.exact_bits + 1e-9
        assert row.exact_bits <= row.upper + 1e-9
        assert row.lower >= 0.0
    assert rep.lower_total <= rep.exact_total <= rep.upper_total
    assert rep.exact_total == 3.0


def test_approx_bounds_upper_tightens_with_block_length():
    t = line_tree(4)
    s = make_named_state("w", 4)
    uppers = [
        approx_bounds(s, t, n=n, eps=0.1).upper_total for n in (10, 40, 160)
    ]
    assert all(a > b for a, b in zip(uppers, uppers[1:]))


def test_approx_bounds_threshold_semantics():
    t = line_tree(4)
    s = make_named_state("w", 4)
    rep = approx_bounds(s, t, n=20, eps=0.1, thresholds={1: 0.1, 3: 0.0})
    by_edge = {row.edge: row for row in rep.rows}
    # an absent edge defaults to a zero share; zero shares report the
    # support rank instead of a smoothed exponent
    assert by_edge[2].threshold == 0.0
    assert by_edge[2].upper_method == "exact-rank"
    assert by_edge[2].upper == 1.0
    assert by_edge[3].upper_method == "exact-rank"
    assert by_edge[1].upper_method in ("type-class", "gaussian")
    assert by_edge[1].upper < 1.0 + np.log2(1 / (0.1 * 0.1 / 4)) / 20


def test_approx_bounds_rejects_budget_overruns():
    t = line_tree(4)
    s = make_named_state("w", 4)
    with pytest.raises(ThresholdBudgetExceeded):
        approx_bounds(s, t, n=10, eps=0.1, thresholds={1: 0.2, 2: 0.0, 3: 0.0})
    with pytest.raises(ThresholdBudgetExceeded):
        approx_bounds(s, t, n=10, eps=0.1, thresholds={1: 0.05, 9: 0.01})
    with pytest.raises(InvalidEpsilon):
        approx_bounds(s, t, n=10, eps=0.0)
    with pytest.raises(ValueError):
        approx_bounds(s, t, n=0, eps=0.1)


def test_approx_bounds_eta_handling():
    t = line_tree(2)
    s = make_named_state("bell", 2)
    rep = approx_bounds(s, t, n=50, eps=0.1, eta=0.001)
    assert rep.rows[0].lower >= 0.0
    with pytest.raises(InvalidEta):
        approx_bounds(s, t, n=50, eps=0.1, eta=2.0)
    with pytest.raises(InvalidEta):
        approx_bounds(s, t, n=50, eps=0.1, eta=-0.5)


def test_approx_bounds_gaussian_fallback_for_huge_blocks():
    t = line_tree(2, dims=(3, 3))
    s = make_named_state("random", 2, dims=(3, 3), seed=7)
    rep = approx_bounds(s, t, n=200_000, eps=0.1)
    assert rep.rows[0].upper_method == "gaussian"
    spectrum = Spectrum.from_edge(s, t, t.edge_by_label(1))
    so_a = spectrum.entropy
    assert abs(rep.rows[0].upper - so_a) < 0.05  # near the entropy per copy


def test_lower_bound_approaches_entropy_for_long_blocks():
    t = line_tree(2, dims=(4, 4))
    s = make_named_state("random", 2, dims=(4, 4), seed=3)
    spectrum = Spectrum.from_edge(s, t, t.edge_by_label(1))
    rep = approx_bounds(s, t, n=5000, eps=0.05)
    assert rep.rows[0].lower > spectrum.entropy - 0.2
    assert rep.rows[0].lower <= np.log2(spectrum.support_size) + 1e-12


# --------------------------------------------------------------- optimizer


def test_optimizer_closed_form_on_the_three_cut_chain():
    t = line_tree(4)
    s = make_named_state("w", 4)
    eps = 0.04
    th = optimize_thresholds(s, t, eps)
    assert th[2] == 0.0
    assert abs(th[1] - eps / np.sqrt(2)) < 1e-9
    assert abs(th[3] - eps / np.sqrt(2)) < 1e-9


def test_optimizer_spends_the_budget_exactly():
    rng = np.random.default_rng(311)
    t = line_tree(4, dims=(2, 3, 3, 2))
    s = random_pure_state(rng, t.dims)
    eps = 0.08
    th = optimize_thresholds(s, t, eps)
    assert abs(sum(v * v for v in th.values()) - eps * eps) < 1e-12


def test_optimizer_gives_flat_cuts_nothing():
    t = line_tree(4)
    th = optimize_thresholds(make_named_state("ghz", 4), t, 0.1)
    assert th == {1: 0.0, 2: 0.0, 3: 0.0}


def test_optimizer_gives_a_lone_skewed_cut_everything():
    # product of a bell pair (flat cut) with a skewed two-party state
    t = line_tree(4)
    amps = np.kron(
        np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2),
        np.array([np.sqrt(0.9), 0.0, 0.0, np.sqrt(0.1)]),
    )
    from treecost import PureState

    s = PureState(amps, (2, 2, 2, 2))
    th = optimize_thresholds(s, t, 0.06)
    assert th[1] == 0.0  # cut {1} is flat
    assert th[2] == 0.0  # cut {1,2} splits the product exactly
    assert abs(th[3] - 0.06) < 1e-12


def test_optimizer_equalizes_the_marginal_benefit():
    # stationarity: s_e * d/du inverse_cdf(u_e/4) agree across active edges
    rng = np.random.default_rng(313)
    t = line_tree(4, dims=(2, 3, 3, 2))
    s = random_pure_state(rng, t.dims)
    th = optimize_thresholds(s, t, 0.1)
    marginals = []
    for e in t.edges:
        spec_std = Spectrum.from_edge(s, t, e).std_log
        share = th[e.label]
        if share == 0.0 or spec_std == 0.0:
            continue
        u = share * share
        q = inverse_normal_cdf(u / 4.0)
        marginals.append(spec_std / normal_pdf(q))
    assert len(marginals) >= 2
    ref = marginals[0]
    for m in marginals[1:]:
        assert abs(m - ref) / ref < 1e-6


def test_optimizer_rejects_bad_budget():
    t = line_tree(3)
    s = make_named_state("ghz", 3)
    with pytest.raises(InvalidEpsilon):
        optimize_thresholds(s, t, 0.0)
    with pytest.raises(InvalidEpsilon):
        optimize_thresholds(s, t, 1.0)


# ------------------------------------------------------------- chart data


def test_quarter_cut_chart_tracks_the_fixed_spectrum():
    cols, rows = figure_data("w-second-order")
    assert cols == ["N", "a", "b"]
    ns = [r[0] for r in rows]
    assert ns == list(range(4, 81, 4))
    for _, a, b in rows:
        assert abs(a - QUARTER_ENTROPY) < 1e-12
        assert b > 0.0
    bs = [r[2] for r in rows]
    assert all(x < y for x, y in zip(bs, bs[1:]))


def test_rate_comparison_chart_orders_the_three_curves():
    cols, rows = figure_data("rate-comparison")
    assert cols == ["n", "rate_uniform", "rate_optimized", "rate_lower"]
    assert rows[0][0] == 10 and rows[-1][0] == 100_000
    for n, uni, opt, low in rows:
        assert low <= opt < uni
    # all three curves settle on the entropy
    last = rows[-1]
    assert max(abs(v - QUARTER_ENTROPY) for v in last[1:]) < 0.01


def test_figure_data_rejects_unknown_kind():
    with pytest.raises(InvalidGrid):
        figure_data("mystery")
