"""Multi-start optimizer behavior: determinism, orderings, baselines."""

import numpy as np
import pytest
from scipy.optimize import minimize

from selfbackhaul.feasibility import constraints
from selfbackhaul.model import PowerAllocation, Scheme
from selfbackhaul.optimizer import (NoFeasiblePointError, OptimizerOptions,
                                   baseline, optimize, repair_start)
from selfbackhaul.rates import rates
import selfbackhaul.optimizer as optimizer_mod

from conftest import make_params

FAST = dict(n_starts=10, rng_seed=42)


def test_options_validation():
    with pytest.raises(ValueError):
        OptimizerOptions(n_starts=0).check()
    with pytest.raises(ValueError):
        OptimizerOptions(feasibility_tol=0.0).check()


def test_best_point_feasible_and_dominant(reference_params):
    result = optimize(Scheme.HYBRID_RELAY, reference_params,
                      OptimizerOptions(**FAST))
    assert result.best_report.feasible
    finite = [s.objective for s in result.starts
              if s.feasible and np.isfinite(s.objective)]
    assert result.best_rates.c_s >= max(finite)
    # the reported best re-evaluates exactly through the rate engine
    again = rates(Scheme.HYBRID_RELAY, reference_params, result.best_alloc)
    assert again.c_s == result.best_rates.c_s


def test_determinism_same_seed(reference_params):
    a = optimize(Scheme.HALF_DUPLEX, reference_params,
                 OptimizerOptions(**FAST))
    b = optimize(Scheme.HALF_DUPLEX, reference_params,
                 OptimizerOptions(**FAST))
    assert a.best_rates.c_s == b.best_rates.c_s
    assert a.best_alloc == b.best_alloc
    assert np.array_equal([s.objective for s in a.starts],
                          [s.objective for s in b.starts], equal_nan=True)


def test_hd_optimum_independent_of_si_cancellation():
    opts = OptimizerOptions(**FAST)
    lo = optimize(Scheme.HALF_DUPLEX, make_params(si_cancellation_db=60),
                  opts)
    hi = optimize(Scheme.HALF_DUPLEX, make_params(si_cancellation_db=120),
                  opts)
    assert lo.best_rates.c_s == pytest.approx(
        hi.best_rates.c_s, abs=2 * opts.objective_tol)


def test_scheme_ordering_at_poor_si_cancellation():
    opts = OptimizerOptions(**FAST)
    params = make_params(si_cancellation_db=60)
    fd = optimize(Scheme.FULL_DUPLEX, params, opts).best_rates.c_s
    hd = optimize(Scheme.HALF_DUPLEX, params, opts).best_rates.c_s
    assert fd < hd


def test_scheme_ordering_at_strong_si_cancellation():
    opts = OptimizerOptions(**FAST)
    params = make_params(si_cancellation_db=130)
    fd = optimize(Scheme.FULL_DUPLEX, params, opts).best_rates.c_s
    hd = optimize(Scheme.HALF_DUPLEX, params, opts).best_rates.c_s
    rl = optimize(Scheme.HYBRID_RELAY, params, opts).best_rates.c_s
    assert fd > rl and fd > hd


@pytest.mark.parametrize("scheme", list(Scheme))
def test_optimized_dominates_baseline(scheme, reference_params):
    opts = OptimizerOptions(**FAST)
    best = optimize(scheme, reference_params, opts).best_rates.c_s
    rb, _report = baseline(scheme, reference_params)
    assert best >= rb.c_s - 1e-6


def test_fd_baseline_nearly_dead_downlink(reference_params):
    rb, report = baseline(Scheme.FULL_DUPLEX, reference_params)
    assert rb.c_d < 2.0                      # IUI-choked downlink
    assert rb.c_s < 5.0
    optimized = optimize(Scheme.FULL_DUPLEX, reference_params,
                         OptimizerOptions(**FAST)).best_rates.c_s
    assert optimized > 30 * rb.c_s
    assert not report.feasible               # raw point violates constraints


def test_baseline_allocation_convention(reference_params):
    rb, _ = baseline(Scheme.HALF_DUPLEX, reference_params)
    a = rb.alloc
    assert a.p_d == a.p_bh_u == reference_params.p_an_max / 2
    assert a.p_u == reference_params.p_ue_max
    assert a.p_bh_d == reference_params.p_bh_d_max
    assert a.eta == 0.5 and a.p_u_d2d == 0.0
    rl, _ = baseline(Scheme.HYBRID_RELAY, reference_params)
    assert rl.alloc.p_d == rl.alloc.p_bh_u == reference_params.p_an_max


def test_baseline_d2d_power_only_with_pairs():
    rb, _ = baseline(Scheme.FULL_DUPLEX, make_params(k_d2d=2))
    assert rb.alloc.p_u_d2d == pytest.approx(316.22776601683793, rel=1e-12)


def test_rl_baseline_ul_insensitive_to_vanishing_si():
    # at the reference point the delivered UL rate is capped by the
    # alpha-free outgoing backhaul and the rho band, so the SI level
    # cannot move it (raw-rate gap would be 5.5e-2 relative)
    at_design = baseline(Scheme.HYBRID_RELAY,
                         make_params(si_cancellation_db=120))[0]
    at_limit = baseline(Scheme.HYBRID_RELAY,
                        make_params(si_cancellation_db=300))[0]
    assert abs(at_design.c_u - at_limit.c_u) / at_limit.c_u < 1e-3


def test_baseline_respects_rate_ratio_band(reference_params):
    for scheme in Scheme:
        rb, _ = baseline(scheme, reference_params)
        assert rb.c_u <= reference_params.rho_max * rb.c_d + 1e-12
        assert rb.c_u >= reference_params.rho_min * rb.c_d - 1e-12
        assert rb.c_s == rb.c_d + rb.c_u + rb.c_ic


@pytest.mark.parametrize("scheme",
                         [Scheme.FULL_DUPLEX, Scheme.HYBRID_RELAY])
def test_optimum_monotone_in_si_cancellation(scheme):
    opts = OptimizerOptions(**FAST)
    values = [optimize(scheme, make_params(si_cancellation_db=db),
                       opts).best_rates.c_s
              for db in (80, 100, 120)]
    for lo, hi in zip(values, values[1:]):
        assert hi >= lo * (1 - 1e-3)


def _direct_min_form_maximum(scheme, params, seeds):
    """Independent derivative-free check: COBYLA on the raw min objective."""
    caps = np.array([params.p_an_max, params.p_ue_max, params.p_bh_d_max,
                     params.p_an_max])

    def unpack(x):
        p = 10.0 ** np.clip(x[:4], -8, np.log10(caps))
        eta = float(np.clip(x[4], 0.0, 1.0))
        return PowerAllocation(p[0], p[1], p[2], p[3], 0.0, eta)

    def neg_obj(x):
        return -rates(scheme, params, unpack(x)).c_s

    def cons(x):
        report = constraints(scheme, params, unpack(x))
        return -np.array([v for _, v in report.values])

    best = -np.inf
    for seed in seeds:
        rng = np.random.default_rng(seed)
        x0 = np.concatenate([rng.uniform(-1, np.log10(caps)),
                             [rng.uniform(0.2, 0.8)]])
        res = minimize(neg_obj, x0, method="COBYLA",
                       constraints=[{"type": "ineq", "fun": cons}],
                       options={"maxiter": 4000, "rhobeg": 0.5,
                                "tol": 1e-10})
        alloc = unpack(res.x)
        if constraints(scheme, params, alloc).feasible:
            best = max(best, rates(scheme, params, alloc).c_s)
    return best


@pytest.mark.parametrize("k_an", [1, 3, 5])
def test_epigraph_matches_direct_min_form(k_an):
    params = make_params(k_an=k_an, m_bh_t=2, m_bh_r=4)
    epi = optimize(Scheme.HYBRID_RELAY, params,
                   OptimizerOptions(n_starts=16, rng_seed=7))
    direct = _direct_min_form_maximum(Scheme.HYBRID_RELAY, params,
                                      seeds=range(40))
    assert epi.best_rates.c_s == pytest.approx(direct, rel=1e-3)


def test_epigraph_toggle_changes_method_not_result():
    params = make_params(k_an=2, m_bh_t=2, m_bh_r=4)
    on = optimize(Scheme.FULL_DUPLEX, params,
                  OptimizerOptions(n_starts=12, rng_seed=3,
                                   epigraph_enabled=True))
    off = optimize(Scheme.FULL_DUPLEX, params,
                   OptimizerOptions(n_starts=12, rng_seed=3,
                                    epigraph_enabled=False))
    assert off.best_rates.c_s == pytest.approx(on.best_rates.c_s, rel=1e-3)


def test_single_intra_cell_pair_costs_a_little_either_way():
    # one pair counts once toward the sum-rate instead of twice, and the
    # two routings deliver nearly the same optimum
    opts = OptimizerOptions(**FAST)
    none = optimize(Scheme.HYBRID_RELAY, make_params(), opts).best_rates.c_s
    via_an = optimize(Scheme.HYBRID_RELAY, make_params(k_an=1),
                      opts).best_rates.c_s
    direct = optimize(Scheme.HYBRID_RELAY, make_params(k_d2d=1),
                      opts).best_rates.c_s
    assert via_an < none and direct < none
    assert abs(via_an - direct) / none < 0.05


def test_intra_cell_load_helps_only_under_scarce_backhaul():
    # relayed pairs add backhaul-free rate when the backhaul bottlenecks
    # the cell, and displace doubly-counted traffic once it does not
    opts = OptimizerOptions(**FAST)

    def rl_best(m, k_an):
        params = make_params(m_bh_t=m, m_bh_r=2 * m, k_an=k_an)
        return optimize(Scheme.HYBRID_RELAY, params, opts).best_rates.c_s

    assert rl_best(2, 3) > rl_best(2, 0)
    assert rl_best(4, 3) < rl_best(4, 0)


def test_repair_recovers_constraint_violations(reference_params):
    bad = PowerAllocation(p_d=1000.0, p_u=316.0, p_bh_d=1.0, p_bh_u=1000.0,
                          eta=0.9)
    repaired = repair_start(Scheme.HALF_DUPLEX, reference_params, bad, 1e-6)
    assert repaired is not None
    assert constraints(Scheme.HALF_DUPLEX, reference_params,
                       repaired).feasible


def test_no_feasible_point_error(monkeypatch, reference_params):
    monkeypatch.setattr(optimizer_mod, "repair_start",
                        lambda *args, **kwargs: None)
    with pytest.raises(NoFeasiblePointError) as err:
        optimize(Scheme.FULL_DUPLEX, reference_params,
                 OptimizerOptions(n_starts=3))
    assert len(err.value.starts) == 3
    assert all("unrepairable" in s.status for s in err.value.starts)
