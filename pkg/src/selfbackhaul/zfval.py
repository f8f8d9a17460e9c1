"""Monte-Carlo validation of the zero-forcing precoder model.

Three things are checked against the closed forms used by the rate engine:

* the ZF construction itself is exact per realization (the effective
  channel is diagonal and the AN's own receive antennas sit in nulls);
* the precoder normalization keeps the expected per-stream transmit power
  at its allocated value (mean column norm 1), which rests on the
  inverse-Wishart trace identity ``E[tr((HH^H)^-1)] = m / (n - m)``;
* the large-array per-stream SINR factors: a precoder that holds the
  radiated power per stream exactly at its allocation (unit-norm columns
  per draw) yields an average SINR matching the closed form, with an error
  that shrinks as the arrays grow.

All draws are i.i.d. circularly-symmetric complex Gaussian with per-row
path gains, reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PowerAllocation, Scheme, SystemParams, require_valid
from .rates import sinr_set

_CHUNK = 512
_COND_LIMIT = 1e10
_REJECT_FRACTION_LIMIT = 0.01


class IllConditionedError(RuntimeError):
    """Raised when a channel draw is too ill-conditioned to invert."""


@dataclass(frozen=True)
class ChannelDraw:
    """One stacked Rayleigh channel: data rows plus the SI block."""

    h_t: np.ndarray     # (m_t, n_t) channel toward the intended receivers
    h_s: np.ndarray     # (n_r, n_t) channel into the AN's own receivers
    gains: np.ndarray   # (m_t + n_r,) per-row linear path gains


@dataclass(frozen=True)
class PrecoderSample:
    w: np.ndarray       # (n_t, m_t) normalized ZF precoder
    lam: np.ndarray     # (m_t,) normalization factors


@dataclass(frozen=True)
class CheckResult:
    label: str
    empirical: float
    closed_form: float
    rel_error: float


def _complex_rows(rng, count, m, n, gains):
    """(count, m, n) draws with row k variance gains[k]."""
    z = rng.standard_normal((count, m, n)) + 1j * rng.standard_normal(
        (count, m, n))
    scale = np.sqrt(np.asarray(gains, dtype=float) / 2.0)
    return z * scale[None, :, None]


def draw_channel(n_t: int, n_r: int, m_t: int, gains, seed: int) -> ChannelDraw:
    """Draw one stacked channel realization (reproducible for a seed)."""
    if n_t < 1 or n_r < 0 or m_t < 1:
        raise ValueError("dimensions must be positive")
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (m_t + n_r,):
        raise ValueError(
            f"expected {m_t + n_r} gains (data rows + SI rows), "
            f"got {gains.shape}")
    rng = np.random.default_rng(seed)
    stacked = _complex_rows(rng, 1, m_t + n_r, n_t, gains)[0]
    return ChannelDraw(h_t=stacked[:m_t], h_s=stacked[m_t:], gains=gains)


def zf_precoder(draw: ChannelDraw, mode: str = "fd-null") -> PrecoderSample:
    """ZF precoder with expectation-based power normalization.

    ``fd-null`` stacks the SI rows into the inversion so the AN's receive
    antennas are zero-forced; ``hd`` inverts the data channel only.  Raises
    IllConditionedError above a condition number of 1e10 (the caller is
    expected to redraw).
    """
    m_t = draw.h_t.shape[0]
    n_t = draw.h_t.shape[1]
    if mode == "fd-null":
        h = np.vstack([draw.h_t, draw.h_s])
        dof = n_t - m_t - draw.h_s.shape[0]
    elif mode == "hd":
        h = draw.h_t
        dof = n_t - m_t
    else:
        raise ValueError(f"unknown precoder mode {mode!r}")
    if dof <= 0:
        raise ValueError("not enough antennas to zero-force this stack")

    gram = h @ h.conj().T
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0.0 or eigs[-1] / eigs[0] > _COND_LIMIT:
        raise IllConditionedError("channel stack too ill-conditioned")

    w_unnorm = np.linalg.solve(gram, h).conj().T   # H^H (H H^H)^-1
    lam = np.sqrt(draw.gains[:m_t] * dof)
    return PrecoderSample(w=w_unnorm[:, :m_t] * lam[None, :], lam=lam)


def wishart_trace_closed_form(n_t: int, m: int) -> float:
    """E[tr((HH^H)^-1)] for an m x n_t i.i.d. unit complex Gaussian H.

    Finite for n_t > m; the Monte-Carlo check additionally needs
    n_t > m + 1 for the estimator to have finite variance.
    """
    if n_t <= m:
        raise ValueError("need n_t > m")
    return m / (n_t - m)


def wishart_trace_check(n_t: int, m: int, trials: int, seed: int) -> CheckResult:
    """Empirical mean of tr((HH^H)^-1) for i.i.d. unit complex Gaussian H.

    The closed form is m / (n_t - m).
    """
    if n_t <= m + 1:
        raise ValueError("need n_t > m + 1")
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        h = _complex_rows(rng, count, m, n_t, np.ones(m))
        gram = h @ h.conj().transpose(0, 2, 1)
        eigs = np.linalg.eigvalsh(gram)
        total += float(np.sum(1.0 / eigs))
        done += count
    empirical = total / trials
    closed = wishart_trace_closed_form(n_t, m)
    return CheckResult("wishart_trace", empirical, closed,
                       abs(empirical - closed) / closed)


def column_norm_check(n_t: int, m_t: int, n_r: int, trials: int, seed: int,
                      gains=None, mode: str = "fd-null") -> CheckResult:
    """Monte-Carlo mean of ||w_k||^2 for the normalized precoder (target 1)."""
    rows = m_t + (n_r if mode == "fd-null" else 0)
    if gains is None:
        gains = np.ones(m_t + n_r)
    gains = np.asarray(gains, dtype=float)
    dof = n_t - rows
    if dof <= 0:
        raise ValueError("not enough antennas to zero-force this stack")

    rng = np.random.default_rng(seed)
    total = 0.0
    used = 0
    rejected = 0
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        h = _complex_rows(rng, count, rows, n_t, gains[:rows])
        gram = h @ h.conj().transpose(0, 2, 1)
        eigs = np.linalg.eigvalsh(gram)
        ok = (eigs[:, 0] > 0.0) & (eigs[:, -1] / eigs[:, 0] <= _COND_LIMIT)
        rejected += int(np.sum(~ok))
        inv_diag = np.linalg.inv(gram[ok]).diagonal(axis1=1, axis2=2).real
        # ||w_k||^2 = lam_k^2 {(HH^H)^-1}_kk with lam_k^2 = L_k * dof
        norms = inv_diag[:, :m_t] * (gains[:m_t] * dof)[None, :]
        total += float(np.sum(norms))
        used += int(np.sum(ok)) * m_t
        done += count
    _check_rejections(rejected, trials)
    empirical = total / used
    return CheckResult("precoder_column_norm", empirical, 1.0,
                       abs(empirical - 1.0))


def exactness_check(n_t: int, m_t: int, n_r: int, trials: int,
                    seed: int) -> list:
    """Worst-case per-realization diagonalization and SI-null metrics.

    Returns two CheckResults: the largest off-diagonal magnitude of the
    effective channel relative to its diagonal, and the largest
    ``||H_s W||_F / ||H_s||_F`` over the sampled draws (both ~solver
    round-off, checked against 0).
    """
    rng = np.random.default_rng(seed)
    worst_offdiag = 0.0
    worst_null = 0.0
    gains = np.ones(m_t + n_r)
    for trial in range(trials):
        draw = draw_channel(n_t, n_r, m_t, gains,
                            seed=int(rng.integers(0, 2 ** 63)))
        try:
            sample = zf_precoder(draw, mode="fd-null")
        except IllConditionedError:
            continue
        eff = draw.h_t @ sample.w
        off = eff - np.diag(np.diagonal(eff))
        worst_offdiag = max(worst_offdiag,
                            float(np.max(np.abs(off)) / np.min(sample.lam)))
        null = (np.linalg.norm(draw.h_s @ sample.w)
                / np.linalg.norm(draw.h_s))
        worst_null = max(worst_null, float(null))
    return [CheckResult("effective_channel_offdiag", worst_offdiag, 0.0,
                        worst_offdiag),
            CheckResult("si_null_leakage", worst_null, 0.0, worst_null)]


# -- empirical SINR validation -------------------------------------------


@dataclass(frozen=True)
class _StreamGroup:
    label: str
    count: int
    gain: float
    p_stream: float
    denom: float


@dataclass(frozen=True)
class _Stack:
    n: int
    groups: tuple
    null_rows: tuple     # (count, gain) pairs appended below the data rows


def _link_stacks(scheme: Scheme, params: SystemParams,
                 alloc: PowerAllocation):
    p = params
    a = alloc
    d_str = p.d - p.k_d2d
    p_dl = a.p_d / d_str if d_str > 0 else 0.0
    p_bhu = a.p_bh_u / p.m_bh_t if p.m_bh_t > 0 else 0.0
    p_bhd = a.p_bh_d / p.m_bh_r if p.m_bh_r > 0 else 0.0

    if scheme is Scheme.FULL_DUPLEX:
        iui = p.l_ud * ((p.u - p.k_d2d) * a.p_u + p.k_d2d * a.p_u_d2d)
        si = p.alpha * (a.p_d + a.p_bh_u)
        return [
            _Stack(p.n_t,
                   (_StreamGroup("dl", d_str, p.l_ue, p_dl,
                                 p.sigma_n2 + iui),
                    _StreamGroup("bh_u", p.m_bh_t, p.l_bh, p_bhu,
                                 p.sigma_n2)),
                   ((p.k_d2d, p.l_ue), (p.n_r, 1.0))),
            _Stack(p.n_r,
                   (_StreamGroup("ul", p.u, p.l_ue, a.p_u,
                                 p.sigma_n2 + si),
                    _StreamGroup("bh_d", p.m_bh_r, p.l_bh, p_bhd,
                                 p.sigma_n2 + si)),
                   ()),
        ]
    if scheme is Scheme.HALF_DUPLEX:
        return [
            _Stack(p.n_t,
                   (_StreamGroup("dl", d_str, p.l_ue, p_dl, p.sigma_n2),
                    _StreamGroup("bh_u", p.m_bh_t, p.l_bh, p_bhu,
                                 p.sigma_n2)),
                   ()),
            _Stack(p.n_r,
                   (_StreamGroup("ul", p.u, p.l_ue, a.p_u, p.sigma_n2),
                    _StreamGroup("bh_d", p.m_bh_r, p.l_bh, p_bhd,
                                 p.sigma_n2)),
                   ()),
        ]
    # hybrid relay: DL with incoming backhaul in one slot, UL with outgoing
    # backhaul (and D2D) in the other
    return [
        _Stack(p.n_t,
               (_StreamGroup("dl", d_str, p.l_ue, p_dl, p.sigma_n2),),
               ((p.n_r, 1.0),)),
        _Stack(p.n_r,
               (_StreamGroup("bh_d", p.m_bh_r, p.l_bh, p_bhd,
                             p.sigma_n2 + p.alpha * a.p_d),),
               ()),
        _Stack(p.n_t,
               (_StreamGroup("bh_u", p.m_bh_t, p.l_bh, p_bhu, p.sigma_n2),),
               ((p.k_d2d, p.l_ue), (p.n_r, 1.0))),
        _Stack(p.n_r,
               (_StreamGroup("ul", p.u, p.l_ue, a.p_u,
                             p.sigma_n2 + p.alpha * a.p_bh_u),),
               ()),
    ]


def _stack_signal_means(stack: _Stack, trials: int, rng):
    """Mean received signal power per group for one ZF stack.

    Per draw the precoder columns are renormalized to unit norm so each
    stream radiates exactly its allocated power; the received signal power
    of stream k is then p_k / {(HH^H)^-1}_kk.
    """
    gains = []
    for group in stack.groups:
        gains.extend([group.gain] * group.count)
    m_data = len(gains)
    for count, gain in stack.null_rows:
        gains.extend([gain] * count)
    gains = np.asarray(gains, dtype=float)
    m_tot = gains.size
    if m_tot >= stack.n:
        raise ValueError("stack has no zero-forcing degrees of freedom")

    sums = np.zeros(m_data)
    used = 0
    rejected = 0
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        h = _complex_rows(rng, count, m_tot, stack.n, gains)
        gram = h @ h.conj().transpose(0, 2, 1)
        eigs = np.linalg.eigvalsh(gram)
        ok = (eigs[:, 0] > 0.0) & (eigs[:, -1] / eigs[:, 0] <= _COND_LIMIT)
        rejected += int(np.sum(~ok))
        inv_diag = np.linalg.inv(gram[ok]).diagonal(axis1=1, axis2=2).real
        sums += np.sum(1.0 / inv_diag[:, :m_data], axis=0)
        used += int(np.sum(ok))
        done += count
    _check_rejections(rejected, trials)

    means = {}
    offset = 0
    for group in stack.groups:
        block = sums[offset:offset + group.count]
        means[group.label] = (group.p_stream * float(np.mean(block)) / used
                              if group.count else 0.0)
        offset += group.count
    return means


def _check_rejections(rejected: int, trials: int):
    if rejected > _REJECT_FRACTION_LIMIT * trials:
        raise RuntimeError(
            f"rejected {rejected}/{trials} ill-conditioned draws "
            f"(limit {_REJECT_FRACTION_LIMIT:.0%})")


def empirical_sinr_check(params: SystemParams, scheme: Scheme,
                         alloc: PowerAllocation, trials: int,
                         seed: int) -> list:
    """Monte-Carlo per-link SINRs against the closed forms.

    Returns one CheckResult per array link (dl, ul, bh_d, bh_u as
    applicable); links with zero allocated power report 0 exactly.
    """
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    require_valid(params, scheme)
    alloc.check()
    closed = sinr_set(scheme, params, alloc)
    closed_map = {"dl": closed.sinr_d, "ul": closed.sinr_u,
                  "bh_d": closed.sinr_bh_d, "bh_u": closed.sinr_bh_u}

    rng = np.random.default_rng(seed)
    results = []
    for stack in _link_stacks(scheme, params, alloc):
        stream_groups = [g for g in stack.groups if g.count > 0]
        if not stream_groups:
            continue
        means = _stack_signal_means(stack, trials, rng)
        for group in stream_groups:
            cf = closed_map[group.label]
            if group.p_stream <= 0.0 or cf <= 0.0:
                results.append(CheckResult(group.label, 0.0, cf,
                                           0.0 if cf == 0.0 else 1.0))
                continue
            empirical = means[group.label] / group.denom
            results.append(CheckResult(group.label, empirical, cf,
                                       abs(empirical - cf) / cf))
    return results
