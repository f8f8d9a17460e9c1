"""Multi-start constrained maximization of the per-scheme sum-rate.

Each start draws transmit powers log-uniformly across the feasible decades,
repairs obvious constraint violations by shrinking the offending powers,
and then runs an SLSQP solve on box-bounded variables (powers in log10
space).  The nonsmooth ``min`` term contributed by AN-relayed pairs is
handled through an epigraph auxiliary variable by default.

The best feasible local maximum over all starts is returned together with
per-start diagnostics; results are deterministic for a fixed seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .feasibility import ConstraintReport, constraints
from .model import PowerAllocation, Scheme, SystemParams, require_valid
from .rates import RateBreakdown, rates

_P_START_FLOOR_MW = 1e-3    # lower edge of the log-uniform start range
_LOG_FLOOR = -8.0           # log10 mW lower bound standing in for "off"
_REPAIR_PASSES = 12
_BISECT_ITERS = 40
_REPAIR_MARGIN = 1e-3       # slack (bits/s/Hz) left below repaired boundaries
_FD_STEP = 1e-6             # relative central-difference step
_SLSQP_ITERATION_LIMIT = 9  # scipy SLSQP exit status for maxiter reached


@dataclass
class OptimizerOptions:
    n_starts: int = 50
    rng_seed: int = 42
    max_iterations: int = 150
    feasibility_tol: float = 1e-6
    objective_tol: float = 1e-9
    epigraph_enabled: bool = True

    def check(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.feasibility_tol <= 0 or self.objective_tol <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass
class StartSummary:
    index: int
    objective: float        # nan when the start produced no feasible point
    feasible: bool
    converged: bool
    iterations: int
    status: str


@dataclass
class OptResult:
    scheme: Scheme
    best_alloc: PowerAllocation
    best_rates: RateBreakdown
    best_report: ConstraintReport
    starts: list = field(default_factory=list)
    converged_count: int = 0


class NoFeasiblePointError(RuntimeError):
    """No start produced a feasible point; carries per-start diagnostics."""

    def __init__(self, scheme, starts):
        self.scheme = scheme
        self.starts = starts
        super().__init__(
            f"no feasible point found for {scheme.value} across "
            f"{len(starts)} starts")


class _Problem:
    """Variable layout, scaling and point evaluation for one instance.

    Transmit powers are optimized in log10 space: the budgets span many
    decades and the useful operating points (interference-limited links)
    often sit at sub-mW powers where a linear parametrization has no
    gradient resolution.  The log floor of 1e-8 mW (-80 dBm) is far below
    any power that moves a rate, so it stands in for "off".
    """

    def __init__(self, scheme: Scheme, params: SystemParams,
                 opts: OptimizerOptions):
        self.scheme = scheme
        self.params = params
        self.opts = opts
        self.kid = scheme.kernel_id
        self.kargs = params.kernel_args()

        self.has_d2d = params.k_d2d > 0
        self.has_eta = scheme is not Scheme.FULL_DUPLEX
        self.epigraph = opts.epigraph_enabled and params.k_an > 0
        self.rho_applicable = (params.d - params.k_d2d - params.k_an > 0
                               and params.u - params.k_d2d - params.k_an > 0)
        # RL transmits DL and outgoing backhaul in disjoint slots, so the AN
        # budget reduces to the individual box bounds.
        self.an_sum_budget = scheme is not Scheme.HYBRID_RELAY

        caps = [params.p_an_max, params.p_ue_max,
                params.p_bh_d_max, params.p_an_max]
        if self.has_d2d:
            caps.append(params.p_ue_max)
        self.n_powers = len(caps)
        self._bounds = [(_LOG_FLOOR, np.log10(c)) for c in caps]
        if self.has_eta:
            self.eta_idx = len(self._bounds)
            self._bounds.append((0.0, 1.0))
        if self.epigraph:
            # loose upper bound on the per-pair relay rate
            self.t_idx = len(self._bounds)
            t_cap = np.log2(1.0 + params.l_ue * params.n_t
                            * params.p_an_max / params.sigma_n2)
            self._bounds.append((0.0, t_cap))
        self.dim = len(self._bounds)

        self._memo_x = None
        self._memo_val = None

    # -- variable vector <-> allocation --------------------------------

    def powers(self, x):
        return 10.0 ** x[:self.n_powers]

    def to_alloc(self, x) -> PowerAllocation:
        p = self.powers(x)
        p_u_d2d = p[4] if self.has_d2d else 0.0
        eta = x[self.eta_idx] if self.has_eta else 0.5
        return PowerAllocation(p_d=p[0], p_u=p[1], p_bh_d=p[2], p_bh_u=p[3],
                               p_u_d2d=p_u_d2d, eta=eta)

    def from_alloc(self, alloc: PowerAllocation, t=None):
        p = [alloc.p_d, alloc.p_u, alloc.p_bh_d, alloc.p_bh_u]
        if self.has_d2d:
            p.append(alloc.p_u_d2d)
        x = list(np.log10(np.maximum(p, 10.0 ** _LOG_FLOOR)))
        if self.has_eta:
            x.append(alloc.eta)
        if self.epigraph:
            x.append(0.0 if t is None else t)
        return np.asarray(x)

    # -- evaluation -----------------------------------------------------

    def eval_point(self, x):
        """(negated objective, constraint slack vector >= 0 when feasible)."""
        if self._memo_x is not None and np.array_equal(x, self._memo_x):
            return self._memo_val
        p = self.powers(x)
        p_d, p_u, p_bh_d, p_bh_u = p[0], p[1], p[2], p[3]
        p_u_d2d = p[4] if self.has_d2d else 0.0
        eta = x[self.eta_idx] if self.has_eta else 0.5

        c_d, c_u, c_d2d, relay_dl, relay_ul, c_bh_d, c_bh_u = (
            _kernels.rate_parts(self.kid, *self.kargs, p_d, p_u, p_bh_d,
                                p_bh_u, p_u_d2d, eta))

        k_an = self.params.k_an
        obj = c_d + c_u + c_d2d
        g = [c_bh_d - c_d, c_bh_u - c_u]
        if self.an_sum_budget:
            g.append((self.params.p_an_max - p_d - p_bh_u)
                     / self.params.p_an_max)
        if self.rho_applicable:
            g.append(c_u - self.params.rho_min * c_d)
            g.append(self.params.rho_max * c_d - c_u)
        if k_an > 0:
            if self.epigraph:
                t = x[self.t_idx]
                obj += k_an * t
                g.append(relay_dl - t)
                g.append(relay_ul - t)
            else:
                obj += k_an * min(relay_dl, relay_ul)

        value = (-obj, np.asarray(g))
        self._memo_x = x.copy()
        self._memo_val = value
        return value

    def objective(self, x):
        return self.eval_point(x)[0]

    def constraint_vec(self, x):
        return self.eval_point(x)[1]

    def objective_grad(self, x):
        return _central_diff(self.objective, x)

    def constraint_jac(self, x):
        return _central_diff_jac(self.constraint_vec, x)

    def bounds(self):
        return self._bounds


def _central_diff(fun, x):
    grad = np.empty_like(x)
    for i in range(x.size):
        h = _FD_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return grad


def _central_diff_jac(fun, x):
    cols = []
    for i in range(x.size):
        h = _FD_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((fun(xp) - fun(xm)) / (2.0 * h))
    return np.column_stack(cols)


# -- start generation and repair ---------------------------------------


def _draw_start(problem: _Problem, rng) -> PowerAllocation:
    params = problem.params

    def log_uniform(cap):
        lo, hi = np.log10(_P_START_FLOOR_MW), np.log10(cap)
        return 10.0 ** rng.uniform(lo, hi)

    return PowerAllocation(
        p_d=log_uniform(params.p_an_max),
        p_u=log_uniform(params.p_ue_max),
        p_bh_d=log_uniform(params.p_bh_d_max),
        p_bh_u=log_uniform(params.p_an_max),
        p_u_d2d=log_uniform(params.p_ue_max) if problem.has_d2d else 0.0,
        eta=rng.uniform(0.0, 1.0) if problem.has_eta else 0.5,
    )


def _shrink_power(scheme, params, alloc, field_name, violation_fn, tol):
    """Bisect a multiplier on one power until the violation clears.

    ``violation_fn`` maps an allocation to a scalar that must become <= 0;
    it must be non-positive when the chosen power is zero.  The bisection
    aims slightly below the boundary so that coupled constraints (which the
    outer repair passes fix one at a time) cannot ping-pong forever.
    """
    base = getattr(alloc, field_name)
    if base <= 0.0:
        return alloc
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        trial = _with(alloc, field_name, mid * base)
        if violation_fn(trial) > -_REPAIR_MARGIN:
            hi = mid
        else:
            lo = mid
    return _with(alloc, field_name, lo * base)


def _with(alloc: PowerAllocation, field_name, value) -> PowerAllocation:
    d = {
        "p_d": alloc.p_d, "p_u": alloc.p_u, "p_bh_d": alloc.p_bh_d,
        "p_bh_u": alloc.p_bh_u, "p_u_d2d": alloc.p_u_d2d, "eta": alloc.eta,
    }
    d[field_name] = value
    return PowerAllocation(**d)


def repair_start(scheme: Scheme, params: SystemParams,
                 alloc: PowerAllocation, tol: float):
    """Project a random start into the feasible set, or return None.

    The AN power pair is rescaled onto its budget, then rate-coupled
    violations (backhaul capacity, rate-ratio bounds) are cleared by
    bisecting the offending power toward zero, iterating a few passes
    because the schemes couple the links through interference.
    """
    # box clips
    alloc = PowerAllocation(
        p_d=min(alloc.p_d, params.p_an_max),
        p_u=min(alloc.p_u, params.p_ue_max),
        p_bh_d=min(alloc.p_bh_d, params.p_bh_d_max),
        p_bh_u=min(alloc.p_bh_u, params.p_an_max),
        p_u_d2d=min(alloc.p_u_d2d, params.p_ue_max),
        eta=min(max(alloc.eta, 0.0), 1.0),
    )
    if scheme is not Scheme.HYBRID_RELAY:
        total = alloc.p_d + alloc.p_bh_u
        if total > params.p_an_max:
            f = params.p_an_max / total
            alloc = _with(alloc, "p_d", alloc.p_d * f)
            alloc = _with(alloc, "p_bh_u", alloc.p_bh_u * f)

    def g(label):
        def fn(a):
            report = constraints(scheme, params, a, tol)
            try:
                return report.value(label)
            except KeyError:
                return -1.0
        return fn

    # Shrinking the power named on the left drives the labelled violation
    # to zero monotonically (the cross terms only help).
    shrink_field = {"bh_dl": "p_d", "rho_lo": "p_d",
                    "bh_ul": "p_u", "rho_hi": "p_u"}
    for _ in range(_REPAIR_PASSES):
        report = constraints(scheme, params, alloc, tol)
        if report.feasible:
            return alloc
        progressed = False
        for label, value in report.values:
            if value <= tol or label not in shrink_field:
                continue
            alloc = _shrink_power(scheme, params, alloc,
                                  shrink_field[label], g(label), tol)
            progressed = True
        if not progressed:
            break
    report = constraints(scheme, params, alloc, tol)
    return alloc if report.feasible else None


# -- public entry points -------------------------------------------------


def optimize(scheme: Scheme, params: SystemParams,
             opts: OptimizerOptions | None = None) -> OptResult:
    """Maximize the scheme sum-rate over transmit powers (and eta).

    Runs ``opts.n_starts`` independent SLSQP solves from randomized,
    repaired starting points and returns the best feasible result.  Raises
    NoFeasiblePointError when every start fails.
    """
    opts = opts or OptimizerOptions()
    opts.check()
    require_valid(params, scheme)

    problem = _Problem(scheme, params, opts)
    starts = []
    best = None  # (objective, index, alloc)

    for index in range(opts.n_starts):
        rng = np.random.default_rng([opts.rng_seed, index])
        raw = _draw_start(problem, rng)
        repaired = repair_start(scheme, params, raw, opts.feasibility_tol)
        if repaired is None:
            starts.append(StartSummary(index, float("nan"), False, False, 0,
                                       "discarded: unrepairable start"))
            continue

        t0 = None
        if problem.epigraph:
            parts = _kernels.rate_parts(problem.kid, *problem.kargs,
                                        *repaired.as_tuple())
            t0 = min(parts[3], parts[4])
        x0 = problem.from_alloc(repaired, t=t0)

        with warnings.catch_warnings():
            # SLSQP line searches may probe outside the boxes; scipy clips
            # and warns, which is routine here.
            warnings.filterwarnings(
                "ignore", message="Values in x were outside bounds")
            res = minimize(
                problem.objective, x0, jac=problem.objective_grad,
                method="SLSQP", bounds=problem.bounds(),
                constraints=[{"type": "ineq", "fun": problem.constraint_vec,
                              "jac": problem.constraint_jac}],
                options={"maxiter": opts.max_iterations,
                         "ftol": opts.objective_tol},
            )

        lo, hi = zip(*problem.bounds())
        x = np.clip(res.x, lo, hi)
        alloc = problem.to_alloc(x)
        report = constraints(scheme, params, alloc, opts.feasibility_tol)
        # a start that ran out of iterations is discarded; any other final
        # point counts if it independently checks out as feasible (solver
        # stalls routinely end exactly on the constrained optimum)
        discarded = res.status == _SLSQP_ITERATION_LIMIT
        feasible = report.feasible and not discarded
        objective = rates(scheme, params, alloc).c_s if feasible else float("nan")
        converged = bool(res.success)
        starts.append(StartSummary(index, objective, feasible, converged,
                                   int(res.nit), str(res.message)))
        if feasible:
            if best is None or objective > best[0]:
                best = (objective, index, alloc)

    converged_count = sum(1 for s in starts if s.converged and s.feasible)
    if best is None:
        raise NoFeasiblePointError(scheme, starts)

    _, _, best_alloc = best
    best_rates = rates(scheme, params, best_alloc)
    best_report = constraints(scheme, params, best_alloc,
                              opts.feasibility_tol)
    return OptResult(scheme=scheme, best_alloc=best_alloc,
                     best_rates=best_rates, best_report=best_report,
                     starts=starts, converged_count=converged_count)


def baseline(scheme: Scheme, params: SystemParams):
    """Unoptimized reference: maximum transmit powers and an even split.

    The AN splits its budget evenly between DL and outgoing backhaul for
    the schemes where both share a slot; the hybrid relay runs each at the
    full budget since they never overlap.  The max-power point generally
    violates the service constraints, so the reported user rates are what
    the cell can actually deliver there: each direction is clamped to its
    backhaul capacity (``min(C_x, C_x^BH)``) and the pair is then projected
    into the UL/DL rate-ratio band (excess UL rate is dropped; excess DL
    rate is dropped when the UL side cannot sustain the minimum ratio).
    The returned breakdown carries the clamped components; the report
    carries the raw constraint values at the evaluated point.
    """
    require_valid(params, scheme)
    if scheme is Scheme.HYBRID_RELAY:
        p_d = p_bh_u = params.p_an_max
    else:
        p_d = p_bh_u = 0.5 * params.p_an_max
    alloc = PowerAllocation(
        p_d=p_d,
        p_u=params.p_ue_max,
        p_bh_d=params.p_bh_d_max,
        p_bh_u=p_bh_u,
        p_u_d2d=params.p_ue_max if params.k_d2d > 0 else 0.0,
        eta=0.5,
    )
    raw = rates(scheme, params, alloc)
    c_d = min(raw.c_d, raw.c_bh_d)
    c_u = min(raw.c_u, raw.c_bh_u)
    rho_applicable = (params.d - params.k_d2d - params.k_an > 0
                      and params.u - params.k_d2d - params.k_an > 0)
    if rho_applicable:
        if c_u > params.rho_max * c_d:
            c_u = params.rho_max * c_d
        elif c_u < params.rho_min * c_d:
            c_d = c_u / params.rho_min
    clamped = RateBreakdown(c_d=c_d, c_u=c_u, c_ic=raw.c_ic,
                            c_s=c_d + c_u + raw.c_ic,
                            c_bh_d=raw.c_bh_d, c_bh_u=raw.c_bh_u,
                            scheme=scheme, alloc=alloc)
    report = constraints(scheme, params, alloc)
    return clamped, report
