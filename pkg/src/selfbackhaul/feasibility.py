"""Inequality-constraint evaluation with per-constraint slack reporting.

Every constraint is expressed as ``value <= 0``; a report is feasible when
the largest value does not exceed the tolerance.  Constraint labels are
fixed and emitted in a deterministic order:

    bh_dl, bh_ul, pwr_an, pwr_ue_ul, pwr_ue_d2d, pwr_bn,
    rho_lo, rho_hi, eta_lo, eta_hi

Constraints that do not apply to a configuration are omitted: the D2D
power cap when there are no direct pairs, the rate-ratio pair when either
link carries no out-of-cell users, and the eta bounds for full duplex.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import PowerAllocation, Scheme, SystemParams
from .rates import rates

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class ConstraintReport:
    values: tuple          # ordered (label, value) pairs, feasible iff <= tol
    max_violation: float
    feasible: bool
    tol: float

    def value(self, label: str) -> float:
        for name, val in self.values:
            if name == label:
                return val
        raise KeyError(label)

    def labels(self):
        return [name for name, _ in self.values]


def constraints(scheme: Scheme, params: SystemParams, alloc: PowerAllocation,
                tol: float = DEFAULT_TOL) -> ConstraintReport:
    """Evaluate the full constraint vector for one allocation."""
    rb = rates(scheme, params, alloc)

    entries = [
        ("bh_dl", rb.c_d - rb.c_bh_d),
        ("bh_ul", rb.c_u - rb.c_bh_u),
    ]
    if scheme is Scheme.HYBRID_RELAY:
        # DL and outgoing-backhaul transmissions occupy disjoint time
        # slots, so only the larger of the two powers must fit the budget.
        entries.append(("pwr_an", max(alloc.p_d, alloc.p_bh_u) - params.p_an_max))
    else:
        entries.append(("pwr_an", alloc.p_d + alloc.p_bh_u - params.p_an_max))
    entries.append(("pwr_ue_ul", alloc.p_u - params.p_ue_max))
    if params.k_d2d > 0:
        entries.append(("pwr_ue_d2d", alloc.p_u_d2d - params.p_ue_max))
    entries.append(("pwr_bn", alloc.p_bh_d - params.p_bh_d_max))

    rho_applicable = (params.d - params.k_d2d - params.k_an > 0
                      and params.u - params.k_d2d - params.k_an > 0)
    if rho_applicable:
        entries.append(("rho_lo", params.rho_min * rb.c_d - rb.c_u))
        entries.append(("rho_hi", rb.c_u - params.rho_max * rb.c_d))

    if scheme is not Scheme.FULL_DUPLEX:
        entries.append(("eta_lo", -alloc.eta))
        entries.append(("eta_hi", alloc.eta - 1.0))

    max_violation = max(value for _, value in entries)
    return ConstraintReport(values=tuple(entries),
                            max_violation=max_violation,
                            feasible=max_violation <= tol,
                            tol=tol)
