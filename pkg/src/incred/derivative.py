"""Set-valued derivative evaluation over box-valued data.

Three notions of the derivative of a locally Lipschitz candidate
function along a box-valued inclusion are computed in closed form:

* :func:`generalized_derivative` -- min over gradient elements ``p`` of
  the max over reduced directions ``q`` of ``p . [q; 1]`` (max-max when
  the candidate is not regular), with a distinguished minus-infinity
  marker when the reduced set is empty;
* :func:`baseline_max_derivative` -- the classical "common value"
  derivative: the max of the values attained simultaneously by every
  gradient element, computed from the candidate's own reduction;
* :func:`baseline_interval_derivative` -- the classical intersection
  derivative ``âˆ©_p p . (F x {1})``, an interval that may be empty.

Because gradients and inclusion values are boxes, both bilinear
optimizations decompose per axis: the max over a rectangle of ``p q`` is
attained at one of its four corners, and the min over an interval of the
convex piecewise-linear ``p -> max(p qlo, p qhi)`` is attained at an
endpoint or at the breakpoint 0. No LP solver and no tolerance are
involved.

The minus-infinity marker is ``value is None`` on the returned
:class:`DerivativeValue`, never a floating-point ``-inf``, so report
serialization stays unambiguous; it compares below every real bound in
certification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .errors import DimensionMismatchError, EmptySetError, SchemaError
from .intervals import Interval, IntervalBox
from .reduction import reduce_collection, reduce_once
from .setmaps import PiecewiseBoxMap, RegularFunctionSpec, eval_gradient, eval_map

__all__ = [
    "DerivativeValue", "bilinear_maxmax", "bilinear_minmax",
    "generalized_derivative", "baseline_max_derivative",
    "baseline_interval_derivative",
]


@dataclass(frozen=True)
class DerivativeValue:
    """One evaluated derivative.

    ``kind`` is ``"generalized"``, ``"baseline-max"`` or
    ``"baseline-interval"``. For the scalar kinds ``value`` is a float,
    or None as the minus-infinity marker (empty reduced set, flagged by
    ``empty_reduction``). For the interval kind ``value`` is an
    :class:`Interval`, possibly empty.
    """
    kind: str
    value: Union[float, Interval, None]
    empty_reduction: bool = False

    @property
    def is_minus_inf(self) -> bool:
        return self.value is None

    def upper(self) -> float | None:
        """Largest value, or None when the set is empty / minus infinity."""
        if self.value is None:
            return None
        if isinstance(self.value, Interval):
            return None if self.value.is_empty else self.value.hi
        return self.value

    def leq(self, bound: float, tol: float = 0.0) -> bool:
        """Does the derivative certify ``<= bound`` (within ``tol``)?"""
        up = self.upper()
        return True if up is None else up <= bound + tol

    def describe(self) -> str:
        if self.value is None:
            return "-inf"
        if isinstance(self.value, Interval):
            return "empty" if self.value.is_empty else repr(self.value)
        return repr(self.value)


def _check_pq(p: IntervalBox, q: IntervalBox) -> None:
    if p.dims != q.dims + 1:
        raise DimensionMismatchError(
            f"gradient box has {p.dims} axes, directions have {q.dims}; "
            "expected one extra time axis")
    if p.is_empty or q.is_empty:
        raise EmptySetError("bilinear optimization needs non-empty boxes")


def bilinear_maxmax(p: IntervalBox, q: IntervalBox) -> float:
    """max over ``(p, q)`` in P x Q of ``p . [q; 1]``.

    P lives in ``R^{n+1}`` (time axis last), Q in ``R^n``. Separable per
    axis: each term is the max of the four endpoint products, and the
    time axis contributes its upper endpoint.
    """
    _check_pq(p, q)
    total = 0.0
    for pi, qi in zip(p.axes, q.axes):
        total += max(pi.lo * qi.lo, pi.lo * qi.hi,
                     pi.hi * qi.lo, pi.hi * qi.hi)
    total += p.axes[-1].hi
    return total


def bilinear_minmax(p: IntervalBox, q: IntervalBox) -> float:
    """min over ``p`` of max over ``q`` of ``p . [q; 1]``.

    For fixed ``p`` the inner max is ``sum_i max(p_i qlo_i, p_i qhi_i) +
    p_time``; each summand is convex piecewise-linear in ``p_i`` with its
    breakpoint at 0, so the outer min evaluates the endpoints of ``P_i``
    plus 0 when P_i straddles it. The time axis contributes its lower
    endpoint.
    """
    _check_pq(p, q)
    total = 0.0
    for pi, qi in zip(p.axes, q.axes):
        candidates = [pi.lo, pi.hi]
        if pi.lo < 0.0 < pi.hi:
            candidates.append(0.0)
        total += min(max(c * qi.lo, c * qi.hi) for c in candidates)
    total += p.axes[-1].lo
    return total


def generalized_derivative(candidate: RegularFunctionSpec,
                           inclusion: PiecewiseBoxMap,
                           reducers: Sequence[RegularFunctionSpec],
                           x: Sequence[float], t: float) -> DerivativeValue:
    """Derivative of the candidate along the reduced inclusion.

    Empty reduced set => minus-infinity marker. Otherwise min-max over
    (gradient, reduced directions) when the candidate is regular,
    max-max when it is not.
    """
    reduced = reduce_collection(inclusion, reducers, x, t)
    if reduced.is_empty:
        return DerivativeValue("generalized", None, empty_reduction=True)
    grad = eval_gradient(candidate, x, t)
    if candidate.regular:
        value = bilinear_minmax(grad, reduced)
    else:
        value = bilinear_maxmax(grad, reduced)
    return DerivativeValue("generalized", value)


def baseline_max_derivative(candidate: RegularFunctionSpec,
                            inclusion: PiecewiseBoxMap,
                            x: Sequence[float], t: float) -> DerivativeValue:
    """Max of the common-value derivative set of a regular candidate.

    The feasible directions are those of the candidate's own reduction;
    on them ``p . [q; 1]`` does not depend on ``p``, so the max is
    evaluated at a single fixed gradient element (the box center).
    Empty reduction => minus-infinity marker.

    Coincides exactly (same arithmetic, same order) with
    :func:`generalized_derivative` using the candidate as the only
    reducer.
    """
    if not candidate.regular:
        raise SchemaError(
            f"{candidate.name}: the common-value derivative requires a "
            "regular candidate")
    red = reduce_once(inclusion, candidate, x, t)
    if red.result.is_empty:
        return DerivativeValue("baseline-max", None, empty_reduction=True)
    grad = eval_gradient(candidate, x, t)
    total = 0.0
    for pi, qi in zip(grad.axes, red.result.axes):
        c = pi.center
        total += max(c * qi.lo, c * qi.hi)
    total += grad.axes[-1].center
    return DerivativeValue("baseline-max", total)


def baseline_interval_derivative(candidate: RegularFunctionSpec,
                                 inclusion: PiecewiseBoxMap,
                                 x: Sequence[float], t: float,
                                 ) -> DerivativeValue:
    """Intersection derivative over the *unreduced* inclusion.

    For each gradient element ``p``, ``p . (F x {1})`` is the interval
    ``[m(p), M(p)]`` with ``m, M`` the axiswise min/max products plus the
    time component; the intersection over the gradient box is
    ``[sup_p m(p), inf_p M(p)]``, each optimum separable per axis with
    endpoint-or-zero candidates. Empty when the sup exceeds the inf.
    """
    grad = eval_gradient(candidate, x, t)
    base = eval_map(inclusion, x, t)
    if base.is_empty:
        return DerivativeValue("baseline-interval", Interval.EMPTY)
    sup_lo = 0.0
    inf_hi = 0.0
    for pi, qi in zip(grad.axes, base.axes):
        candidates = [pi.lo, pi.hi]
        if pi.lo < 0.0 < pi.hi:
            candidates.append(0.0)
        sup_lo += max(min(c * qi.lo, c * qi.hi) for c in candidates)
        inf_hi += min(max(c * qi.lo, c * qi.hi) for c in candidates)
    sup_lo += grad.axes[-1].hi
    inf_hi += grad.axes[-1].lo
    if sup_lo > inf_hi:
        return DerivativeValue("baseline-interval", Interval.EMPTY)
    return DerivativeValue("baseline-interval", Interval(sup_lo, inf_hi))
