"""Grid-based certification of stability hypotheses.

Every check here screens a universally quantified hypothesis on a finite
grid, so a passing verdict is "certified on grid": a necessary-condition
screen with explicit witnesses on failure, not a proof over the
continuum. Guard surfaces must be injected into the grid via the
``include`` lists because guard comparisons are exact.

Checks provided:

* :func:`certify_lyapunov` -- generalized derivative below ``-W`` at
  every node (and time node), with optional sandwich envelopes
  ``lower <= V <= upper`` for the uniform (time-varying) statement;
* :func:`certify_semidefinite` -- same decrease test against a positive
  *semi*definite bound, the hypothesis behind asymptotic decay of
  ``W(x(t))``;
* :func:`invariance_data` -- the discrete estimate of the set where the
  derivative vanishes, plus equilibrium screening ``0 in F(x)`` of
  user-proposed invariant-set candidates (identifying the largest weakly
  invariant set is not automated);
* :func:`matrosov_chain` / :func:`matrosov_constants` -- the nested
  auxiliary-function chain on an annulus and the explicit combination
  constants obtained by doubling search.

Node scans are deterministic: nodes are visited in row-major order and
worst-case tracking uses strict improvement, so reports are byte-stable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr
from .derivative import generalized_derivative
from .errors import SchemaError
from .grids import GridSpec
from .intervals import Annulus, IntervalBox, contains
from .setmaps import RegularFunctionSpec, SystemDef, eval_map

__all__ = [
    "CERTIFIED", "VIOLATED", "INCONCLUSIVE", "GridSpec",
    "Certificate", "certify_lyapunov", "certify_semidefinite",
    "InvarianceReport", "CandidateCheck", "invariance_data",
    "MatrosovProblem", "build_matrosov_problem", "matrosov_grid",
    "matrosov_chain", "matrosov_constants", "MatrosovConstantsResult",
    "verify_combined_bound", "matrosov_derivative_bounds",
]

CERTIFIED = "CERTIFIED"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

_GRID_NOTE = ("certified on grid: finite screening of a universally "
              "quantified hypothesis, not a proof")


@dataclass(frozen=True)
class Certificate:
    verdict: str
    condition: str
    worst_point: tuple[float, ...] | None
    worst_t: float | None
    worst_margin: float | None
    tolerances: dict
    grid_summary: dict
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "condition": self.condition,
            "worst_point": (None if self.worst_point is None
                            else list(self.worst_point)),
            "worst_t": self.worst_t,
            "worst_margin": self.worst_margin,
            "tolerances": self.tolerances,
            "grid": self.grid_summary,
            "details": self.details,
        }

    def to_text(self) -> str:
        lines = [f"{self.condition}: {self.verdict}"]
        if self.worst_point is not None:
            lines.append(f"  worst point: {self.worst_point} "
                         f"t={self.worst_t} margin={self.worst_margin!r}")
        for key in sorted(self.tolerances):
            lines.append(f"  tol {key} = {self.tolerances[key]!r}")
        for key in sorted(self.details):
            lines.append(f"  {key}: {self.details[key]}")
        return "\n".join(lines) + "\n"


class _Worst:
    """Deterministic worst-case tracker (strict improvement, scan order)."""

    __slots__ = ("margin", "point", "t")

    def __init__(self):
        self.margin = -math.inf
        self.point = None
        self.t = None

    def offer(self, margin: float, point, t) -> None:
        if margin > self.margin:
            self.margin = margin
            self.point = tuple(point)
            self.t = t

    def seen(self) -> bool:
        return self.point is not None


def _origin_value_screen(name: str, value_at: Callable, n: int,
                         time_nodes, failures: list) -> None:
    origin = (0.0,) * n
    for t in time_nodes:
        v = value_at(origin, t)
        if v != 0.0:
            failures.append(
                f"{name}(0) = {v!r} at t={t!r}, expected exactly 0")
            return


def _positive_screen(name: str, value_at: Callable, nodes, time_nodes,
                     failures: list, strict: bool) -> None:
    """Require value > 0 (or >= 0 when not strict) at every nonzero node."""
    for t in time_nodes:
        for x in nodes:
            if all(v == 0.0 for v in x):
                continue
            v = value_at(x, t)
            if (v <= 0.0) if strict else (v < 0.0):
                failures.append(
                    f"{name}({list(x)}) = {v!r} at t={t!r} fails "
                    f"{'positivity' if strict else 'nonnegativity'}")
                return


def certify_lyapunov(sys: SystemDef, bound: expr.ScalarExpr,
                     grid: GridSpec | None = None, *,
                     reducers: Sequence[RegularFunctionSpec] | None = None,
                     sandwich: tuple[expr.ScalarExpr, expr.ScalarExpr] | None = None,
                     tol: float = 1e-9) -> Certificate:
    """Screen ``derivative <= -bound`` at every grid node and time node.

    The candidate is screened for positive definiteness on the grid
    (value exactly 0 at the origin, strictly positive at nonzero nodes).
    With ``sandwich=(lower, upper)`` the time-uniform envelopes
    ``lower(x) <= V(x, t) <= upper(x)`` are screened as well, both
    envelopes being positive definite. A minus-infinity derivative
    (empty reduced set) passes the decrease test vacuously.
    """
    grid = grid if grid is not None else sys.require_grid()
    reducers = tuple(sys.reducers if reducers is None else reducers)
    nodes = grid.nodes(sys.domain)
    time_nodes = grid.time_nodes
    candidate = sys.candidate
    bound_fn = expr.compile_scalar(bound)

    failures: list[str] = []
    _origin_value_screen(candidate.name, candidate.value_at, sys.n,
                         time_nodes, failures)
    _positive_screen(candidate.name, candidate.value_at, nodes, time_nodes,
                     failures, strict=True)

    sandwich_violations = 0
    if sandwich is not None:
        lower_fn = expr.compile_scalar(sandwich[0])
        upper_fn = expr.compile_scalar(sandwich[1])
        def lower_at(x, t):
            return lower_fn(sys.inclusion.env(x, t))
        def upper_at(x, t):
            return upper_fn(sys.inclusion.env(x, t))
        _origin_value_screen("lower envelope", lower_at, sys.n, time_nodes,
                             failures)
        _origin_value_screen("upper envelope", upper_at, sys.n, time_nodes,
                             failures)
        _positive_screen("lower envelope", lower_at, nodes, time_nodes,
                         failures, strict=True)
        _positive_screen("upper envelope", upper_at, nodes, time_nodes,
                         failures, strict=True)
        for t in time_nodes:
            for x in nodes:
                v = candidate.value_at(x, t)
                if not (lower_at(x, t) - tol <= v <= upper_at(x, t) + tol):
                    sandwich_violations += 1
        if sandwich_violations:
            failures.append(
                f"candidate escapes the envelopes at {sandwich_violations} "
                "node/time pairs")

    worst = _Worst()
    violations = 0
    minus_inf = 0
    checked = 0
    for t in time_nodes:
        for x in nodes:
            d = generalized_derivative(candidate, sys.inclusion, reducers,
                                       x, t)
            checked += 1
            if d.is_minus_inf:
                minus_inf += 1
                continue
            margin = d.value + bound_fn(sys.inclusion.env(x, t))
            worst.offer(margin, x, t)
            if margin > tol:
                violations += 1

    verdict = CERTIFIED if not violations and not failures else VIOLATED
    details = {
        "note": _GRID_NOTE,
        "nodes_checked": checked,
        "minus_inf_nodes": minus_inf,
        "derivative_violations": violations,
        "reducers": [u.name for u in reducers],
    }
    if sandwich is not None:
        details["sandwich_checked"] = True
        details["sandwich_violations"] = sandwich_violations
    if failures:
        details["screen_failures"] = failures
    return Certificate(
        verdict=verdict, condition="lyapunov-decrease",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"margin_tol": tol},
        grid_summary=grid.summary(sys.domain), details=details)


def certify_semidefinite(sys: SystemDef, bound: expr.ScalarExpr,
                         grid: GridSpec | None = None, *,
                         reducers: Sequence[RegularFunctionSpec] | None = None,
                         tol: float = 1e-9) -> Certificate:
    """Screen ``derivative <= -bound`` with a positive semidefinite bound.

    Also screens ``bound >= 0`` on the grid. This is the hypothesis that
    drives asymptotic decay of ``bound(x(t))`` along complete bounded
    solutions; the simulator's tail check is its trajectory counterpart.
    """
    grid = grid if grid is not None else sys.require_grid()
    reducers = tuple(sys.reducers if reducers is None else reducers)
    nodes = grid.nodes(sys.domain)
    time_nodes = grid.time_nodes
    bound_fn = expr.compile_scalar(bound)

    failures: list[str] = []
    for x in nodes:
        w = bound_fn(sys.inclusion.env(x, time_nodes[0]))
        if w < -tol:
            failures.append(f"bound({list(x)}) = {w!r} is negative")
            break

    worst = _Worst()
    violations = 0
    minus_inf = 0
    for t in time_nodes:
        for x in nodes:
            d = generalized_derivative(sys.candidate, sys.inclusion,
                                       reducers, x, t)
            if d.is_minus_inf:
                minus_inf += 1
                continue
            margin = d.value + bound_fn(sys.inclusion.env(x, t))
            worst.offer(margin, x, t)
            if margin > tol:
                violations += 1

    verdict = CERTIFIED if not violations and not failures else VIOLATED
    details = {
        "note": _GRID_NOTE,
        "minus_inf_nodes": minus_inf,
        "derivative_violations": violations,
        "reducers": [u.name for u in reducers],
    }
    if failures:
        details["screen_failures"] = failures
    return Certificate(
        verdict=verdict, condition="semidefinite-decrease",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"margin_tol": tol},
        grid_summary=grid.summary(sys.domain), details=details)


@dataclass(frozen=True)
class CandidateCheck:
    point: tuple[float, ...]
    is_equilibrium: bool
    inclusion_value: IntervalBox

    def to_dict(self) -> dict:
        d = {"point": list(self.point), "is_equilibrium": self.is_equilibrium}
        if self.inclusion_value.is_empty:
            d["inclusion_value"] = "empty"
        else:
            d["inclusion_value"] = {
                "lo": list(self.inclusion_value.lo_corner()),
                "hi": list(self.inclusion_value.hi_corner()),
            }
        return d


@dataclass(frozen=True)
class InvarianceReport:
    e_nodes: tuple[tuple[float, ...], ...]
    semidefinite: Certificate
    candidates: tuple[CandidateCheck, ...]
    zero_tol: float

    def to_dict(self) -> dict:
        return {
            "zero_tol": self.zero_tol,
            "e_node_count": len(self.e_nodes),
            "e_nodes": [list(x) for x in self.e_nodes],
            "semidefinite": self.semidefinite.to_dict(),
            "candidates": [c.to_dict() for c in self.candidates],
            "note": "candidate screening (0 in F(x)) is a necessary "
                    "condition for a point to host a constant solution, "
                    "not an invariance proof",
        }


def invariance_data(sys: SystemDef, grid: GridSpec | None = None, *,
                    zero_tol: float = 1e-6,
                    candidates: Sequence[Sequence[float]] | None = None,
                    tol: float = 1e-9) -> InvarianceReport:
    """Discrete data for invariance-principle arguments.

    Returns the grid nodes where the generalized derivative is finite
    and within ``zero_tol`` of zero (the discrete estimate of the
    vanishing set), a semidefiniteness certificate ``derivative <= 0``,
    and equilibrium screening of user-proposed candidate points: a
    trajectory can sit at ``x`` forever only if ``0 in F(x)``.

    Autonomous systems only.
    """
    if sys.time_dependent:
        raise SchemaError("invariance analysis requires an autonomous system")
    grid = grid if grid is not None else sys.require_grid()
    nodes = grid.nodes(sys.domain)
    t0 = grid.time_nodes[0]

    e_nodes = []
    worst = _Worst()
    violations = 0
    minus_inf = 0
    for x in nodes:
        d = generalized_derivative(sys.candidate, sys.inclusion,
                                   sys.reducers, x, t0)
        if d.is_minus_inf:
            minus_inf += 1
            continue
        if abs(d.value) <= zero_tol:
            e_nodes.append(tuple(x))
        worst.offer(d.value, x, t0)
        if d.value > tol:
            violations += 1

    cert = Certificate(
        verdict=CERTIFIED if not violations else VIOLATED,
        condition="derivative-nonpositive",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"margin_tol": tol},
        grid_summary=grid.summary(sys.domain),
        details={"note": _GRID_NOTE, "minus_inf_nodes": minus_inf,
                 "derivative_violations": violations})

    if candidates is None:
        candidates = sys.checks.candidates if sys.checks else ()
    checks = []
    zero = (0.0,) * sys.n
    for point in candidates:
        fbox = eval_map(sys.inclusion, point, t0)
        checks.append(CandidateCheck(tuple(float(v) for v in point),
                                     contains(fbox, zero), fbox))
    return InvarianceReport(tuple(e_nodes), cert, tuple(checks), zero_tol)


# --- Matrosov machinery --------------------------------------------------


@dataclass(frozen=True)
class MatrosovProblem:
    """Matrosov data bound to an annulus, ready for grid checks.

    ``aux`` are the bound expressions Y_1..Y_M over ``(z, x)``; the
    conventions Y_0 = 0 and Y_{M+1} = 1 are applied by the checkers, not
    stored. ``functions``/``collections`` pair each comparison function
    with its reducer collection for the informational derivative-bound
    screen.
    """
    m: int
    count: int
    functions: tuple[RegularFunctionSpec, ...]
    collections: tuple[tuple[RegularFunctionSpec, ...], ...]
    aux: tuple[expr.ScalarExpr, ...]
    phi: tuple[expr.ScalarExpr, ...]
    gamma: float
    delta: float
    big_delta: float
    z_counts: tuple[int, ...]

    def annulus(self) -> Annulus:
        return Annulus(self.delta, self.big_delta)

    def aux_uses_z(self) -> bool:
        zvars = {f"z{i+1}" for i in range(self.m)}
        return any(expr.free_vars(y) & zvars for y in self.aux)


def build_matrosov_problem(sys: SystemDef) -> MatrosovProblem:
    data = sys.matrosov
    if data is None:
        raise SchemaError("the system definition has no matrosov block")
    for axis in sys.domain.axes:
        if axis.lo > -data.big_delta or axis.hi < data.big_delta:
            raise SchemaError(
                "the annulus must lie inside the domain box "
                f"(need every axis to cover [-{data.big_delta}, "
                f"{data.big_delta}])")
    return MatrosovProblem(
        m=len(data.phi), count=len(data.aux), functions=data.functions,
        collections=data.collections, aux=data.aux, phi=data.phi,
        gamma=data.gamma, delta=data.delta, big_delta=data.big_delta,
        z_counts=data.z_counts)


def matrosov_grid(prob: MatrosovProblem, sys: SystemDef,
                  grid: GridSpec | None = None,
                  ) -> tuple[list[tuple[float, ...]], list[tuple[float, ...]]]:
    """Grid over ball(0, gamma) x annulus(delta, Delta).

    The state grid reuses the system grid's axes, with the radii
    ``+/-delta``, ``+/-Delta`` and 0 injected on every axis so that the
    closest-to-origin annulus points are hit exactly; nodes outside the
    annulus are dropped. The z grid is uniform per axis over
    ``[-gamma, gamma]`` filtered to the ball.
    """
    grid = grid if grid is not None else sys.require_grid()
    extra = tuple(
        (prob.delta, -prob.delta, prob.big_delta, -prob.big_delta, 0.0)
        for _ in range(sys.n))
    annulus = prob.annulus()
    x_nodes = [x for x in itertools.product(*grid.axis_nodes(sys.domain, extra))
               if annulus.contains(x)]
    if not x_nodes:
        raise SchemaError("no grid nodes fall inside the annulus")
    g = prob.gamma
    z_axes = []
    for count in prob.z_counts:
        vals = {float(v) for v in np.linspace(-g, g, count)}
        vals.update((-g, 0.0, g))
        z_axes.append(tuple(sorted(vals)))
    gamma_sq = g * g
    z_nodes = [z for z in itertools.product(*z_axes)
               if sum(v * v for v in z) <= gamma_sq]
    return z_nodes, x_nodes


def _aux_rows(prob: MatrosovProblem, z_nodes, x_nodes):
    """Evaluate Y_1..Y_M at every (z, x) pair, in deterministic order.

    When no auxiliary expression reads z, a single representative z is
    evaluated (the chain condition is then z-independent).
    """
    fns = [expr.compile_scalar(y) for y in prob.aux]
    z_iter = z_nodes if prob.aux_uses_z() else z_nodes[:1]
    x_names = [f"x{i+1}" for i in range(len(x_nodes[0]))]
    z_names = [f"z{i+1}" for i in range(prob.m)]
    rows = []
    for x in x_nodes:
        base = dict(zip(x_names, x))
        for z in z_iter:
            env = dict(base)
            env.update(zip(z_names, z))
            rows.append((z, x, [fn(env) for fn in fns]))
    return rows


def matrosov_chain(prob: MatrosovProblem, z_nodes, x_nodes,
                   eq_tol: float = 1e-6) -> Certificate:
    """Screen the nested chain: Y_1..Y_j all ~ 0 forces Y_{j+1} <= 0.

    The conventions Y_0 = 0 (so Y_1 <= 0 must hold unconditionally) and
    Y_{M+1} = 1 (so the full chain must never be simultaneously ~ 0 on
    the annulus) are applied here. Equality triggers use ``|Y_i| <=
    eq_tol``; the same tolerance bounds the required sign.
    """
    M = prob.count
    rows = _aux_rows(prob, z_nodes, x_nodes)
    worst = _Worst()
    violations = 0
    trigger_counts = [0] * (M + 1)
    for z, x, y in rows:
        trig = True
        for j in range(M + 1):
            if j >= 1:
                trig = trig and abs(y[j - 1]) <= eq_tol
            if not trig:
                break
            trigger_counts[j] += 1
            nxt = y[j] if j < M else 1.0
            margin = nxt - eq_tol
            worst.offer(margin, z + x, float(j))
            if margin > 0.0:
                violations += 1
    verdict = CERTIFIED if not violations else VIOLATED
    return Certificate(
        verdict=verdict, condition="matrosov-chain",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"eq_tol": eq_tol},
        grid_summary={"z_nodes": len(z_nodes), "x_nodes": len(x_nodes)},
        details={"note": _GRID_NOTE + "; worst_t is the chain index j, "
                 "worst_point is (z, x)",
                 "trigger_counts": trigger_counts,
                 "aux_uses_z": prob.aux_uses_z()})


@dataclass(frozen=True)
class MatrosovConstantsResult:
    constants: tuple[float, ...]
    zeta: float | None
    epsilon_estimate: float | None
    certificate: Certificate

    def to_dict(self) -> dict:
        return {
            "constants": list(self.constants),
            "zeta": self.zeta,
            "epsilon_estimate": self.epsilon_estimate,
            "certificate": self.certificate.to_dict(),
        }


def matrosov_constants(prob: MatrosovProblem, z_nodes, x_nodes, *,
                       zeta_target: float | None = None,
                       eq_tol: float = 1e-6,
                       cap: float = 2.0 ** 20) -> MatrosovConstantsResult:
    """Combination constants K_1..K_{M-1} and the decay level zeta.

    zeta defaults to the discrete estimate of the guaranteed gap: the
    most pessimistic value of ``-Y_M`` over the nodes where Y_1..Y_{M-1}
    all vanish within ``eq_tol``. Each constant is then found by
    doubling from 1 (cap ``2**20``) until the partial combination meets
    its halved budget on its trigger set; the final certificate checks
    ``Z <= -zeta / 2^{M-1}`` at every node.
    """
    M = prob.count
    rows = _aux_rows(prob, z_nodes, x_nodes)
    grid_summary = {"z_nodes": len(z_nodes), "x_nodes": len(x_nodes)}

    def inconclusive(reason: str, diagnostics: dict) -> MatrosovConstantsResult:
        cert = Certificate(
            verdict=INCONCLUSIVE, condition="matrosov-constants",
            worst_point=None, worst_t=None, worst_margin=None,
            tolerances={"eq_tol": eq_tol, "cap": cap},
            grid_summary=grid_summary,
            details={"reason": reason, **diagnostics})
        return MatrosovConstantsResult((), None, None, cert)

    triggered = [y for _, _, y in rows
                 if all(abs(y[i]) <= eq_tol for i in range(M - 1))]
    epsilon = None
    if triggered:
        epsilon = -max(y[M - 1] for y in triggered)
    if zeta_target is not None:
        zeta = float(zeta_target)
    else:
        if epsilon is None:
            return inconclusive(
                "no node triggers the full chain; supply zeta_target", {})
        if epsilon <= 0.0:
            return inconclusive(
                "triggered nodes do not leave a negative gap "
                "(is the chain certificate CERTIFIED?)",
                {"epsilon_estimate": epsilon})
        zeta = epsilon

    running = [y[M - 1] for _, _, y in rows]
    budget = zeta
    constants_rev: list[float] = []
    for level in range(M, 1, -1):
        budget /= 2.0
        trig_idx = [r for r, (_, _, y) in enumerate(rows)
                    if all(abs(y[i]) <= eq_tol for i in range(level - 2))]
        k = 1.0
        while True:
            ok = all(k * rows[r][2][level - 2] + running[r] <= -budget
                     for r in trig_idx)
            if ok:
                break
            k *= 2.0
            if k > cap:
                worst_r = max(trig_idx,
                              key=lambda r: rows[r][2][level - 2] + running[r])
                return inconclusive(
                    f"doubling search exceeded the cap at level {level}",
                    {"level": level, "budget": budget,
                     "worst_point": list(rows[worst_r][0] + rows[worst_r][1]),
                     "epsilon_estimate": epsilon, "zeta": zeta})
        constants_rev.append(k)
        running = [k * rows[r][2][level - 2] + running[r]
                   for r in range(len(rows))]
    constants = tuple(reversed(constants_rev))

    final_bound = -zeta / (2.0 ** (M - 1))
    worst = _Worst()
    violations = 0
    for r, (z, x, _) in enumerate(rows):
        margin = running[r] - final_bound
        worst.offer(margin, z + x, 0.0)
        if margin > 0.0:
            violations += 1
    cert = Certificate(
        verdict=CERTIFIED if not violations else VIOLATED,
        condition="matrosov-constants",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"eq_tol": eq_tol, "cap": cap},
        grid_summary=grid_summary,
        details={"note": _GRID_NOTE + "; worst_point is (z, x), margin is "
                 "Z - (-zeta / 2^(M-1))",
                 "final_bound": final_bound,
                 "combination_violations": violations,
                 "epsilon_estimate": epsilon})
    return MatrosovConstantsResult(constants, zeta, epsilon, cert)


def verify_combined_bound(prob: MatrosovProblem, constants: Sequence[float],
                          zeta: float, z_nodes, x_nodes) -> Certificate:
    """Re-check ``Z = sum K_j Y_j + Y_M <= -zeta / 2^(M-1)`` on a grid.

    Used to confirm searched constants on a finer verification grid than
    the one that produced them.
    """
    M = prob.count
    if len(constants) != M - 1:
        raise SchemaError(f"expected {M - 1} constants, got {len(constants)}")
    rows = _aux_rows(prob, z_nodes, x_nodes)
    final_bound = -zeta / (2.0 ** (M - 1))
    worst = _Worst()
    violations = 0
    for z, x, y in rows:
        combined = y[M - 1]
        for k, yj in zip(constants, y):
            combined += k * yj
        margin = combined - final_bound
        worst.offer(margin, z + x, 0.0)
        if margin > 0.0:
            violations += 1
    return Certificate(
        verdict=CERTIFIED if not violations else VIOLATED,
        condition="matrosov-combined-bound",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"zeta": zeta},
        grid_summary={"z_nodes": len(z_nodes), "x_nodes": len(x_nodes)},
        details={"final_bound": final_bound,
                 "combination_violations": violations})


def matrosov_derivative_bounds(sys: SystemDef, prob: MatrosovProblem,
                               grid: GridSpec | None = None,
                               tol: float = 1e-9) -> Certificate:
    """Screen the per-function derivative bounds on the annulus.

    For each comparison function W_j, checks ``derivative of W_j along
    the inclusion, reduced by its own collection, <= Y_j(phi(x, t), x)``
    at annulus nodes and time nodes. Informational: the chain and
    constants certificates do not depend on it.
    """
    grid = grid if grid is not None else sys.require_grid()
    _, x_nodes = matrosov_grid(prob, sys, grid)
    time_nodes = grid.time_nodes
    aux_fns = [expr.compile_scalar(y) for y in prob.aux]
    phi_fns = [expr.compile_scalar(p) for p in prob.phi]
    x_names = [f"x{i+1}" for i in range(sys.n)]
    z_names = [f"z{i+1}" for i in range(prob.m)]

    worst = _Worst()
    violations = 0
    per_function = [0] * prob.count
    for j, (w, coll) in enumerate(zip(prob.functions, prob.collections)):
        for t in time_nodes:
            for x in x_nodes:
                d = generalized_derivative(w, sys.inclusion, coll, x, t)
                if d.is_minus_inf:
                    continue
                env = sys.inclusion.env(x, t)
                z = [fn(env) for fn in phi_fns]
                yenv = dict(zip(x_names, x))
                yenv.update(zip(z_names, z))
                margin = d.value - aux_fns[j](yenv)
                worst.offer(margin, x, t)
                if margin > tol:
                    violations += 1
                    per_function[j] += 1
    return Certificate(
        verdict=CERTIFIED if not violations else VIOLATED,
        condition="matrosov-derivative-bounds",
        worst_point=worst.point, worst_t=worst.t,
        worst_margin=None if not worst.seen() else worst.margin,
        tolerances={"margin_tol": tol},
        grid_summary={"x_nodes": len(x_nodes),
                      "time_nodes": list(time_nodes)},
        details={"note": "informational screen; the chain and constants "
                 "certificates do not depend on it",
                 "violations_per_function": per_function})
