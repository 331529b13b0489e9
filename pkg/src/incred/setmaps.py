"""Piecewise box-valued maps, declared-gradient function specs, and the
system definition format.

A :class:`PiecewiseBoxMap` is an ordered list of guarded pieces mapping
``(x, t)`` to an :class:`~incred.intervals.IntervalBox`; the first
matching guard wins and a final ``otherwise`` piece is mandatory, so
evaluation is total. Inclusions, declared Clarke-gradient tables, and
reduced inclusions are all expressed this way.

A :class:`RegularFunctionSpec` couples a scalar value expression with a
*declared* gradient map of dimension ``n + 1`` (state axes then a time
axis) and a regularity flag. Gradients are declared, not derived:
symbolic nonsmooth differentiation is out of scope, and
:func:`validate_gradient` cross-checks declarations against central
finite differences instead.

The JSON system-definition format (one UTF-8 document) uses top-level
keys ``n``, ``F``, ``V``, ``U``, ``domain``, ``params``, ``grid``,
``matrosov`` plus the optional analysis blocks ``certify`` and
``simulate``; unknown keys are rejected. See the README for the full
schema.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr
from .errors import (DimensionMismatchError, DslSyntaxError, EmptySetError,
                     SchemaError)
from .expr import GuardExpr, ScalarExpr, SetExpr, TrueGuard
from .grids import GridSpec
from .intervals import IntervalBox

__all__ = [
    "Piece", "PiecewiseBoxMap", "RegularFunctionSpec", "MatrosovData",
    "CheckSpec", "SimSpec", "SystemDef", "GradientValidationReport",
    "eval_map", "eval_gradient", "validate_gradient",
    "load_system", "system_from_dict",
]

_MAX_STATE_DIM = 9  # variable names x1..x9

ParamTable = tuple[tuple[str, ScalarExpr], ...]


def _compile_params(params: ParamTable):
    return tuple((name, expr.compile_scalar(node)) for name, node in params)


@dataclass(frozen=True)
class Piece:
    guard: GuardExpr
    values: tuple[SetExpr, ...] | None  # None: the piece is empty-valued


class PiecewiseBoxMap:
    """Ordered guarded pieces mapping ``(x, t)`` to a box in ``R^n_out``."""

    __slots__ = ("n_in", "n_out", "pieces", "params", "time_dependent",
                 "_var_names", "_param_fns", "_compiled")

    def __init__(self, n_in: int, n_out: int, pieces: Sequence[Piece],
                 params: ParamTable = ()):
        pieces = tuple(pieces)
        if not pieces:
            raise SchemaError("a piecewise map needs at least one piece")
        for k, piece in enumerate(pieces):
            is_last = k == len(pieces) - 1
            if isinstance(piece.guard, TrueGuard) != is_last:
                raise SchemaError(
                    "exactly one 'otherwise' piece is required and it must "
                    "be last")
            if piece.values is not None and len(piece.values) != n_out:
                raise SchemaError(
                    f"piece {k} has {len(piece.values)} components, "
                    f"expected {n_out}")
        self.n_in = n_in
        self.n_out = n_out
        self.pieces = pieces
        self.params = params
        self._var_names = tuple(f"x{i+1}" for i in range(n_in))
        self._param_fns = _compile_params(params)
        self._compiled = tuple(
            (expr.compile_guard(p.guard),
             None if p.values is None
             else tuple(expr.compile_set(v) for v in p.values))
            for p in pieces)
        used = set()
        for p in pieces:
            used |= expr.free_vars(p.guard)
            for v in p.values or ():
                used |= expr.free_vars(v)
        time_names = {"t"} | {name for name, _ in params}
        self.time_dependent = bool(used & time_names)

    def env(self, x: Sequence[float], t: float) -> dict[str, float]:
        env = {"t": float(t)}
        for name, v in zip(self._var_names, x):
            env[name] = float(v)
        for name, fn in self._param_fns:
            env[name] = fn(env)
        return env

    def value(self, x: Sequence[float], t: float) -> IntervalBox:
        if len(x) != self.n_in:
            raise DimensionMismatchError(
                f"point has {len(x)} coordinates, map expects {self.n_in}")
        env = self.env(x, t)
        for guard_fn, value_fns in self._compiled:
            if guard_fn(env):
                if value_fns is None:
                    return IntervalBox.empty(self.n_out)
                return IntervalBox(fn(env) for fn in value_fns)
        raise AssertionError("unreachable: otherwise piece is mandatory")


def eval_map(m: PiecewiseBoxMap, x: Sequence[float], t: float) -> IntervalBox:
    """Value of the first matching piece at ``(x, t)``; may be empty."""
    return m.value(x, t)


class RegularFunctionSpec:
    """Scalar function with a declared piecewise gradient box.

    The gradient map produces boxes of dimension ``n + 1``: state axes
    1..n followed by the time axis. Time-independent functions must
    declare the degenerate time axis ``{0}``. The ``regular`` flag is a
    declaration (convex functions qualify); it gates which operations
    accept the function, and is not verified symbolically.
    """

    __slots__ = ("name", "n", "value", "gradient", "regular", "_value_fn")

    def __init__(self, name: str, n: int, value: ScalarExpr,
                 gradient: PiecewiseBoxMap, regular: bool):
        if gradient.n_in != n or gradient.n_out != n + 1:
            raise SchemaError(
                f"{name}: gradient must map R^{n} to boxes in R^{n+1}")
        self.name = name
        self.n = n
        self.value = value
        self.gradient = gradient
        self.regular = bool(regular)
        self._value_fn = expr.compile_scalar(value)

    @property
    def time_dependent(self) -> bool:
        time_names = {"t"} | {name for name, _ in self.gradient.params}
        return bool(expr.free_vars(self.value) & time_names) \
            or self.gradient.time_dependent

    def value_at(self, x: Sequence[float], t: float) -> float:
        return self._value_fn(self.gradient.env(x, t))


def eval_gradient(f: RegularFunctionSpec, x: Sequence[float],
                  t: float) -> IntervalBox:
    """Declared gradient box in ``R^{n+1}``; empty declarations are invalid."""
    box = f.gradient.value(x, t)
    if box.is_empty:
        raise EmptySetError(
            f"{f.name}: declared gradient is empty at x={tuple(x)}, t={t}")
    return box


@dataclass(frozen=True)
class GradientValidationReport:
    name: str
    point: tuple[float, ...]
    t: float
    radius: float
    step: float
    samples: int
    fraction_inside: float
    estimate_hull: IntervalBox
    declared: IntervalBox
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "point": list(self.point),
            "t": self.t,
            "radius": self.radius,
            "samples": self.samples,
            "fraction_inside": self.fraction_inside,
            "estimate_hull_lo": list(self.estimate_hull.lo_corner()),
            "estimate_hull_hi": list(self.estimate_hull.hi_corner()),
            "declared_lo": list(self.declared.lo_corner()),
            "declared_hi": list(self.declared.hi_corner()),
            "passed": self.passed,
        }


def validate_gradient(f: RegularFunctionSpec, x: Sequence[float], t: float,
                      radius: float, samples: int, *, seed: int = 0,
                      inflate: float = 1e-4, threshold: float = 0.99,
                      ) -> GradientValidationReport:
    """Cross-check a declared gradient against finite differences.

    Draws ``samples`` points uniformly from the ball of the given radius
    around ``(x, t)`` in ``R^{n+1}``, estimates the classical gradient at
    each by central differences with step ``radius / 100``, and reports
    the fraction of estimates inside the *declared* box at ``(x, t)``
    inflated by ``inflate``, together with the hull of the estimates.
    PASS requires the fraction to reach ``threshold``.

    Near kink surfaces the difference quotient straddles two smooth
    pieces and lands between their slopes, which is inside the declared
    box precisely when the declaration is a correct gradient hull; probe
    points should sit either exactly on a kink or at least ~10 radii away
    from one, otherwise one-sided samples legitimately disagree with the
    box declared at the probe.
    """
    if radius <= 0:
        raise SchemaError("validate_gradient requires radius > 0")
    if samples < 10:
        raise SchemaError("validate_gradient requires samples >= 10")
    n = f.n
    dims = n + 1
    center = np.array([float(v) for v in x] + [float(t)])
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((samples, dims))
    norms = np.linalg.norm(directions, axis=1)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(samples) ** (1.0 / dims)
    points = center + directions / norms[:, None] * radii[:, None]

    declared = eval_gradient(f, x, t)
    inflated = declared.inflate(inflate)
    step = radius / 100.0

    inside = 0
    lo = [math.inf] * dims
    hi = [-math.inf] * dims
    for p in points:
        estimate = []
        for j in range(dims):
            fwd = p.copy()
            bwd = p.copy()
            fwd[j] += step
            bwd[j] -= step
            vf = f.value_at(fwd[:n], fwd[n])
            vb = f.value_at(bwd[:n], bwd[n])
            estimate.append((vf - vb) / (2.0 * step))
        if all(iv.lo <= e <= iv.hi for e, iv in zip(estimate, inflated.axes)):
            inside += 1
        for j, e in enumerate(estimate):
            lo[j] = min(lo[j], e)
            hi[j] = max(hi[j], e)

    fraction = inside / samples
    hull = IntervalBox.from_bounds(lo, hi)
    return GradientValidationReport(
        name=f.name, point=tuple(float(v) for v in x), t=float(t),
        radius=radius, step=step, samples=samples, fraction_inside=fraction,
        estimate_hull=hull, declared=declared,
        passed=fraction >= threshold)


@dataclass(frozen=True)
class MatrosovData:
    """Raw Matrosov block of a system definition.

    ``aux`` holds the auxiliary bound expressions Y_1..Y_M in the
    variables ``z1..zm`` and ``x1..xn``; ``functions`` the comparison
    functions W_1..W_M, each paired with its own reducer collection in
    ``collections``; ``phi`` the m expressions defining z from (x, t).
    """
    delta: float
    big_delta: float
    gamma: float
    phi: tuple[ScalarExpr, ...]
    aux: tuple[ScalarExpr, ...]
    functions: tuple["RegularFunctionSpec", ...]
    collections: tuple[tuple["RegularFunctionSpec", ...], ...]
    z_counts: tuple[int, ...]


@dataclass(frozen=True)
class CheckSpec:
    decrease_bound: ScalarExpr | None = None   # W in  derivative <= -W
    semidef_bound: ScalarExpr | None = None    # positive semidefinite W
    lower_envelope: ScalarExpr | None = None   # sandwich bounds on V
    upper_envelope: ScalarExpr | None = None
    zero_tol: float = 1e-6
    candidates: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class SimSpec:
    x0: tuple[float, ...] | None = None
    t0: float = 0.0
    h: float = 1e-3
    horizon: float = 10.0
    strategy: str = "midpoint"
    seed: int = 0
    tail_fraction: float = 0.2
    tail_threshold: float = 1e-3


@dataclass(frozen=True)
class SystemDef:
    """A differential inclusion plus everything the pipeline needs.

    ``reducers`` is the collection of regular functions used to prune
    infeasible directions; it is user input, never searched for.
    """
    n: int
    inclusion: PiecewiseBoxMap
    candidate: RegularFunctionSpec
    reducers: tuple[RegularFunctionSpec, ...]
    domain: IntervalBox
    params: ParamTable = ()
    grid: GridSpec | None = None
    matrosov: MatrosovData | None = None
    checks: CheckSpec | None = None
    sim: SimSpec | None = None

    @property
    def time_dependent(self) -> bool:
        if self.inclusion.time_dependent or self.candidate.time_dependent:
            return True
        return any(u.time_dependent for u in self.reducers)

    def require_grid(self) -> GridSpec:
        if self.grid is None:
            raise SchemaError("this operation needs a grid specification")
        return self.grid


# --- JSON loading -------------------------------------------------------

_TOP_KEYS = {"n", "F", "V", "U", "domain", "params", "grid", "matrosov",
             "certify", "simulate"}
_REQUIRED_TOP = {"n", "F", "V", "domain"}


def _check_keys(d: dict, allowed: set[str], required: set[str],
                where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise SchemaError(f"{where}: missing key(s) {sorted(missing)}")


def _parse_in(where: str, parse_fn, src, variables):
    if not isinstance(src, str):
        raise SchemaError(f"{where}: expected an expression string")
    try:
        return parse_fn(src, variables)
    except DslSyntaxError as e:
        raise DslSyntaxError(f"{where}: {e.args[0]}", e.offset, src) from None


def _float_list(values, length: int, where: str) -> tuple[float, ...]:
    if not isinstance(values, list) or len(values) != length:
        raise SchemaError(f"{where}: expected a list of {length} numbers")
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: expected numbers") from None


def _parse_pieces(doc, n_out: int, variables, params: ParamTable,
                  n_in: int, where: str) -> PiecewiseBoxMap:
    if not isinstance(doc, list) or not doc:
        raise SchemaError(f"{where}: expected a nonempty list of pieces")
    pieces = []
    for k, entry in enumerate(doc):
        pw = f"{where}[{k}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{pw}: expected an object")
        _check_keys(entry, {"guard", "value"}, {"guard", "value"}, pw)
        guard = _parse_in(f"{pw}.guard", expr.parse_guard, entry["guard"],
                          variables)
        raw = entry["value"]
        if raw == "empty":
            pieces.append(Piece(guard, None))
            continue
        if not isinstance(raw, list) or len(raw) != n_out:
            raise SchemaError(
                f"{pw}.value: expected {n_out} set expressions or \"empty\"")
        values = tuple(
            _parse_in(f"{pw}.value[{j}]", expr.parse_set, s, variables)
            for j, s in enumerate(raw))
        pieces.append(Piece(guard, values))
    return PiecewiseBoxMap(n_in, n_out, pieces, params)


def _parse_function(doc, n: int, variables, params: ParamTable,
                    where: str, default_name: str,
                    allow_collection: bool = False) -> RegularFunctionSpec:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object")
    keys = {"name", "value", "gradient", "regular"}
    if allow_collection:
        keys.add("U")
    _check_keys(doc, keys, {"value", "gradient", "regular"}, where)
    name = doc.get("name", default_name)
    value = _parse_in(f"{where}.value", expr.parse_scalar, doc["value"],
                      variables)
    gradient = _parse_pieces(doc["gradient"], n + 1, variables, params, n,
                             f"{where}.gradient")
    regular = doc["regular"]
    if not isinstance(regular, bool):
        raise SchemaError(f"{where}.regular: expected true or false")
    return RegularFunctionSpec(name, n, value, gradient, regular)


def _parse_grid(doc, n: int, where: str) -> GridSpec:
    _check_keys(doc, {"counts", "nodes", "include", "time_nodes"},
                {"include"}, where)
    if ("counts" in doc) == ("nodes" in doc):
        raise SchemaError(f"{where}: give exactly one of 'counts' or 'nodes'")
    if "counts" in doc:
        counts = doc["counts"]
        if not isinstance(counts, list) or len(counts) != n or \
                not all(isinstance(c, int) for c in counts):
            raise SchemaError(f"{where}.counts: expected {n} integers")
        axes = tuple(counts)
    else:
        nodes = doc["nodes"]
        if not isinstance(nodes, list) or len(nodes) != n:
            raise SchemaError(f"{where}.nodes: expected {n} node lists")
        axes = tuple(tuple(float(v) for v in axis) for axis in nodes)
    include = doc["include"]
    if not isinstance(include, list) or len(include) != n:
        raise SchemaError(f"{where}.include: expected {n} node lists")
    include = tuple(tuple(float(v) for v in axis) for axis in include)
    time_nodes = tuple(float(v) for v in doc.get("time_nodes", [0.0]))
    return GridSpec(axes, include, time_nodes)


def _parse_matrosov(doc, n: int, variables, params: ParamTable,
                    where: str) -> MatrosovData:
    _check_keys(doc, {"delta", "Delta", "gamma", "phi", "W", "Y", "z_counts"},
                {"delta", "Delta", "gamma", "phi", "W", "Y"}, where)
    delta = float(doc["delta"])
    big_delta = float(doc["Delta"])
    gamma = float(doc["gamma"])
    if not 0 < delta < big_delta:
        raise SchemaError(f"{where}: need 0 < delta < Delta")
    if gamma <= 0:
        raise SchemaError(f"{where}: need gamma > 0")
    phi_doc = doc["phi"]
    if not isinstance(phi_doc, list) or not phi_doc:
        raise SchemaError(f"{where}.phi: expected a nonempty expression list")
    phi = tuple(_parse_in(f"{where}.phi[{k}]", expr.parse_scalar, s, variables)
                for k, s in enumerate(phi_doc))
    m = len(phi)
    z_vars = frozenset(f"z{i+1}" for i in range(m))
    y_vars = frozenset(f"x{i+1}" for i in range(n)) | z_vars
    y_doc = doc["Y"]
    w_doc = doc["W"]
    if not isinstance(y_doc, list) or not y_doc:
        raise SchemaError(f"{where}.Y: expected a nonempty expression list")
    if not isinstance(w_doc, list) or len(w_doc) != len(y_doc):
        raise SchemaError(f"{where}.W: expected one entry per Y expression")
    aux = tuple(_parse_in(f"{where}.Y[{k}]", expr.parse_scalar, s, y_vars)
                for k, s in enumerate(y_doc))
    functions = []
    collections = []
    for k, entry in enumerate(w_doc):
        fw = f"{where}.W[{k}]"
        spec = _parse_function(entry, n, variables, params, fw, f"W{k+1}",
                               allow_collection=True)
        u_doc = entry.get("U", [])
        if not isinstance(u_doc, list):
            raise SchemaError(f"{fw}.U: expected a list of function specs")
        coll = tuple(
            _parse_function(u, n, variables, params, f"{fw}.U[{j}]",
                            f"W{k+1}_U{j+1}")
            for j, u in enumerate(u_doc))
        functions.append(spec)
        collections.append(coll)
    z_counts = doc.get("z_counts", [5] * m)
    if not isinstance(z_counts, list) or len(z_counts) != m or \
            not all(isinstance(c, int) and c >= 2 for c in z_counts):
        raise SchemaError(f"{where}.z_counts: expected {m} integers >= 2")
    return MatrosovData(delta, big_delta, gamma, phi, aux, tuple(functions),
                        tuple(collections), tuple(z_counts))


def _parse_checks(doc, n: int, variables, where: str) -> CheckSpec:
    _check_keys(doc, {"W", "W_semidef", "Wlower", "Wupper", "zero_tol",
                      "candidates"}, set(), where)
    def opt(key):
        if key not in doc:
            return None
        return _parse_in(f"{where}.{key}", expr.parse_scalar, doc[key],
                         variables)
    candidates = tuple(
        _float_list(c, n, f"{where}.candidates[{k}]")
        for k, c in enumerate(doc.get("candidates", [])))
    return CheckSpec(
        decrease_bound=opt("W"),
        semidef_bound=opt("W_semidef"),
        lower_envelope=opt("Wlower"),
        upper_envelope=opt("Wupper"),
        zero_tol=float(doc.get("zero_tol", 1e-6)),
        candidates=candidates)


def _parse_sim(doc, n: int, where: str) -> SimSpec:
    _check_keys(doc, {"x0", "t0", "h", "T", "strategy", "seed",
                      "tail_fraction", "tail_threshold"}, set(), where)
    x0 = None
    if "x0" in doc:
        x0 = _float_list(doc["x0"], n, f"{where}.x0")
    return SimSpec(
        x0=x0,
        t0=float(doc.get("t0", 0.0)),
        h=float(doc.get("h", 1e-3)),
        horizon=float(doc.get("T", 10.0)),
        strategy=str(doc.get("strategy", "midpoint")),
        seed=int(doc.get("seed", 0)),
        tail_fraction=float(doc.get("tail_fraction", 0.2)),
        tail_threshold=float(doc.get("tail_threshold", 1e-3)))


def system_from_dict(doc: dict) -> SystemDef:
    if not isinstance(doc, dict):
        raise SchemaError("system definition must be a JSON object")
    _check_keys(doc, _TOP_KEYS, _REQUIRED_TOP, "system")
    n = doc["n"]
    if not isinstance(n, int) or not 1 <= n <= _MAX_STATE_DIM:
        raise SchemaError(f"n must be an integer in 1..{_MAX_STATE_DIM}")

    params_doc = doc.get("params", {})
    if not isinstance(params_doc, dict):
        raise SchemaError("params: expected an object of name -> expression")
    state_vars = {f"x{i+1}" for i in range(n)} | {"t"}
    params: list[tuple[str, ScalarExpr]] = []
    reserved_pattern = re.compile(r"^[xz]\d+$")
    for name in sorted(params_doc):
        if not name.isidentifier() or name == "t" \
                or reserved_pattern.match(name) \
                or name in {"and", "or", "not", "hull", "otherwise"} \
                or name in {"abs", "max", "min", "sgn", "sgn1", "exp",
                            "sin", "cos"}:
            raise SchemaError(f"params: invalid parameter name {name!r}")
        params.append((name, _parse_in(f"params.{name}", expr.parse_scalar,
                                       params_doc[name], {"t"})))
    params_t: ParamTable = tuple(params)
    variables = frozenset(state_vars | {name for name, _ in params_t})

    fdoc = doc["F"]
    if not isinstance(fdoc, dict):
        raise SchemaError("F: expected an object with a 'pieces' list")
    _check_keys(fdoc, {"pieces"}, {"pieces"}, "F")
    inclusion = _parse_pieces(fdoc["pieces"], n, variables, params_t, n,
                              "F.pieces")

    candidate = _parse_function(doc["V"], n, variables, params_t, "V", "V")

    u_doc = doc.get("U", [])
    if not isinstance(u_doc, list):
        raise SchemaError("U: expected a list of function specs")
    reducers = tuple(
        _parse_function(u, n, variables, params_t, f"U[{k}]", f"U{k+1}")
        for k, u in enumerate(u_doc))
    for u in reducers:
        if not u.regular:
            raise SchemaError(
                f"U: reduction collection entries must be regular ({u.name})")

    dom_doc = doc["domain"]
    if not isinstance(dom_doc, dict):
        raise SchemaError("domain: expected an object with 'lo' and 'hi'")
    _check_keys(dom_doc, {"lo", "hi"}, {"lo", "hi"}, "domain")
    domain = IntervalBox.from_bounds(
        _float_list(dom_doc["lo"], n, "domain.lo"),
        _float_list(dom_doc["hi"], n, "domain.hi"))

    grid = _parse_grid(doc["grid"], n, "grid") if "grid" in doc else None
    matrosov = (_parse_matrosov(doc["matrosov"], n, variables, params_t,
                                "matrosov")
                if "matrosov" in doc else None)
    checks = (_parse_checks(doc["certify"], n, variables, "certify")
              if "certify" in doc else None)
    sim = _parse_sim(doc["simulate"], n, "simulate") if "simulate" in doc \
        else None

    return SystemDef(n=n, inclusion=inclusion, candidate=candidate,
                     reducers=reducers, domain=domain, params=params_t,
                     grid=grid, matrosov=matrosov, checks=checks, sim=sim)


def load_system(path) -> SystemDef:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return system_from_dict(doc)
