"""Differential constraints and the threshold-discretisation helpers.

Three constraint forms are supported:

* :class:`VarConst` -- ``delta(x.A, c) <= t``
* :class:`VarVar`   -- ``delta(x.A, y.B) <= t``
* :class:`VarEq`    -- ``x == y`` (same data element)

A constraint set is a sorted, duplicate-free tuple of constraints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Union

from .graph import STRING, PropertyGraph
from .simindex import DecisionBoundary, DomainError, distance

NODE = "node"


@dataclass(frozen=True, order=True)
class VarConst:
    var: str
    attr: str
    constant: object
    threshold: float
    domain: str = STRING
    kind: str = NODE

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.var,)

    def refs(self):
        return ((self.var, self.attr),)

    def rename(self, m: dict) -> "VarConst":
        return VarConst(m.get(self.var, self.var), self.attr, self.constant, self.threshold, self.domain, self.kind)

    def __str__(self):
        return f"delta({self.var}.{self.attr}, {json.dumps(self.constant)}) <= {_fmt(self.threshold)}"


@dataclass(frozen=True, order=True)
class VarVar:
    var: str
    attr: str
    other: str
    other_attr: str
    threshold: float
    domain: str = STRING
    kind: str = NODE
    other_kind: str = NODE

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.var,) if self.var == self.other else (self.var, self.other)

    def refs(self):
        return ((self.var, self.attr), (self.other, self.other_attr))

    def rename(self, m: dict) -> "VarVar":
        return VarVar(m.get(self.var, self.var), self.attr, m.get(self.other, self.other), self.other_attr,
                      self.threshold, self.domain, self.kind, self.other_kind)

    def __str__(self):
        return f"delta({self.var}.{self.attr}, {self.other}.{self.other_attr}) <= {_fmt(self.threshold)}"


@dataclass(frozen=True, order=True)
class VarEq:
    var: str
    other: str
    kind: str = NODE

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.var, self.other)

    def refs(self):
        return ()

    def rename(self, m: dict) -> "VarEq":
        a, b = sorted((m.get(self.var, self.var), m.get(self.other, self.other)))
        return VarEq(a, b, self.kind)

    def __str__(self):
        return f"{self.var} == {self.other}"


DifferentialConstraint = Union[VarConst, VarVar, VarEq]
ConstraintSet = tuple


def _fmt(t) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def _sort_key(c) -> tuple:
    return (type(c).__name__, str(c))


def constraint_set(cs: Iterable[DifferentialConstraint]) -> ConstraintSet:
    return tuple(sorted(set(cs), key=_sort_key))


def is_unary(c) -> bool:
    return len(c.variables) == 1


def _value(G: PropertyGraph, kind: str, index: int, attr: str):
    return G.value(kind, index, attr)


def _within(domain, a, b, t) -> bool:
    if a is None or b is None:
        return False
    try:
        return distance(domain, a, b) <= t
    except DomainError:
        return False


def holds(c, G: PropertyGraph, m: dict) -> bool:
    """Truth of one constraint under a (partial) match that binds its variables."""
    if isinstance(c, VarEq):
        return m[c.var] == m[c.other]
    if isinstance(c, VarConst):
        return _within(c.domain, _value(G, c.kind, m[c.var], c.attr), c.constant, c.threshold)
    return _within(c.domain, _value(G, c.kind, m[c.var], c.attr),
                   _value(G, c.other_kind, m[c.other], c.other_attr), c.threshold)


def satisfies(m: dict, phi: Iterable[DifferentialConstraint], G: PropertyGraph) -> bool:
    """``m |= phi``; a constraint on an attribute the element lacks is false."""
    return all(holds(c, G, m) for c in phi)


def to_dict(c) -> dict:
    if isinstance(c, VarEq):
        return {"type": "eq", "var": c.var, "other": c.other, "kind": c.kind, "text": str(c)}
    if isinstance(c, VarConst):
        return {"type": "const", "var": c.var, "attr": c.attr, "constant": c.constant,
                "threshold": c.threshold, "domain": c.domain, "kind": c.kind, "text": str(c)}
    return {"type": "var", "var": c.var, "attr": c.attr, "other": c.other, "other_attr": c.other_attr,
            "threshold": c.threshold, "domain": c.domain, "kind": c.kind, "other_kind": c.other_kind,
            "text": str(c)}


def from_dict(d: dict):
    t = d["type"]
    if t == "eq":
        return VarEq(d["var"], d["other"], d.get("kind", NODE))
    if t == "const":
        return VarConst(d["var"], d["attr"], d["constant"], d["threshold"], d.get("domain", STRING),
                        d.get("kind", NODE))
    if t == "var":
        return VarVar(d["var"], d["attr"], d["other"], d["other_attr"], d["threshold"],
                      d.get("domain", STRING), d.get("kind", NODE), d.get("other_kind", NODE))
    raise ValueError(f"unknown constraint type {t!r}")


# ---------------------------------------------------------------------------
# decision boundaries and threshold discovery


def respects_boundary(thresholds: list[float], boundary: DecisionBoundary) -> bool:
    """Smallest threshold >= upsilon and pairwise gaps >= kappa."""
    if not thresholds:
        raise ValueError("thresholds must be non-empty")
    ts = sorted(thresholds)
    if ts[0] < boundary.upsilon:
        return False
    return all(b - a >= boundary.kappa for a, b in zip(ts, ts[1:]))


def _value_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


def choose_pivot(values, domain: str = STRING):
    """Member value with the lowest mean distance to the other members.

    Ties go to the smallest value.  Accepts a plain iterable of values or a
    :class:`~ggdminer.simindex.SimilarityCluster`.
    """
    if hasattr(values, "members"):
        values = list(values.members)
    vals = sorted(set(values), key=_value_key)
    if not vals:
        raise ValueError("empty cluster")
    if len(vals) == 1:
        return vals[0]
    best, best_mean = None, None
    for v in vals:
        mean = fmean(distance(domain, v, u) for u in vals if u != v)
        if best_mean is None or mean < best_mean:
            best, best_mean = v, mean
    return best


@dataclass(frozen=True)
class IntervalResult:
    threshold: float
    support: int
    members: frozenset = field(default_factory=frozenset)


def find_intervals(dissims: list[tuple[object, float]], boundary: DecisionBoundary,
                   tau: int) -> list[IntervalResult]:
    """Nested ``<= t`` thresholds over observed distances.

    Distances are swept in ascending order and cut wherever two consecutive
    observed values are at least ``kappa`` apart.  The largest value of
    each segment becomes a threshold if it is at least ``upsilon`` and the
    number of elements at or below it reaches ``tau``.  A segment ending
    below ``upsilon`` is reported at ``upsilon`` when no observed distance
    lies in between.  Consecutive thresholds are ``>= kappa`` apart.
    """
    if not dissims:
        return []
    ordered = sorted(dissims, key=lambda p: p[1])
    out: list[IntervalResult] = []
    seen: list = []
    n = len(ordered)
    i = 0
    while i < n:
        seen.append(ordered[i][0])
        d = ordered[i][1]
        nxt = ordered[i + 1][1] if i + 1 < n else None
        segment_end = nxt is None or nxt - d >= boundary.kappa
        t = d
        if d < boundary.upsilon and (nxt is None or nxt > boundary.upsilon):
            # nothing observed between d and upsilon, so "<= upsilon" selects the same elements
            t = boundary.upsilon
        if segment_end and t >= boundary.upsilon and len(seen) >= tau:
            if not out or t - out[-1].threshold >= boundary.kappa:
                out.append(IntervalResult(t, len(seen), frozenset(seen)))
        i += 1
    return out


def signature(c, pattern) -> tuple:
    """What the candidate-similarity measure compares: constraint type and
    the (kind, label, attribute) references, ignoring thresholds/constants."""
    if isinstance(c, VarEq):
        return ("eq", c.kind, pattern.label(c.var))
    refs = tuple(sorted((pattern.kind(v), pattern.label(v), a) for v, a in c.refs()))
    return ("const" if isinstance(c, VarConst) else "var",) + refs


def family(c) -> tuple:
    """Constraints sharing variables, attributes and constant differ only by threshold."""
    if isinstance(c, VarConst):
        return ("const", c.var, c.attr, json.dumps(c.constant))
    if isinstance(c, VarVar):
        return ("var",) + tuple(sorted(c.refs()))
    return ("eq", c.var, c.other)


def compatible(cs: Iterable) -> bool:
    fams = [family(c) for c in cs]
    return len(fams) == len(set(fams))

