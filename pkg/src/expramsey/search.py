"""Instance enumeration, monochromatic search, and Ramsey-number computation.

Instances are finite sets of values with role labels. Enumeration is
deterministic for a fixed bound: instances are ordered by their element
tuple sorted descending, ties broken by the generator tuple, except for the
symbolic families (expquad, shape, fep) whose elements can be astronomically
large; those order by generator tuples instead, which is still a sorted
order on the bounded part of the instance.

Certificates serialize to canonical JSON (sorted keys, no whitespace); the
wall-time measurement lives on the object but stays out of the bytes so
replays are byte-identical.
"""

from __future__ import annotations

import bisect
import itertools
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .colourings import (
    Colouring,
    DifferenceSequence,
    LogStarColouring,
    parse_colouring,
    parse_seq,
)
from .errors import BudgetExceeded, ParseError
from .patterns import ShapeRelation, WeightFn, fep, shape_pattern
from .tower import (
    ExpTerm,
    as_term,
    compare_iter_log,
    dedup_key,
    eval_exact,
    parse_term,
    power,
    to_text,
)

SCHEMA_VERSION = 1

Value = Union[int, ExpTerm]


def _materialize(base: int, exp: int) -> Value:
    """a^b as a plain int when within the exactness cutoff, else a term."""
    t = power(base, exp)
    bv = eval_exact(t)
    return bv.exact if bv.is_exact else t


def _value_text(v: Value) -> str:
    return str(v) if isinstance(v, int) else to_text(v)


@dataclass(frozen=True)
class Instance:
    roles: Tuple[str, ...]
    values: Tuple[Value, ...]
    generators: Tuple[int, ...]

    def distinct_values(self) -> List[Value]:
        seen, out = set(), []
        for v in self.values:
            key = v if isinstance(v, int) else dedup_key(v)
            if key not in seen:
                seen.add(key)
                out.append(v)
        return out

    def witness_json(self, colour: int) -> dict:
        return {
            "generators": list(self.generators),
            "elements": [
                {"role": r, "value": _value_text(v)}
                for r, v in zip(self.roles, self.values)
            ],
            "colour": colour,
        }


def _iroot(n: int, k: int) -> int:
    """Largest r with r**k <= n."""
    if n < 1:
        return 0
    r = int(round(n ** (1.0 / k)))
    while r > 1 and r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


class InstanceFamily:
    kind: str
    bound: int

    def count(self) -> int:
        raise NotImplementedError

    def instances(self) -> Iterator[Instance]:
        raise NotImplementedError

    def nth(self, i: int) -> Instance:
        """Random access for sampling; default is a linear walk."""
        for j, inst in enumerate(self.instances()):
            if j == i:
                return inst
        raise IndexError(i)

    def select(self, indices: Sequence[int]) -> List[Instance]:
        """Instances at the given sorted indices in one enumeration pass."""
        want = sorted(indices)
        out: List[Instance] = []
        it = iter(want)
        nxt = next(it, None)
        for j, inst in enumerate(self.instances()):
            if nxt is None:
                break
            if j == nxt:
                out.append(inst)
                nxt = next(it, None)
        return out

    def descriptor(self) -> dict:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError


def _exp_pairs(bound: int) -> List[Tuple[int, int, int]]:
    """All (p, a, b) with a, b >= 2 and p = a^b <= bound, sorted by
    (p, max(a,b), min(a,b), a, b): element tuples descending, generator
    tie-break."""
    out = []
    b = 2
    while 2**b <= bound:
        amax = _iroot(bound, b)
        for a in range(2, amax + 1):
            out.append((a**b, a, b))
        b += 1
    out.sort(key=lambda t: (t[0], max(t[1], t[2]), min(t[1], t[2]), t[1], t[2]))
    return out


class ExpTripleFamily(InstanceFamily):
    """Instances {a, b, a^b} for a, b >= 2 with a^b <= bound."""

    kind = "exptriple"

    def __init__(self, bound: int, strict: bool = False):
        self.bound = bound
        self.strict = strict
        self._pairs = [
            t for t in _exp_pairs(bound) if not (strict and t[1] == t[2])
        ]

    def count(self) -> int:
        return len(self._pairs)

    def instances(self) -> Iterator[Instance]:
        for p, a, b in self._pairs:
            yield Instance(("a", "b", "a^b"), (a, b, p), (a, b))

    def nth(self, i: int) -> Instance:
        p, a, b = self._pairs[i]
        return Instance(("a", "b", "a^b"), (a, b, p), (a, b))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "strict": self.strict}

    @property
    def spec(self) -> str:
        return "exptriple:strict=1" if self.strict else "exptriple"


class ExpTripleLogCondFamily(InstanceFamily):
    """Pairs {b, a^b} over triples satisfying the iterated-log condition
    log_(r) a <= b; a is carried as metadata in the generators."""

    kind = "exptriple-logcond"

    def __init__(self, bound: int, r: int = 1):
        self.bound = bound
        self.r = r
        self._pairs = [
            t for t in _exp_pairs(bound) if compare_iter_log(t[1], r, t[2])
        ]

    def count(self) -> int:
        return len(self._pairs)

    def instances(self) -> Iterator[Instance]:
        for p, a, b in self._pairs:
            yield Instance(("b", "a^b"), (b, p), (a, b))

    def nth(self, i: int) -> Instance:
        p, a, b = self._pairs[i]
        return Instance(("b", "a^b"), (b, p), (a, b))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "r": self.r}

    @property
    def spec(self) -> str:
        return f"exptriple-logcond:r={self.r}"


class ExpQuadrupleFamily(InstanceFamily):
    """Instances {a, b, a^b, b^a} for 2 <= a <= b <= bound.

    The bound caps the generators; the power elements stay symbolic when
    huge. Enumeration order is (b, a) ascending.
    """

    kind = "expquad"

    def __init__(self, bound: int):
        self.bound = bound

    def count(self) -> int:
        n = max(0, self.bound - 1)
        return n * (n + 1) // 2

    def _make(self, a: int, b: int) -> Instance:
        return Instance(
            ("a", "b", "a^b", "b^a"),
            (a, b, _materialize(a, b), _materialize(b, a)),
            (a, b),
        )

    def instances(self) -> Iterator[Instance]:
        for b in range(2, self.bound + 1):
            for a in range(2, b + 1):
                yield self._make(a, b)

    def nth(self, i: int) -> Instance:
        # triangular index: pairs with second coordinate b contribute b-1
        b = 2
        while i >= b - 1:
            i -= b - 1
            b += 1
        return self._make(2 + i, b)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound}

    @property
    def spec(self) -> str:
        return "expquad"


class SchurFamily(InstanceFamily):
    """Instances {x, y, x+y} with x <= y and x + y <= bound."""

    kind = "schur"

    def __init__(self, bound: int):
        self.bound = bound

    def count(self) -> int:
        return max(0, self.bound) ** 2 // 4

    def _make(self, x: int, y: int) -> Instance:
        return Instance(("x", "y", "x+y"), (x, y, x + y), (x, y))

    def instances(self) -> Iterator[Instance]:
        for s in range(2, self.bound + 1):
            for y in range((s + 1) // 2, s):
                yield self._make(s - y, y)

    def nth(self, i: int) -> Instance:
        s = 2
        while i >= s // 2:
            i -= s // 2
            s += 1
        y = (s + 1) // 2 + i
        return self._make(s - y, y)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound}

    @property
    def spec(self) -> str:
        return "schur"


class SchurPlusExpFamily(InstanceFamily):
    """Joint instances {x, y, x+y} u {a, b, a^b}, all six elements coloured.

    Ordered by the overall max element, then the sum triple, then the power
    triple. The instance count is the product of the two family counts.
    """

    kind = "schurplusexp"

    def __init__(self, bound: int):
        self.bound = bound
        self.schur = SchurFamily(bound)
        self.exp = ExpTripleFamily(bound)

    def count(self) -> int:
        return self.schur.count() * self.exp.count()

    @staticmethod
    def _join(si: Instance, ei: Instance) -> Instance:
        return Instance(
            si.roles + ei.roles, si.values + ei.values,
            si.generators + ei.generators,
        )

    def instances(self) -> Iterator[Instance]:
        exps = list(self.exp.instances())
        if not exps:
            return
        for m in range(2, self.bound + 1):
            # pairs whose max element is exactly m
            for si in self.schur.instances():
                s = si.values[2]
                if s > m:
                    break
                if s == m:
                    for ei in exps:
                        if ei.values[2] <= m:
                            yield self._join(si, ei)
                else:
                    for ei in exps:
                        if ei.values[2] == m:
                            yield self._join(si, ei)

    def nth(self, i: int) -> Instance:
        # random access ignores the max-element interleaving; sampling only
        # needs a deterministic bijection onto the instance set
        si, ei = divmod(i, self.exp.count())
        return self._join(self.schur.nth(si), self.exp.nth(ei))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound}

    @property
    def spec(self) -> str:
        return "schurplusexp"


def _tuples_by_max(bound: int, m: int, cap: int) -> List[Tuple[int, ...]]:
    n = max(0, bound - 1)
    if n**m > cap:
        raise BudgetExceeded(
            f"{n}^{m} generator tuples exceed the element cap {cap}"
        )
    out = list(itertools.product(range(2, bound + 1), repeat=m))
    out.sort(key=lambda t: (max(t), t))
    return out


class ShapeFamily(InstanceFamily):
    """Shape-pattern instances over all generator tuples in [2, bound]^m."""

    kind = "shape"

    def __init__(self, relation: ShapeRelation, bound: int, cap: int = 10**6):
        self.relation = relation
        self.bound = bound
        self._tuples = _tuples_by_max(bound, relation.m, cap)

    def count(self) -> int:
        return len(self._tuples)

    def _make(self, xs: Tuple[int, ...]) -> Instance:
        ps = shape_pattern(self.relation, xs)
        roles = []
        for _, prov in zip(ps.elements, ps.provenance):
            if "generator" in prov:
                roles.append(f"x{prov['generator']}")
            else:
                i, j = prov["edge"]
                roles.append(f"x{i}^x{j}")
        return Instance(tuple(roles), tuple(ps.elements), xs)

    def instances(self) -> Iterator[Instance]:
        for xs in self._tuples:
            yield self._make(xs)

    def nth(self, i: int) -> Instance:
        return self._make(self._tuples[i])

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "bound": self.bound,
            "m": self.relation.m,
            "edges": [list(e) for e in self.relation.edges],
        }

    @property
    def spec(self) -> str:
        edges = ",".join(f"{i}-{j}" for i, j in self.relation.edges)
        return f"shape:m={self.relation.m},edges={edges}"


class FepFamily(InstanceFamily):
    """Weighted exponential-product pattern instances; every pattern element
    must take the same colour for the instance to count as monochromatic."""

    kind = "fep"

    def __init__(self, weight: WeightFn, m: int, bound: int, cap: int = 10**6):
        self.weight = weight
        self.m = m
        self.bound = bound
        self.cap = cap
        self._tuples = _tuples_by_max(bound, m, cap)

    def count(self) -> int:
        return len(self._tuples)

    def _make(self, xs: Tuple[int, ...]) -> Instance:
        ps = fep(self.weight, xs, cap=self.cap)
        return Instance(
            tuple(to_text(e) for e in ps.elements), tuple(ps.elements), xs,
        )

    def instances(self) -> Iterator[Instance]:
        for xs in self._tuples:
            yield self._make(xs)

    def nth(self, i: int) -> Instance:
        return self._make(self._tuples[i])

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "bound": self.bound,
            "m": self.m,
            "weight": self.weight.to_json(),
        }

    @property
    def spec(self) -> str:
        w = self.weight
        if w.const is not None:
            return f"fep:m={self.m},w={w.const}"
        return f"fep:m={self.m},w=table"


class DifferencePairFamily(InstanceFamily):
    """Pairs {x, x + b_n} with both elements <= bound, over the sequence
    indices [start, n_max]. Ordered by the larger element, then x."""

    kind = "diffpair"

    def __init__(self, seq: Union[str, DifferenceSequence], n_max: int, bound: int):
        if isinstance(seq, str):
            seq = parse_seq(seq)
        self.seq = seq
        self.n_max = n_max
        self.bound = bound
        diffs = []
        for n in range(seq.start, n_max + 1):
            v = seq.exact(n)
            if v is None:
                raise ParseError(
                    f"difference-pair family needs an integer sequence, "
                    f"not {seq.name}"
                )
            if v < bound:
                diffs.append((n, v))
        # descending difference = ascending x for a fixed larger element
        self._diffs = sorted(diffs, key=lambda t: -t[1])

    def count(self) -> int:
        return sum(self.bound - v for _, v in self._diffs)

    def instances(self) -> Iterator[Instance]:
        diffs = self._diffs
        for m in range(2, self.bound + 1):
            for n, v in diffs:
                x = m - v
                if x >= 1:
                    yield Instance(("x", "x+b_n"), (x, m), (n, x))

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "bound": self.bound,
            "seq": self.seq.name,
            "nmax": self.n_max,
        }

    @property
    def spec(self) -> str:
        return f"diffpair:seq={self.seq.name},nmax={self.n_max}"


class GridFamily(InstanceFamily):
    """One-dimensional grids: progressions {s, s+d, ..., s+L*d} in [bound]."""

    kind = "grid"

    def __init__(self, length: int, bound: int):
        if length < 1:
            raise ValueError("grid length must be >= 1")
        self.length = length
        self.bound = bound

    def count(self) -> int:
        L = self.length
        return sum(
            max(0, self.bound - L * d)
            for d in range(1, self.bound // L + 1)
        )

    def instances(self) -> Iterator[Instance]:
        L = self.length
        for m in range(L + 1, self.bound + 1):
            for d in range((m - 1) // L, 0, -1):
                s = m - L * d
                if s >= 1:
                    yield Instance(
                        tuple(f"s+{i}d" for i in range(L + 1)),
                        tuple(s + i * d for i in range(L + 1)),
                        (s, d),
                    )

    def descriptor(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "len": self.length}

    @property
    def spec(self) -> str:
        return f"grid:len={self.length}"


def parse_family(spec: str, bound: int, *, cap: int = 10**6,
                 default_r: Optional[int] = None) -> InstanceFamily:
    """Family mini-language: exptriple[:strict=1], exptriple-logcond[:r=N],
    expquad, schur, schurplusexp, shape:m=M,edges=1-2,..., fep:m=M,w=K,
    diffpair:seq=...,nmax=N, grid:len=L."""
    spec = spec.strip()
    head, _, body = spec.partition(":")
    kv: Dict[str, str] = {}
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise ParseError(f"expected key=value in family spec {spec!r}")
            key, val = part.split("=", 1)
            kv[key.strip()] = val.strip()

    def intkv(key: str, default: Optional[int] = None) -> int:
        if key not in kv:
            if default is None:
                raise ParseError(f"family spec {spec!r} needs {key}=")
            return default
        try:
            return int(kv[key])
        except ValueError:
            raise ParseError(f"bad integer for {key} in {spec!r}") from None

    if head == "exptriple":
        return ExpTripleFamily(bound, strict=bool(intkv("strict", 0)))
    if head == "exptriple-logcond":
        return ExpTripleLogCondFamily(
            bound, r=intkv("r", default_r if default_r is not None else 1)
        )
    if head == "expquad":
        return ExpQuadrupleFamily(bound)
    if head == "schur":
        return SchurFamily(bound)
    if head == "schurplusexp":
        return SchurPlusExpFamily(bound)
    if head == "shape":
        return _parse_shape_edges(kv.get("edges", ""), intkv("m"), bound, cap, spec)
    if head == "fep":
        m = intkv("m")
        if "w" not in kv:
            raise ParseError(f"family spec {spec!r} needs w=")
        if kv["w"] == "table":
            raise ParseError("inline weight tables are not supported here")
        return FepFamily(WeightFn.constant(int(kv["w"])), m, bound, cap=cap)
    if head == "diffpair":
        if "seq" not in kv:
            raise ParseError(f"family spec {spec!r} needs seq=")
        return DifferencePairFamily(kv["seq"], intkv("nmax", 12), bound)
    if head == "grid":
        return GridFamily(intkv("len"), bound)
    raise ParseError(f"unknown family spec {spec!r}")


def _parse_shape_edges(raw: str, m: int, bound: int, cap: int, spec: str) -> ShapeFamily:
    edges = []
    if raw:
        for part in raw.split(";"):
            part = part.strip()
            if not part:
                continue
            bits = part.split("-")
            if len(bits) != 2:
                raise ParseError(f"bad edge {part!r} in family spec {spec!r}")
            try:
                edges.append((int(bits[0]), int(bits[1])))
            except ValueError:
                raise ParseError(f"bad edge {part!r} in family spec {spec!r}") from None
    try:
        rel = ShapeRelation(m, tuple(edges))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return ShapeFamily(rel, bound, cap=cap)


def family_from_descriptor(desc: dict, *, cap: int = 10**6) -> InstanceFamily:
    kind = desc.get("kind")
    bound = desc.get("bound")
    if kind == "exptriple":
        return ExpTripleFamily(bound, strict=bool(desc.get("strict", False)))
    if kind == "exptriple-logcond":
        return ExpTripleLogCondFamily(bound, r=desc.get("r", 1))
    if kind == "expquad":
        return ExpQuadrupleFamily(bound)
    if kind == "schur":
        return SchurFamily(bound)
    if kind == "schurplusexp":
        return SchurPlusExpFamily(bound)
    if kind == "shape":
        rel = ShapeRelation(desc["m"], tuple(tuple(e) for e in desc["edges"]))
        return ShapeFamily(rel, bound, cap=cap)
    if kind == "fep":
        return FepFamily(WeightFn.from_json(desc["weight"]), desc["m"], bound, cap=cap)
    if kind == "diffpair":
        return DifferencePairFamily(desc["seq"], desc["nmax"], bound)
    if kind == "grid":
        return GridFamily(desc["len"], bound)
    raise ParseError(f"unknown family descriptor {desc!r}")


def enumerate_instances(family: InstanceFamily, bound: Optional[int] = None) -> Iterator[Instance]:
    """Deterministic duplicate-free stream of instances for the family."""
    if bound is not None and bound != family.bound:
        family = family_from_descriptor({**family.descriptor(), "bound": bound})
    return family.instances()


# ---------------------------------------------------------------------------
# certificates

@dataclass
class Certificate:
    family: dict
    colouring: str
    bound: int
    instances_checked: int
    result: dict
    seed: int
    schema: int = SCHEMA_VERSION
    wall_time: float = field(default=0.0, compare=False)

    @property
    def verified(self) -> bool:
        return self.result.get("type") == "AvoidanceVerified"

    def to_json_obj(self) -> dict:
        # wall_time deliberately excluded: replays must be byte-identical
        return {
            "schema": self.schema,
            "family": self.family,
            "colouring": self.colouring,
            "bound": self.bound,
            "instances_checked": self.instances_checked,
            "result": self.result,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True,
                          separators=(",", ":")) + "\n"

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Certificate":
        return cls(
            family=obj["family"],
            colouring=obj["colouring"],
            bound=obj["bound"],
            instances_checked=obj["instances_checked"],
            result=obj["result"],
            seed=obj.get("seed", 0),
            schema=obj.get("schema", SCHEMA_VERSION),
        )


class _Budget:
    def __init__(self, secs: Optional[float]):
        self.deadline = None if secs is None else time.monotonic() + secs

    def check(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget exhausted during search")


def _instance_colour(colouring: Colouring, inst: Instance) -> Optional[int]:
    """The common colour when the instance is monochromatic, else None."""
    c = None
    for v in inst.distinct_values():
        cv = colouring(v)
        if c is None:
            c = cv
        elif cv != c:
            return None
    return c


def _scan_worker(args) -> Tuple[Optional[int], Optional[dict], int]:
    desc, colouring, offset, step = args
    family = family_from_descriptor(desc)
    first_idx, witness, seen = None, None, 0
    for i, inst in enumerate(family.instances()):
        if i % step != offset:
            continue
        seen += 1
        c = _instance_colour(colouring, inst)
        if c is not None:
            first_idx, witness = i, inst.witness_json(c)
            break
    return first_idx, witness, seen


def _find_mono_quad_logstar(colouring: LogStarColouring,
                            family: ExpQuadrupleFamily,
                            budget: _Budget) -> Tuple[Optional[int], Optional[dict], int]:
    """Integer fast path for the {a, b, a^b, b^a} family under the log-star
    colouring; preserves the (b, a) enumeration order of the generic scan."""
    bound = family.bound
    carr = [0, 0] + [colouring(v) for v in range(2, bound + 1)]
    idx = -1
    for b in range(2, bound + 1):
        budget.check()
        cb = carr[b]
        for a in range(2, b + 1):
            idx += 1
            if carr[a] != cb:
                continue
            if colouring.colour_power(a, b) != cb:
                continue
            if colouring.colour_power(b, a) != cb:
                continue
            inst = family._make(a, b)
            return idx, inst.witness_json(cb), idx + 1
    return None, None, family.count()


def _find_mono_schurplusexp(colouring: Colouring, family: SchurPlusExpFamily,
                            budget: _Budget) -> Tuple[Optional[int], Optional[dict], int]:
    """Class decomposition: an instance is monochromatic exactly when one
    colour class contains both a full sum triple and a full power triple.
    Avoidance never touches the quadratic-size product enumeration; when a
    class has both, the first joint instance in enumeration order combines
    that class's first monochromatic sum triple and power triple.
    """
    bound = family.bound
    exps = list(family.exp.instances())
    exp_mono: Dict[int, Tuple[int, Instance]] = {}
    for i, inst in enumerate(exps):
        c = _instance_colour(colouring, inst)
        if c is not None and c not in exp_mono:
            exp_mono[c] = (i, inst)
    if not exp_mono:
        return None, None, family.count()
    budget.check()
    carr = [0] * (bound + 1)
    for v in range(1, bound + 1):
        carr[v] = colouring(v)
    best_key, best = None, None
    for klass, (ei_idx, ei) in exp_mono.items():
        budget.check()
        vals = [v for v in range(1, bound + 1) if carr[v] == klass]
        smin: Optional[Tuple[int, int, int]] = None
        for ix, x in enumerate(vals):
            # for fixed x the first valid y minimizes (sum, y); candidates
            # with equal sums still need comparing since y falls as x rises
            for y in vals[ix:]:
                s = x + y
                if s > bound:
                    break
                if carr[s] == klass:
                    cand = (s, y, x)
                    if smin is None or cand < smin:
                        smin = cand
                    break
        if smin is None:
            continue
        s, y, x = smin
        key = (max(s, ei.values[2]), s, y, x, ei_idx)
        if best_key is None or key < best_key:
            best_key = key
            best = SchurPlusExpFamily._join(family.schur._make(x, y), ei)
    if best is None:
        return None, None, family.count()
    c = _instance_colour(colouring, best)
    idx = _index_of_schurplusexp(family, best, exps)
    return idx, best.witness_json(c), idx + 1


def _index_of_schurplusexp(family: SchurPlusExpFamily, inst: Instance,
                           exps: List[Instance]) -> int:
    """Position of a joint instance in the deterministic enumeration."""
    target = inst.generators
    # exps is already sorted by power (primary key of the triple order)
    powers = [e.values[2] for e in exps]
    idx = 0
    for m in range(2, family.bound + 1):
        n_le = bisect.bisect_right(powers, m)
        lo_eq = bisect.bisect_left(powers, m)
        for si in family.schur.instances():
            ss = si.values[2]
            if ss > m:
                break
            pool = exps[:n_le] if ss == m else exps[lo_eq:n_le]
            for ei in pool:
                if si.generators + ei.generators == target:
                    return idx
                idx += 1
    raise RuntimeError("witness not found in enumeration")


def find_monochromatic(colouring: Union[Colouring, str],
                       family: Union[InstanceFamily, str],
                       bound: Optional[int] = None, *,
                       seed: int = 0,
                       threads: int = 1,
                       budget_secs: Optional[float] = None,
                       cap: int = 10**6) -> Certificate:
    """First monochromatic instance in enumeration order, or avoidance.

    The result is a certificate; its wall_time attribute is measured but not
    serialized.
    """
    t0 = time.perf_counter()
    if isinstance(colouring, str):
        colouring = parse_colouring(colouring)
    if isinstance(family, str):
        if bound is None:
            raise ValueError("a string family spec needs an explicit bound")
        default_r = colouring.r if isinstance(colouring, LogStarColouring) else None
        family = parse_family(family, bound, cap=cap, default_r=default_r)
    budget = _Budget(budget_secs)

    if isinstance(family, ExpQuadrupleFamily) and isinstance(colouring, LogStarColouring):
        first_idx, witness, checked = _find_mono_quad_logstar(colouring, family, budget)
    elif isinstance(family, SchurPlusExpFamily):
        first_idx, witness, checked = _find_mono_schurplusexp(colouring, family, budget)
    elif threads > 1:
        args = [(family.descriptor(), colouring, w, threads)
                for w in range(threads)]
        first_idx, witness, checked = None, None, 0
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for idx, wit, seen in pool.map(_scan_worker, args):
                checked += seen
                if idx is not None and (first_idx is None or idx < first_idx):
                    first_idx, witness = idx, wit
        if first_idx is not None:
            checked = first_idx + 1
        else:
            checked = family.count()
    else:
        first_idx, witness, checked = None, None, 0
        check_every = 4096
        for i, inst in enumerate(family.instances()):
            if i % check_every == 0:
                budget.check()
            c = _instance_colour(colouring, inst)
            if c is not None:
                first_idx, witness, checked = i, inst.witness_json(c), i + 1
                break
        else:
            checked = family.count()

    if witness is None:
        result = {"type": "AvoidanceVerified"}
    else:
        result = {"type": "Counterexample", "witness": witness}
    cert = Certificate(
        family=family.descriptor(),
        colouring=colouring.spec,
        bound=family.bound,
        instances_checked=checked,
        result=result,
        seed=seed,
    )
    cert.wall_time = time.perf_counter() - t0
    return cert


def verify_certificate(cert: Certificate, *, sample_rate: float = 0.01,
                       sample_cap: int = 10000) -> bool:
    """Re-evaluate a certificate: witnesses are recoloured directly;
    avoidance claims are re-checked on a seeded random sample."""
    try:
        colouring = parse_colouring(cert.colouring)
        family = family_from_descriptor(cert.family)
    except (ParseError, ValueError):
        return False
    result = cert.result
    if result.get("type") == "Counterexample":
        wit = result.get("witness", {})
        claimed = wit.get("colour")
        elements = wit.get("elements", [])
        if not elements:
            return False
        try:
            for el in elements:
                v = parse_term(el["value"])
                if colouring(v) != claimed:
                    return False
        except Exception:
            return False
        return True
    if result.get("type") == "AvoidanceVerified":
        total = family.count()
        if cert.instances_checked != total:
            return False
        if total == 0:
            return True
        n = min(sample_cap, max(1, int(total * sample_rate)))
        rng = random.Random(cert.seed)
        indices = sorted(rng.sample(range(total), min(n, total)))
        if isinstance(family, (SchurPlusExpFamily, ExpQuadrupleFamily,
                               ExpTripleFamily, ExpTripleLogCondFamily,
                               SchurFamily, ShapeFamily, FepFamily)):
            sample = [family.nth(i) for i in indices]
        else:
            sample = family.select(indices)
        for inst in sample:
            if _instance_colour(colouring, inst) is not None:
                return False
        return True
    return False


# ---------------------------------------------------------------------------
# Ramsey-number computation

@dataclass
class RamseyComputation:
    kind: str
    k: int
    params: dict
    value: Optional[int]
    n_max: int
    witness: Optional[dict]
    methods_agree: Optional[bool]
    seed: int
    schema: int = SCHEMA_VERSION
    wall_time: float = field(default=0.0, compare=False)

    @property
    def exceeds_budget(self) -> bool:
        return self.value is None

    def to_json_obj(self) -> dict:
        return {
            "schema": self.schema,
            "kind": self.kind,
            "k": self.k,
            "params": self.params,
            "value": self.value,
            "n_max": self.n_max,
            "witness": self.witness,
            "methods_agree": self.methods_agree,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True,
                          separators=(",", ":")) + "\n"


def _exp_triples_upto(n: int) -> List[Tuple[int, int, int]]:
    """All (a, b, a^b) with a, b >= 2 and a^b <= n."""
    return [(a, b, p) for p, a, b in _exp_pairs(n)]


def _backtrack_colouring(values: List[int],
                         constraints: List[Tuple[int, ...]],
                         k: int, node_cap: int = 20_000_000
                         ) -> Optional[Dict[int, int]]:
    """Colouring with no constraint set monochromatic, or None if impossible.

    Backtracking with not-all-equal propagation: once a constraint has all
    but one member assigned a single colour, that colour is forbidden for
    the remaining member, and an empty domain fails the branch immediately.
    Values are branched in degree order (the smallest value first) so that
    contradictions surface among the constraint-dense values near the root
    instead of being rediscovered under every assignment of the sparse ones.
    Colour classes are introduced in first-use order, which fixes the first
    value's colour to 1 and prunes colour permutations.
    """
    m = len(values)
    if m == 0:
        return {}
    index = {v: i for i, v in enumerate(values)}
    cons: List[Tuple[int, ...]] = []
    for c in constraints:
        pos = tuple(sorted({index[v] for v in c}))
        if len(pos) == 1:
            return None
        cons.append(pos)
    cons = sorted(set(cons))
    degree = [0] * m
    for pos in cons:
        for p in pos:
            degree[p] += 1
    order = sorted(range(m), key=lambda p: (p != 0, -degree[p], p))
    by_pos: List[List[int]] = [[] for _ in range(m)]
    for ci, pos in enumerate(cons):
        for p in pos:
            by_pos[p].append(ci)

    cnt = [0] * len(cons)
    common = [0] * len(cons)  # 0 unset, -1 mixed, else the single colour
    forbid = [0] * m  # bitmask, bit c-1 set = colour c impossible
    assign = [0] * m
    full = (1 << k) - 1
    nodes = 0

    def place(p: int, c: int):
        """Apply bookkeeping for assigning colour c at p; returns the undo
        trail, or None after rolling back on a detected dead end."""
        trail = []
        for ci in by_pos[p]:
            trail.append((0, ci, cnt[ci], common[ci]))
            cnt[ci] += 1
            if common[ci] == 0:
                common[ci] = c
            elif common[ci] != -1 and common[ci] != c:
                common[ci] = -1
            if common[ci] == -1:
                continue
            pos = cons[ci]
            if cnt[ci] == len(pos):
                undo(trail)
                return None
            if cnt[ci] == len(pos) - 1:
                q = next(q for q in pos if assign[q] == 0)
                trail.append((1, q, forbid[q], 0))
                forbid[q] |= 1 << (c - 1)
                if forbid[q] == full:
                    undo(trail)
                    return None
        return trail

    def undo(trail) -> None:
        for kind, i, a, b in reversed(trail):
            if kind == 0:
                cnt[i], common[i] = a, b
            else:
                forbid[i] = a

    def dfs(r: int, used: int) -> bool:
        nonlocal nodes
        if r == m:
            return True
        nodes += 1
        if nodes > node_cap:
            raise BudgetExceeded("colouring search exceeded the node budget")
        p = order[r]
        for c in range(1, min(k, used + 1) + 1):
            if forbid[p] >> (c - 1) & 1:
                continue
            assign[p] = c
            trail = place(p, c)
            if trail is not None:
                if dfs(r + 1, max(used, c)):
                    return True
                undo(trail)
            assign[p] = 0
        return False

    if dfs(0, 0):
        return {v: assign[index[v]] for v in values}
    return None


def _hill_climb_colouring(values: List[int],
                          constraints: List[Tuple[int, ...]],
                          k: int, seed: int,
                          restarts: int = 20,
                          steps: int = 20000) -> Optional[Dict[int, int]]:
    """Randomized-restart local search for a constraint-free colouring."""
    if not values:
        return {}
    if k == 1:
        # nothing to move; feasible only when no constraint is present
        return {v: 1 for v in values} if not constraints else None
    rng = random.Random(seed)
    index = {v: i for i, v in enumerate(values)}
    cons_pos = [tuple(index[v] for v in set(c)) for c in constraints]
    touching: List[List[int]] = [[] for _ in values]
    for ci, pos in enumerate(cons_pos):
        for p in pos:
            touching[p].append(ci)

    def violated(assign: List[int], ci: int) -> bool:
        pos = cons_pos[ci]
        c = assign[pos[0]]
        return all(assign[p] == c for p in pos[1:])

    for _ in range(restarts):
        assign = [rng.randrange(1, k + 1) for _ in values]
        bad = {ci for ci in range(len(cons_pos)) if violated(assign, ci)}
        for _ in range(steps):
            if not bad:
                return {v: assign[index[v]] for v in values}
            ci = rng.choice(tuple(bad))
            p = rng.choice(cons_pos[ci])
            old = assign[p]
            choices = [c for c in range(1, k + 1) if c != old]
            assign[p] = rng.choice(choices)
            for cj in touching[p]:
                if violated(assign, cj):
                    bad.add(cj)
                else:
                    bad.discard(cj)
        # restart
    return None


def _witness_array(n: int, assign: Dict[int, int]) -> List[int]:
    return [assign.get(v, 1) for v in range(1, n + 1)]


def exp_ramsey_number(k: int, n_max: int = 10**5, *, seed: int = 0) -> RamseyComputation:
    """Least N such that every k-colouring of [N] has a monochromatic
    {a, b, a^b}; binary search over candidate power values, with the
    extremal witness cross-checked by an independent randomized searcher."""
    if k < 1:
        raise ValueError("need at least one colour")
    t0 = time.perf_counter()
    candidates = sorted({p for p, _, _ in _exp_pairs(n_max)})

    def sat_at(n: int) -> Optional[Dict[int, int]]:
        triples = _exp_triples_upto(n)
        relevant = sorted({v for t in triples for v in t})
        cons = [tuple(t) for t in triples]
        return _backtrack_colouring(relevant, cons, k)

    # unsolvability is monotone in N: a valid colouring of [N] restricts to
    # any smaller range, so binary-search the first unsatisfiable candidate
    lo, hi, first_unsat = 0, len(candidates) - 1, None
    while lo <= hi:
        mid = (lo + hi) // 2
        if sat_at(candidates[mid]) is None:
            first_unsat = mid
            hi = mid - 1
        else:
            lo = mid + 1
    if first_unsat is None:
        comp = RamseyComputation(
            kind="exptriple", k=k, params={}, value=None, n_max=n_max,
            witness=None, methods_agree=None, seed=seed,
        )
        comp.wall_time = time.perf_counter() - t0
        return comp
    value = candidates[first_unsat]
    below = value - 1
    assign = sat_at(below) or {}
    triples_below = _exp_triples_upto(below)
    relevant = sorted({v for t in triples_below for v in t})
    climbed = _hill_climb_colouring(
        relevant, [tuple(t) for t in triples_below], k, seed,
    )
    agree = climbed is not None and _colouring_is_free(climbed, triples_below)
    witness = {"n": below, "colours": _witness_array(below, assign)}
    comp = RamseyComputation(
        kind="exptriple", k=k, params={}, value=value, n_max=n_max,
        witness=witness, methods_agree=agree, seed=seed,
    )
    comp.wall_time = time.perf_counter() - t0
    return comp


def _colouring_is_free(assign: Dict[int, int],
                       constraints: List[Tuple[int, ...]]) -> bool:
    for cons in constraints:
        cs = {assign[v] for v in cons}
        if len(cs) == 1:
            return False
    return True


def _ap_constraints(n: int, length: int) -> List[Tuple[int, ...]]:
    out = []
    for d in range(1, (n - 1) // max(1, length - 1) + 1):
        for s in range(1, n - (length - 1) * d + 1):
            out.append(tuple(s + i * d for i in range(length)))
    return out


def vdw_number(k: int, length: int, n_max: int = 64, *, seed: int = 0) -> RamseyComputation:
    """Exact van der Waerden number W_k(length) by backtracking."""
    if k < 1 or length < 2:
        raise ValueError("need k >= 1 and progression length >= 2")
    t0 = time.perf_counter()
    value, assign_below = None, None
    prev_assign: Optional[Dict[int, int]] = None
    for n in range(length, n_max + 1):
        assign = _backtrack_colouring(
            list(range(1, n + 1)), _ap_constraints(n, length), k)
        if assign is None:
            value = n
            assign_below = prev_assign
            break
        prev_assign = assign
    if value is None:
        comp = RamseyComputation(
            kind="vdw", k=k, params={"len": length}, value=None, n_max=n_max,
            witness=None, methods_agree=None, seed=seed,
        )
        comp.wall_time = time.perf_counter() - t0
        return comp
    below = value - 1
    cons_below = _ap_constraints(below, length)
    climbed = _hill_climb_colouring(
        list(range(1, below + 1)), cons_below, k, seed)
    agree = (below < length) or (
        climbed is not None and _colouring_is_free(climbed, cons_below))
    witness = {
        "n": below,
        "colours": _witness_array(below, assign_below or {}),
    }
    comp = RamseyComputation(
        kind="vdw", k=k, params={"len": length}, value=value, n_max=n_max,
        witness=witness, methods_agree=agree, seed=seed,
    )
    comp.wall_time = time.perf_counter() - t0
    return comp


def export_dimacs(values: Sequence[int], constraints: Sequence[Tuple[int, ...]],
                  k: int) -> str:
    """CNF encoding of the no-monochromatic-constraint colouring problem.

    Variable (v, c) is x[v][c] = index(v)*k + c; clauses force exactly one
    colour per value and forbid each constraint set from being single-
    coloured.
    """
    index = {v: i for i, v in enumerate(values)}

    def var(v: int, c: int) -> int:
        return index[v] * k + c

    clauses: List[List[int]] = []
    for v in values:
        clauses.append([var(v, c) for c in range(1, k + 1)])
        for c1 in range(1, k + 1):
            for c2 in range(c1 + 1, k + 1):
                clauses.append([-var(v, c1), -var(v, c2)])
    for cons in constraints:
        distinct = sorted(set(cons))
        if len(distinct) < 2:
            continue
        for c in range(1, k + 1):
            clauses.append([-var(v, c) for v in distinct])
    lines = [f"p cnf {len(values) * k} {len(clauses)}"]
    for cl in clauses:
        lines.append(" ".join(map(str, cl)) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# grids and ordered unions

def find_monochromatic_grid(colouring: Callable, n: int, length: int,
                            bound: int, *, cap: int = 10**6
                            ) -> Optional[Tuple[Tuple[int, ...], int]]:
    """Corner s and difference d with the colouring constant on
    s + d*[0, length]^n inside [1, bound]^n, or None.

    For n = 1 this is progression search; the colouring is called on ints.
    For n >= 2 the colouring is called on point tuples.
    """
    if bound**n > cap:
        raise BudgetExceeded(f"{bound}^{n} grid points exceed the cap {cap}")

    def colour_at(pt: Tuple[int, ...]) -> int:
        return colouring(pt[0]) if n == 1 else colouring(pt)

    offsets = list(itertools.product(range(length + 1), repeat=n))
    for d in range(1, (bound - 1) // length + 1):
        top = bound - length * d
        for s in itertools.product(range(1, top + 1), repeat=n):
            c0 = colour_at(tuple(s[i] + d * offsets[0][i] for i in range(n)))
            if all(
                colour_at(tuple(s[i] + d * off[i] for i in range(n))) == c0
                for off in offsets[1:]
            ):
                return (tuple(s), d)
    return None


def ordered_fu_search(colouring: Callable, m: int, n: int
                      ) -> Optional[List[Tuple[int, ...]]]:
    """Ordered blocks A_1 < ... < A_m of [1, n] with every nonempty union of
    blocks the same colour, or None. The colouring is called on bitmasks
    (bit i-1 set means element i is in the set).
    """
    if n > 20:
        raise BudgetExceeded("ordered union search is capped at n = 20")
    if m < 1:
        raise ValueError("need at least one block")
    masks_by_min: List[List[int]] = [[] for _ in range(n + 2)]
    for mask in range(1, 1 << n):
        masks_by_min[(mask & -mask).bit_length()].append(mask)

    def unions_ok(blocks: List[int], target: int) -> bool:
        # every union involving the newly added block must match
        new = blocks[-1]
        rest = blocks[:-1]
        for bits in range(1 << len(rest)):
            u = new
            for i in range(len(rest)):
                if bits >> i & 1:
                    u |= rest[i]
            if colouring(u) != target:
                return False
        return True

    def extend(blocks: List[int], target: int) -> Optional[List[int]]:
        if len(blocks) == m:
            return blocks
        start = blocks[-1].bit_length() + 1 if blocks else 1
        for lo in range(start, n + 1):
            for mask in masks_by_min[lo]:
                blocks.append(mask)
                if unions_ok(blocks, target):
                    got = extend(blocks, target)
                    if got is not None:
                        return got
                blocks.pop()
        return None

    for first_min in range(1, n + 1):
        for mask in masks_by_min[first_min]:
            got = extend([mask], colouring(mask))
            if got is not None:
                return [
                    tuple(i + 1 for i in range(n) if b >> i & 1) for b in got
                ]
    return None
