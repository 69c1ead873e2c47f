"""Pattern families over tower terms.

Generators for subset-sum, subset-product, exponential, weighted-product,
exponential-product, and shape patterns, plus the directed-cycle decision on
shape relations. Every generator returns a PatternSet: a deduplicated,
deterministically ordered collection of terms, each with a provenance record
that reconstructs how it was built.

Deduplication follows the term module's convention: exact value below the
cutoff, canonical structure above it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    ArityMismatch,
    BudgetExceeded,
    ExactnessRequired,
    SymbolicUnsupported,
    WeightUndefined,
)
from .tower import (
    ExpTerm,
    Literal,
    as_term,
    dedup_key,
    eval_exact,
    power,
    product,
    to_text,
)

DEFAULT_ELEMENT_CAP = 10**6


def _as_terms(xs) -> Tuple[ExpTerm, ...]:
    return tuple(as_term(x) for x in xs)


def _require_gt1(xs: Sequence[ExpTerm], family: str) -> None:
    # huge symbolic terms are certainly > 1; only exact values can fail
    for x in xs:
        bv = eval_exact(x)
        if bv.is_exact and bv.exact <= 1:
            raise ValueError(f"{family} generators must all exceed 1, got {to_text(x)}")


@dataclass(frozen=True)
class PatternSet:
    family: str
    generators: Tuple[ExpTerm, ...]
    elements: Tuple[ExpTerm, ...]
    provenance: Tuple[dict, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def exact_values(self) -> set:
        """Values of the exactly evaluable elements."""
        out = set()
        for e in self.elements:
            bv = eval_exact(e)
            if bv.is_exact:
                out.add(bv.exact)
        return out

    def contains_value(self, v: int) -> bool:
        return v in self.exact_values()

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "generators": [to_text(g) for g in self.generators],
            "elements": [to_text(e) for e in self.elements],
            "provenance": list(self.provenance),
        }


class _Builder:
    """Accumulates elements, keeping the first provenance per distinct value."""

    def __init__(self, family: str, generators: Tuple[ExpTerm, ...], cap: Optional[int] = None):
        self.family = family
        self.generators = generators
        self.cap = cap
        self.seen: dict = {}
        self.elements: List[ExpTerm] = []
        self.provenance: List[dict] = []

    def add(self, t: ExpTerm, prov: dict) -> None:
        if self.cap is not None and len(self.elements) >= self.cap:
            raise BudgetExceeded(
                f"{self.family} generation exceeded the element cap {self.cap}"
            )
        key = dedup_key(t)
        if key in self.seen:
            return
        self.seen[key] = len(self.elements)
        self.elements.append(t)
        self.provenance.append(prov)

    def done(self) -> PatternSet:
        return PatternSet(
            self.family, self.generators, tuple(self.elements), tuple(self.provenance)
        )


def _nonempty_subsets(m: int) -> Iterable[Tuple[int, ...]]:
    """Index subsets of range(m), by increasing size then lexicographically."""
    for size in range(1, m + 1):
        yield from itertools.combinations(range(m), size)


def finite_sums(xs) -> PatternSet:
    """All nonempty-subset sums of literal generators."""
    xs = _as_terms(xs)
    for x in xs:
        if not isinstance(x, Literal):
            raise SymbolicUnsupported("subset sums of symbolic towers are not defined")
    b = _Builder("fs", xs)
    for idx in _nonempty_subsets(len(xs)):
        s = sum(xs[i].value for i in idx)
        b.add(Literal(s), {"indices": [i + 1 for i in idx]})
    return b.done()


def finite_products(xs) -> PatternSet:
    """All nonempty-subset products; symbolic generators allowed."""
    xs = _as_terms(xs)
    b = _Builder("fp", xs)
    for idx in _nonempty_subsets(len(xs)):
        t = product(*(xs[i] for i in idx))
        b.add(t, {"indices": [i + 1 for i in idx]})
    return b.done()


def finite_exponentials(xs) -> PatternSet:
    """The order-respecting exponential compositions of the generators.

    Recursive structure: the block at index i consists of x_i raised to the
    product e_{i+1}*...*e_m, where each e_j is either omitted or drawn from
    the full suffix family starting at j; the block at m is x_m itself.
    """
    xs = _as_terms(xs)
    _require_gt1(xs, "fe")
    m = len(xs)
    # suffix[j] = all elements of the family over xs[j:], built bottom-up
    suffix: List[List[Tuple[ExpTerm, dict]]] = [[] for _ in range(m)]
    blocks: List[List[Tuple[ExpTerm, dict]]] = [[] for _ in range(m)]
    for i in range(m - 1, -1, -1):
        block: List[Tuple[ExpTerm, dict]] = []
        pools = []
        for j in range(i + 1, m):
            pools.append([None] + [e for e, _ in suffix[j]])
        for choice in itertools.product(*pools):
            picked = [e for e in choice if e is not None]
            exponent = product(*picked) if picked else Literal(1)
            t = power(xs[i], exponent)
            prov = {
                "i": i + 1,
                "exponents": [to_text(e) if e is not None else None for e in choice],
            }
            block.append((t, prov))
        blocks[i] = block
        suffix[i] = block + (suffix[i + 1] if i + 1 < m else [])
    b = _Builder("fe", xs)
    for i in range(m):
        for t, prov in blocks[i]:
            b.add(t, prov)
    return b.done()


# ---------------------------------------------------------------------------
# weight functions

def _set_key(values: Iterable[int]) -> str:
    return ",".join(str(v) for v in sorted(set(values)))


@dataclass(frozen=True)
class WeightFn:
    """Weight on finite sets of positive integers, or a constant.

    Table keys are frozensets of values. A monotone (normalized) table
    answers a query A with max{W(B) : B in table, B subset of A}, which is the
    closure used by the exponential-product family.
    """

    const: Optional[int] = None
    table: Optional[Dict[FrozenSet[int], int]] = None
    monotone: bool = False

    @classmethod
    def constant(cls, k: int) -> "WeightFn":
        if k < 0:
            raise ValueError("weights must be non-negative")
        return cls(const=k)

    @classmethod
    def of_table(cls, entries: Dict[FrozenSet[int], int]) -> "WeightFn":
        return cls(table={frozenset(k): v for k, v in entries.items()})

    def lookup(self, values: FrozenSet[int]) -> int:
        if self.const is not None:
            return self.const
        assert self.table is not None
        values = frozenset(values)
        if not self.monotone:
            if values in self.table:
                return self.table[values]
            raise WeightUndefined(f"weight undefined on {{{_set_key(values)}}}")
        best = None
        for key, w in self.table.items():
            if key <= values and (best is None or w > best):
                best = w
        if best is None:
            raise WeightUndefined(f"weight undefined on {{{_set_key(values)}}}")
        return best

    def normalized(self) -> "WeightFn":
        if self.const is not None or self.monotone:
            return self
        return WeightFn(table=self.table, monotone=True)

    def to_json(self) -> dict:
        if self.const is not None:
            return {"const": self.const}
        assert self.table is not None
        return {"table": {_set_key(k): v for k, v in sorted(self.table.items(), key=lambda kv: _set_key(kv[0]))}}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightFn":
        if "const" in obj:
            return cls.constant(int(obj["const"]))
        table = {}
        for key, v in obj["table"].items():
            vals = frozenset(int(p) for p in key.split(",") if p != "")
            table[vals] = int(v)
        return cls(table=table)


def _suffix_values(xs: Tuple[ExpTerm, ...], i: int) -> FrozenSet[int]:
    """Exact values of x_{i+1}..x_m (1-based i); weight lookups need them."""
    out = []
    for x in xs[i:]:
        bv = eval_exact(x)
        if bv.is_huge:
            raise ExactnessRequired(
                "weight lookups need exactly evaluable generators"
            )
        out.append(bv.exact)
    return frozenset(out)


def weighted_products(S, W: WeightFn, xs) -> PatternSet:
    """Products x_i^{p_i} over i in S with 0 <= p_i <= W(suffix values of i).

    Includes the empty product 1 (all exponents zero). S uses 1-based indices
    into xs.
    """
    xs = _as_terms(xs)
    m = len(xs)
    S = sorted(set(S))
    for i in S:
        if not 1 <= i <= m:
            raise ValueError(f"index {i} outside [1, {m}]")
    caps = {i: W.lookup(_suffix_values(xs, i)) for i in S}
    b = _Builder("fpw", xs)
    for ps in itertools.product(*(range(caps[i] + 1) for i in S)):
        factors = [power(xs[i - 1], p) for i, p in zip(S, ps) if p >= 1]
        t = product(*factors) if factors else Literal(1)
        b.add(t, {"exponents": {str(i): p for i, p in zip(S, ps)}})
    return b.done()


def fep(W: WeightFn, xs, cap: int = DEFAULT_ELEMENT_CAP) -> PatternSet:
    """Exponential-product family: products of x_i^{e_i} over nonempty bases B.

    Each exponent e_i is a weighted product supported on the indices above i
    that are outside B, with the weight normalized to be monotone first.
    Generation enumerates B by increasing size then lexicographically and
    exponent tuples lexicographically; the element cap guards blowup.
    """
    xs = _as_terms(xs)
    _require_gt1(xs, "fep")
    m = len(xs)
    Wn = W.normalized()
    suffix_caps = {j: Wn.lookup(_suffix_values(xs, j)) for j in range(1, m + 1)}
    b = _Builder("fep", xs, cap=cap)
    for B in _nonempty_subsets(m):
        base_idx = [i + 1 for i in B]
        in_b = set(base_idx)
        # per-base exponent choices: weighted products over the free suffix
        per_base: List[List[Tuple[ExpTerm, dict]]] = []
        for i in base_idx:
            support = [j for j in range(i + 1, m + 1) if j not in in_b]
            choices: List[Tuple[ExpTerm, dict]] = []
            for ps in itertools.product(*(range(suffix_caps[j] + 1) for j in support)):
                factors = [power(xs[j - 1], p) for j, p in zip(support, ps) if p >= 1]
                e = product(*factors) if factors else Literal(1)
                choices.append((e, {str(j): p for j, p in zip(support, ps)}))
            per_base.append(choices)
        for combo in itertools.product(*per_base):
            t = product(*(power(xs[i - 1], e) for i, (e, _) in zip(base_idx, combo)))
            prov = {
                "B": base_idx,
                "exponents": {str(i): exps for i, (_, exps) in zip(base_idx, combo)},
            }
            b.add(t, prov)
    return b.done()


# ---------------------------------------------------------------------------
# shape patterns and the cycle decision

@dataclass(frozen=True)
class ShapeRelation:
    m: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("relation needs m >= 1")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for (i, j) in self.edges:
            if not (1 <= i <= self.m and 1 <= j <= self.m):
                raise ValueError(f"edge ({i},{j}) outside [{self.m}]x[{self.m}]")


def shape_pattern(R: ShapeRelation, xs) -> PatternSet:
    """Generators plus x_i^{x_j} for every edge (i, j)."""
    xs = _as_terms(xs)
    if len(xs) != R.m:
        raise ArityMismatch(f"relation expects {R.m} generators, got {len(xs)}")
    _require_gt1(xs, "shape")
    b = _Builder("shape", xs)
    for i, x in enumerate(xs):
        b.add(x, {"generator": i + 1})
    for (i, j) in sorted(R.edges):
        b.add(power(xs[i - 1], xs[j - 1]), {"edge": [i, j]})
    return b.done()


class CycleCheck(Tuple[bool, Optional[Tuple[Tuple[int, int], ...]]]):
    """(cyclic, witness edge list when cyclic); truthy iff cyclic."""

    def __new__(cls, cyclic: bool, witness=None):
        return super().__new__(cls, (cyclic, witness))

    @property
    def cyclic(self) -> bool:
        return self[0]

    @property
    def witness(self):
        return self[1]

    def __bool__(self) -> bool:
        return self[0]


def has_directed_cycle(R: ShapeRelation) -> CycleCheck:
    """Depth-first cycle detection with an explicit edge-cycle witness."""
    adj: Dict[int, List[int]] = {i: [] for i in range(1, R.m + 1)}
    for (i, j) in sorted(R.edges):
        adj[i].append(j)
    state = {i: 0 for i in adj}  # 0 unvisited, 1 on stack, 2 done
    stack: List[int] = []

    def dfs(u: int) -> Optional[Tuple[Tuple[int, int], ...]]:
        state[u] = 1
        stack.append(u)
        for v in adj[u]:
            if state[v] == 1:
                # cycle: from v along the stack back to u, then edge (u, v)
                start = stack.index(v)
                nodes = stack[start:]
                edges = tuple(
                    (nodes[a], nodes[a + 1]) for a in range(len(nodes) - 1)
                ) + ((u, v),)
                return edges
            if state[v] == 0:
                got = dfs(v)
                if got is not None:
                    return got
        stack.pop()
        state[u] = 2
        return None

    for i in sorted(adj):
        if state[i] == 0:
            got = dfs(i)
            if got is not None:
                return CycleCheck(True, got)
    return CycleCheck(False, None)
