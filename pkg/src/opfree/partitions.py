"""Set partitions of ``{1..m}`` and the complement/d-map machinery built on them.

Partitions are stored in canonical form: blocks sorted by their minimum,
elements ascending, 1-based.  A block-label table makes ``same_block`` O(1).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Sequence

__all__ = [
    "ENUMERATION_CAP",
    "PartitionSizeError",
    "SetPartition",
    "CLASSES",
    "bell",
    "catalan",
    "iter_partitions",
    "enumerate_all",
    "enumerate_class",
    "kernel",
    "leq",
    "insert",
    "interleave",
    "restrict",
    "kreweras",
    "d_map",
    "has_property_p",
    "outer_blocks",
    "out_equivalent",
    "kernel_class_count",
    "falling_factorial",
    "parse_partition",
]

ENUMERATION_CAP = 12

CLASSES = (
    "all",
    "noncrossing",
    "interval",
    "pair",
    "nc_pair",
    "interval_pair",
    "closed",
    "closed_nc",
)


class PartitionSizeError(ValueError):
    """Requested ground set is larger than the enumeration cap."""


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{1, ..., ground_size}``.

    Construct with any iterable of blocks; the constructor canonicalizes.
    ``labels[i-1]`` is the 0-based index of the block containing ``i``.
    """

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...] = field(repr=False, compare=False, hash=False, default=())

    def __init__(self, blocks: Iterable[Iterable[int]], ground_size: int | None = None):
        bl = [tuple(sorted(int(x) for x in b)) for b in blocks]
        if any(len(b) == 0 for b in bl):
            raise ValueError("blocks must be nonempty")
        bl.sort(key=lambda b: b[0])
        seen = [x for b in bl for x in b]
        m = len(seen) if ground_size is None else int(ground_size)
        if sorted(seen) != list(range(1, m + 1)):
            raise ValueError(f"blocks {bl} do not partition {{1..{m}}}")
        labels = [0] * m
        for idx, b in enumerate(bl):
            for x in b:
                labels[x - 1] = idx
        object.__setattr__(self, "ground_size", m)
        object.__setattr__(self, "blocks", tuple(bl))
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "SetPartition":
        """Build from any labelling; positions with equal labels share a block."""
        groups: dict = {}
        for pos, lab in enumerate(labels, start=1):
            groups.setdefault(lab, []).append(pos)
        return cls(groups.values(), ground_size=len(labels))

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __str__(self) -> str:
        return "".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)

    def same_block(self, s: int, t: int) -> bool:
        return self.labels[s - 1] == self.labels[t - 1]

    def block_of(self, s: int) -> tuple[int, ...]:
        return self.blocks[self.labels[s - 1]]

    # predicates -----------------------------------------------------------

    def is_noncrossing(self) -> bool:
        return _labels_noncrossing(self.labels)

    def is_interval(self) -> bool:
        return all(b[-1] - b[0] + 1 == len(b) for b in self.blocks)

    def is_pair(self) -> bool:
        return all(len(b) == 2 for b in self.blocks)

    def is_closed(self) -> bool:
        return self.ground_size >= 1 and self.labels[0] == self.labels[-1]


def parse_partition(text: str) -> SetPartition:
    """Inverse of ``str(SetPartition)``: ``"{1,4}{2,3}"``."""
    body = text.replace(" ", "")
    if not re.fullmatch(r"(\{\d+(,\d+)*\})+", body):
        raise ValueError(f"cannot parse partition {text!r}")
    blocks = [[int(x) for x in grp.split(",")] for grp in re.findall(r"\{([^}]*)\}", body)]
    return SetPartition(blocks)


def _labels_noncrossing(labels: Sequence[int]) -> bool:
    last = {}
    for pos, lab in enumerate(labels):
        last[lab] = pos
    stack: list = []
    seen = set()
    for pos, lab in enumerate(labels):
        while stack and last[stack[-1]] < pos:
            stack.pop()
        if lab in seen:
            if stack[-1] != lab:
                return False
        else:
            seen.add(lab)
            stack.append(lab)
    return True


# --------------------------------------------------------------------------
# counting

@lru_cache(maxsize=None)
def bell(m: int) -> int:
    if m == 0:
        return 1
    return sum(comb(m - 1, k) * bell(k) for k in range(m))


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def falling_factorial(n: int, r: int) -> int:
    out = 1
    for i in range(r):
        out *= n - i
        if out == 0:
            return 0
    return out


# --------------------------------------------------------------------------
# enumeration

def _check_cap(m: int) -> None:
    if m < 1:
        raise ValueError("ground size must be positive")
    if m > ENUMERATION_CAP:
        raise PartitionSizeError(f"m={m} exceeds enumeration cap {ENUMERATION_CAP}")


def iter_rgs(m: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length ``m`` (one per partition)."""
    if m == 0:
        yield ()
        return
    a = [0] * m

    def rec(i: int, top: int):
        if i == m:
            yield tuple(a)
            return
        for v in range(top + 2):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    yield from rec(1, 0)


def iter_partitions(m: int) -> Iterator[SetPartition]:
    _check_cap(m)
    for rgs in iter_rgs(m):
        yield SetPartition.from_labels(rgs)


def enumerate_all(m: int) -> list[SetPartition]:
    """All of ``P(m)``; ``len`` is the Bell number."""
    return list(iter_partitions(m))


def _nc_blocks(elems: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    # block containing elems[0] is chosen; the gaps it leaves are independent
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for r in range(len(rest) + 1):
        for chosen in itertools.combinations(range(len(rest)), r):
            cuts = [-1, *chosen, len(rest)]
            gaps = [rest[cuts[i] + 1 : cuts[i + 1]] for i in range(len(cuts) - 1)]
            block = (first, *(rest[c] for c in chosen))
            for parts in itertools.product(*(list(_nc_blocks(g)) for g in gaps)):
                yield [block, *itertools.chain.from_iterable(parts)]


def _nc2_blocks(elems: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    if not elems:
        yield []
        return
    if len(elems) % 2:
        return
    first = elems[0]
    for j in range(1, len(elems), 2):
        inner, outer = elems[1:j], elems[j + 1 :]
        for a in _nc2_blocks(inner):
            for b in _nc2_blocks(outer):
                yield [(first, elems[j]), *a, *b]


def _pair_blocks(elems: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    if not elems:
        yield []
        return
    if len(elems) % 2:
        return
    first = elems[0]
    for j in range(1, len(elems)):
        rest = elems[1:j] + elems[j + 1 :]
        for sub in _pair_blocks(rest):
            yield [(first, elems[j]), *sub]


def _interval_blocks(m: int) -> Iterator[list[tuple[int, ...]]]:
    for cuts in itertools.product((False, True), repeat=m - 1):
        blocks, start = [], 1
        for pos, cut in enumerate(cuts, start=1):
            if cut:
                blocks.append(tuple(range(start, pos + 1)))
                start = pos + 1
        blocks.append(tuple(range(start, m + 1)))
        yield blocks


@lru_cache(maxsize=64)
def _enumerate_class_cached(m: int, cls: str) -> tuple[SetPartition, ...]:
    ground = tuple(range(1, m + 1))
    if cls == "all":
        return tuple(iter_partitions(m))
    if cls == "noncrossing":
        gen = _nc_blocks(ground)
    elif cls == "interval":
        gen = _interval_blocks(m)
    elif cls == "pair":
        gen = _pair_blocks(ground)
    elif cls == "nc_pair":
        gen = _nc2_blocks(ground)
    elif cls == "interval_pair":
        gen = iter([[(i, i + 1) for i in range(1, m, 2)]] if m % 2 == 0 else [])
    elif cls == "closed":
        if m < 2:
            raise ValueError("closed partitions need m >= 2")
        return tuple(p for p in iter_partitions(m) if p.is_closed())
    elif cls == "closed_nc":
        if m < 2:
            raise ValueError("closed partitions need m >= 2")
        return tuple(p for p in _enumerate_class_cached(m, "noncrossing") if p.is_closed())
    else:
        raise ValueError(f"unknown partition class {cls!r}; expected one of {CLASSES}")
    return tuple(sorted((SetPartition(b, m) for b in gen), key=lambda p: p.labels))


def enumerate_class(m: int, cls: str) -> list[SetPartition]:
    """Enumerate one of the classes in :data:`CLASSES`.

    Noncrossing, pair and interval classes are generated directly rather than
    by filtering ``P(m)``.
    """
    _check_cap(m)
    return list(_enumerate_class_cached(m, cls))


# --------------------------------------------------------------------------
# basic operations

def kernel(indices: Sequence[int]) -> SetPartition:
    """``ker i``: positions ``s, t`` share a block iff ``i_s == i_t``."""
    return SetPartition.from_labels(indices)


def _check_same_size(a: SetPartition, b: SetPartition) -> None:
    if a.ground_size != b.ground_size:
        raise ValueError(f"ground sizes differ: {a.ground_size} vs {b.ground_size}")


def leq(pi: SetPartition, sigma: SetPartition) -> bool:
    """Refinement order: every block of ``pi`` lies inside a block of ``sigma``."""
    _check_same_size(pi, sigma)
    return all(len({sigma.labels[x - 1] for x in b}) == 1 for b in pi.blocks)


def insert(pi: SetPartition, sigma: SetPartition) -> SetPartition:
    """``pi ↪ sigma``: odd slots of ``[2m+1]`` follow ``sigma``, even slots ``pi``."""
    m = pi.ground_size
    if sigma.ground_size != m + 1:
        raise ValueError(f"insert needs |sigma| ground {m + 1}, got {sigma.ground_size}")
    blocks = [[2 * x - 1 for x in b] for b in sigma.blocks]
    blocks += [[2 * x for x in b] for b in pi.blocks]
    return SetPartition(blocks, 2 * m + 1)


def interleave(pi1: SetPartition, pi2: SetPartition) -> SetPartition:
    """``pi1 ≀ pi2``: odd slots of ``[2m]`` follow ``pi1``, even slots ``pi2``."""
    _check_same_size(pi1, pi2)
    blocks = [[2 * x - 1 for x in b] for b in pi1.blocks]
    blocks += [[2 * x for x in b] for b in pi2.blocks]
    return SetPartition(blocks, 2 * pi1.ground_size)


def restrict(pi: SetPartition, subset: Iterable[int]) -> SetPartition:
    """Restriction to ``subset``, relabelled order-preservingly onto ``[1..|subset|]``."""
    members = sorted(set(int(x) for x in subset))
    if not members:
        raise ValueError("cannot restrict to an empty subset")
    if members[0] < 1 or members[-1] > pi.ground_size:
        raise ValueError("subset not contained in the ground set")
    return SetPartition.from_labels([pi.labels[x - 1] for x in members])


# --------------------------------------------------------------------------
# Kreweras-type complements

def _max_complement(fixed: SetPartition, fixed_pos: Sequence[int], free_pos: Sequence[int]) -> list[list[int]]:
    """Coarsest grouping of ``free_pos`` that crosses no block of ``fixed``.

    ``fixed_pos[i]`` is the slot of fixed element ``i+1``.  Two free slots
    ``u < v`` may be joined iff every fixed block lies entirely inside or
    entirely outside the open interval ``(u, v)``.
    """
    fixed_blocks = [[fixed_pos[x - 1] for x in b] for b in fixed.blocks]
    parent = list(range(len(free_pos)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in itertools.combinations(range(len(free_pos)), 2):
        u, v = free_pos[a], free_pos[b]
        ok = True
        for blk in fixed_blocks:
            inside = [u < x < v for x in blk]
            if any(inside) and not all(inside):
                ok = False
                break
        if ok:
            parent[find(a)] = find(b)
    groups: dict = {}
    for a in range(len(free_pos)):
        groups.setdefault(find(a), []).append(a + 1)
    return list(groups.values())


def kreweras(pi: SetPartition, variant: str = "K") -> SetPartition:
    """Kreweras complement ``K``, outer complement ``OK`` or inner complement ``IK``.

    * ``K(pi)``  in ``NC(m)``:   largest with ``pi ≀ K(pi)`` noncrossing.
    * ``OK(pi)`` in ``NC(m+1)``: largest with ``pi ↪ OK(pi)`` noncrossing.
    * ``IK(pi)`` in ``NC(m-1)``: largest with ``IK(pi) ↪ pi`` noncrossing.
    """
    if not pi.is_noncrossing():
        raise ValueError(f"{pi} is not noncrossing")
    m = pi.ground_size
    if variant == "K":
        blocks = _max_complement(pi, [2 * x - 1 for x in range(1, m + 1)], [2 * x for x in range(1, m + 1)])
        out = SetPartition(blocks, m)
    elif variant == "OK":
        blocks = _max_complement(pi, [2 * x for x in range(1, m + 1)], [2 * x - 1 for x in range(1, m + 2)])
        out = SetPartition(blocks, m + 1)
    elif variant == "IK":
        if m < 2:
            raise ValueError("IK needs ground size >= 2")
        blocks = _max_complement(pi, [2 * x - 1 for x in range(1, m + 1)], [2 * x for x in range(1, m)])
        out = SetPartition(blocks, m - 1)
    else:
        raise ValueError(f"unknown complement variant {variant!r}")
    return out


# --------------------------------------------------------------------------
# d-map and property P

def _d_labels(labels: Sequence[int]) -> tuple[list[int], bool]:
    """Block labels of ``d(sigma)`` given labels of ``sigma``.

    Also reports whether transitive closure added pairs beyond the
    generating relation.
    """
    m = len(labels) - 1
    # generating relation: {i_s, i_{s+1}} and {i_t, i_{t+1}} coincide as multisets
    ordered = [(labels[p], labels[p + 1]) for p in range(m)]

    def related(s, t):
        a, b = ordered[s], ordered[t]
        return a == b or a == (b[1], b[0])

    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in range(m):
        for t in range(s + 1, m):
            if related(s, t):
                parent[find(s)] = find(t)
    roots = [find(s) for s in range(m)]
    closure_added = any(
        roots[s] == roots[t] and not related(s, t) for s in range(m) for t in range(s + 1, m)
    )
    return roots, closure_added


def d_map(sigma: SetPartition, report_closure: bool = False):
    """The map ``d: P(m+1) -> P(m)``.

    ``s ~ t`` in the image iff the unordered label pairs at ``(s, s+1)`` and
    ``(t, t+1)`` coincide; the result is the transitive closure of that
    relation.  With ``report_closure=True`` returns ``(partition, added)``
    where ``added`` flags pairs introduced only by the closure.
    """
    if sigma.ground_size < 2:
        raise ValueError("d_map needs ground size >= 2")
    roots, added = _d_labels(sigma.labels)
    out = SetPartition.from_labels(roots)
    return (out, added) if report_closure else out


def has_property_p(sigma: SetPartition) -> bool:
    """Closed, and every block of ``d(sigma)`` has at least two elements."""
    if sigma.ground_size < 2:
        raise ValueError("property P needs ground size >= 2")
    if not sigma.is_closed():
        return False
    return all(len(b) >= 2 for b in d_map(sigma).blocks)


# --------------------------------------------------------------------------
# outer blocks of noncrossing pairings

def _require_nc_pair(pi: SetPartition) -> None:
    if not (pi.is_pair() and pi.is_noncrossing()):
        raise ValueError(f"{pi} is not a noncrossing pair partition")


def outer_blocks(pi: SetPartition) -> list[tuple[int, ...]]:
    """Blocks of a noncrossing pairing not nested inside any other block."""
    _require_nc_pair(pi)
    out = []
    for p, q in pi.blocks:
        if not any(a < p and q < b for a, b in pi.blocks):
            out.append((p, q))
    return out


def out_equivalent(pi1: SetPartition, pi2: SetPartition) -> bool:
    return set(outer_blocks(pi1)) == set(outer_blocks(pi2))


def kernel_class_count(sigma: SetPartition, n: int) -> int:
    """Number of tuples ``i`` in ``[n]^m`` with ``ker i == sigma``."""
    return falling_factorial(n, len(sigma))
