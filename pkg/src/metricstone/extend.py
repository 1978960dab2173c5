"""Norm-preserving extension of a pseudometric from a subset to the whole space.

The ambient metric is rescaled by the smallest constant that dominates the
partial pseudometric, the partial values are laid over it as edge weights,
the complete graph is closed under shortest paths, and the result is
truncated at the norm of the partial pseudometric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .core import ZERO, FiniteSpace, Pseudometric, as_scalar, find_violation, norm


def shortest_path_closure(w: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Floyd-Warshall on a complete graph with nonnegative symmetric weights."""
    n = len(w)
    g = [list(row) for row in w]
    for k in range(n):
        gk = g[k]
        for i in range(n):
            gi = g[i]
            via = gi[k]
            for j in range(n):
                alt = via + gk[j]
                if alt < gi[j]:
                    gi[j] = alt
    return g


@dataclass(frozen=True)
class PartialPseudometric:
    """A pseudometric given only on ``subset`` (entries indexed in subset order)."""

    space: FiniteSpace
    subset: tuple[int, ...]
    entries: Pseudometric

    def __post_init__(self):
        subset = tuple(self.subset)
        object.__setattr__(self, "subset", subset)
        if not subset:
            raise ValueError("subset must be nonempty")
        if len(set(subset)) != len(subset):
            raise ValueError("subset has repeated points")
        for a in subset:
            if not 0 <= a < self.space.n:
                raise ValueError(f"point index {a} out of range")
        if self.entries.n != len(subset):
            raise ValueError(f"partial matrix has size {self.entries.n}, subset has {len(subset)}")

    @classmethod
    def from_matrix(cls, space: FiniteSpace, subset: Sequence[int], m) -> "PartialPseudometric":
        entries = m if isinstance(m, Pseudometric) else Pseudometric(m)
        return cls(space, tuple(subset), entries)


def lipschitz_constant(p: PartialPseudometric) -> Fraction:
    amb = p.space.ambient
    best = ZERO
    for s, t in combinations(range(len(p.subset)), 2):
        ratio = p.entries[s, t] / amb[p.subset[s], p.subset[t]]
        if ratio > best:
            best = ratio
    return best


def extend_pseudometric(p: PartialPseudometric) -> Pseudometric:
    """Extend ``p`` to the whole space without changing it on the subset or its norm."""
    n = p.space.n
    cap = norm(p.entries)
    if cap == 0:
        return Pseudometric.zero(n)
    subset = p.subset
    if len(subset) == n and list(subset) == list(range(n)):
        return p.entries
    lip = lipschitz_constant(p)
    amb = p.space.ambient
    w = [[lip * v for v in amb.row(i)] for i in range(n)]
    for s, a in enumerate(subset):
        for t, b in enumerate(subset):
            if s != t:
                w[a][b] = min(p.entries[s, t], w[a][b])
    if len(subset) == n:
        g = w
    else:
        g = shortest_path_closure(w)
    rows = tuple(tuple(v if v < cap else cap for v in row) for row in g)
    return Pseudometric._trusted(rows)


def extend_prescribed_blocks(space: FiniteSpace, blocks, values, cap) -> Pseudometric:
    """Extend the block-constant pseudometric that is ``values[s][t]`` across
    blocks ``s`` and ``t`` and zero inside each block.

    Empty blocks are ignored.  The result never exceeds ``cap``.
    """
    blocks = [tuple(sorted(b)) for b in blocks]
    k = len(blocks)
    vals = [[as_scalar(v) for v in row] for row in values]
    if len(vals) != k or any(len(row) != k for row in vals):
        raise ValueError(f"value matrix must be {k}x{k}")
    bad = find_violation(vals)
    if bad is not None:
        raise ValueError(f"block values are not a pseudometric: {bad}")
    cap = as_scalar(cap)
    top = max((max(row) for row in vals), default=ZERO)
    if cap < top:
        raise ValueError(f"cap {cap} is below the largest block value {top}")
    seen: set[int] = set()
    for b in blocks:
        for z in b:
            if z in seen:
                raise ValueError(f"point {z} lies in more than one block")
            if not 0 <= z < space.n:
                raise ValueError(f"point index {z} out of range")
            seen.add(z)

    subset: list[int] = []
    owner: list[int] = []
    for s, b in enumerate(blocks):
        subset.extend(b)
        owner.extend([s] * len(b))
    m = len(subset)
    rows = tuple(tuple(vals[owner[u]][owner[v]] for v in range(m)) for u in range(m))
    partial = PartialPseudometric(space, tuple(subset), Pseudometric._trusted(rows))
    return extend_pseudometric(partial)
