"""Seeded random spaces and pseudometrics.

Points are drawn from a small integer box under the max-coordinate
distance, then nonnegative symmetric edge bumps are added and the result is
closed under shortest paths.  Validity holds by construction, so there is no
rejection loop.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from .core import ZERO, FiniteSpace, Pseudometric, as_scalar, norm
from .extend import shortest_path_closure


def _box_matrix(rng: random.Random, n: int, box: int) -> list[list[Fraction]]:
    dim = rng.randint(1, 3)
    pts = [tuple(rng.randint(0, box) for _ in range(dim)) for _ in range(n)]
    m = [[ZERO] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        v = Fraction(max(abs(a - b) for a, b in zip(pts[i], pts[j])))
        m[i][j] = m[j][i] = v
    return m


def _perturbed(rng: random.Random, n: int, box: int, bump_min: int, bump_max: int) -> Pseudometric:
    m = _box_matrix(rng, n, box)
    for i, j in combinations(range(n), 2):
        bump = Fraction(rng.randint(bump_min, bump_max))
        m[i][j] += bump
        m[j][i] = m[i][j]
    g = shortest_path_closure(m)
    q = rng.choice((1, 1, 2, 3, 4))
    if q != 1:
        g = [[v / q for v in row] for row in g]
    return Pseudometric._trusted(tuple(tuple(row) for row in g))


def random_admissible(rng: random.Random, n: int, box: int = 6) -> Pseudometric:
    return _perturbed(rng, n, box, 1, 3)


def random_pseudometric(rng: random.Random, n: int, box: int = 4) -> Pseudometric:
    """Pseudometric that frequently vanishes between distinct points."""
    if rng.random() < 0.05:
        return Pseudometric.zero(n)
    if rng.random() < 0.5:
        # coarse box: many coincident points
        return _perturbed(rng, n, 1, 0, 0)
    return _perturbed(rng, n, box, 0, 1)


def random_space(rng: random.Random, n: int, prefix: str = "p") -> FiniteSpace:
    return FiniteSpace(tuple(f"{prefix}{i}" for i in range(n)), random_admissible(rng, n))


def random_bijection(rng: random.Random, n: int) -> tuple[int, ...]:
    perm = list(range(n))
    rng.shuffle(perm)
    return tuple(perm)


def with_norm(d: Pseudometric, target) -> Pseudometric:
    """Rescale ``d`` to the given norm; the zero pseudometric is returned unchanged."""
    target = as_scalar(target)
    top = norm(d)
    if top == 0:
        return d
    return d * (target / top)
