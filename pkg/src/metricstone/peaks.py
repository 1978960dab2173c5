"""Unique-peak perturbations.

Both constructions add a layered pseudometric ``sum_n rho_n / 2**n`` whose
levels are block-constant around shrinking balls at the two chosen points.
On a finite admissible space the balls stop shrinking once the radius drops
below the smallest positive distance, so the series has a finite head and a
geometric tail that is summed in closed form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    FiniteSpace,
    Pseudometric,
    UPair,
    as_scalar,
    ball,
    cone_add,
    cone_sum,
    min_positive_distance,
    norm,
)
from .extend import PartialPseudometric, extend_prescribed_blocks, extend_pseudometric
from .generate import random_pseudometric


def in_peak_cone(d: Pseudometric, pair: UPair) -> bool:
    return d[pair] == norm(d)


def _as_pair(pair) -> UPair:
    p = UPair.of(*pair)
    if not p.is_doubleton:
        raise ValueError(f"{p} is not a doubleton")
    return p


def _self_space(d: Pseudometric) -> FiniteSpace:
    return FiniteSpace(tuple(str(i) for i in range(d.n)), d)


def level_blocks(d: Pseudometric, pair: UPair, radius_base, level: int):
    """The three blocks of layer ``level``: two closed balls and the far region."""
    x, y = pair
    r = as_scalar(radius_base) / 2**level
    near_x = ball(d, x, r / 2, closed=True)
    near_y = ball(d, y, r / 2, closed=True)
    far = frozenset(range(d.n)) - ball(d, x, r) - ball(d, y, r)
    return near_x, near_y, far


def rho_level(d: Pseudometric, pair, radius_base, level_value, level: int, space=None) -> Pseudometric:
    """A single layer ``rho_n``: ``level_value`` across the two balls,
    half of it between either ball and the far region, 0 inside blocks."""
    pair = _as_pair(pair)
    top = as_scalar(level_value)
    half = top / 2
    values = [[0, top, half], [top, 0, half], [half, half, 0]]
    if space is None:
        space = _self_space(d)
    return extend_prescribed_blocks(space, level_blocks(d, pair, radius_base, level), values, top)


def stabilization_level(d: Pseudometric, radius_base) -> int:
    """Least ``n >= 1`` with ``radius_base / 2**n`` below the smallest positive distance."""
    delta = min_positive_distance(d)
    if delta is None:
        raise ValueError("pseudometric has no positive distance")
    r = as_scalar(radius_base)
    n = 1
    while r / 2**n >= delta:
        n += 1
    return n


def layered_rho(d: Pseudometric, pair, radius_base, level_value) -> Pseudometric:
    """Exact value of ``sum_{n>=1} rho_n / 2**n``.

    ``d`` must be admissible; it doubles as the ambient metric for the
    extensions.  The result equals ``level_value`` at ``pair`` and is strictly
    smaller at every other pair.
    """
    pair = _as_pair(pair)
    radius_base = as_scalar(radius_base)
    level_value = as_scalar(level_value)
    if radius_base <= 0 or level_value <= 0:
        raise ValueError("radius_base and level_value must be positive")
    if not d.is_admissible():
        raise ValueError("layered construction needs an admissible metric")
    space = _self_space(d)
    stop = stabilization_level(d, radius_base)
    terms = [
        rho_level(d, pair, radius_base, level_value, n, space) * Fraction(1, 2**n)
        for n in range(1, stop)
    ]
    tail = rho_level(d, pair, radius_base, level_value, stop, space)
    terms.append(tail * Fraction(1, 2 ** (stop - 1)))
    return cone_sum(terms)


def lex_argmax_pair(d: Pseudometric) -> UPair:
    top = norm(d)
    return min(p for p, v in d.pairs() if v == top)


@dataclass(frozen=True)
class Densified:
    metric: Pseudometric
    pair: UPair
    base: Pseudometric
    eps_used: Fraction
    repair_norm: Fraction

    @property
    def peak_value(self) -> Fraction:
        return self.metric[self.pair]


def densify_to_pp(space: FiniteSpace, d: Pseudometric, eps) -> Densified:
    """Perturb ``d`` by at most ``4*eps`` (after admissibility repair) into a
    unique-peak metric.

    A non-admissible ``d`` first gets ``eps / ||ambient||`` times the ambient
    metric added; that margin is reported as ``repair_norm``.
    """
    eps = as_scalar(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if d.n < 2:
        raise ValueError("need at least two points")
    if d.n != space.n:
        raise ValueError("metric and space sizes differ")
    repair = Fraction(0)
    base = d
    if not d.is_admissible():
        amb = space.ambient
        base = cone_add(d, amb * (eps / norm(amb)))
        repair = eps
    pair = lex_argmax_pair(base)
    a = base[pair]
    eps_used = min(eps, a)
    rho = layered_rho(base, pair, eps_used, 4 * eps_used)
    return Densified(cone_add(base, rho), pair, base, eps_used, repair)


@dataclass(frozen=True)
class Translation:
    """``rho`` with ``d + rho`` peaking uniquely at ``pair``.

    ``a`` and ``b`` refer to the (possibly repaired) base metric; ``repair``
    is the admissible summand folded into ``rho``, if any.
    """

    rho: Pseudometric
    pair: UPair
    a: Fraction
    b: Fraction
    repair: Pseudometric | None = None


def _translate_admissible(d: Pseudometric, pair: UPair) -> tuple[Pseudometric, Fraction, Fraction]:
    x, y = pair
    a = d[pair]
    b = min(max(d.row(x)), max(d.row(y)))
    return layered_rho(d, pair, a, 4 * b), a, b


def peak_translate(space: FiniteSpace, d: Pseudometric, pair) -> Translation:
    pair = _as_pair(pair)
    if d.n != space.n:
        raise ValueError("metric and space sizes differ")
    repair = None
    base = d
    if not d.is_admissible():
        amb = space.ambient
        amb_rho, _, _ = _translate_admissible(amb, pair)
        repair = cone_add(amb, amb_rho)
        base = cone_add(d, repair)
    rho, a, b = _translate_admissible(base, pair)
    if repair is not None:
        rho = cone_add(repair, rho)
    return Translation(rho, pair, a, b, repair)


def peaking_metric_at(space: FiniteSpace, pair, seed: int) -> Pseudometric:
    """A seed-dependent element of the peak cone at ``pair`` with a unique peak."""
    pair = _as_pair(pair)
    rng = random.Random(seed)
    base = cone_add(space.ambient * rng.randint(1, 3), random_pseudometric(rng, space.n))
    return cone_add(base, peak_translate(space, base, pair).rho)


def peak_cone_sum(ds: Sequence[Pseudometric], pair) -> Pseudometric:
    pair = UPair.of(*pair)
    for k, d in enumerate(ds):
        if not in_peak_cone(d, pair):
            raise ValueError(f"summand {k} does not attain its norm at {pair}")
    return cone_sum(list(ds))


def separating_cut(space: FiniteSpace, keep, kill) -> Pseudometric:
    """Pseudometric of norm 1 that is 1 on ``keep`` and 0 on ``kill``.

    Built by extending a cut pseudometric from the (at most four) endpoints.
    """
    keep = _as_pair(keep)
    kill = UPair.of(*kill)
    if keep == kill:
        raise ValueError("pairs must differ")
    lone = next(u for u in keep if u not in kill)
    subset = sorted(set(keep) | set(kill))
    m = [[Fraction(int((u == lone) != (v == lone))) for v in subset] for u in subset]
    return extend_pseudometric(PartialPseudometric.from_matrix(space, subset, m))


def peak_separation_witness(space: FiniteSpace, pair, other) -> Pseudometric:
    """Element of the unique-peak cone at ``pair`` lying outside the peak cone at ``other``."""
    pair = _as_pair(pair)
    cut = separating_cut(space, pair, other)
    amb = space.ambient
    strict, _, _ = _translate_admissible(amb, pair)
    return cone_add(cut, cone_add(amb, strict))


def strict_peak_violations(d: Pseudometric, pair) -> list[UPair]:
    """Pairs other than ``pair`` whose value is not strictly below ``d[pair]``."""
    pair = UPair.of(*pair)
    top = d[pair]
    return [p for p, v in d.pairs() if p != pair and v >= top]


def annuli(d: Pseudometric, pair, radius_base) -> list[frozenset[int]]:
    """Shell decomposition around ``pair``: the far region first, then the
    successive half-open rings ``r/2**k <= dist < r/2**(k-1)``, so the shells are
    disjoint. Points at distance 0 from an endpoint are excluded."""
    pair = _as_pair(pair)
    x, y = pair
    r = as_scalar(radius_base)
    everything = frozenset(range(d.n))
    rest = everything - {z for z in everything if d[x, z] == 0 or d[y, z] == 0}
    shells = [rest - ball(d, x, r / 2) - ball(d, y, r / 2)]
    k = 2
    covered = set(shells[0])
    while not rest <= covered:
        outer = ball(d, x, r / 2 ** (k - 1)) | ball(d, y, r / 2 ** (k - 1))
        inner = ball(d, x, r / 2**k) | ball(d, y, r / 2**k)
        shell = (outer - inner) & rest
        shells.append(shell)
        covered |= shell
        k += 1
    return shells

