"""Recover the point bijection behind an isometry between pseudometric spaces.

The oracle is only ever evaluated.  Surjectivity cannot be observed from
finitely many evaluations, so each stage checks a consequence of it and
raises a :class:`RecoveryError` naming the stage that broke.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Sequence

from .core import (
    FiniteSpace,
    Pseudometric,
    UPair,
    cone_add,
    doubletons,
    norm,
    peak_set,
    sup_distance,
    unique_peak,
)
from .generate import random_pseudometric, with_norm
from .peaks import peaking_metric_at, separating_cut

DEFAULT_BUDGET = 16


@dataclass(frozen=True)
class MetricMapOracle:
    """A map from pseudometrics on ``domain`` to pseudometrics on ``codomain``.

    ``inverse`` is optional; when present the inverse-dependent zero checks run.
    """

    domain: FiniteSpace
    codomain: FiniteSpace
    rule: Callable[[Pseudometric], Pseudometric]
    inverse: Callable[[Pseudometric], Pseudometric] | None = None
    name: str = "oracle"

    def __call__(self, d: Pseudometric) -> Pseudometric:
        if d.n != self.domain.n:
            raise ValueError(f"{self.name}: input has {d.n} points, domain has {self.domain.n}")
        out = self.rule(d)
        if out.n != self.codomain.n:
            raise ValueError(f"{self.name}: output has {out.n} points, codomain has {self.codomain.n}")
        return out


@dataclass(frozen=True)
class PointMap:
    """Bijection from codomain points (index) to domain points (value)."""

    mapping: tuple[int, ...]
    unique: bool = True

    @property
    def flag(self) -> str:
        return "unique" if self.unique else "ambiguous_card_2"

    def __getitem__(self, y: int) -> int:
        return self.mapping[y]

    def __len__(self):
        return len(self.mapping)


PairMap = dict  # Doub(Y) -> Doub(X), keyed by UPair


class RecoveryError(Exception):
    stage = "recovery"

    def __init__(self, message: str, witness=None, witness_side: str = "domain"):
        super().__init__(message)
        self.witness = witness
        self.witness_side = witness_side


class IsometryViolation(RecoveryError):
    stage = "isometry"


class ZeroNotPreserved(RecoveryError):
    stage = "zero"


class PairRecoveryError(RecoveryError):
    stage = "pairs"


class EmptyIntersection(PairRecoveryError):
    pass


class BudgetExhausted(PairRecoveryError):
    pass


class NonInjective(PairRecoveryError):
    pass


class CardinalityMismatch(PairRecoveryError):
    pass


class PointRecoveryError(RecoveryError):
    stage = "points"


class NonSingletonIntersection(PointRecoveryError):
    pass


class NonBijective(PointRecoveryError):
    pass


class FormulaViolation(RecoveryError):
    stage = "formula"


@dataclass
class Report:
    check: str
    passed: bool
    checked: int = 0
    witness: object = None
    notes: list[str] = field(default_factory=list)
    violations: list = field(default_factory=list)


# oracle constructors -------------------------------------------------------


def _pullback(d: Pseudometric, phi: Sequence[int]) -> Pseudometric:
    rows = d.rows
    return Pseudometric._trusted(tuple(tuple(rows[a][b] for b in phi) for a in phi))


def _check_bijection(phi: Sequence[int], n_from: int, n_to: int):
    if len(phi) != n_from or sorted(phi) != list(range(n_to)):
        raise ValueError(f"{list(phi)} is not a bijection onto {n_to} points")


def induced_oracle(domain: FiniteSpace, codomain: FiniteSpace, phi: Sequence[int]) -> MetricMapOracle:
    """``T(d)(u, v) = d(phi(u), phi(v))`` for ``phi`` from codomain to domain."""
    phi = tuple(phi)
    _check_bijection(phi, codomain.n, domain.n)
    inv = [0] * len(phi)
    for y, x in enumerate(phi):
        inv[x] = y
    inv = tuple(inv)
    return MetricMapOracle(
        domain,
        codomain,
        lambda d: _pullback(d, phi),
        inverse=lambda e: _pullback(e, inv),
        name="induced",
    )


def translation_oracle(space: FiniteSpace, offset: Pseudometric) -> MetricMapOracle:
    """``d -> d + offset``: distance preserving, not surjective, moves 0."""
    return MetricMapOracle(space, space, lambda d: cone_add(d, offset), name="translation")


def scaling_oracle(space: FiniteSpace, factor) -> MetricMapOracle:
    return MetricMapOracle(space, space, lambda d: d * factor, name="scaling")


def compose(first: MetricMapOracle, second: MetricMapOracle) -> MetricMapOracle:
    """Apply ``first`` then ``second``."""
    inverse = None
    if first.inverse is not None and second.inverse is not None:
        inverse = lambda e: first.inverse(second.inverse(e))  # noqa: E731
    return MetricMapOracle(
        first.domain,
        second.codomain,
        lambda d: second(first(d)),
        inverse=inverse,
        name=f"{first.name}+{second.name}",
    )


# stage checks ----------------------------------------------------------------


def check_isometry(T: MetricMapOracle, samples) -> Report:
    report = Report("isometry", True)
    for d, e in samples:
        report.checked += 1
        lhs = sup_distance(T(d), T(e))
        rhs = sup_distance(d, e)
        if lhs != rhs:
            report.passed = False
            report.witness = (d, e)
            report.notes.append(f"sup distance {rhs} became {lhs}")
            break
    return report


def norm_ladder(space: FiniteSpace, seed: int = 0, extra=()) -> list[Pseudometric]:
    rng = random.Random(seed)
    ladder = [Pseudometric.zero(space.n), space.ambient]
    for target in (1, 2, 4, *extra):
        d = random_pseudometric(rng, space.n)
        if norm(d) == 0:
            d = space.ambient
        ladder.append(with_norm(d, target))
    return ladder


def check_zero_preserved(T: MetricMapOracle, samples=None, seed: int = 0) -> Report:
    """``T(0) = 0`` and ``||T(d)|| = ||d||`` on a ladder of samples.

    When ``T(0)`` is nonzero the ladder still gets a rung above ``||T(0)||``
    so the report notes whether norms survive past that threshold.
    """
    report = Report("zero", True)
    image_of_zero = T(Pseudometric.zero(T.domain.n))
    shift = norm(image_of_zero)
    if samples is None:
        samples = norm_ladder(T.domain, seed, extra=(2 * shift + 1,))
    if shift != 0:
        above = [d for d in samples if norm(d) > shift]
        kept = sum(norm(T(d)) == norm(d) for d in above)
        report.passed = False
        report.witness = image_of_zero
        report.checked = len(above)
        report.notes.append(f"T(0) is nonzero with norm {shift}")
        report.notes.append(f"norm kept on {kept} of {len(above)} samples above that norm")
        return report
    for d in samples:
        report.checked += 1
        if norm(T(d)) != norm(d):
            report.passed = False
            report.witness = d
            report.notes.append(f"norm {norm(d)} became {norm(T(d))}")
            return report
    if T.inverse is None:
        report.notes.append("no inverse available; inverse-side checks skipped")
        return report
    back = T.inverse(Pseudometric.zero(T.codomain.n))
    if norm(back) != 0:
        report.passed = False
        report.witness = back
        report.notes.append("inverse image of 0 is nonzero")
        return report
    for e in norm_ladder(T.codomain, seed + 1):
        report.checked += 1
        if norm(T.inverse(e)) != norm(e):
            report.passed = False
            report.witness = e
            report.notes.append("inverse does not preserve norms")
            return report
    return report


def _pair_image(T: MetricMapOracle, pair: UPair, budget: int, seed: int) -> UPair:
    common = None
    for k in range(budget):
        d = peaking_metric_at(T.domain, pair, seed + k)
        image = T(d)
        if norm(image) == 0:
            raise EmptyIntersection(f"a metric peaking at {pair} maps to the zero metric", witness=pair)
        if k == 0:
            fast = unique_peak(image)
            if fast is not None and image.is_admissible():
                return fast
        peaks = peak_set(image)
        common = peaks if common is None else common & peaks
        if not common:
            raise EmptyIntersection(
                f"peak sets of images of metrics peaking at {pair} have empty intersection",
                witness=pair,
            )
        if len(common) == 1:
            (found,) = common
            return found
    raise BudgetExhausted(
        f"after {budget} metrics peaking at {pair}, {len(common)} candidate pairs remain", witness=pair
    )


def recover_pair_map(T: MetricMapOracle, budget: int = DEFAULT_BUDGET, seed: int = 0) -> PairMap:
    """Map each doubleton of the codomain to the doubleton of the domain it comes from."""
    nx, ny = T.domain.n, T.codomain.n
    if nx < 2 or ny < 2:
        raise PairRecoveryError("both spaces need at least two points")
    inverse: dict[UPair, UPair] = {}
    for pair in doubletons(nx):
        target = _pair_image(T, pair, budget, seed)
        if target in inverse:
            raise NonInjective(
                f"{inverse[target]} and {pair} both map to {target}", witness=(inverse[target], pair, target)
            )
        inverse[target] = pair
    if nx != ny:
        raise CardinalityMismatch(f"domain has {nx} points, codomain has {ny}")
    return {target: source for target, source in sorted(inverse.items())}


def recover_point_map(Phi: PairMap) -> PointMap:
    points = sorted({u for p in Phi for u in p})
    n = len(points)
    if points != list(range(n)) or len(Phi) != n * (n - 1) // 2:
        raise NonBijective("pair map is not total on the doubletons of its codomain")
    if len(set(Phi.values())) != len(Phi):
        raise NonBijective("pair map is not injective")
    if n == 2:
        return PointMap((0, 1), unique=False)
    phi = []
    for y in range(n):
        common = None
        for z in range(n):
            if z != y:
                image = set(Phi[UPair.of(y, z)])
                common = image if common is None else common & image
        if len(common) != 1:
            raise NonSingletonIntersection(
                f"doubletons through {y} map to pairs meeting in {sorted(common)}", witness=(y, sorted(common))
            )
        phi.append(common.pop())
    if sorted(phi) != list(range(n)):
        raise NonBijective(f"induced point map {phi} is not a bijection", witness=tuple(phi))
    for p, q in Phi.items():
        if UPair.of(phi[p.i], phi[p.j]) != q:
            raise NonBijective(f"{p} maps to {q}, not to the image of its points", witness=(p, q))
    return PointMap(tuple(phi))


def verify_canonical_formula(T: MetricMapOracle, phi: PointMap, samples) -> Report:
    report = Report("formula", True)
    m = phi.mapping
    for d in samples:
        report.checked += 1
        image = T(d)
        for u in range(len(m)):
            for v in range(u + 1, len(m)):
                if image[u, v] != d[m[u], m[v]]:
                    report.passed = False
                    report.violations.append((d, u, v, image[u, v], d[m[u], m[v]]))
    if report.violations:
        report.witness = report.violations[0]
    return report


def separating_sample(space_x: FiniteSpace, phi: PointMap, other: PointMap) -> Pseudometric:
    """Pseudometric on the domain telling ``phi`` and ``other`` apart (needs more than two points)."""
    n = len(phi)
    if n <= 2:
        raise ValueError("with two points both bijections induce the same map")
    x = next(u for u in range(n) if phi[u] != other[u])
    inv = {v: u for u, v in enumerate(phi.mapping)}
    y = next(u for u in range(n) if u not in (x, inv[other[x]]))
    keep = (other[x], other[y])
    kill = (phi[x], phi[y])
    return separating_cut(space_x, keep, kill)


def sample_pseudometrics(space: FiniteSpace, count: int, seed: int) -> list[Pseudometric]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        d = random_pseudometric(rng, space.n)
        out.append(d if rng.random() < 0.5 else cone_add(d, space.ambient))
    return out


@dataclass
class Recovery:
    phi: PointMap
    pair_map: PairMap
    reports: dict[str, Report]


def full_recovery(
    T: MetricMapOracle, budget: int = DEFAULT_BUDGET, sample_count: int = 50, seed: int = 0
) -> Recovery:
    reports: dict[str, Report] = {}
    samples = sample_pseudometrics(T.domain, sample_count, seed)
    zero = Pseudometric.zero(T.domain.n)
    pairs = [(d, zero) for d in samples[:1]] + list(zip(samples, samples[1:] + samples[:1]))
    rep = check_isometry(T, pairs)
    reports["isometry"] = rep
    if not rep.passed:
        raise IsometryViolation("map does not preserve sup distances: " + "; ".join(rep.notes), rep.witness)
    rep = check_zero_preserved(T, seed=seed)
    reports["zero"] = rep
    if not rep.passed:
        side = "codomain" if rep.notes[0].startswith(("T(0)", "inverse does not")) else "domain"
        raise ZeroNotPreserved("zero or norms not preserved: " + "; ".join(rep.notes), rep.witness, side)
    Phi = recover_pair_map(T, budget, seed)
    phi = recover_point_map(Phi)
    rep = verify_canonical_formula(T, phi, samples)
    reports["formula"] = rep
    if not rep.passed:
        raise FormulaViolation(f"{len(rep.violations)} entries disagree with the recovered point map", rep.witness)
    return Recovery(phi, Phi, reports)


def all_point_maps(n: int):
    for perm in permutations(range(n)):
        yield PointMap(perm, unique=n != 2)


def transported_peaks(d: Pseudometric, phi: PointMap) -> frozenset[UPair]:
    """Codomain pairs whose image under ``phi`` is a peak of ``d``."""
    peaks = peak_set(d)
    n = len(phi)
    if norm(d) == 0:
        return frozenset(UPair(u, u) for u in range(n))
    return frozenset(p for p in doubletons(n) if UPair.of(phi[p.i], phi[p.j]) in peaks)


def common_image_peaks(T: MetricMapOracle, family: Sequence[Pseudometric]) -> frozenset[UPair]:
    common = None
    for d in family:
        peaks = peak_set(T(d))
        common = peaks if common is None else common & peaks
    return common if common is not None else frozenset()

