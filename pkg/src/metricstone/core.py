"""Exact pseudometrics on finite point sets.

Every value is a :class:`fractions.Fraction`.  Membership in the unique-peak
class is a strict-inequality property, so nothing here ever touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

Scalar = Fraction

ZERO = Fraction(0)


def as_scalar(value) -> Fraction:
    """Coerce ints, Fractions and rational strings ("3", "-1/2") to a Fraction.

    Floats are refused: they would silently round.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


class UPair(NamedTuple):
    """Unordered pair of point indices, stored with ``i <= j``."""

    i: int
    j: int

    @classmethod
    def of(cls, a: int, b: int) -> "UPair":
        return cls(a, b) if a <= b else cls(b, a)

    @property
    def is_doubleton(self) -> bool:
        return self.i != self.j

    def __str__(self):
        return f"{{{self.i},{self.j}}}"


def doubletons(n: int) -> list[UPair]:
    return [UPair(i, j) for i, j in combinations(range(n), 2)]


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple[int, ...]
    message: str

    def __str__(self):
        return self.message


class PseudometricError(ValueError):
    """Raised when a matrix fails one of the pseudometric axioms."""

    def __init__(self, violation: Violation):
        super().__init__(violation.message)
        self.violation = violation

    @property
    def axiom(self) -> str:
        return self.violation.axiom

    @property
    def witness(self) -> tuple[int, ...]:
        return self.violation.witness


def find_violation(m: Sequence[Sequence]) -> Violation | None:
    """Return the first violated axiom of ``m`` or ``None``.

    Axioms are checked in the order: square, zero diagonal, symmetry,
    nonnegativity, triangle inequality.  The triangle witness ``(i, j, k)``
    means ``m[i][k] > m[i][j] + m[j][k]``.
    """
    n = len(m)
    for i, row in enumerate(m):
        if len(row) != n:
            return Violation("square", (i,), f"row {i} has length {len(row)}, expected {n}")
    for i in range(n):
        if m[i][i] != 0:
            return Violation("diagonal", (i,), f"entry ({i},{i}) is {m[i][i]}, expected 0")
    for i, j in combinations(range(n), 2):
        if m[i][j] != m[j][i]:
            return Violation(
                "symmetry", (i, j), f"entry ({i},{j}) = {m[i][j]} differs from ({j},{i}) = {m[j][i]}"
            )
    for i, j in combinations(range(n), 2):
        if m[i][j] < 0:
            return Violation("nonnegativity", (i, j), f"entry ({i},{j}) = {m[i][j]} is negative")
    for i in range(n):
        row_i = m[i]
        for j in range(n):
            via = row_i[j]
            row_j = m[j]
            for k in range(n):
                if row_i[k] > via + row_j[k]:
                    return Violation(
                        "triangle",
                        (i, j, k),
                        f"d({i},{k}) = {row_i[k]} > d({i},{j}) + d({j},{k}) = {via + row_j[k]}",
                    )
    return None


class Pseudometric:
    """Immutable symmetric matrix of Fractions satisfying the pseudometric axioms.

    The public constructor validates; internal code that already knows the
    result is valid goes through :meth:`_trusted`.
    """

    __slots__ = ("_rows", "_hash")

    def __init__(self, entries: Iterable[Iterable]):
        rows = tuple(tuple(as_scalar(v) for v in row) for row in entries)
        violation = find_violation(rows)
        if violation is not None:
            raise PseudometricError(violation)
        self._rows = rows
        self._hash = None

    @classmethod
    def _trusted(cls, rows: tuple[tuple[Fraction, ...], ...]) -> "Pseudometric":
        obj = cls.__new__(cls)
        obj._rows = rows
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, n: int) -> "Pseudometric":
        row = (ZERO,) * n
        return cls._trusted((row,) * n)

    @classmethod
    def from_function(cls, n: int, f) -> "Pseudometric":
        """Build from ``f(i, j)`` evaluated on ``i < j``; validates the result."""
        m = [[ZERO] * n for _ in range(n)]
        for i, j in combinations(range(n), 2):
            m[i][j] = m[j][i] = as_scalar(f(i, j))
        return cls(m)

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def __len__(self):
        return len(self._rows)

    def __getitem__(self, key) -> Fraction:
        i, j = key
        return self._rows[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def pairs(self):
        """Yield ``(UPair, value)`` over all doubletons."""
        rows = self._rows
        for i, j in combinations(range(len(rows)), 2):
            yield UPair(i, j), rows[i][j]

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    def is_admissible(self) -> bool:
        return all(v > 0 for _, v in self.pairs())

    def norm(self) -> Fraction:
        return norm(self)

    def __eq__(self, other):
        if not isinstance(other, Pseudometric):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __add__(self, other):
        if not isinstance(other, Pseudometric):
            return NotImplemented
        return cone_add(self, other)

    def __mul__(self, c):
        return cone_scale(c, self)

    __rmul__ = __mul__

    def __repr__(self):
        body = "; ".join(" ".join(str(v) for v in row) for row in self._rows)
        return f"Pseudometric([{body}])"


def validate_pseudometric(m: Sequence[Sequence]) -> Pseudometric:
    """Return ``m`` as a :class:`Pseudometric` or raise :class:`PseudometricError`."""
    return Pseudometric(m)


@dataclass(frozen=True)
class FiniteSpace:
    """Labelled finite point set carrying an admissible ambient metric."""

    points: tuple[str, ...]
    ambient: Pseudometric

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(str(p) for p in self.points))
        if not self.points:
            raise ValueError("a space needs at least one point")
        if len(set(self.points)) != len(self.points):
            raise ValueError("point labels must be distinct")
        if self.ambient.n != len(self.points):
            raise ValueError(f"ambient metric has size {self.ambient.n}, expected {len(self.points)}")
        if not self.ambient.is_admissible():
            raise ValueError("ambient metric must be strictly positive off the diagonal")

    @classmethod
    def discrete(cls, labels: Iterable[str]) -> "FiniteSpace":
        """Space whose ambient metric is 1 between any two distinct points."""
        labels = tuple(labels)
        n = len(labels)
        one = Fraction(1)
        rows = tuple(tuple(ZERO if i == j else one for j in range(n)) for i in range(n))
        return cls(labels, Pseudometric._trusted(rows))

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise KeyError(f"unknown point label {label!r}") from None

    def pair(self, a: str, b: str) -> UPair:
        return UPair.of(self.index(a), self.index(b))


def _check_same_size(d: Pseudometric, e: Pseudometric):
    if d.n != e.n:
        raise ValueError(f"size mismatch: {d.n} vs {e.n}")


def norm(d: Pseudometric) -> Fraction:
    """Sup-norm; on a finite set the max over pairs."""
    return max((max(row) for row in d.rows), default=ZERO)


def cone_add(d: Pseudometric, e: Pseudometric) -> Pseudometric:
    _check_same_size(d, e)
    return Pseudometric._trusted(
        tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(d.rows, e.rows))
    )


def cone_sum(ds: Sequence[Pseudometric]) -> Pseudometric:
    if not ds:
        raise ValueError("empty sum")
    total = ds[0]
    for d in ds[1:]:
        total = cone_add(total, d)
    return total


def cone_scale(c, d: Pseudometric) -> Pseudometric:
    c = as_scalar(c)
    if c < 0:
        raise ValueError(f"scale factor must be nonnegative, got {c}")
    return Pseudometric._trusted(tuple(tuple(c * v for v in row) for row in d.rows))


def sup_distance(d: Pseudometric, e: Pseudometric) -> Fraction:
    _check_same_size(d, e)
    return max(
        (abs(a - b) for r, s in zip(d.rows, e.rows) for a, b in zip(r, s)),
        default=ZERO,
    )


def peak_set(d: Pseudometric) -> frozenset[UPair]:
    """Unordered pairs where ``d`` attains its norm.

    For the zero pseudometric this is the set of all singletons (plus, for
    ``n >= 2``, every doubleton attains 0 as well, but by convention only the
    singletons are returned).  Otherwise only doubletons can attain a
    positive norm.
    """
    top = norm(d)
    if top == 0:
        return frozenset(UPair(i, i) for i in range(d.n))
    return frozenset(p for p, v in d.pairs() if v == top)


def unique_peak(d: Pseudometric) -> UPair | None:
    peaks = peak_set(d)
    if len(peaks) == 1:
        (p,) = peaks
        if p.is_doubleton:
            return p
    return None


def in_pp(d: Pseudometric) -> bool:
    """Admissible with exactly one norm-attaining doubleton."""
    return d.is_admissible() and unique_peak(d) is not None


def in_pc(d: Pseudometric) -> tuple[bool, frozenset[int] | None]:
    """Membership plus compact witness; on a finite set the witness is the whole set."""
    if d.is_admissible():
        return True, frozenset(range(d.n))
    return False, None


def ball(d: Pseudometric, z: int, r, closed: bool = False) -> frozenset[int]:
    r = as_scalar(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    row = d.row(z)
    if closed:
        return frozenset(w for w, v in enumerate(row) if v <= r)
    return frozenset(w for w, v in enumerate(row) if v < r)


def min_positive_distance(d: Pseudometric) -> Fraction | None:
    return min((v for _, v in d.pairs() if v > 0), default=None)
