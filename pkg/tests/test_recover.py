import random
from fractions import Fraction
from itertools import permutations

import pytest

from metricstone.core import Pseudometric, UPair, doubletons, in_pp, norm, peak_set
from metricstone.generate import random_bijection, random_pseudometric, random_space
from metricstone.peaks import peaking_metric_at
from metricstone.recover import (
    BudgetExhausted,
    CardinalityMismatch,
    EmptyIntersection,
    FormulaViolation,
    IsometryViolation,
    MetricMapOracle,
    NonBijective,
    NonInjective,
    NonSingletonIntersection,
    PointMap,
    ZeroNotPreserved,
    check_isometry,
    check_zero_preserved,
    compose,
    full_recovery,
    induced_oracle,
    common_image_peaks,
    recover_pair_map,
    recover_point_map,
    sample_pseudometrics,
    scaling_oracle,
    separating_sample,
    transported_peaks,
    translation_oracle,
    verify_canonical_formula,
)

from oracles import permuted


def spaces(n, seed=0):
    rng = random.Random(seed)
    return random_space(rng, n, "x"), random_space(rng, n, "y")


def pairs_of(samples):
    return list(zip(samples, samples[1:]))


class TestOracles:
    def test_identity(self):
        x, _ = spaces(4)
        T = induced_oracle(x, x, range(4))
        d = random_pseudometric(random.Random(1), 4)
        assert T(d) == d

    def test_three_cycle_matches_direct_permutation(self):
        x, y = spaces(3)
        psi = (1, 2, 0)
        T = induced_oracle(x, y, psi)
        rng = random.Random(2)
        for _ in range(20):
            d = random_pseudometric(rng, 3)
            assert [list(r) for r in T(d).rows] == permuted(d.rows, psi)
            assert T.inverse(T(d)) == d

    def test_zero_maps_to_zero(self):
        x, y = spaces(5)
        T = induced_oracle(x, y, random_bijection(random.Random(3), 5))
        assert T(Pseudometric.zero(5)) == Pseudometric.zero(5)

    def test_rejects_non_bijection_and_wrong_size(self):
        x, y = spaces(3)
        with pytest.raises(ValueError):
            induced_oracle(x, y, (0, 0, 1))
        T = induced_oracle(x, y, (0, 1, 2))
        with pytest.raises(ValueError):
            T(Pseudometric.zero(2))

    def test_compose(self):
        x, y = spaces(4)
        a = induced_oracle(x, y, (1, 2, 3, 0))
        b = induced_oracle(y, y, (3, 2, 1, 0))
        d = random_pseudometric(random.Random(4), 4)
        T = compose(a, b)
        assert T(d) == b(a(d))
        assert T.inverse(T(d)) == d


class TestIsometry:
    def test_induced_passes(self):
        x, y = spaces(5)
        T = induced_oracle(x, y, random_bijection(random.Random(5), 5))
        report = check_isometry(T, pairs_of(sample_pseudometrics(x, 30, 0)))
        assert report.passed and report.checked == 29

    def test_translation_passes(self):
        x, _ = spaces(4)
        T = translation_oracle(x, x.ambient)
        assert check_isometry(T, pairs_of(sample_pseudometrics(x, 30, 1))).passed

    def test_scaling_fails_with_zero_witness(self):
        x, _ = spaces(4)
        d = random_pseudometric(random.Random(6), 4) + x.ambient
        report = check_isometry(scaling_oracle(x, 2), [(d, Pseudometric.zero(4))])
        assert not report.passed
        assert report.witness == (d, Pseudometric.zero(4))


class TestZeroPreserved:
    def test_induced_passes(self):
        x, y = spaces(5)
        report = check_zero_preserved(induced_oracle(x, y, (4, 3, 2, 1, 0)))
        assert report.passed
        assert not report.notes

    def test_translation_fails_with_image_of_zero(self):
        x, _ = spaces(4)
        rho0 = x.ambient
        report = check_zero_preserved(translation_oracle(x, rho0))
        assert not report.passed
        assert report.witness == rho0
        assert report.checked >= 1

    def test_without_inverse_is_noted(self):
        x, _ = spaces(3)
        T = MetricMapOracle(x, x, lambda d: d)
        report = check_zero_preserved(T)
        assert report.passed
        assert "inverse" in report.notes[0]

    def test_norms_on_random_samples(self):
        x, y = spaces(6)
        T = induced_oracle(x, y, random_bijection(random.Random(7), 6))
        samples = sample_pseudometrics(x, 100, 3)
        assert all(norm(T(d)) == norm(d) for d in samples)
        assert check_zero_preserved(T, samples).passed


class TestPairMap:
    def test_roundtrip(self):
        x, y = spaces(5)
        psi = random_bijection(random.Random(8), 5)
        Phi = recover_pair_map(induced_oracle(x, y, psi))
        assert len(Phi) == 10
        for p in doubletons(5):
            assert Phi[p] == UPair.of(psi[p.i], psi[p.j])

    def test_two_points(self):
        x, y = spaces(2)
        assert recover_pair_map(induced_oracle(x, y, (1, 0))) == {UPair(0, 1): UPair(0, 1)}

    def test_identity_oracle(self):
        x, _ = spaces(4)
        Phi = recover_pair_map(MetricMapOracle(x, x, lambda d: d))
        assert all(p == q for p, q in Phi.items())

    def test_collapsing_oracle_is_not_injective(self):
        # every metric is sent to the ambient metric of a space whose peak is {0, 1}
        x, _ = spaces(3)
        fixed = Pseudometric([[0, 2, 1], [2, 0, 1], [1, 1, 0]])
        with pytest.raises(NonInjective):
            recover_pair_map(MetricMapOracle(x, x, lambda d: fixed))

    def test_zero_image_is_empty_intersection(self):
        x, _ = spaces(3)
        with pytest.raises(EmptyIntersection):
            recover_pair_map(MetricMapOracle(x, x, lambda d: Pseudometric.zero(3)))

    def test_tied_image_exhausts_budget(self):
        x, _ = spaces(3)
        tie = Pseudometric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        with pytest.raises(BudgetExhausted):
            recover_pair_map(MetricMapOracle(x, x, lambda d: tie), budget=3)

    def test_cardinality_mismatch(self):
        x, _ = spaces(3)
        y = random_space(random.Random(1), 4, "y")

        def widen(d):
            # keep d on the first three points, put a fourth at distance ||d||/2 from all
            h = norm(d) / 2
            m = [list(r) + [h] for r in d.rows] + [[h, h, h, 0]]
            return Pseudometric(m)

        with pytest.raises(CardinalityMismatch):
            recover_pair_map(MetricMapOracle(x, y, widen))


def pair_map_of(psi):
    n = len(psi)
    return {p: UPair.of(psi[p.i], psi[p.j]) for p in doubletons(n)}


class TestPointMap:
    def test_three_cycle(self):
        psi = (2, 0, 1)
        phi = recover_point_map(pair_map_of(psi))
        assert phi.mapping == psi and phi.flag == "unique"

    def test_two_points_ambiguous(self):
        phi = recover_point_map({UPair(0, 1): UPair(0, 1)})
        assert phi.mapping == (0, 1)
        assert phi.flag == "ambiguous_card_2"

    def test_adversarial_swap_of_disjoint_pairs(self):
        Phi = pair_map_of((0, 1, 2, 3))
        Phi[UPair(0, 1)], Phi[UPair(2, 3)] = UPair(2, 3), UPair(0, 1)
        with pytest.raises(NonSingletonIntersection) as info:
            recover_point_map(Phi)
        assert info.value.stage == "points"

    def test_partial_map_rejected(self):
        Phi = pair_map_of((0, 1, 2))
        del Phi[UPair(0, 1)]
        with pytest.raises(NonBijective):
            recover_point_map(Phi)

    def test_exhaustive_small(self):
        for n in (3, 4, 5):
            for psi in permutations(range(n)):
                assert recover_point_map(pair_map_of(psi)).mapping == psi


class TestFormula:
    def test_generator_passes(self):
        x, y = spaces(5)
        psi = random_bijection(random.Random(9), 5)
        T = induced_oracle(x, y, psi)
        report = verify_canonical_formula(T, PointMap(tuple(psi)), sample_pseudometrics(x, 20, 0))
        assert report.passed and report.checked == 20

    def test_wrong_map_fails_on_separating_sample(self):
        x, y = spaces(4)
        psi = PointMap((1, 2, 3, 0))
        T = induced_oracle(x, y, psi.mapping)
        for other in permutations(range(4)):
            if other == psi.mapping:
                continue
            wrong = PointMap(other)
            sep = separating_sample(x, psi, wrong)
            report = verify_canonical_formula(T, wrong, [sep])
            assert not report.passed
            assert report.witness[0] == sep

    def test_two_points_both_pass(self):
        x, y = spaces(2)
        T = induced_oracle(x, y, (1, 0))
        samples = sample_pseudometrics(x, 10, 0)
        for m in ((0, 1), (1, 0)):
            assert verify_canonical_formula(T, PointMap(m, unique=False), samples).passed
        with pytest.raises(ValueError):
            separating_sample(x, PointMap((0, 1)), PointMap((1, 0)))


class TestFullRecovery:
    def test_roundtrip_five(self):
        x, y = spaces(5)
        psi = random_bijection(random.Random(10), 5)
        result = full_recovery(induced_oracle(x, y, psi))
        assert result.phi.mapping == tuple(psi)
        assert all(r.passed for r in result.reports.values())

    def test_translation_aborts_at_zero_stage(self):
        x, _ = spaces(4)
        with pytest.raises(ZeroNotPreserved) as info:
            full_recovery(translation_oracle(x, x.ambient))
        assert info.value.stage == "zero"
        assert info.value.witness == x.ambient

    def test_scaling_aborts_at_isometry_stage(self):
        x, _ = spaces(4)
        with pytest.raises(IsometryViolation) as info:
            full_recovery(scaling_oracle(x, 2))
        assert info.value.stage == "isometry"
        d, e = info.value.witness
        assert e == Pseudometric.zero(4) and d != e

    def test_halving_also_fails_isometry(self):
        x, _ = spaces(3)
        with pytest.raises(IsometryViolation):
            full_recovery(scaling_oracle(x, Fraction(1, 2)))

    def test_formula_stage(self):
        # identity on the metrics the pair stage probes, a 3-cycle everywhere else:
        # isometry, zero and pair checks see nothing wrong, the formula check does
        x, _ = spaces(3)
        probes = {peaking_metric_at(x, p, k) for p in doubletons(3) for k in range(16)}
        cycle = induced_oracle(x, x, (1, 2, 0))
        T = MetricMapOracle(x, x, lambda d: d if d in probes else cycle(d))
        with pytest.raises(FormulaViolation) as info:
            full_recovery(T)
        assert info.value.stage == "formula"


def test_peak_transport_for_induced_oracles():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(2, 7)
        x, y = spaces(n, rng.randint(0, 99))
        psi = random_bijection(rng, n)
        T = induced_oracle(x, y, psi)
        d = random_pseudometric(rng, n)
        assert peak_set(T(d)) == transported_peaks(d, PointMap(tuple(psi)))
        if in_pp(d):
            assert in_pp(T(d))


def test_finite_intersection_property():
    rng = random.Random(12)
    for _ in range(40):
        n = rng.randint(2, 6)
        x, y = spaces(n, rng.randint(0, 99))
        T = induced_oracle(x, y, random_bijection(rng, n))
        pair = UPair.of(*rng.sample(range(n), 2))
        family = [peaking_metric_at(x, pair, s) for s in range(rng.randint(1, 5))]
        assert common_image_peaks(T, family)
