"""Acceptance criteria, one test each, all in exact arithmetic.

Every check here goes through the brute-force helpers in ``oracles`` rather
than the package's own predicates wherever a brute check exists.
"""

import random
import time
from fractions import Fraction
from itertools import combinations, permutations

from metricstone.core import Pseudometric, UPair, doubletons, norm, sup_distance
from metricstone.extend import PartialPseudometric, extend_pseudometric
from metricstone.generate import random_admissible, random_bijection, random_pseudometric, random_space
from metricstone.peaks import (
    densify_to_pp,
    in_peak_cone,
    layered_rho,
    peak_cone_sum,
    peak_separation_witness,
    peak_translate,
    peaking_metric_at,
    rho_level,
    stabilization_level,
)
from metricstone.recover import (
    NonSingletonIntersection,
    ZeroNotPreserved,
    IsometryViolation,
    check_isometry,
    full_recovery,
    induced_oracle,
    recover_point_map,
    sample_pseudometrics,
    scaling_oracle,
    translation_oracle,
)

from oracles import argmax_pairs, is_pseudometric, max_entry, permuted, unique_strict_peak


def rng_for(name, i):
    return random.Random(f"acceptance:{name}:{i}")


def peaks_at(m, pair):
    """Brute check that ``pair`` attains the maximum entry of ``m``."""
    i, j = sorted(pair)
    return m[i][j] == max_entry(m)


def formula_holds(T, phi, samples):
    """``T(d)(u, v) == d(phi(u), phi(v))`` on every sample, checked entrywise."""
    return all([list(r) for r in T(d).rows] == permuted(d.rows, phi) for d in samples)


def test_extension_contract(criterion):
    start = time.perf_counter()
    for i in range(1000):
        rng = rng_for("extension", i)
        n = rng.randint(1, 12)
        space = random_space(rng, n)
        k = rng.randint(1, n)
        sub = sorted(rng.sample(range(n), k))
        d = random_pseudometric(rng, k) if rng.random() < 0.5 else random_admissible(rng, k)
        ext = extend_pseudometric(PartialPseudometric.from_matrix(space, sub, d.rows))
        assert is_pseudometric(ext.rows), i
        assert all(ext[sub[s], sub[t]] == d[s, t] for s in range(k) for t in range(k)), i
        assert max_entry(ext.rows) == max_entry(d.rows), i
    elapsed = time.perf_counter() - start
    assert elapsed < 30
    criterion(f"1000/1000 instances, {elapsed:.1f}s (< 30s)")


def test_density_bound(criterion):
    full_eps = 0
    for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 4)):
        for i in range(500):
            rng = rng_for(f"density:{eps}", i)
            n = rng.randint(2, 8)
            space = random_space(rng, n)
            admissible = rng.random() < 0.7
            d = random_admissible(rng, n) if admissible else random_pseudometric(rng, n)
            out = densify_to_pp(space, d, eps)
            m, p = out.metric, out.pair
            assert argmax_pairs(m.rows) == {tuple(p)}, (eps, i)
            assert unique_strict_peak(m.rows, p) and m.is_admissible(), (eps, i)
            assert sup_distance(m, out.base) <= 4 * eps, (eps, i)
            a = out.base[p]
            assert m[p] == a + 4 * out.eps_used, (eps, i)
            if admissible:
                assert out.base == d and sup_distance(m, d) <= 4 * eps, (eps, i)
            if a >= eps:
                assert out.eps_used == eps and m[p] == a + 4 * eps, (eps, i)
                full_eps += 1
    criterion(f"1500/1500 instances (500 per eps), {full_eps} with peak value exactly a + 4*eps")


def test_translate_contract(criterion):
    for i in range(500):
        rng = rng_for("translate", i)
        n = rng.randint(2, 9)
        space = random_space(rng, n)
        d = random_admissible(rng, n)
        pair = UPair.of(*rng.sample(range(n), 2))
        t = peak_translate(space, d, pair)
        x, y = pair
        a = d[pair]
        b = min(max(d.row(x)), max(d.row(y)))
        assert (t.a, t.b) == (a, b) and a <= b, i
        assert t.rho[pair] == 4 * b == max_entry(t.rho.rows), i
        total = d + t.rho
        assert total[pair] == a + 4 * b == max_entry(total.rows), i
        assert unique_strict_peak(total.rows, pair), i
    criterion("500/500 instances")


def test_peak_sum_norms_add(criterion):
    mixed = 0
    for i in range(300):
        rng = rng_for("sum", i)
        n = rng.randint(2, 8)
        space = random_space(rng, n)
        pair = UPair.of(*rng.sample(range(n), 2))
        x, y = pair
        ds = []
        for _ in range(rng.randint(2, 5)):
            if rng.random() < 0.6:
                ds.append(peaking_metric_at(space, pair, rng.randrange(10**6)))
            else:
                side = {x} | {z for z in range(n) if z != y and rng.random() < 0.5}
                c = Fraction(rng.randint(1, 3))
                ds.append(Pseudometric.from_function(n, lambda u, v: c * ((u in side) != (v in side))))
        assert all(peaks_at(d.rows, pair) for d in ds), i
        total = peak_cone_sum(ds, pair)
        assert max_entry(total.rows) == sum(max_entry(d.rows) for d in ds), i
        assert peaks_at(total.rows, pair), i
        if all(argmax_pairs(d.rows) == {tuple(pair)} for d in ds):
            assert argmax_pairs(total.rows) == {tuple(pair)}, i
        else:
            mixed += 1
    criterion(f"300/300 instances ({mixed} with multi-peak summands)")


def test_recovery_roundtrip(criterion):
    start = time.perf_counter()
    count = 0
    for n in (3, 4):
        X, Y = random_space(rng_for("rt-space", n), n, "x"), random_space(rng_for("rt-space", -n), n, "y")
        for psi in permutations(range(n)):
            T = induced_oracle(X, Y, psi)
            result = full_recovery(T, sample_count=50, seed=count)
            assert result.phi.mapping == psi
            assert formula_holds(T, psi, sample_pseudometrics(X, 50, count))
            count += 1
    exhaustive = count
    for i in range(200):
        rng = rng_for("roundtrip", i)
        n = rng.randint(5, 8)
        X, Y = random_space(rng, n, "x"), random_space(rng, n, "y")
        psi = random_bijection(rng, n)
        T = induced_oracle(X, Y, psi)
        result = full_recovery(T, sample_count=50, seed=i)
        assert result.phi.mapping == tuple(psi), i
        assert result.reports["formula"].checked == 50
        assert formula_holds(T, psi, sample_pseudometrics(X, 50, 10**6 + i)), i
        count += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 120
    criterion(f"{exhaustive} exhaustive (n=3,4) + 200 random (n=5..8), {elapsed:.1f}s (< 120s)")


def test_cardinality_two_exception(criterion):
    X, Y = random_space(rng_for("card2", 0), 2, "x"), random_space(rng_for("card2", 1), 2, "y")
    samples = sample_pseudometrics(X, 50, 0)
    for psi in ((0, 1), (1, 0)):
        T = induced_oracle(X, Y, psi)
        result = full_recovery(T, sample_count=50)
        assert result.phi.flag == "ambiguous_card_2" and not result.phi.unique
        for candidate in ((0, 1), (1, 0)):
            assert formula_holds(T, candidate, samples)
    criterion("both bijections satisfy the formula; result flagged ambiguous_card_2")


def test_negative_suite(criterion):
    X = random_space(rng_for("negative", 0), 4, "x")
    samples = sample_pseudometrics(X, 20, 0)
    pairs = list(zip(samples, samples[1:]))

    rho0 = X.ambient
    T = translation_oracle(X, rho0)
    assert check_isometry(T, pairs).passed  # earlier stage passes
    try:
        full_recovery(T)
    except ZeroNotPreserved as exc:
        assert exc.stage == "zero" and exc.witness == rho0
    else:
        raise AssertionError("translation oracle was not rejected")

    try:
        full_recovery(scaling_oracle(X, 2))
    except IsometryViolation as exc:
        assert exc.stage == "isometry"
    else:
        raise AssertionError("scaling oracle was not rejected")

    Phi = {p: p for p in doubletons(4)}
    Phi[UPair(0, 1)], Phi[UPair(2, 3)] = UPair(2, 3), UPair(0, 1)
    # the swapped map is still a bijection of doubletons, so only the point stage can object
    assert sorted(Phi.values()) == doubletons(4)
    try:
        recover_point_map(Phi)
    except NonSingletonIntersection as exc:
        assert exc.stage == "points"
    else:
        raise AssertionError("adversarial pair map was not rejected")
    criterion("translation -> zero stage (witness T(0)), scaling -> isometry, swapped pairs -> points")


def test_separation_witness(criterion):
    for i in range(300):
        rng = rng_for("separation", i)
        n = rng.randint(3, 8)
        space = random_space(rng, n)
        p, q = rng.sample(doubletons(n), 2)
        w = peak_separation_witness(space, p, q)
        assert is_pseudometric(w.rows) and w.is_admissible(), i
        assert argmax_pairs(w.rows) == {tuple(p)} and unique_strict_peak(w.rows, p), i
        assert not peaks_at(w.rows, q), i
    criterion("300/300 instances")


def test_finite_intersection_property(criterion):
    for i in range(300):
        rng = rng_for("fip", i)
        n = rng.randint(2, 8)
        X, Y = random_space(rng, n, "x"), random_space(rng, n, "y")
        psi = random_bijection(rng, n)
        T = induced_oracle(X, Y, psi)
        pair = rng.choice(doubletons(n))
        family = [peaking_metric_at(X, pair, rng.randrange(10**6)) for _ in range(rng.randint(1, 6))]
        common = None
        for d in family:
            assert in_peak_cone(d, pair) and argmax_pairs(d.rows) == {tuple(pair)}, i
            peaks = argmax_pairs(T(d).rows)
            common = peaks if common is None else common & peaks
        assert common, i
        (u, v), = common
        assert UPair.of(psi[u], psi[v]) == pair, i
    criterion("300/300 instances")


def test_peak_transport(criterion):
    for i in range(300):
        rng = rng_for("transport", i)
        n = rng.randint(2, 8)
        X, Y = random_space(rng, n, "x"), random_space(rng, n, "y")
        psi = random_bijection(rng, n)
        T = induced_oracle(X, Y, psi)
        d = random_pseudometric(rng, n) if rng.random() < 0.5 else random_admissible(rng, n, box=2)
        image = T(d)
        if max_entry(d.rows) == 0:
            assert max_entry(image.rows) == 0, i
            continue
        want = {
            (u, v) for u, v in combinations(range(n), 2) if tuple(sorted((psi[u], psi[v]))) in argmax_pairs(d.rows)
        }
        assert argmax_pairs(image.rows) == want, i
        assert (len(argmax_pairs(d.rows)) == 1) == (len(want) == 1), i
    criterion("300/300 instances")


def test_series_truncation(criterion):
    for i in range(100):
        rng = rng_for("series", i)
        n = rng.randint(2, 8)
        d = random_admissible(rng, n)
        pair = UPair.of(*rng.sample(range(n), 2))
        radius = d[pair] if rng.random() < 0.5 else min(d[pair], Fraction(1, 2 ** rng.randint(0, 2)))
        level = Fraction(rng.randint(1, 8))
        closed = layered_rho(d, pair, radius, level)
        depth = stabilization_level(d, radius) + 20
        partial = [[Fraction(0)] * n for _ in range(n)]
        for k in range(1, depth + 1):
            layer = rho_level(d, pair, radius, level, k)
            for u in range(n):
                for v in range(n):
                    partial[u][v] += layer[u, v] / 2**k
        tail = level / 2**depth
        for u in range(n):
            for v in range(n):
                assert partial[u][v] <= closed[u, v] <= partial[u][v] + tail, i
        assert closed[pair] == level == norm(closed), i
    criterion("100/100 instances, n <= 8, tail bracket level/2**(N*+20)")
