"""Seeded property campaigns.

A property is a generator ``(rng, n) -> inputs`` plus a checker
``inputs -> (ok, detail)``.  Failing inputs are serialized so a campaign's
counterexamples can be re-checked later without the generator.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable

from .core import (
    Pseudometric,
    UPair,
    ball,
    cone_add,
    cone_scale,
    doubletons,
    find_violation,
    in_pp,
    norm,
    peak_set,
    sup_distance,
)
from .documents import decode_value, encode_value
from .extend import PartialPseudometric, extend_prescribed_blocks, extend_pseudometric
from .generate import random_admissible, random_bijection, random_pseudometric, random_space
from .peaks import (
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
from .recover import (
    PointMap,
    full_recovery,
    induced_oracle,
    common_image_peaks,
    sample_pseudometrics,
    separating_sample,
    transported_peaks,
    verify_canonical_formula,
)

Check = tuple[bool, str]


@dataclass(frozen=True)
class Property:
    name: str
    suite: str
    generate: Callable[[random.Random, int], dict]
    check: Callable[[dict], Check]
    min_n: int = 1
    max_n: int = 12


PROPERTIES: dict[str, Property] = {}


def prop(name: str, suite: str, min_n: int = 1, max_n: int = 12):
    def register(pair):
        gen, chk = pair
        PROPERTIES[name] = Property(name, suite, gen, chk, min_n, max_n)
        return pair

    return register


def brute_violates_triangle(d: Pseudometric) -> bool:
    n = d.n
    return any(d[i, k] > d[i, j] + d[j, k] for i, j, k in product(range(n), repeat=3))


def brute_argmax(d: Pseudometric) -> set[UPair]:
    vals = {UPair(i, j): d[i, j] for i, j in combinations(range(d.n), 2)}
    if not vals:
        return set()
    top = max(vals.values())
    return {p for p, v in vals.items() if v == top}


def strictly_peaks_at(d: Pseudometric, pair: UPair) -> bool:
    return all(d[p] < d[pair] for p in doubletons(d.n) if p != pair)


def _fail(fmt: str, *args) -> Check:
    return False, fmt.format(*args)


OK: Check = (True, "")

# core ---------------------------------------------------------------------------


def _gen_cone(rng, n):
    return {
        "d": random_pseudometric(rng, n),
        "e": random_pseudometric(rng, n),
        "f": random_pseudometric(rng, n),
        "amb": random_admissible(rng, n),
        "c": Fraction(rng.randint(0, 12), rng.randint(1, 4)),
    }


def _check_cone(x) -> Check:
    d, e, f, amb, c = x["d"], x["e"], x["f"], x["amb"], x["c"]
    s = cone_add(d, e)
    if find_violation(s.rows) or find_violation(cone_scale(c, d).rows):
        return _fail("cone not closed")
    if norm(s) > norm(d) + norm(e):
        return _fail("subadditivity fails")
    if norm(cone_scale(c, d)) != c * norm(d):
        return _fail("homogeneity fails")
    if not cone_add(d, amb).is_admissible():
        return _fail("pseudometric plus admissible metric is not admissible")
    if sup_distance(d, e) != sup_distance(e, d) or sup_distance(d, d) != 0:
        return _fail("sup distance not symmetric or not zero on the diagonal")
    if sup_distance(d, f) > sup_distance(d, e) + sup_distance(e, f):
        return _fail("sup distance violates the triangle inequality")
    if (sup_distance(d, e) == 0) != (d == e):
        return _fail("sup distance zero on distinct pseudometrics")
    return OK


prop("cone_closure", "core")((_gen_cone, _check_cone))


def _gen_peaks(rng, n):
    return {"d": random_pseudometric(rng, n) if rng.random() < 0.5 else random_admissible(rng, n, box=2)}


def _check_peaks(x) -> Check:
    d = x["d"]
    got = peak_set(d)
    if norm(d) == 0:
        want = {UPair(i, i) for i in range(d.n)}
    else:
        want = brute_argmax(d)
    if set(got) != want:
        return _fail("peak set {} differs from brute force {}", sorted(got), sorted(want))
    if in_pp(d):
        (p,) = got
        if not strictly_peaks_at(d, p):
            return _fail("unique peak {} is not strict", p)
    return OK


prop("peak_set_oracle", "core")((_gen_peaks, _check_peaks))


def _gen_ball(rng, n):
    return {
        "d": random_pseudometric(rng, n),
        "z": rng.randrange(n),
        "r": Fraction(rng.randint(0, 8), rng.randint(1, 3)),
        "s": Fraction(rng.randint(0, 8), rng.randint(1, 3)),
    }


def _check_ball(x) -> Check:
    d, z = x["d"], x["z"]
    r, s = sorted((x["r"], x["s"]))
    for closed in (False, True):
        if not ball(d, z, r, closed) <= ball(d, z, s, closed):
            return _fail("ball not monotone in radius")
    if not ball(d, z, r) <= ball(d, z, r, closed=True):
        return _fail("open ball not inside closed ball")
    if ball(d, z, r, closed=True) != {w for w in range(d.n) if d[z, w] <= r}:
        return _fail("closed ball differs from row scan")
    return OK


prop("ball_monotone", "core")((_gen_ball, _check_ball))

# extend -------------------------------------------------------------------------


def _gen_extension(rng, n):
    space = random_space(rng, n)
    k = rng.randint(1, n)
    subset = sorted(rng.sample(range(n), k))
    d = random_pseudometric(rng, k) if rng.random() < 0.5 else random_admissible(rng, k)
    return {"space": space, "subset": subset, "d": d}


def _check_extension(x) -> Check:
    d, subset = x["d"], x["subset"]
    ext = extend_pseudometric(PartialPseudometric(x["space"], tuple(subset), d))
    if find_violation(ext.rows) or brute_violates_triangle(ext):
        return _fail("extension is not a pseudometric")
    for s, t in product(range(len(subset)), repeat=2):
        if ext[subset[s], subset[t]] != d[s, t]:
            return _fail("restriction differs at ({}, {})", subset[s], subset[t])
    if norm(ext) != norm(d):
        return _fail("norm {} != {}", norm(ext), norm(d))
    return OK


prop("extension_contract", "extend")((_gen_extension, _check_extension))


def _gen_blocks(rng, n):
    space = random_space(rng, n)
    pts = list(range(n))
    rng.shuffle(pts)
    k = rng.randint(1, min(n, 4))
    cuts = sorted(rng.sample(range(1, n + 1), k))
    blocks, start = [], 0
    for c in cuts:
        blocks.append(sorted(pts[start:c]))
        start = c
    values = random_pseudometric(rng, k)
    return {"space": space, "blocks": blocks, "values": values}


def _check_blocks(x) -> Check:
    values = x["values"]
    blocks = x["blocks"]
    cap = norm(values)
    rho = extend_prescribed_blocks(x["space"], blocks, values.rows, cap)
    if find_violation(rho.rows):
        return _fail("block extension is not a pseudometric")
    for (s, bs), (t, bt) in product(enumerate(blocks), repeat=2):
        for u, v in product(bs, bt):
            want = 0 if s == t else values[s, t]
            if rho[u, v] != want:
                return _fail("block value wrong at ({}, {})", u, v)
    if norm(rho) > cap:
        return _fail("block extension exceeds the cap")
    return OK


prop("blocks_contract", "extend")((_gen_blocks, _check_blocks))

# peaks --------------------------------------------------------------------------


def _gen_densify(rng, n):
    space = random_space(rng, n)
    d = random_admissible(rng, n) if rng.random() < 0.7 else random_pseudometric(rng, n)
    return {"space": space, "d": d, "eps": Fraction(1, 2 ** rng.randint(0, 3))}


def _check_densify(x) -> Check:
    d, eps = x["d"], x["eps"]
    out = densify_to_pp(x["space"], d, eps)
    m, p = out.metric, out.pair
    if not m.is_admissible() or brute_argmax(m) != {p}:
        return _fail("output does not peak uniquely at {}", p)
    if not strictly_peaks_at(m, p):
        return _fail("peak is not strict")
    if sup_distance(m, out.base) > 4 * eps:
        return _fail("perturbation {} exceeds 4*eps", sup_distance(m, out.base))
    if sup_distance(m, d) > 4 * eps + out.repair_norm:
        return _fail("total perturbation exceeds bound")
    if m[p] != out.base[p] + 4 * out.eps_used:
        return _fail("peak value {} != a + 4 eps", m[p])
    return OK


prop("densify", "peaks", min_n=2)((_gen_densify, _check_densify))


def _gen_translate(rng, n):
    space = random_space(rng, n)
    d = random_admissible(rng, n) if rng.random() < 0.7 else random_pseudometric(rng, n)
    x, y = rng.sample(range(n), 2)
    return {"space": space, "d": d, "pair": UPair.of(x, y)}


def _check_translate(x) -> Check:
    d, pair = x["d"], x["pair"]
    t = peak_translate(x["space"], d, pair)
    if t.a > t.b:
        return _fail("a > b")
    total = cone_add(d, t.rho)
    if not in_peak_cone(t.rho, pair):
        return _fail("rho does not peak at {}", pair)
    if t.repair is None and not (t.rho[pair] == 4 * t.b == norm(t.rho)):
        return _fail("rho(pair) != 4b")
    if t.repair is None and total[pair] != t.a + 4 * t.b:
        return _fail("(d+rho)(pair) != a + 4b")
    if not total.is_admissible() or not strictly_peaks_at(total, pair):
        return _fail("d + rho does not peak strictly at {}", pair)
    return OK


prop("translate", "peaks", min_n=2)((_gen_translate, _check_translate))


def _gen_series(rng, n):
    d = random_admissible(rng, n)
    x, y = rng.sample(range(n), 2)
    pair = UPair.of(x, y)
    radius = d[pair] if rng.random() < 0.5 else min(d[pair], Fraction(1, 2 ** rng.randint(0, 2)))
    return {"d": d, "pair": pair, "radius": radius, "level": Fraction(rng.randint(1, 8))}


def _check_series(x) -> Check:
    d, pair, radius, level = x["d"], x["pair"], x["radius"], x["level"]
    closed = layered_rho(d, pair, radius, level)
    depth = stabilization_level(d, radius) + 20
    partial = Pseudometric.zero(d.n)
    for k in range(1, depth + 1):
        partial = cone_add(partial, rho_level(d, pair, radius, level, k) * Fraction(1, 2**k))
    tail = level / 2**depth
    for u, v in product(range(d.n), repeat=2):
        if not partial[u, v] <= closed[u, v] <= partial[u, v] + tail:
            return _fail("closed form outside partial-sum bracket at ({}, {})", u, v)
    if not strictly_peaks_at(closed, pair) or closed[pair] != level:
        return _fail("layered sum does not peak strictly at {} with value {}", pair, level)
    return OK


prop("series_truncation", "peaks", min_n=2, max_n=8)((_gen_series, _check_series))

# cones --------------------------------------------------------------------------


def _gen_sum(rng, n):
    space = random_space(rng, n)
    x, y = rng.sample(range(n), 2)
    pair = UPair.of(x, y)
    k = rng.randint(2, 5)
    seeds = [rng.randrange(10**6) for _ in range(k)]
    ds = []
    for s in seeds:
        if rng.random() < 0.6:
            ds.append(peaking_metric_at(space, pair, s))
        else:
            # in the peak cone but with many peaks: a cut separating x from y
            side = {x} | {z for z in range(n) if z != y and rng.random() < 0.5}
            scale = Fraction(rng.randint(1, 3))
            ds.append(Pseudometric.from_function(n, lambda u, v: scale * ((u in side) != (v in side))))
    return {"pair": pair, "ds": ds}


def _check_sum(x) -> Check:
    pair, ds = x["pair"], x["ds"]
    total = peak_cone_sum(ds, pair)
    if norm(total) != sum(norm(d) for d in ds):
        return _fail("norm of sum is not the sum of norms")
    if not in_peak_cone(total, pair):
        return _fail("sum left the peak cone")
    for p in peak_set(total):
        if any(d[p] != norm(d) for d in ds):
            return _fail("peak {} of the sum is not a peak of every summand", p)
    if all(in_pp(d) for d in ds) and not in_pp(total):
        return _fail("sum of unique-peak metrics lost its unique peak")
    return OK


prop("peak_sum", "cones", min_n=2)((_gen_sum, _check_sum))


def _gen_separation(rng, n):
    space = random_space(rng, n)
    p, q = rng.sample(doubletons(n), 2)
    return {"space": space, "pair": p, "other": q}


def _check_separation(x) -> Check:
    w = peak_separation_witness(x["space"], x["pair"], x["other"])
    if not (w.is_admissible() and brute_argmax(w) == {x["pair"]} and strictly_peaks_at(w, x["pair"])):
        return _fail("witness does not peak uniquely at {}", x["pair"])
    if in_peak_cone(w, x["other"]):
        return _fail("witness also peaks at {}", x["other"])
    return OK


prop("separation_witness", "cones", min_n=3)((_gen_separation, _check_separation))


def _gen_fip(rng, n):
    X = random_space(rng, n)
    Y = random_space(rng, n, "q")
    pair = rng.choice(doubletons(n))
    return {
        "X": X,
        "Y": Y,
        "phi": list(random_bijection(rng, n)),
        "pair": pair,
        "family": [peaking_metric_at(X, pair, rng.randrange(10**6)) for _ in range(rng.randint(1, 4))],
    }


def _check_fip(x) -> Check:
    T = induced_oracle(x["X"], x["Y"], x["phi"])
    common = common_image_peaks(T, x["family"])
    if not common:
        return _fail("peak sets of the images have empty intersection")
    phi = x["phi"]
    want = next(p for p in doubletons(len(phi)) if UPair.of(phi[p.i], phi[p.j]) == x["pair"])
    if common != {want}:
        return _fail("intersection {} is not the transported pair {}", sorted(common), want)
    return OK


prop("finite_intersection", "cones", min_n=2)((_gen_fip, _check_fip))


def _gen_transport(rng, n):
    X = random_space(rng, n)
    Y = random_space(rng, n, "q")
    d = random_pseudometric(rng, n) if rng.random() < 0.5 else random_admissible(rng, n, box=2)
    return {"X": X, "Y": Y, "phi": list(random_bijection(rng, n)), "d": d}


def _check_transport(x) -> Check:
    T = induced_oracle(x["X"], x["Y"], x["phi"])
    phi = PointMap(tuple(x["phi"]))
    d = x["d"]
    image = T(d)
    if peak_set(image) != transported_peaks(d, phi):
        return _fail("peak set does not transport")
    if in_pp(d) != in_pp(image):
        return _fail("unique-peak membership not preserved")
    for u, v in combinations(range(d.n), 2):
        if image[u, v] != d[phi[u], phi[v]]:
            return _fail("pointwise formula fails at ({}, {})", u, v)
    return OK


prop("peak_transport", "cones", min_n=2)((_gen_transport, _check_transport))

# recover ------------------------------------------------------------------------


def _gen_roundtrip(rng, n):
    return {
        "X": random_space(rng, n),
        "Y": random_space(rng, n, "q"),
        "phi": list(random_bijection(rng, n)),
        "seed": rng.randrange(10**6),
    }


def _check_roundtrip(x) -> Check:
    T = induced_oracle(x["X"], x["Y"], x["phi"])
    result = full_recovery(T, sample_count=20, seed=x["seed"])
    n = len(x["phi"])
    if n > 2 and list(result.phi.mapping) != list(x["phi"]):
        return _fail("recovered {} instead of {}", result.phi.mapping, x["phi"])
    if n == 2 and result.phi.unique:
        return _fail("two-point recovery not flagged ambiguous")
    return OK


prop("roundtrip", "recover", min_n=2, max_n=8)((_gen_roundtrip, _check_roundtrip))


def _gen_uniqueness(rng, n):
    phi = random_bijection(rng, n)
    alt = random_bijection(rng, n)
    while alt == phi:
        alt = random_bijection(rng, n)
    return {"X": random_space(rng, n), "Y": random_space(rng, n, "q"), "phi": list(phi), "alt": list(alt)}


def _check_uniqueness(x) -> Check:
    T = induced_oracle(x["X"], x["Y"], x["phi"])
    phi, alt = PointMap(tuple(x["phi"])), PointMap(tuple(x["alt"]))
    sep = separating_sample(x["X"], phi, alt)
    if not verify_canonical_formula(T, phi, [sep]).passed:
        return _fail("true map fails on the separating sample")
    if verify_canonical_formula(T, alt, [sep]).passed:
        return _fail("wrong map {} survives the separating sample", alt.mapping)
    samples = sample_pseudometrics(x["X"], 5, 0)
    if not verify_canonical_formula(T, phi, samples).passed:
        return _fail("true map fails on random samples")
    return OK


prop("uniqueness", "recover", min_n=3, max_n=7)((_gen_uniqueness, _check_uniqueness))

SUITES = ("core", "extend", "peaks", "cones", "recover")


# campaigns ----------------------------------------------------------------------


def select(suite: str = "all") -> list[Property]:
    if suite == "all":
        return list(PROPERTIES.values())
    if suite in PROPERTIES:
        return [PROPERTIES[suite]]
    chosen = [p for p in PROPERTIES.values() if p.suite == suite]
    if not chosen:
        raise ValueError(f"unknown suite {suite!r}")
    return chosen


def trial_inputs(prop_: Property, seed: int, trial: int, n_min: int, n_max: int) -> tuple[int, dict]:
    rng = random.Random(f"{seed}:{trial}:{prop_.name}")
    lo = max(n_min, prop_.min_n)
    hi = max(lo, min(n_max, prop_.max_n))
    n = rng.randint(lo, hi)
    return n, prop_.generate(rng, n)


def run_check(prop_: Property, inputs: dict) -> Check:
    try:
        return prop_.check(inputs)
    except Exception as exc:  # a crash is a failed trial, not a crashed campaign
        return False, f"{type(exc).__name__}: {exc}"


def run_campaign(seed: int = 0, trials: int = 100, n_min: int = 2, n_max: int = 6, suite: str = "all") -> dict:
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"invalid size range [{n_min}, {n_max}]")
    props = select(suite)
    started = time.perf_counter()
    verdicts = []
    counterexamples = []
    for t in range(trials):
        p = props[t % len(props)]
        n, inputs = trial_inputs(p, seed, t, n_min, n_max)
        ok, detail = run_check(p, inputs)
        verdicts.append({"trial": t, "property": p.name, "suite": p.suite, "n": n, "passed": ok})
        if not ok:
            counterexamples.append(
                {"trial": t, "property": p.name, "n": n, "detail": detail, "inputs": encode_value(inputs)}
            )
    failed = sum(not v["passed"] for v in verdicts)
    return {
        "seed": seed,
        "suite": suite,
        "trials": trials,
        "n_min": n_min,
        "n_max": n_max,
        "passed": trials - failed,
        "failed": failed,
        "verdicts": verdicts,
        "counterexamples": counterexamples,
        "timing": {"seconds": round(time.perf_counter() - started, 3)},
    }


def replay(counterexample: dict) -> Check:
    """Re-check a serialized trial against its property."""
    name = counterexample.get("property")
    if name not in PROPERTIES:
        raise ValueError(f"unknown property {name!r}")
    return run_check(PROPERTIES[name], decode_value(counterexample["inputs"]))


def trial_document(name: str, seed: int, trial: int, n_min: int = 2, n_max: int = 6) -> dict:
    """Serialized inputs of one trial, in the same shape as a counterexample."""
    p = PROPERTIES[name]
    n, inputs = trial_inputs(p, seed, trial, n_min, n_max)
    ok, detail = run_check(p, inputs)
    return {"trial": trial, "property": name, "n": n, "passed": ok, "detail": detail, "inputs": encode_value(inputs)}

