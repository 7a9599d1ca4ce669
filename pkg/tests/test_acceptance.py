"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Every tolerance is frozen here; the stochastic ones were calibrated
by Monte Carlo before freezing (medians quoted in comments).
"""

import functools
import itertools
import json
import math
import time

import numpy as np
import pytest

from vckit import (
    DiscreteFunctionClass,
    GroundSpace,
    SetFamily,
    approximate,
    boolean_independent,
    boundary_profile,
    bracket_cover_from_partition,
    bracketing_number_exact,
    dual_family,
    dual_vc_dimension,
    join,
    make_counterexample,
    rotation_ground,
    support_partition,
    truncate_and_extend,
    ulln_experiment,
    vc_dimension,
    vc_graph_brackets,
    vc_major_brackets,
)
from vckit.cli import main, results_bytes
from vckit.instance import Instance, instance_to_dict
from vckit.processes import ProcessConfig

from util import independent_oracle, interval_family, random_family, uniform_ground

GOLDEN = (5 ** 0.5 - 1) / 2


def criterion(number, label, budget_s=None):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] criterion {number} ({label}): FAIL")
                raise
            elapsed = time.monotonic() - start
            if budget_s is not None and elapsed > budget_s:
                print(f"[ACCEPTANCE] criterion {number} ({label}): FAIL "
                      f"(runtime {elapsed:.1f}s > {budget_s}s)")
                raise AssertionError(
                    f"criterion {number} exceeded its runtime budget: "
                    f"{elapsed:.1f}s > {budget_s}s"
                )
            print(f"[ACCEPTANCE] criterion {number} ({label}): PASS "
                  f"({elapsed:.1f}s)")
        return wrapper
    return deco


@criterion(1, "duality identity on 200 seeded families", budget_s=60)
def test_criterion_01_duality_identity():
    rng = np.random.default_rng(101)
    for _ in range(200):
        fam = random_family(rng, max_points=8, max_members=12)
        assert vc_dimension(dual_family(fam)) == dual_vc_dimension(fam)


@criterion(2, "join law on 200 random index sets")
def test_criterion_02_join_law():
    rng = np.random.default_rng(202)
    for _ in range(200):
        fam = random_family(rng, max_points=8, max_members=10)
        k = int(rng.integers(1, min(len(fam), 4) + 1))
        indices = sorted(rng.choice(len(fam), size=k, replace=False))
        cells = join(fam, indices).num_cells
        independent = boolean_independent(fam, indices)
        assert independent == (cells == 2 ** k)
        atoms = independent_oracle(
            [set(fam.member_ids(j)) for j in indices], fam.ground.points
        )
        assert cells == atoms
        if independent:
            assert cells == 2 ** k  # maximal cardinality of the join


@criterion(3, "counterexample boundaries exact and dimension one")
def test_criterion_03_counterexample():
    ce = make_counterexample(13)  # members C_1..C_13 so n+1 exists for n=12
    assert vc_dimension(ce.family) == 1
    for n in range(1, 13):
        partition = join(ce.family, range(n))
        profile = boundary_profile(ce.family, partition)
        expected = 1.0 - ce.partial_sums[n]
        assert profile.measures[n] == expected  # exact dyadic arithmetic
        assert profile.measures[n] > 0.5
        assert profile.sup == expected


@criterion(4, "partition-derived covers on 100 random pairs", budget_s=30)
def test_criterion_04_corollary_covers():
    rng = np.random.default_rng(404)
    for _ in range(100):
        fam = random_family(rng, max_points=8, max_members=10)
        k = int(rng.integers(0, min(len(fam), 5) + 1))
        indices = sorted(rng.choice(len(fam), size=k, replace=False)) if k else []
        partition = join(fam, indices)
        cover = bracket_cover_from_partition(fam, partition)
        prime = support_partition(partition)
        profile = boundary_profile(fam, prime)
        assert len(cover) <= 2 ** (2 * prime.num_cells)
        for j in range(len(fam)):
            bracket = cover.bracket_for(j)
            member = fam.member_mask(j)
            assert not np.any(bracket.lower & ~member)
            assert not np.any(member & ~bracket.upper)
            assert bracket.width == profile.measures[j]


@criterion(5, "level-set covers: 2-epsilon widths and exact ladder")
def test_criterion_05_vc_major():
    rng = np.random.default_rng(505)
    M = 1.0
    for _ in range(20):
        fam = random_family(rng, max_points=6, max_members=6)
        values = rng.uniform(-M, M, size=(len(fam), len(fam.ground)))
        cls = DiscreteFunctionClass(fam.ground, fam.names, values)
        for eps in (0.5, 0.25, 0.1):
            cover = vc_major_brackets(cls, M, eps)
            K = cover.meta["K"]
            assert K == math.ceil(2 * M / eps)
            assert cover.meta["levels"] == [
                M - (2 * M * j) / K for j in range(1, K + 1)
            ]
            for i in range(len(cls)):
                bracket = cover.bracket_for(i)
                assert bracket.width <= 2 * eps + 1e-9
                assert bracket.contains(cls.values[i])


@criterion(6, "graph covers: widths, coverage, and the slice identity")
def test_criterion_06_vc_graph():
    rng = np.random.default_rng(606)
    M, T = 1.0, 256
    for _ in range(20):
        fam = random_family(rng, max_points=5, max_members=5)
        values = rng.random((len(fam), len(fam.ground)))
        cls = DiscreteFunctionClass(fam.ground, fam.names, values)
        eps = float(rng.choice([0.5, 0.25, 0.1]))
        cover = vc_graph_brackets(cls, M, eps, T)
        for i in range(len(cls)):
            bracket = cover.bracket_for(i)
            assert bracket.width <= eps + 1.0 / T + 1e-9
            assert bracket.contains(cls.values[i])
        for entry in cover.meta["fubini"]:
            assert abs(entry["mu_width"] - entry["nu_width"]) <= 2 * M / T + 1e-9


@criterion(7, "envelope truncation: exact identity and 3-epsilon totals")
def test_criterion_07_truncation():
    rng = np.random.default_rng(707)
    M = 1.0
    done = 0
    while done < 20:
        fam = random_family(rng, max_points=6, max_members=4)
        g = fam.ground
        values = rng.uniform(-M, M, size=(len(fam), len(g)))
        spikes = rng.random(len(g)) < 0.34
        if not spikes.any():
            continue
        values[:, spikes] *= rng.uniform(3, 30)
        cls = DiscreteFunctionClass(g, fam.names, values)
        assert np.any(cls.envelope > M)
        tail = float((cls.envelope * (cls.envelope > M) * g.weights).sum())
        eps = 2 * tail + 0.25  # guarantees tail < eps
        base = vc_major_brackets(cls.truncated(M), M, eps / 2)
        extended = truncate_and_extend(base, cls, M, eps)
        over = cls.envelope > M
        for original, ext in zip(base.brackets, extended.brackets):
            clipped_low = np.clip(original.lower, -M, M)
            clipped_high = np.clip(original.upper, -M, M)
            expected = np.where(over, 2 * cls.envelope, clipped_high - clipped_low)
            assert np.array_equal(ext.upper - ext.lower, expected)
            assert ext.width <= 3 * eps + 1e-9
        for i in range(len(cls)):
            assert extended.bracket_for(i).contains(cls.values[i])
        done += 1


@criterion(8, "exact bracketing numbers vs constructive covers", budget_s=300)
def test_criterion_08_exact_vs_constructive():
    rng = np.random.default_rng(808)
    instances = 0
    while instances < 30:
        fam = random_family(rng, max_points=8, max_members=10)
        if len(fam) > 12 or len(fam.ground) > 10:
            continue
        instances += 1
        previous = None
        for eps in (0.05, 0.2, 0.6):
            exact = bracketing_number_exact(fam, eps)
            assert exact.optimal
            search = approximate(fam, eps, "greedy")
            assert search.success
            cover = bracket_cover_from_partition(fam, search.partition)
            assert all(b.width <= eps + 1e-9 for b in cover.brackets)
            assert exact.value <= len(cover)
            if previous is not None:
                assert exact.value <= previous  # nonincreasing in epsilon
            previous = exact.value


@criterion(9, "uniform laws under rotation, iid, and Markov sampling", budget_s=180)
def test_criterion_09_ulln():
    checkpoints = [100, 1_000, 10_000, 100_000]
    ground = rotation_ground(1024)
    family = interval_family(ground, step=32)

    # rotation: calibrated medians ~ [2.5e-2, 1.5e-3, 4.0e-4, 4.0e-5]
    config = ProcessConfig(kind="rotation", seed=20100917, length=100_000,
                           theta=GOLDEN, grid=1024)
    deltas = np.array([
        ulln_experiment(family, config, checkpoints, replicate=r).deltas()
        for r in range(20)
    ])
    medians = np.median(deltas, axis=0)
    assert all(a > b for a, b in zip(medians, medians[1:])), medians
    assert medians[-1] <= 0.02

    # iid analogue on the same family: calibrated median ~ 3.0e-3
    config = ProcessConfig(kind="iid", seed=20100917, length=100_000)
    iid = np.median([
        ulln_experiment(family, config, [100_000], replicate=r).deltas()[0]
        for r in range(20)
    ])
    assert iid <= 0.02

    # mixing 2-state chain, all four subsets: calibrated median ~ 3.3e-3
    g2 = GroundSpace(("s0", "s1"), [2 / 3, 1 / 3])
    fam2 = SetFamily.from_members(
        g2, {"empty": [], "s0": ["s0"], "s1": ["s1"], "X": ["s0", "s1"]}
    )
    config = ProcessConfig(kind="markov", seed=20100917, length=100_000,
                           transition=((0.9, 0.1), (0.2, 0.8)))
    markov = np.median([
        ulln_experiment(fam2, config, [100_000], replicate=r).deltas()[0]
        for r in range(20)
    ])
    assert markov <= 0.02


@criterion(10, "seeded reports are byte-identical across runs and thread counts")
def test_criterion_10_determinism(tmp_path, capsys, monkeypatch):
    doc = {
        "points": [{"id": f"p{i}", "weight": 0.125} for i in range(8)],
        "sets": {f"I{a}{b}": [f"p{i}" for i in range(a, b)]
                 for a in range(8) for b in range(a + 1, 9)},
        "functions": {"f": [0.1 * i - 0.3 for i in range(8)]},
        "processes": {
            "draw": {"kind": "iid", "seed": 97, "length": 20_000},
            "chain": {"kind": "markov", "seed": 97, "length": 20_000,
                      "transition": [[0.6 if i == j else 0.4 / 7
                                      for j in range(8)] for i in range(8)]},
        },
    }
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(doc))
    jobs = [
        ["dim", str(path)],
        ["approx", str(path), "--epsilon", "0.3"],
        ["brackets", str(path), "--epsilon", "0.5", "--mode", "major"],
        ["ulln", str(path), "--process", "draw",
         "--checkpoints", "100,20000", "--seeds", "3"],
        ["ulln", str(path), "--process", "chain",
         "--checkpoints", "100,20000", "--seeds", "2"],
    ]

    def payload(argv, threads):
        if threads is None:
            monkeypatch.delenv("VCKIT_THREADS", raising=False)
        else:
            monkeypatch.setenv("VCKIT_THREADS", str(threads))
        assert main(argv) == 0
        report = json.loads(capsys.readouterr().out)
        return results_bytes(report["results"])

    for argv in jobs:
        reference = payload(argv, None)
        assert payload(argv, None) == reference  # plain re-run
        assert payload(argv, 1) == reference
        assert payload(argv, 2) == reference
