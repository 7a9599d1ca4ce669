"""Shared builders and independent oracles for the test suite.

The oracles deliberately use plain python sets and brute-force enumeration
so they share no code with the library paths they check.
"""

import itertools

import numpy as np

from vckit import GroundSpace, SetFamily


def uniform_ground(n, prefix="p"):
    return GroundSpace.uniform([f"{prefix}{i}" for i in range(n)])


def interval_family(ground, step=1):
    """All half-open index intervals [a, b) with endpoints on multiples of step."""
    n = len(ground)
    cuts = list(range(0, n + 1, step))
    members = []
    for i, a in enumerate(cuts):
        for b in cuts[i + 1:]:
            members.append((f"I[{a},{b})", ground.points[a:b]))
    return SetFamily.from_members(ground, members)


def power_set_family(ground):
    n = len(ground)
    members = [
        (f"S{i}", [p for j, p in enumerate(ground.points) if i >> j & 1])
        for i in range(1 << n)
    ]
    return SetFamily.from_members(ground, members)


def disjoint_family(ground, blocks):
    members = []
    start = 0
    for i, size in enumerate(blocks):
        members.append((f"D{i}", ground.points[start:start + size]))
        start += size
    return SetFamily.from_members(ground, members)


def random_family(rng, max_points=8, max_members=12, dyadic=False):
    n = rng.integers(2, max_points + 1)
    m = rng.integers(1, max_members + 1)
    if dyadic:
        ground = uniform_ground(int(2 ** np.ceil(np.log2(n))))
        n = len(ground)
    else:
        raw = rng.integers(1, 10, size=n).astype(float)
        ground = GroundSpace(tuple(f"p{i}" for i in range(n)), raw / raw.sum())
    matrix = rng.random((m, n)) < rng.uniform(0.2, 0.8)
    return SetFamily(ground, tuple(f"C{j}" for j in range(m)), matrix)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def shatters_oracle(member_point_sets, target):
    target = frozenset(target)
    traces = {frozenset(m) & target for m in member_point_sets}
    return len(traces) == 2 ** len(target)


def vc_oracle(family, cap=None):
    members = [set(ids) for ids in family.members().values()]
    if not members:
        return 0
    points = family.ground.points
    cap = len(points) if cap is None else cap
    best = 0
    for k in range(1, cap + 1):
        if not any(
            shatters_oracle(members, c) for c in itertools.combinations(points, k)
        ):
            break
        best = k
    return best


def independent_oracle(member_point_sets, universe):
    """Count nonempty sign-pattern atoms directly."""
    k = len(member_point_sets)
    universe = set(universe)
    atoms = 0
    for pattern in itertools.product((0, 1), repeat=k):
        cell = set(universe)
        for s, keep in zip(member_point_sets, pattern):
            cell &= s if keep else universe - s
        if cell:
            atoms += 1
    return atoms


def dual_vc_oracle(family, cap=6):
    members = [set(ids) for ids in family.members().values()]
    universe = set(family.ground.points)
    best = 0
    for k in range(1, min(cap, len(members)) + 1):
        found = any(
            independent_oracle([members[j] for j in combo], universe) == 2 ** k
            for combo in itertools.combinations(range(len(members)), k)
        )
        if not found:
            break
        best = k
    return best


def exact_bracketing_oracle(family, eps):
    """Minimum blocks over all set partitions of the members such that every
    block fits in one eps-bracket (tight endpoints on the support)."""
    m = len(family)
    if m == 0:
        return 0
    supp = family.ground.support
    ids = [set(family.ground.ids(family.matrix[j] & supp)) for j in range(m)]
    w = dict(zip(family.ground.points, family.ground.weights))
    support_points = set(family.ground.ids(supp))

    def coverable(block):
        union = set().union(*(ids[j] for j in block))
        inter = set(support_points)
        for j in block:
            inter &= ids[j]
        return sum(w[p] for p in union - inter) <= eps + 1e-9

    best = m

    def rec(i, blocks):
        nonlocal best
        if len(blocks) >= best:
            return
        if i == m:
            best = min(best, len(blocks))
            return
        for b in blocks:
            b.append(i)
            if coverable(b):
                rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return best
