"""Constructive bracket covers for set and function classes.

A bracket [g, h] is a pointwise-ordered pair of functions (for set classes,
a pair of nested sets); its width is the weighted mean of h - g.  This
module builds covers three ways: directly from a boundary-small partition
(set classes), through level sets (bounded function classes), and through
subgraphs on a discretized vertical axis (bounded function classes), plus
an envelope-truncation step that extends a cover of the truncated class to
the full class.  A small exact solver computes true minimum cover sizes by
branch and bound for cross-checking the constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import approximate, boundary_measures
from .core import GroundSpace, Partition, SetFamily
from .errors import BudgetError, DomainError, InternalInvariantError, SizeGuardError

WIDTH_TOL = 1e-9  # absorbs float accumulation over <= 1e4 points

EXACT_MAX_MEMBERS = 12
EXACT_MAX_POINTS = 10
DEFAULT_BNB_BUDGET = 500_000


@dataclass(frozen=True, eq=False)
class SetBracket:
    """Nested pair of point sets; width is the mass of upper minus lower."""

    ground: GroundSpace
    lower: np.ndarray  # bool mask
    upper: np.ndarray  # bool mask
    width: float

    def __post_init__(self):
        if np.any(self.lower & ~self.upper):
            raise InternalInvariantError("set bracket lower is not inside upper")
        if self.width < 0:
            raise InternalInvariantError("negative bracket width")

    def contains(self, mask: np.ndarray) -> bool:
        return bool(np.all(self.lower <= mask) and np.all(mask <= self.upper))

    def to_dict(self):
        return {
            "lower": list(self.ground.ids(self.lower)),
            "upper": list(self.ground.ids(self.upper)),
            "width": self.width,
        }


@dataclass(frozen=True, eq=False)
class FunctionBracket:
    """Pointwise-ordered pair of value vectors over the ground points."""

    ground: GroundSpace
    lower: np.ndarray
    upper: np.ndarray
    width: float

    def __post_init__(self):
        if np.any(self.lower > self.upper):
            raise InternalInvariantError("function bracket lower exceeds upper")

    @classmethod
    def of(cls, ground, lower, upper):
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        width = float(ground.weights @ (upper - lower))
        return cls(ground, lower, upper, width)

    def contains(self, values: np.ndarray) -> bool:
        return bool(np.all(self.lower <= values) and np.all(values <= self.upper))

    def to_dict(self):
        return {
            "lower": [float(v) for v in self.lower],
            "upper": [float(v) for v in self.upper],
            "width": self.width,
        }


@dataclass(frozen=True, eq=False)
class DiscreteFunctionClass:
    """Named value vectors over a ground space, dominated by an envelope."""

    ground: GroundSpace
    names: tuple
    values: np.ndarray  # float, (members, points)
    envelope: np.ndarray | None = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if len(set(names)) != len(names):
            raise DomainError("function names must be unique")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(names), len(self.ground)):
            raise DomainError(
                f"values must have shape ({len(names)}, {len(self.ground)})"
            )
        if self.envelope is None:
            env = np.abs(vals).max(axis=0) if len(names) else np.zeros(len(self.ground))
        else:
            env = np.asarray(self.envelope, dtype=np.float64)
            if env.shape != (len(self.ground),):
                raise DomainError("envelope must assign one value per point")
            if np.any(env < 0):
                raise DomainError("envelope must be nonnegative")
            bad = np.abs(vals) > env
            if bad.any():
                j, x = np.argwhere(bad)[0]
                raise DomainError(
                    f"envelope does not dominate |{names[j]}| at point "
                    f"{self.ground.points[x]!r}"
                )
        vals = vals.copy()
        vals.setflags(write=False)
        env = env.copy()
        env.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "envelope", env)

    def __len__(self):
        return len(self.names)

    def bounded_by(self, M: float) -> bool:
        return bool(np.all(np.abs(self.values) <= M))

    def truncated(self, M: float) -> "DiscreteFunctionClass":
        return DiscreteFunctionClass(
            self.ground,
            self.names,
            np.clip(self.values, -M, M),
            np.minimum(self.envelope, M),
        )


@dataclass(frozen=True, eq=False)
class BracketCover:
    """A list of brackets plus the member -> bracket assignment."""

    kind: str  # "sets" | "function"
    ground: GroundSpace
    member_names: tuple
    brackets: tuple
    assignment: tuple  # member index -> bracket index
    epsilon: float  # advertised per-bracket width bound
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.assignment) != len(self.member_names):
            raise InternalInvariantError("assignment must map every member")
        for b in self.brackets:
            if b.width > self.epsilon + WIDTH_TOL:
                raise InternalInvariantError(
                    f"bracket width {b.width} exceeds advertised bound {self.epsilon}"
                )

    def __len__(self):
        return len(self.brackets)

    def widths(self):
        return np.array([b.width for b in self.brackets])

    def bracket_for(self, member_index: int):
        return self.brackets[self.assignment[member_index]]

    def to_dict(self):
        return {
            "kind": self.kind,
            "epsilon_bound": self.epsilon,
            "count": len(self.brackets),
            "brackets": [b.to_dict() for b in self.brackets],
            "assignment": {
                name: int(idx) for name, idx in zip(self.member_names, self.assignment)
            },
            "meta": dict(self.meta),
        }


def support_partition(partition: Partition) -> Partition:
    """Restrict cells to the positive-weight support, with one extra cell
    collecting all weight-zero points.  On a fully supported ground this is
    the partition itself."""
    ground = partition.ground
    supp = ground.support
    if supp.all():
        return partition
    cells = partition.cells_matrix()
    labels = ["zero-mass"]
    while labels[0] in partition.labels:
        labels[0] += "'"
    cell_of = np.zeros(len(ground), dtype=np.int64)
    nxt = 1
    for label, row in zip(partition.labels, cells):
        kept = row & supp
        if kept.any():
            labels.append(label)
            cell_of[kept] = nxt
            nxt += 1
    return Partition(ground, tuple(labels), cell_of)


def bracket_cover_from_partition(family: SetFamily, partition: Partition) -> BracketCover:
    """Cover a set family with brackets read off a partition.

    Cells are first restricted to the positive-weight support (weight-zero
    points form their own cell, so removing null mass from cells is a
    no-op here).  Each member C gets lower = union of cells inside C and
    upper = union of cells meeting C; identical brackets are merged.  Each
    member's width equals its boundary measure under the restricted
    partition, exactly.
    """
    ground = family.ground
    prime = support_partition(partition)
    cells = prime.cells_matrix()
    cells_int = cells.astype(np.int64)
    members = family.matrix
    hits = cells_int @ members.T.astype(np.int64)  # |B ∩ C|
    misses = cells_int @ (~members).T.astype(np.int64)  # |B ∩ C^c|
    _, measures = boundary_measures(family, prime)

    brackets = []
    index_of = {}
    assignment = []
    for j in range(len(family)):
        lower = cells[misses[:, j] == 0].any(axis=0)
        upper = cells[hits[:, j] > 0].any(axis=0)
        key = (lower.tobytes(), upper.tobytes())
        if key not in index_of:
            index_of[key] = len(brackets)
            brackets.append(
                SetBracket(ground, lower, upper, float(measures[j]))
            )
        assignment.append(index_of[key])

    widths = [b.width for b in brackets]
    return BracketCover(
        kind="sets",
        ground=ground,
        member_names=family.names,
        brackets=tuple(brackets),
        assignment=tuple(assignment),
        epsilon=max(widths, default=0.0),
        meta={
            "partition_cells": prime.num_cells,
            "count_bound": 1 << (2 * prime.num_cells) if prime.num_cells <= 30 else None,
        },
    )


@dataclass(frozen=True)
class ExactBracketingNumber:
    value: int
    optimal: bool
    nodes: int


def bracketing_number_exact(family: SetFamily, epsilon: float,
                            budget: int = DEFAULT_BNB_BUDGET) -> ExactBracketingNumber:
    """Minimum number of epsilon-brackets covering the family, by branch and
    bound over groups of members that fit in one bracket.

    Endpoints range over subsets of the positive-weight support: any bracket
    covering a group can be replaced by (intersection, union) of the group's
    support traces without growing its width, so a group fits in one
    epsilon-bracket iff mass(union - intersection) <= epsilon.  Exhausting
    the node budget returns the best cover found, flagged non-optimal.
    """
    m = len(family)
    n = len(family.ground)
    if m > EXACT_MAX_MEMBERS:
        raise SizeGuardError(
            f"exact solver limited to {EXACT_MAX_MEMBERS} members (got {m})"
        )
    if n > EXACT_MAX_POINTS:
        raise SizeGuardError(
            f"exact solver limited to {EXACT_MAX_POINTS} points (got {n})"
        )
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    if m == 0:
        return ExactBracketingNumber(0, True, 0)

    supp_idx = np.flatnonzero(family.ground.support)
    ws = family.ground.weights[supp_idx]
    ns = supp_idx.size
    mem = [int(sum(1 << b for b, x in enumerate(supp_idx) if family.matrix[j, x]))
           for j in range(m)]

    mass = np.zeros(1 << ns)
    for mask in range(1, 1 << ns):
        lsb = mask & -mask
        mass[mask] = mass[mask ^ lsb] + ws[lsb.bit_length() - 1]

    inter = [0] * (1 << m)
    union = [0] * (1 << m)
    coverable = [False] * (1 << m)
    for g in range(1, 1 << m):
        lb = g & -g
        j = lb.bit_length() - 1
        rest = g ^ lb
        inter[g] = mem[j] if rest == 0 else inter[rest] & mem[j]
        union[g] = mem[j] if rest == 0 else union[rest] | mem[j]
        coverable[g] = mass[union[g] & ~inter[g]] <= epsilon + WIDTH_TOL

    maximal = []
    for g in range(1, 1 << m):
        if not coverable[g]:
            continue
        if any(not g >> j & 1 and coverable[g | (1 << j)] for j in range(m)):
            continue
        maximal.append(g)

    containing = [[g for g in maximal if g >> e & 1] for e in range(m)]
    max_size = max(bin(g).count("1") for g in maximal)

    # Greedy warm start gives the initial upper bound.
    uncovered = (1 << m) - 1
    best = 0
    while uncovered:
        g = max(maximal, key=lambda s: bin(s & uncovered).count("1"))
        uncovered &= ~g
        best += 1

    nodes = 0
    exhausted = False

    def search(uncovered, used):
        nonlocal best, nodes, exhausted
        if uncovered == 0:
            best = min(best, used)
            return
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        remaining = bin(uncovered).count("1")
        if used + math.ceil(remaining / max_size) >= best:
            return
        e = min(
            (x for x in range(m) if uncovered >> x & 1),
            key=lambda x: len(containing[x]),
        )
        for g in sorted(containing[e], key=lambda s: -bin(s & uncovered).count("1")):
            if exhausted:
                return
            search(uncovered & ~g, used + 1)

    search((1 << m) - 1, 0)
    return ExactBracketingNumber(best, not exhausted, nodes)


def _default_level_cover(level_family: SetFamily, target: float) -> BracketCover:
    result = approximate(level_family, target, strategy="greedy")
    if not result.success:
        raise BudgetError(
            f"no partition with boundary <= {target} found for a level family"
        )
    return bracket_cover_from_partition(level_family, result.partition)


def vc_major_brackets(cls: DiscreteFunctionClass, M: float, epsilon: float,
                      level_cover_source: Callable | None = None) -> BracketCover:
    """Bracket a class bounded by M through covers of its level-set families.

    With K = ceil(2M/eps) levels alpha_j = M - 2Mj/K, each member is pinned
    between step functions built from set brackets of its level sets at each
    alpha_j; every output bracket has width at most 2*eps.
    """
    if epsilon <= 0 or M <= 0:
        raise DomainError("M and epsilon must be positive")
    if not cls.bounded_by(M):
        raise DomainError(f"class is not bounded by M={M}")
    source = level_cover_source or _default_level_cover
    ground = cls.ground
    m = len(cls)
    K = math.ceil(2 * M / epsilon)
    levels = np.array([M - (2.0 * M * j) / K for j in range(1, K + 1)])
    # alpha-ladder extended by alpha_0 = M; evaluating the step sums through
    # this table keeps the float coverage inequalities exact.
    ladder = np.concatenate(([float(M)], levels))

    level_target = epsilon / (2.0 * M)
    lower_steps = np.zeros((m, len(ground)), dtype=np.int64)
    upper_steps = np.zeros((m, len(ground)), dtype=np.int64)
    assignments = np.zeros((m, K), dtype=np.int64)
    cover_sizes = []
    for j in range(K):
        level_family = SetFamily(ground, cls.names, cls.values <= levels[j])
        cover = source(level_family, level_target)
        cover_sizes.append(len(cover))
        for i in range(m):
            b = cover.bracket_for(i)
            assignments[i, j] = cover.assignment[i]
            lower_steps[i] += b.lower
            upper_steps[i] += b.upper

    brackets = []
    index_of = {}
    assignment = []
    for i in range(m):
        key = tuple(assignments[i])
        if key not in index_of:
            upper = ladder[lower_steps[i]]
            lower = ladder[upper_steps[i]] - epsilon
            index_of[key] = len(brackets)
            brackets.append(FunctionBracket.of(ground, lower, upper))
        assignment.append(index_of[key])

    count_bound = math.prod(cover_sizes) if cover_sizes else 1
    if len(brackets) > count_bound:
        raise InternalInvariantError("cover count exceeds the product bound")
    for i in range(m):
        if not brackets[assignment[i]].contains(cls.values[i]):
            raise InternalInvariantError(
                f"bracket fails to contain member {cls.names[i]!r}"
            )

    return BracketCover(
        kind="function",
        ground=ground,
        member_names=cls.names,
        brackets=tuple(brackets),
        assignment=tuple(assignment),
        epsilon=2.0 * epsilon,
        meta={
            "K": K,
            "levels": [float(a) for a in levels],
            "level_cover_sizes": cover_sizes,
            "count_bound": count_bound,
        },
    )


def vc_graph_brackets(cls: DiscreteFunctionClass, M: float, epsilon: float,
                      s_levels: int) -> BracketCover:
    """Bracket a class bounded by M through set brackets of its subgraphs.

    Members are rescaled into [0,1] and their subgraphs formed on a grid of
    s_levels vertical levels with the product measure mu x uniform-grid.
    Set brackets [A, B] of the subgraphs (target width eps/4M under the
    product measure) convert back into function brackets: the lower endpoint
    is the top grid level inside A, the upper endpoint sits one grid step
    above the last level before B first breaks off, which restores pointwise
    coverage for values lying strictly between grid levels.  Per-bracket
    width is at most eps/2 + 2M/T, which stays within eps + 1/T whenever
    M <= 1 and T >= 2/eps.
    """
    if epsilon <= 0 or M <= 0:
        raise DomainError("M and epsilon must be positive")
    T = int(s_levels)
    if T < math.ceil(2 / epsilon):
        raise DomainError(
            f"s_levels must be at least ceil(2/epsilon) = {math.ceil(2 / epsilon)}"
        )
    if not cls.bounded_by(M):
        raise DomainError(f"class is not bounded by M={M}")
    ground = cls.ground
    n = len(ground)
    m = len(cls)
    rescaled = (cls.values + M) / (2.0 * M)
    grid = np.arange(1, T + 1, dtype=np.float64) / T

    product_points = tuple(f"{p}@{t}" for p in ground.points for t in range(1, T + 1))
    product_weights = np.repeat(ground.weights, T) / T
    product_ground = GroundSpace(product_points, product_weights)
    graphs = (grid[None, None, :] <= rescaled[:, :, None]).reshape(m, n * T)
    graph_family = SetFamily(product_ground, cls.names, graphs)

    nu_target = epsilon / (4.0 * M)
    result = approximate(graph_family, nu_target, strategy="greedy")
    if not result.success:
        raise BudgetError(
            f"no partition with boundary <= {nu_target} found for the graph family"
        )
    set_cover = bracket_cover_from_partition(graph_family, result.partition)

    brackets = []
    fubini = []
    for sb in set_cover.brackets:
        A = sb.lower.reshape(n, T)
        B = sb.upper.reshape(n, T)
        g_idx = np.where(A.any(axis=1), T - A[:, ::-1].argmax(axis=1), 0)
        not_b = ~B
        h_idx = np.where(not_b.any(axis=1), not_b.argmax(axis=1) + 1, T)
        g_r = g_idx / T
        h_r = np.maximum(h_idx / T, g_r)
        lower = 2.0 * M * g_r - M
        upper = 2.0 * M * h_r - M
        fb = FunctionBracket.of(ground, lower, upper)
        brackets.append(fb)
        level_count = ((grid[None, :] <= h_r[:, None]) & (grid[None, :] > g_r[:, None])).sum(axis=1)
        nu_width = 2.0 * M * float(ground.weights @ (level_count / T))
        fubini.append({"mu_width": fb.width, "nu_width": nu_width})

    bound = epsilon / 2.0 + 2.0 * M / T
    for i in range(m):
        if not brackets[set_cover.assignment[i]].contains(cls.values[i]):
            raise InternalInvariantError(
                f"graph bracket fails to contain member {cls.names[i]!r}"
            )

    return BracketCover(
        kind="function",
        ground=ground,
        member_names=cls.names,
        brackets=tuple(brackets),
        assignment=set_cover.assignment,
        epsilon=bound,
        meta={
            "s_levels": T,
            "nu_target": nu_target,
            "set_cover_size": len(set_cover),
            "fubini": fubini,
        },
    )


def truncate_and_extend(cover: BracketCover, cls: DiscreteFunctionClass,
                        M: float, epsilon: float) -> BracketCover:
    """Extend a cover of the M-truncated class to cover the full class.

    Where the envelope exceeds M, bracket endpoints flare out to -F and F;
    elsewhere they are kept (clamped into [-M, M]).  The new width obeys
    h' - g' = (h - g)*[F <= M] + 2F*[F > M] pointwise, so the total width
    grows by at most twice the envelope tail mass, which must be below
    epsilon.
    """
    if cover.kind != "function":
        raise DomainError("truncation extension applies to function covers")
    if len(cover.assignment) != len(cls):
        raise DomainError("cover and class disagree on member count")
    ground = cls.ground
    F = cls.envelope
    w = ground.weights
    over = F > M
    tail = float(w @ (F * over))
    if tail >= epsilon:
        raise DomainError(
            f"envelope tail mass beyond M={M} is {tail}, not below epsilon={epsilon}"
        )
    truncated = np.clip(cls.values, -M, M)
    for i in range(len(cls)):
        b = cover.bracket_for(i)
        if b.width > epsilon + WIDTH_TOL:
            raise DomainError(
                f"input bracket width {b.width} exceeds epsilon={epsilon}"
            )
        if not (np.all(b.lower <= truncated[i]) and np.all(truncated[i] <= b.upper)):
            raise DomainError(
                f"input cover does not bracket the truncated member {cls.names[i]!r}"
            )
    if not over.any():
        return cover

    brackets = []
    for b in cover.brackets:
        g_c = np.clip(b.lower, -M, M)
        h_c = np.clip(b.upper, -M, M)
        g_p = np.where(over, np.minimum(g_c, -F), g_c)
        h_p = np.where(over, np.maximum(h_c, F), h_c)
        identity = np.where(over, 2.0 * F, h_c - g_c)
        if not np.array_equal(h_p - g_p, identity):
            raise InternalInvariantError("extension width identity failed")
        brackets.append(FunctionBracket.of(ground, g_p, h_p))

    for i in range(len(cls)):
        if not brackets[cover.assignment[i]].contains(cls.values[i]):
            raise InternalInvariantError(
                f"extended bracket fails to contain member {cls.names[i]!r}"
            )

    return BracketCover(
        kind="function",
        ground=ground,
        member_names=cls.names,
        brackets=tuple(brackets),
        assignment=cover.assignment,
        epsilon=3.0 * epsilon,
        meta={
            "base_epsilon": epsilon,
            "M": M,
            "tail_mass": tail,
            "base_meta": dict(cover.meta),
        },
    )
