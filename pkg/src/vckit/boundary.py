"""Partition boundaries and the search for boundary-small partitions.

The boundary of a set C under a partition is the union of cells meeting
both C and its complement with positive measure.  A family is well
approximated by a partition when the supremum of these boundary measures
over the family is small.  On a finite ground every family admits a
boundary-zero partition (join every member), so the interesting output at
this scale is the refinement trace: how many cells each strategy needs to
push the supremum below a target.

Includes the disjoint-interval family whose prefix joins keep a large
boundary at every step, materialized on an exact dyadic ground.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GroundSpace, Partition, SetFamily, _join_signatures, join
from .errors import DomainError


def _member_cell_measures(family: SetFamily, partition: Partition):
    """Per (cell, member): mass inside the member and inside its complement."""
    cells = partition.cells_matrix().astype(np.float64)
    w = family.ground.weights
    members = family.matrix.astype(np.float64)
    inside = cells @ (members * w).T
    outside = cells @ ((1.0 - members) * w).T
    # Weights are nonnegative, so these are too; clamp defensively anyway.
    return np.maximum(inside, 0.0), np.maximum(outside, 0.0)


def boundary_measures(family: SetFamily, partition: Partition):
    """(mixed, measures): per-member boundary cell flags and boundary masses.

    mixed is boolean with shape (cells, members); measures[j] is the mass of
    the union of mixed cells for member j, summed in cell order.
    """
    inside, outside = _member_cell_measures(family, partition)
    mixed = (inside > 0.0) & (outside > 0.0)
    measures = partition.cell_masses() @ mixed.astype(np.float64)
    return mixed, measures


def pi_boundary(member, partition: Partition) -> np.ndarray:
    """Union of partition cells meeting both the member and its complement
    with positive measure.  Returns a boolean mask over the ground points."""
    ground = partition.ground
    mask = member if isinstance(member, np.ndarray) else ground.mask(member)
    fam = SetFamily(ground, ("C",), mask[None, :])
    mixed, _ = boundary_measures(fam, partition)
    return partition.cells_matrix()[mixed[:, 0]].any(axis=0)


@dataclass(frozen=True, eq=False)
class BoundaryProfile:
    """Per-member boundaries under one partition, with the family supremum."""

    family: SetFamily
    partition: Partition
    boundary_masks: np.ndarray  # bool, (members, points)
    measures: np.ndarray  # float, (members,)
    sup: float
    argmax: int  # first member attaining sup; -1 for an empty family

    @property
    def witness(self):
        return None if self.argmax < 0 else self.family.names[self.argmax]

    def to_rows(self):
        return [
            (name, float(m)) for name, m in zip(self.family.names, self.measures)
        ]


def boundary_profile(family: SetFamily, partition: Partition) -> BoundaryProfile:
    pg, fg = partition.ground, family.ground
    if pg is not fg and (pg.points != fg.points or not np.array_equal(pg.weights, fg.weights)):
        raise DomainError("partition and family live on different grounds")
    mixed, measures = boundary_measures(family, partition)
    cells = partition.cells_matrix()
    masks = np.zeros((len(family), len(family.ground)), dtype=bool)
    for j in range(len(family)):
        masks[j] = cells[mixed[:, j]].any(axis=0)
    if len(family) == 0:
        return BoundaryProfile(family, partition, masks, measures, 0.0, -1)
    arg = int(np.argmax(measures))
    return BoundaryProfile(family, partition, masks, measures, float(measures[arg]), arg)


@dataclass(frozen=True)
class ApproxStep:
    joined_index: int
    sup_after: float


@dataclass(frozen=True, eq=False)
class ApproximationResult:
    """Outcome of a partition search: success iff achieved_sup <= epsilon."""

    epsilon: float
    strategy: str
    partition: Partition
    achieved_sup: float
    trace: tuple
    success: bool
    failure_reason: str | None = None

    def trace_rows(self):
        return [
            (step, s.joined_index, s.sup_after) for step, s in enumerate(self.trace, 1)
        ]

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "strategy": self.strategy,
            "success": self.success,
            "achieved_sup_boundary": self.achieved_sup,
            "cells": self.partition.num_cells,
            "partition": {
                label: list(ids) for label, ids in self.partition.cells().items()
            },
            "trace": [
                {"step": i, "joined_index": j, "sup_boundary": s}
                for i, j, s in self.trace_rows()
            ],
            "failure_reason": self.failure_reason,
        }


def _sup_of(family, partition):
    _, measures = boundary_measures(family, partition)
    return float(measures.max()) if measures.size else 0.0


def approximate(family: SetFamily, epsilon: float, strategy: str = "greedy",
                max_cells: int | None = None) -> ApproximationResult:
    """Refine toward a partition with sup member-boundary <= epsilon.

    join-prefix joins members in family order; greedy joins, at each step,
    the member whose addition minimizes the resulting supremum (ties to the
    lowest index).  Exceeding the cell budget is a failure result, not an
    exception.  epsilon >= 1 succeeds immediately with the trivial
    partition.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    n = len(family.ground)
    max_cells = n if max_cells is None else int(max_cells)
    if max_cells < 2:
        raise DomainError("max_cells must be at least 2")
    if strategy not in ("join-prefix", "greedy"):
        raise DomainError(f"unknown strategy {strategy!r}")

    m = len(family)
    selected: list[int] = []
    trace: list[ApproxStep] = []
    partition = Partition.trivial(family.ground)
    sup = _sup_of(family, partition)
    reason = None

    def cells_of(indices):
        return int(np.unique(_join_signatures(family, indices)).size)

    if sup > epsilon:
        if strategy == "join-prefix":
            for j in range(m):
                if cells_of(selected + [j]) > max_cells:
                    reason = "cell-budget"
                    break
                selected.append(j)
                partition = join(family, selected)
                sup = _sup_of(family, partition)
                trace.append(ApproxStep(j, sup))
                if sup <= epsilon:
                    break
        else:
            remaining = list(range(m))
            while remaining and sup > epsilon:
                best_j, best_sup = None, None
                for j in remaining:
                    if cells_of(selected + [j]) > max_cells:
                        continue
                    cand_sup = _sup_of(family, join(family, sorted(selected + [j])))
                    if best_sup is None or cand_sup < best_sup:
                        best_j, best_sup = j, cand_sup
                if best_j is None:
                    reason = "cell-budget"
                    break
                selected = sorted(selected + [best_j])
                remaining.remove(best_j)
                partition = join(family, selected)
                sup = best_sup
                trace.append(ApproxStep(best_j, sup))

    success = sup <= epsilon
    if not success and reason is None:
        reason = "members-exhausted"
    return ApproximationResult(
        epsilon=float(epsilon),
        strategy=strategy,
        partition=partition,
        achieved_sup=sup,
        trace=tuple(trace),
        success=bool(success),
        failure_reason=None if success else reason,
    )


@dataclass(frozen=True, eq=False)
class CounterexampleInstance:
    """Disjoint half-open intervals with mass sequence summing below 1.

    The ground has one atom per interval plus one remainder atom, so every
    set in play is a union of atoms and all measures are exact.  Under the
    prefix join of the first n members, member n+1 has boundary equal to
    the whole tail [s_n, 1], of mass 1 - s_n.
    """

    depth: int
    masses: tuple
    partial_sums: tuple  # s_0 .. s_N
    ground: GroundSpace
    family: SetFamily

    def tail_mask(self, n: int) -> np.ndarray:
        """The tail set [s_n, 1]: atoms n+1..N plus the remainder atom."""
        if not 0 <= n <= self.depth:
            raise DomainError(f"tail index {n} outside [0, {self.depth}]")
        mask = np.zeros(self.depth + 1, dtype=bool)
        mask[n:] = True
        return mask


def make_counterexample(depth: int, masses=None) -> CounterexampleInstance:
    """Materialize the disjoint-interval instance at the given depth.

    Default masses are 2^-(n+1) for n = 1..depth, all dyadic, so partial
    sums and boundary measures are exact in binary floating point.
    """
    depth = int(depth)
    if depth < 1:
        raise DomainError("depth must be at least 1")
    if masses is None:
        masses = [0.5 ** (n + 1) for n in range(1, depth + 1)]
    masses = [float(a) for a in masses]
    if len(masses) != depth:
        raise DomainError(f"expected {depth} masses, got {len(masses)}")
    if any(a <= 0 for a in masses):
        raise DomainError("masses must be positive")
    total = 0.0
    partial = [0.0]
    for a in masses:
        total += a
        partial.append(total)
    if total >= 1.0:
        raise DomainError(f"masses must sum below 1 (got {total})")
    points = tuple(f"c{n}" for n in range(1, depth + 1)) + ("rest",)
    weights = np.array(masses + [1.0 - total])
    ground = GroundSpace(points, weights)
    family = SetFamily.from_members(
        ground, [(f"C{n}", (f"c{n}",)) for n in range(1, depth + 1)]
    )
    return CounterexampleInstance(
        depth=depth,
        masses=tuple(masses),
        partial_sums=tuple(partial),
        ground=ground,
        family=family,
    )
