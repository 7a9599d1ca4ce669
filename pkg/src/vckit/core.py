"""Exact combinatorics of finite weighted set systems.

A ground space is a finite ordered list of points carrying a probability
weight each; families of subsets are stored as boolean membership matrices
over that order.  All operations here are exact and set-theoretic: atoms of
a join are counted as nonempty point sets, weights enter only where a
measure is explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import BudgetError, DomainError, SizeGuardError

WEIGHT_SUM_TOL = 1e-12
MAX_SUBSET_SIZE = 30  # guards 2^|D| trace enumeration
MAX_DUAL_CAP = 20
DEFAULT_SEARCH_BUDGET = 5_000_000  # candidate subsets per dimension search


def _as_bool_matrix(rows, n):
    out = np.zeros((len(rows), n), dtype=bool)
    for i, row in enumerate(rows):
        out[i] = row
    return out


@dataclass(frozen=True, eq=False)
class GroundSpace:
    """Finite weighted point set: the (X, mu) a family lives on.

    Weights are normalized on construction and must be nonnegative; point
    ids must be unique.  Weight-zero points are legal members of sets but
    never influence measure positivity.
    """

    points: tuple
    weights: np.ndarray

    def __post_init__(self):
        points = tuple(str(p) for p in self.points)
        if len(set(points)) != len(points):
            raise DomainError("ground point ids must be unique")
        if not points:
            raise DomainError("ground space needs at least one point")
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if w.shape != (len(points),):
            raise DomainError(
                f"expected {len(points)} weights, got shape {w.shape}"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite and nonnegative")
        total = float(w.sum())
        if total <= 0:
            raise DomainError("weights must have positive total mass")
        # Dividing only when needed keeps exact inputs (dyadic weights,
        # already-normalized files) bit-for-bit intact.
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            w /= total
        if abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError("weights failed to normalize to 1")
        w.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    def __len__(self):
        return len(self.points)

    def index(self, point_id):
        try:
            return self._index[point_id]
        except KeyError:
            raise DomainError(f"unknown point id {point_id!r}") from None

    def mask(self, point_ids: Iterable) -> np.ndarray:
        """Boolean mask over the point order for the given ids."""
        m = np.zeros(len(self.points), dtype=bool)
        for pid in point_ids:
            m[self.index(pid)] = True
        return m

    def ids(self, mask: np.ndarray) -> tuple:
        return tuple(p for p, keep in zip(self.points, mask) if keep)

    def measure(self, subset) -> float:
        """mu of a subset given as a mask or an iterable of point ids."""
        m = subset if isinstance(subset, np.ndarray) else self.mask(subset)
        return float(self.weights[m].sum())

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0.0

    @classmethod
    def uniform(cls, points):
        points = tuple(points)
        return cls(points, np.full(len(points), 1.0 / len(points)))


@dataclass(frozen=True, eq=False)
class SetFamily:
    """Named, ordered collection of subsets of one ground space."""

    ground: GroundSpace
    names: tuple
    matrix: np.ndarray  # bool, shape (members, points)

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if len(set(names)) != len(names):
            raise DomainError("member names must be unique")
        m = np.asarray(self.matrix, dtype=bool)
        if m.ndim != 2 or m.shape != (len(names), len(self.ground)):
            raise DomainError(
                f"membership matrix must have shape ({len(names)}, {len(self.ground)})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_members(cls, ground: GroundSpace, members):
        """Build from {name: point-ids} or an iterable of (name, point-ids)."""
        items = members.items() if isinstance(members, Mapping) else members
        names, rows = [], []
        for name, point_ids in items:
            names.append(name)
            rows.append(ground.mask(point_ids))
        return cls(ground, tuple(names), _as_bool_matrix(rows, len(ground)))

    def __len__(self):
        return len(self.names)

    def member_mask(self, i) -> np.ndarray:
        return self.matrix[i]

    def member_ids(self, i) -> tuple:
        return self.ground.ids(self.matrix[i])

    def members(self):
        return {name: self.ground.ids(row) for name, row in zip(self.names, self.matrix)}


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint labeled cover of a ground space, stored as a cell index per point.

    Disjointness and coverage hold by construction; no cell may be empty.
    """

    ground: GroundSpace
    labels: tuple
    cell_of: np.ndarray  # int, shape (points,), values in [0, cells)

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        if len(set(labels)) != len(labels):
            raise DomainError("cell labels must be unique")
        idx = np.asarray(self.cell_of, dtype=np.int64).copy()
        if idx.shape != (len(self.ground),):
            raise DomainError("cell_of must assign every ground point")
        if len(labels) == 0 or idx.min() < 0 or idx.max() >= len(labels):
            raise DomainError("cell indices out of range")
        counts = np.bincount(idx, minlength=len(labels))
        if np.any(counts == 0):
            empties = [labels[i] for i in np.flatnonzero(counts == 0)]
            raise DomainError(f"empty partition cells are not allowed: {empties}")
        idx.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cell_of", idx)

    @property
    def num_cells(self):
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def cells_matrix(self) -> np.ndarray:
        """Boolean (cells, points) incidence."""
        return self.cell_of == np.arange(self.num_cells)[:, None]

    def cell_masses(self) -> np.ndarray:
        masses = self.cells_matrix().astype(np.float64) @ self.ground.weights
        return masses

    def cells(self):
        mat = self.cells_matrix()
        return {label: self.ground.ids(row) for label, row in zip(self.labels, mat)}

    @classmethod
    def trivial(cls, ground: GroundSpace):
        return cls(ground, ("X",), np.zeros(len(ground), dtype=np.int64))

    @classmethod
    def singletons(cls, ground: GroundSpace):
        return cls(ground, ground.points, np.arange(len(ground), dtype=np.int64))

    @classmethod
    def from_cells(cls, ground: GroundSpace, cells: Mapping):
        labels = tuple(cells)
        idx = np.full(len(ground), -1, dtype=np.int64)
        for c, (label, point_ids) in enumerate(cells.items()):
            for pid in point_ids:
                i = ground.index(pid)
                if idx[i] != -1:
                    raise DomainError(
                        f"point {pid!r} assigned to two cells ({labels[idx[i]]!r}, {label!r})"
                    )
                idx[i] = c
        if np.any(idx == -1):
            missing = [ground.points[i] for i in np.flatnonzero(idx == -1)]
            raise DomainError(f"partition does not cover points: {missing}")
        return cls(ground, labels, idx)


@dataclass(frozen=True)
class DimensionSearch:
    """Outcome of a dimension search: value, first witness, cap behaviour."""

    dimension: int
    witness: tuple
    at_cap: bool
    checks: int


def _target_indices(family: SetFamily, target) -> np.ndarray:
    if isinstance(target, np.ndarray) and target.dtype == bool:
        return np.flatnonzero(target)
    return np.asarray(sorted({family.ground.index(p) for p in target}), dtype=np.int64)


def _trace_count(matrix: np.ndarray, idx: np.ndarray) -> int:
    k = idx.size
    codes = matrix[:, idx].astype(np.int64) @ (1 << np.arange(k, dtype=np.int64))
    return int(np.unique(codes).size)


def shatters(family: SetFamily, target) -> bool:
    """True iff the family's traces on the target realize all 2^|target| subsets.

    The target may be an iterable of point ids or a boolean mask.  Guarded at
    |target| <= 30; an empty family shatters nothing under the literal trace
    count (see vc_dimension for the empty-family convention).
    """
    idx = _target_indices(family, target)
    k = idx.size
    if k > MAX_SUBSET_SIZE:
        raise SizeGuardError(
            f"target of size {k} exceeds the shattering guard of {MAX_SUBSET_SIZE}"
        )
    if len(family) == 0:
        return False
    if (1 << k) > len(family):
        return False
    return _trace_count(family.matrix, idx) == (1 << k)


def vc_dimension_search(family: SetFamily, cap=None,
                        max_checks=DEFAULT_SEARCH_BUDGET) -> DimensionSearch:
    """Largest k <= cap with a shattered k-subset, plus the first witness.

    Searches subset sizes in increasing order, subsets lexicographically,
    stopping at the first size with no shattered subset.  The empty family
    has dimension 0 by convention (it shatters the empty set only); the
    paper-level definitions do not cover that case.
    """
    n = len(family.ground)
    m = len(family)
    requested_cap = n if cap is None else int(cap)
    if requested_cap < 0:
        raise DomainError("cap must be nonnegative")
    if m == 0:
        return DimensionSearch(0, (), requested_cap == 0, 0)
    # 2^k distinct traces require 2^k members and k points.
    k_max = min(requested_cap, n, int(m).bit_length() - 1)
    matrix = np.ascontiguousarray(family.matrix, dtype=np.uint8)
    best, witness, spent = 0, (), 0
    for k in range(1, k_max + 1):
        status, combo, checks = kernels.full_trace_subset(matrix, k, max_checks - spent)
        spent += checks
        if status == kernels.OVER_BUDGET:
            raise BudgetError(
                f"subset-search budget of {max_checks} candidate subsets "
                f"exhausted at size k={k}",
                best_known=best,
            )
        if status != kernels.FOUND:
            break
        best, witness = k, tuple(family.ground.points[i] for i in combo)
    return DimensionSearch(best, witness, best == requested_cap, spent)


def vc_dimension(family: SetFamily, cap=None, max_checks=DEFAULT_SEARCH_BUDGET) -> int:
    return vc_dimension_search(family, cap, max_checks).dimension


def _join_signatures(family: SetFamily, indices) -> np.ndarray:
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size > MAX_SUBSET_SIZE:
        raise SizeGuardError(
            f"join of {idx.size} sets exceeds the guard of {MAX_SUBSET_SIZE}"
        )
    if idx.size and (idx.min() < 0 or idx.max() >= len(family)):
        raise DomainError("member index out of range")
    if idx.size == 0:
        return np.zeros(len(family.ground), dtype=np.int64)
    pow2 = 1 << np.arange(idx.size, dtype=np.int64)
    return pow2 @ family.matrix[idx].astype(np.int64)


def join(family: SetFamily, indices) -> Partition:
    """Partition into the nonempty sign-pattern atoms of the selected members.

    Cell labels are the sign patterns: character i is '1' when the cell lies
    inside the i-th selected member.  Atoms are nonempty as point sets;
    weights play no role.
    """
    indices = list(indices)
    sigs = _join_signatures(family, indices)
    if not indices:
        return Partition.trivial(family.ground)
    uniq, inverse = np.unique(sigs, return_inverse=True)
    k = len(indices)
    labels = tuple(
        "".join("1" if (int(s) >> i) & 1 else "0" for i in range(k)) for s in uniq
    )
    return Partition(family.ground, labels, inverse.astype(np.int64))


def boolean_independent(family: SetFamily, indices) -> bool:
    """True iff the join of the selected members has all 2^k atoms nonempty."""
    indices = list(indices)
    sigs = _join_signatures(family, indices)
    return int(np.unique(sigs).size) == (1 << len(indices))


def dual_vc_dimension_search(family: SetFamily, cap=MAX_DUAL_CAP,
                             max_checks=DEFAULT_SEARCH_BUDGET) -> DimensionSearch:
    """Largest k <= cap such that some k members are Boolean independent.

    Independence of k sets needs 2^k nonempty atoms, hence 2^k <= |ground|;
    the search is pruned accordingly.  Witness is the first independent
    subfamily in lexicographic member order.
    """
    cap = int(cap)
    if cap < 0:
        raise DomainError("cap must be nonnegative")
    if cap > MAX_DUAL_CAP:
        raise SizeGuardError(
            f"dual dimension cap {cap} exceeds the guard of {MAX_DUAL_CAP}"
        )
    n = len(family.ground)
    m = len(family)
    if m == 0:
        return DimensionSearch(0, (), cap == 0, 0)
    k_max = min(cap, m, int(n).bit_length() - 1)
    # Columns are members now: the same kernel searches member subsets whose
    # per-point sign patterns take all 2^k values.
    matrix = np.ascontiguousarray(family.matrix.T, dtype=np.uint8)
    best, witness, spent = 0, (), 0
    for k in range(1, k_max + 1):
        status, combo, checks = kernels.full_trace_subset(matrix, k, max_checks - spent)
        spent += checks
        if status == kernels.OVER_BUDGET:
            raise BudgetError(
                f"subfamily-search budget of {max_checks} candidate subfamilies "
                f"exhausted at size k={k}",
                best_known=best,
            )
        if status != kernels.FOUND:
            break
        best, witness = k, tuple(family.names[i] for i in combo)
    return DimensionSearch(best, witness, best == cap, spent)


def dual_vc_dimension(family: SetFamily, cap=MAX_DUAL_CAP,
                      max_checks=DEFAULT_SEARCH_BUDGET) -> int:
    return dual_vc_dimension_search(family, cap, max_checks).dimension


def dual_family(family: SetFamily) -> SetFamily:
    """The family {D_x} over ground = member names, D_x = {C : x in C}.

    Points with identical incidence collapse into one dual member whose name
    lists its source points, recording the multiplicity.  The dual ground
    carries uniform weights (measure is irrelevant to shattering).
    """
    if len(family) == 0:
        raise DomainError(
            "dual family of an empty family is undefined (empty dual ground)"
        )
    dual_ground = GroundSpace.uniform(family.names)
    columns = {}
    order = []
    for x, pid in enumerate(family.ground.points):
        key = family.matrix[:, x].tobytes()
        if key not in columns:
            columns[key] = ([], family.matrix[:, x].copy())
            order.append(key)
        columns[key][0].append(pid)
    names, rows = [], []
    for key in order:
        sources, col = columns[key]
        names.append("D(" + "+".join(sources) + ")")
        rows.append(col)
    return SetFamily(dual_ground, tuple(names), _as_bool_matrix(rows, len(family)))
