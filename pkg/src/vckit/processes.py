"""Stationary process generators and uniform-discrepancy measurement.

Three generator kinds: iid draws from a marginal, a stationary Markov
chain, and an irrational rotation snapped onto an N-point grid of [0, 1)
(the snap commutes with the step, so the trajectory is an integer rotation
by round(theta * N) grid steps and the uniform grid law is exactly
invariant).  The discrepancy of a family against a sample is the largest
absolute gap between a member's empirical frequency and its probability.

Reproducibility: every stream is PCG64 seeded with SeedSequence((seed,
replicate)); identical configs give bit-identical trajectories regardless
of backend or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .core import GroundSpace, SetFamily
from .errors import DomainError

STATIONARITY_TOL = 1e-10
ROW_SUM_TOL = 1e-9

PROCESS_KINDS = ("iid", "markov", "rotation")


@dataclass(frozen=True)
class ProcessConfig:
    """Declarative description of one process: kind, parameters, seed, length."""

    kind: str
    seed: int
    length: int
    marginal: tuple | None = None  # iid; defaults to the ground weights
    transition: tuple | None = None  # markov: row-stochastic matrix
    initial: tuple | None = None  # markov; defaults to the stationary law
    theta: float | None = None  # rotation angle
    grid: int = 1024  # rotation grid size

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise DomainError(f"unknown process kind {self.kind!r}")
        if self.length < 1:
            raise DomainError("process length must be positive")
        if self.kind == "markov" and self.transition is None:
            raise DomainError("markov process needs a transition matrix")
        if self.kind == "rotation" and self.theta is None:
            raise DomainError("rotation process needs an angle theta")

    def to_dict(self):
        out = {"kind": self.kind, "seed": self.seed, "length": self.length}
        if self.kind == "iid" and self.marginal is not None:
            out["marginal"] = [float(p) for p in self.marginal]
        if self.kind == "markov":
            out["transition"] = [[float(p) for p in row] for row in self.transition]
            if self.initial is not None:
                out["initial"] = [float(p) for p in self.initial]
        if self.kind == "rotation":
            out["theta"] = float(self.theta)
            out["grid"] = int(self.grid)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ProcessConfig":
        known = {"kind", "seed", "length", "marginal", "transition", "initial",
                 "theta", "grid"}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown process fields: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("marginal", "initial"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(float(p) for p in kwargs[key])
        if kwargs.get("transition") is not None:
            kwargs["transition"] = tuple(
                tuple(float(p) for p in row) for row in kwargs["transition"]
            )
        return cls(**kwargs)


def rng_for(seed: int, replicate: int = 0) -> np.random.Generator:
    """The pinned substream scheme: PCG64 over SeedSequence((seed, replicate))."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, replicate))))


def rotation_ground(grid: int) -> GroundSpace:
    """The N-point grid of [0, 1) with the uniform grid measure."""
    if grid < 1:
        raise DomainError("rotation grid must be positive")
    return GroundSpace.uniform(tuple(f"g{i}" for i in range(grid)))


def _check_distribution(p, n, what):
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n,):
        raise DomainError(f"{what} must have one entry per ground point")
    if np.any(p < 0):
        raise DomainError(f"{what} must be nonnegative")
    if abs(float(p.sum()) - 1.0) > ROW_SUM_TOL:
        raise DomainError(f"{what} must sum to 1 (got {float(p.sum())})")
    return p


def stationary_law(transition: np.ndarray) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 by least squares."""
    k = transition.shape[0]
    a = np.vstack([transition.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def _validate_markov(config: ProcessConfig, n: int):
    P = np.asarray(config.transition, dtype=np.float64)
    if P.shape != (n, n):
        raise DomainError(
            f"transition matrix must be {n}x{n} for this ground (got {P.shape})"
        )
    if np.any(P < 0):
        raise DomainError("transition probabilities must be nonnegative")
    rows = P.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > ROW_SUM_TOL):
        raise DomainError(f"transition rows must sum to 1 (max error {np.max(np.abs(rows - 1.0))})")
    if config.initial is None:
        init = stationary_law(P)
    else:
        init = _check_distribution(config.initial, n, "initial law")
    drift = float(np.max(np.abs(init @ P - init)))
    if drift > STATIONARITY_TOL:
        raise DomainError(
            f"initial law is not stationary: max |pi P - pi| = {drift:g} "
            f"exceeds {STATIONARITY_TOL:g}"
        )
    return P, init


def _inverse_cdf(cum: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, cum.size - 1)


def generate(config: ProcessConfig, ground: GroundSpace,
             replicate: int = 0) -> np.ndarray:
    """Generate a trajectory of point indices into the ground order.

    Deterministic given (config.seed, replicate).  Markov configs are
    validated for stationarity of the initial law before any sampling.
    """
    n = len(ground)
    rng = rng_for(config.seed, replicate)
    if config.kind == "iid":
        p = ground.weights if config.marginal is None else _check_distribution(
            config.marginal, n, "iid marginal"
        )
        cum = np.cumsum(p)
        us = rng.random(config.length)
        return np.minimum(np.searchsorted(cum, us, side="right"), n - 1).astype(np.int64)
    if config.kind == "markov":
        P, init = _validate_markov(config, n)
        cum_rows = np.ascontiguousarray(np.cumsum(P, axis=1))
        start = _inverse_cdf(np.cumsum(init), rng.random())
        if config.length == 1:
            return np.array([start], dtype=np.int64)
        steps = kernels.markov_path(cum_rows, start, rng.random(config.length - 1))
        return np.concatenate(([start], steps)).astype(np.int64)
    # rotation
    grid = int(config.grid)
    if n != grid:
        raise DomainError(
            f"rotation ground must have {grid} grid points (got {n})"
        )
    if not np.allclose(ground.weights, 1.0 / grid, rtol=0, atol=1e-12):
        raise DomainError("rotation ground must carry the uniform grid measure")
    step = int(np.rint(config.theta * grid)) % grid
    start = int(rng.integers(grid))
    return (start + step * np.arange(config.length, dtype=np.int64)) % grid


def truth_weights(config: ProcessConfig, ground: GroundSpace) -> np.ndarray:
    """The limiting law the empirical frequencies converge to."""
    n = len(ground)
    if config.kind == "iid":
        if config.marginal is None:
            return np.asarray(ground.weights)
        return _check_distribution(config.marginal, n, "iid marginal")
    if config.kind == "markov":
        _, init = _validate_markov(config, n)
        return init
    return np.full(n, 1.0 / n)


def _deviations(family: SetFamily, counts: np.ndarray, total: int,
                truth: np.ndarray) -> np.ndarray:
    member_counts = family.matrix.astype(np.int64) @ counts
    member_truth = family.matrix.astype(np.float64) @ truth
    return np.abs(member_counts / total - member_truth)


def discrepancy(family: SetFamily, sample: np.ndarray,
                truth: np.ndarray | None = None):
    """(sup deviation, index of the first member attaining it).

    sample holds point indices into the family's ground; truth defaults to
    the ground weights.
    """
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise DomainError("discrepancy of an empty sample is undefined")
    n = len(family.ground)
    if sample.min() < 0 or sample.max() >= n:
        raise DomainError("sample contains indices outside the ground")
    truth = np.asarray(family.ground.weights if truth is None else truth, dtype=np.float64)
    if len(family) == 0:
        return 0.0, -1
    counts = np.bincount(sample, minlength=n)
    devs = _deviations(family, counts, sample.size, truth)
    arg = int(np.argmax(devs))
    return float(devs[arg]), arg


@dataclass(frozen=True)
class TraceEntry:
    n: int
    delta: float
    argmax_member: int


@dataclass(frozen=True, eq=False)
class DiscrepancyTrace:
    """Discrepancies along one sample path at increasing checkpoints."""

    config: ProcessConfig
    replicate: int
    family_names: tuple
    entries: tuple

    def deltas(self):
        return np.array([e.delta for e in self.entries])

    def to_rows(self):
        """CSV rows (n, delta_n, argmax_member, seed); seed is the replicate
        substream index, the base seed lives in the config."""
        return [
            (e.n, e.delta, self.family_names[e.argmax_member]
             if e.argmax_member >= 0 else "", self.replicate)
            for e in self.entries
        ]

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "replicate": self.replicate,
            "entries": [
                {
                    "n": e.n,
                    "delta": e.delta,
                    "argmax_member": self.family_names[e.argmax_member]
                    if e.argmax_member >= 0 else None,
                }
                for e in self.entries
            ],
        }


def ulln_experiment(family: SetFamily, config: ProcessConfig, checkpoints,
                    replicate: int = 0, truth: np.ndarray | None = None) -> DiscrepancyTrace:
    """Trace the discrepancy at each checkpoint along a single trajectory.

    All checkpoints share one path (prefix consistency), so the trace shows
    pathwise convergence rather than independent-resample noise.
    """
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints or any(c <= 0 for c in checkpoints):
        raise DomainError("checkpoints must be positive")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise DomainError("checkpoints must be strictly increasing")
    horizon = checkpoints[-1]
    path = generate(replace(config, length=horizon), family.ground, replicate)
    if truth is None:
        truth = truth_weights(config, family.ground)
    n = len(family.ground)
    counts = np.zeros(n, dtype=np.int64)
    entries = []
    prev = 0
    for cp in checkpoints:
        counts += np.bincount(path[prev:cp], minlength=n)
        prev = cp
        if len(family) == 0:
            entries.append(TraceEntry(cp, 0.0, -1))
            continue
        devs = _deviations(family, counts, cp, truth)
        arg = int(np.argmax(devs))
        entries.append(TraceEntry(cp, float(devs[arg]), arg))
    return DiscrepancyTrace(
        config=config,
        replicate=replicate,
        family_names=family.names,
        entries=tuple(entries),
    )
