"""Single JSON instance format shared by every CLI command.

An instance file declares points with weights, named sets, optional
functions with an optional envelope, and named process configurations.
Member and function order follows file order.  Validation failures carry
distinct messages per failure mode and map to CLI exit code 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .boundary import CounterexampleInstance
from .bracketing import DiscreteFunctionClass
from .core import GroundSpace, Partition, SetFamily, join
from .errors import ValidationError
from .processes import ProcessConfig

INSTANCE_SCHEMA = "vckit.instance/1"
WEIGHT_WINDOW = 1e-9


@dataclass(frozen=True, eq=False)
class Instance:
    ground: GroundSpace
    family: SetFamily
    functions: DiscreteFunctionClass | None = None
    processes: dict = field(default_factory=dict)


def parse_instance(data: dict, source: str = "<instance>") -> Instance:
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: instance must be a JSON object")
    unknown = set(data) - {"schema", "points", "sets", "functions", "envelope",
                           "processes"}
    if unknown:
        raise ValidationError(f"{source}: unknown top-level keys {sorted(unknown)}")
    raw_points = data.get("points")
    if not raw_points:
        raise ValidationError(f"{source}: 'points' must be a nonempty list")
    ids, weights = [], []
    for entry in raw_points:
        if not isinstance(entry, dict) or set(entry) != {"id", "weight"}:
            raise ValidationError(
                f"{source}: each point needs exactly the keys 'id' and 'weight'"
            )
        ids.append(str(entry["id"]))
        weights.append(float(entry["weight"]))
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{source}: duplicate point ids")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValidationError(f"{source}: point weights must be nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_WINDOW:
        raise ValidationError(
            f"{source}: point weights sum to {total!r}, expected 1 within {WEIGHT_WINDOW:g}"
        )
    ground = GroundSpace(tuple(ids), w)

    known = set(ids)
    sets = data.get("sets", {})
    if not isinstance(sets, dict):
        raise ValidationError(f"{source}: 'sets' must map names to point-id lists")
    for name, members in sets.items():
        for pid in members:
            if pid not in known:
                raise ValidationError(
                    f"{source}: unknown point id {pid!r} in set {name!r}"
                )
    family = SetFamily.from_members(ground, sets)

    functions = None
    raw_functions = data.get("functions")
    if raw_functions:
        if not isinstance(raw_functions, dict):
            raise ValidationError(f"{source}: 'functions' must map names to value lists")
        values = []
        for name, vals in raw_functions.items():
            if len(vals) != len(ids):
                raise ValidationError(
                    f"{source}: function {name!r} has {len(vals)} values for "
                    f"{len(ids)} points"
                )
            values.append([float(v) for v in vals])
        envelope = data.get("envelope")
        if envelope is not None:
            if len(envelope) != len(ids):
                raise ValidationError(
                    f"{source}: envelope has {len(envelope)} values for {len(ids)} points"
                )
            envelope = np.asarray([float(v) for v in envelope])
            bad = np.abs(np.asarray(values)) > envelope[None, :]
            if bad.any():
                j, x = np.argwhere(bad)[0]
                raise ValidationError(
                    f"{source}: envelope fails to dominate function "
                    f"{list(raw_functions)[j]!r} at point {ids[x]!r}"
                )
        functions = DiscreteFunctionClass(
            ground, tuple(raw_functions), np.asarray(values), envelope
        )
    elif data.get("envelope") is not None:
        raise ValidationError(f"{source}: envelope given without functions")

    processes = {}
    for name, cfg in (data.get("processes") or {}).items():
        processes[name] = ProcessConfig.from_dict(cfg)

    return Instance(ground, family, functions, processes)


def load_instance(path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({e})") from None
    return parse_instance(data, source=str(path))


def instance_to_dict(instance: Instance) -> dict:
    out = {
        "schema": INSTANCE_SCHEMA,
        "points": [
            {"id": pid, "weight": float(wt)}
            for pid, wt in zip(instance.ground.points, instance.ground.weights)
        ],
        "sets": {
            name: list(ids) for name, ids in instance.family.members().items()
        },
    }
    if instance.functions is not None:
        out["functions"] = {
            name: [float(v) for v in row]
            for name, row in zip(instance.functions.names, instance.functions.values)
        }
        out["envelope"] = [float(v) for v in instance.functions.envelope]
    if instance.processes:
        out["processes"] = {
            name: cfg.to_dict() for name, cfg in instance.processes.items()
        }
    return out


def counterexample_to_dict(ce: CounterexampleInstance) -> dict:
    instance = Instance(ce.ground, ce.family)
    return instance_to_dict(instance)


def resolve_partition(spec: str, instance: Instance) -> Partition:
    """Partition specs: 'trivial', 'singletons', 'join:NAME,NAME,...' or
    '@path.json' pointing at {"cells": {label: [point ids]}}."""
    if spec == "trivial":
        return Partition.trivial(instance.ground)
    if spec == "singletons":
        return Partition.singletons(instance.ground)
    if spec.startswith("join:"):
        names = [s for s in spec[len("join:"):].split(",") if s]
        indices = []
        for name in names:
            if name not in instance.family.names:
                raise ValidationError(f"unknown set {name!r} in partition spec")
            indices.append(instance.family.names.index(name))
        return join(instance.family, indices)
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            data = json.load(fh)
        cells = data.get("cells")
        if not isinstance(cells, dict):
            raise ValidationError(f"{spec[1:]}: expected a 'cells' mapping")
        return Partition.from_cells(instance.ground, cells)
    raise ValidationError(
        f"bad partition spec {spec!r}: use trivial | singletons | join:... | @file"
    )
