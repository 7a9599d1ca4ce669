"""Command-line surface tying the modules into reproducible experiments.

Subcommands: dim, boundary, approx, brackets, ulln, counterexample.  Every
run emits a report embedding the resolved configuration, library versions,
seed, and wall time; the results payload is byte-stable, and --verify
recomputes it and fails (exit 4) on any difference.

Exit codes: 0 computed (including negative findings such as a failed
approximation), 2 invalid input, 3 search budget exceeded, 4 internal
invariant violation.  VCKIT_THREADS caps the numba thread pool; results do
not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, kernels
from .boundary import approximate, boundary_profile, make_counterexample
from .bracketing import (
    bracket_cover_from_partition,
    vc_graph_brackets,
    vc_major_brackets,
)
from .core import dual_vc_dimension_search, vc_dimension, vc_dimension_search
from .errors import (
    BudgetError,
    DomainError,
    InternalInvariantError,
    ValidationError,
    VCKitError,
)
from .instance import (
    counterexample_to_dict,
    instance_to_dict,
    load_instance,
    resolve_partition,
)
from .processes import ulln_experiment

REPORT_SCHEMA = "vckit.report/1"


def _versions():
    try:
        import numba

        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = None
    return {
        "vckit": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba_version,
        "kernel_backend": kernels.BACKEND,
    }


def _apply_thread_env():
    raw = os.environ.get("VCKIT_THREADS")
    if raw and kernels.USING_NUMBA:
        import numba

        numba.set_num_threads(max(1, int(raw)))


def results_bytes(results: dict) -> bytes:
    return json.dumps(results, indent=2).encode()


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _run(args, command, config, compute, seed=None):
    t0 = time.monotonic()
    results, csv_payload = compute()
    wall = time.monotonic() - t0
    if args.verify:
        again, _ = compute()
        if results_bytes(again) != results_bytes(results):
            raise InternalInvariantError(
                "verification re-run produced a different results payload"
            )
    if args.format == "csv":
        if csv_payload is None:
            raise ValidationError(
                f"--format csv is not available for the {command} report"
            )
        _emit(_csv_text(*csv_payload), args.output)
        return 0
    report = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "config": config,
        "results": results,
        "versions": _versions(),
        "seed": seed,
        "wall_time_s": wall,
    }
    _emit(json.dumps(report, indent=2), args.output)
    return 0


def cmd_dim(args):
    instance = load_instance(args.input)
    config = {"input": str(args.input), "dual": args.dual, "cap": args.cap}

    def compute():
        budget = {} if args.budget is None else {"max_checks": args.budget}
        if args.dual:
            cap = {} if args.cap is None else {"cap": args.cap}
            search = dual_vc_dimension_search(instance.family, **cap, **budget)
        else:
            search = vc_dimension_search(instance.family, cap=args.cap, **budget)
        results = {
            "mode": "dual" if args.dual else "primal",
            "dimension": search.dimension,
            "witness": list(search.witness),
            "at_cap": search.at_cap,
            "subsets_checked": search.checks,
        }
        return results, None

    return _run(args, "dim", config, compute)


def cmd_boundary(args):
    instance = load_instance(args.input)
    partition = resolve_partition(args.partition, instance)
    config = {"input": str(args.input), "partition": args.partition}

    def compute():
        profile = boundary_profile(instance.family, partition)
        results = {
            "sup_boundary": profile.sup,
            "witness": profile.witness,
            "partition_cells": {
                label: list(ids) for label, ids in partition.cells().items()
            },
            "members": [
                {
                    "name": name,
                    "boundary_measure": measure,
                    "boundary": list(instance.ground.ids(mask)),
                }
                for name, measure, mask in zip(
                    instance.family.names,
                    (float(m) for m in profile.measures),
                    profile.boundary_masks,
                )
            ],
        }
        rows = [(name, m) for name, m in profile.to_rows()]
        return results, (("member", "boundary_measure"), rows)

    return _run(args, "boundary", config, compute)


def cmd_approx(args):
    instance = load_instance(args.input)
    config = {
        "input": str(args.input),
        "epsilon": args.epsilon,
        "strategy": args.strategy,
        "max_cells": args.max_cells,
    }

    def compute():
        result = approximate(
            instance.family, args.epsilon, args.strategy, args.max_cells
        )
        rows = result.trace_rows()
        return result.to_dict(), (("step", "joined_index", "sup_boundary"), rows)

    return _run(args, "approx", config, compute)


def cmd_brackets(args):
    instance = load_instance(args.input)
    config = {
        "input": str(args.input),
        "epsilon": args.epsilon,
        "mode": args.mode,
        "M": args.M,
        "s_levels": args.s_levels,
        "partition": args.partition,
    }

    def compute():
        if args.mode == "sets":
            if args.partition is not None:
                partition = resolve_partition(args.partition, instance)
            else:
                search = approximate(instance.family, args.epsilon, "greedy")
                partition = search.partition
            cover = bracket_cover_from_partition(instance.family, partition)
        else:
            if instance.functions is None or len(instance.functions) == 0:
                raise ValidationError(
                    f"--mode {args.mode} needs functions in the instance file"
                )
            if args.mode == "major":
                cover = vc_major_brackets(instance.functions, args.M, args.epsilon)
            else:
                cover = vc_graph_brackets(
                    instance.functions, args.M, args.epsilon, args.s_levels
                )
        payload = cover.to_dict()
        payload["max_width"] = max((b.width for b in cover.brackets), default=0.0)
        return payload, None

    return _run(args, "brackets", config, compute)


def cmd_ulln(args):
    instance = load_instance(args.input)
    if not instance.processes:
        raise ValidationError("instance declares no processes")
    name = args.process
    if name is None:
        if len(instance.processes) != 1:
            raise ValidationError(
                f"--process required; instance declares {sorted(instance.processes)}"
            )
        name = next(iter(instance.processes))
    if name not in instance.processes:
        raise ValidationError(f"unknown process {name!r}")
    process = instance.processes[name]
    checkpoints = [int(c) for c in args.checkpoints.split(",") if c]
    config = {
        "input": str(args.input),
        "process": name,
        "process_config": process.to_dict(),
        "checkpoints": checkpoints,
        "seeds": args.seeds,
    }

    def compute():
        traces = [
            ulln_experiment(instance.family, process, checkpoints, replicate=r)
            for r in range(args.seeds)
        ]
        deltas = np.array([t.deltas() for t in traces])
        medians = np.median(deltas, axis=0)
        results = {
            "process": name,
            "checkpoints": checkpoints,
            "median_delta": [float(d) for d in medians],
            "traces": [t.to_dict() for t in traces],
        }
        rows = [row for t in traces for row in t.to_rows()]
        return results, (("n", "delta_n", "argmax_member", "seed"), rows)

    return _run(args, "ulln", config, compute, seed=process.seed)


def cmd_counterexample(args):
    masses = None
    if args.masses:
        masses = [float(a) for a in args.masses.split(",") if a]
    config = {
        "depth": args.depth,
        "masses": masses,
        "instance_out": args.instance_out,
    }

    def compute():
        ce = make_counterexample(args.depth, masses)
        instance_doc = counterexample_to_dict(ce)
        if args.instance_out:
            with open(args.instance_out, "w") as fh:
                json.dump(instance_doc, fh, indent=2)
                fh.write("\n")
        results = {
            "depth": ce.depth,
            "masses": list(ce.masses),
            "partial_sums": list(ce.partial_sums),
            "total_mass": ce.partial_sums[-1],
            "remainder": 1.0 - ce.partial_sums[-1],
            "vc_dimension": vc_dimension(ce.family),
            "instance": instance_doc,
        }
        return results, None

    return _run(args, "counterexample", config, compute)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vckit",
        description="Exact VC dimensions, partition boundaries, bracket covers, "
        "and uniform-law simulations on finite weighted grounds.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default=None, help="write to a file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--verify", action="store_true",
                        help="recompute and fail on any payload difference")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="VC or dual VC dimension")
    p.add_argument("input")
    p.add_argument("--dual", action="store_true")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--budget", type=int, default=None,
                   help="search budget in candidate subsets")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("boundary", parents=[common], help="boundary profile under a partition")
    p.add_argument("input")
    p.add_argument("--partition", required=True,
                   help="trivial | singletons | join:NAME,... | @cells.json")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("approx", parents=[common], help="search for a boundary-small partition")
    p.add_argument("input")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--strategy", choices=("join-prefix", "greedy"), default="greedy")
    p.add_argument("--max-cells", type=int, default=None)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("brackets", parents=[common], help="construct a bracket cover")
    p.add_argument("input")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mode", choices=("sets", "major", "graph"), default="sets")
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--s-levels", type=int, default=256)
    p.add_argument("--partition", default=None,
                   help="sets mode: partition spec (default: greedy search)")
    p.set_defaults(func=cmd_brackets)

    p = sub.add_parser("ulln", parents=[common], help="uniform-law discrepancy trace")
    p.add_argument("input")
    p.add_argument("--process", default=None)
    p.add_argument("--checkpoints", required=True, help="comma separated, increasing")
    p.add_argument("--seeds", type=int, default=1, help="number of replicate substreams")
    p.set_defaults(func=cmd_ulln)

    p = sub.add_parser("counterexample", parents=[common],
                       help="materialize the disjoint-interval instance")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--masses", default=None, help="comma separated positive masses")
    p.add_argument("--instance-out", default=None,
                   help="also write a ready-to-use instance file here")
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_thread_env()
    try:
        return args.func(args)
    except BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValidationError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InternalInvariantError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except VCKitError as e:  # pragma: no cover - safety net
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
