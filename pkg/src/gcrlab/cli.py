"""Command line: ``gcrlab run``, ``gcrlab validate``, ``gcrlab catalog list``.

Exit codes: 0 success, 2 scene/schema error, 3 numerical abort, 4 I/O
failure. Errors are printed to stderr as one JSON object.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CATALOG
from .errors import ConfigurationError, DivergenceError, GCRError, MetricError, SchemaError

OUT_ENV = "GCRLAB_OUT"
EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _error(code, kind, message, **extra):
    payload = {"status": "error", "exit_code": code, "error": kind, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _add_scene_args(p):
    p.add_argument("--scene", required=True, help="scene file (.yaml, .yml or .json)")
    p.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="set a dotted scene key before validation, e.g. grid.resolution=32 (repeatable)",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="gcrlab", description="Gauss-Codazzi-Ricci numerical laboratory")
    parser.add_argument("--version", action="version", version=f"gcrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scene and write reports")
    _add_scene_args(run)
    run.add_argument("--out", help=f"output directory (default: scene output.dir, ${OUT_ENV}, or ./gcrlab-out)")
    run.add_argument("--deterministic", action="store_true", help="serial reductions and no timestamps")
    run.add_argument("--threads", type=int, default=1, help="worker threads for independent eps values")

    val = sub.add_parser("validate", help="schema and cross-field validation without computing")
    _add_scene_args(val)

    cat = sub.add_parser("catalog", help="catalog of exact embeddings")
    cat.add_argument("action", choices=["list"])
    return parser


def _load(args):
    from .scene import load_scene

    return load_scene(args.scene, args.override)


def _output_dir(args, scene):
    if args.out:
        return Path(args.out)
    if "dir" in scene.output:
        return Path(scene.output["dir"])
    return Path(os.environ.get(OUT_ENV, "gcrlab-out"))


def cmd_validate(args):
    scene = _load(args)
    print(json.dumps({"status": "ok", "scene": args.scene, "scene_sha256": scene.sha256}, sort_keys=True))
    return EXIT_OK


def cmd_run(args):
    from .reports import run_experiment, write_reports

    if args.threads < 1:
        raise SchemaError("--threads must be at least 1", path="--threads")
    scene = _load(args)
    deterministic = args.deterministic or bool(scene.output.get("deterministic", False))
    prefix = scene.output.get("prefix") or Path(args.scene).stem
    report, tables, fields = run_experiment(scene, threads=args.threads, deterministic=deterministic)
    if not scene.output.get("dump_fields", True):
        fields = None
    with np.errstate(all="ignore"):
        paths = write_reports(_output_dir(args, scene), prefix, report, tables, fields)
    print(json.dumps({"status": "ok", "files": [str(p) for p in paths]}, sort_keys=True))
    return EXIT_OK


def cmd_catalog(args):
    for name, note in CATALOG.items():
        print(f"{name}\t{note}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "validate": cmd_validate, "catalog": cmd_catalog}[args.command]
    try:
        return handler(args)
    except SchemaError as exc:
        return _error(EXIT_SCHEMA, "schema", str(exc), path=exc.path)
    except (ConfigurationError, MetricError) as exc:
        return _error(EXIT_SCHEMA, "configuration", str(exc))
    except DivergenceError as exc:
        return _error(EXIT_NUMERIC, "divergence", str(exc), history_tail=exc.history[-5:])
    except (GCRError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _error(EXIT_NUMERIC, "numerical", str(exc))
    except OSError as exc:
        return _error(EXIT_IO, "io", str(exc), file=getattr(exc, "filename", None))


if __name__ == "__main__":
    sys.exit(main())
