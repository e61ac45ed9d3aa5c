"""Command line interface.

    kerr-lzsm spectro  [--config FILE] [--out DIR] [--jobs N] [--seed S]
    kerr-lzsm lzsm     [--config FILE] [--out DIR] [--jobs N] [--seed S]
    kerr-lzsm chaos    [--config FILE] [--out DIR] [--seed S] [--force]
    kerr-lzsm validate

Exit status: 0 ok, 1 degraded (more than 10% failed grid points),
2 refused or failed.
"""
from __future__ import annotations

import argparse
import copy
import sys

from ..exceptions import ConfigError, CutoffGuardError, KerrLZSMError
from .config import CHAOS_DEFAULT, LZSM_DEFAULT, SPECTRO_DEFAULT, load_config, parse_config

EXIT_OK, EXIT_DEGRADED, EXIT_FAILED = 0, 1, 2

_DEFAULTS = {"spectro": SPECTRO_DEFAULT, "lzsm": LZSM_DEFAULT, "chaos": CHAOS_DEFAULT}
_METHOD = {"spectro": "static", "lzsm": "harmonic", "chaos": "floquet-map"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (schema_version 1); built-in defaults otherwise")
    common.add_argument("--out", help="output directory (default: ./out-<command>)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--force", action="store_true", help="bypass the cutoff guard")

    ap = argparse.ArgumentParser(prog="kerr-lzsm", description=__doc__.split("\n\n")[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("spectro", parents=[common], help="power x detuning two-tone style map")
    sub.add_parser("lzsm", parents=[common], help="detuning x modulation (zeta or Omega) map")
    sub.add_parser("chaos", parents=[common], help="spectral statistics of one spectrum")
    sub.add_parser("validate", parents=[common], help="run the oracle suite")
    return ap


def _load(args) -> "object":
    method = _METHOD[args.command]
    if args.config:
        cfg = load_config(args.config, method_default=method)
        doc = copy.deepcopy(cfg.raw)
    else:
        doc = copy.deepcopy(_DEFAULTS[args.command])
    if args.seed is not None:
        doc["seed"] = args.seed
    return parse_config(doc, method_default=method)


def _validate() -> int:
    from ..validation import oracle_suite

    checks = oracle_suite()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} oracle checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _validate()
    from . import run

    out = args.out or f"out-{args.command}"
    try:
        cfg = _load(args)
        if args.command == "chaos":
            res = run.chaos_run(cfg, out, force=args.force)
            csr = res["csr"]
            print(
                f"<r>={csr['r_mean']} <cos theta>={csr['cos_theta_mean']} "
                f"bulk={csr['bulk_count']} closer_to={csr['closer_to']}"
            )
            if res["ssqt"].get("computed"):
                print(f"SSQT -<cos theta>={res['ssqt']['minus_cos_theta']:.4f}")
            print(f"wrote {out}")
            return EXIT_OK
        result = run.run_sweep(cfg, jobs=args.jobs)
        run.write_sweep(result, cfg, out)
    except CutoffGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except KerrLZSMError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(f"{len(result.rows)} points, {result.failures} failed; wrote {out}")
    if result.degraded:
        print("run degraded: more than 10% of grid points failed", file=sys.stderr)
        return EXIT_DEGRADED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
