"""Command-line entry point.

Subcommands: ``simulate``, ``baseline``, ``genie``, ``segments``, ``rate``.
Settings may also come from a ``key = value`` file (``--config``) whose keys
mirror the long flag names; flags win over file values.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .codes import CodeSpec, rate
from .decoder import enumerate_segments
from .digital import DigitalSpec
from .harness import DEFAULT_TRIALS, ConfigError, SimulationConfig, run_genie, run_sweep

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "beta": 2.0,
    "puncture": False,
    "snr_start": 0.0,
    "snr_stop": 20.0,
    "snr_step": 1.0,
    "trials": DEFAULT_TRIALS,
    "seed": 0,
    "threads": 1,
    "bits": 3,
    "pam": 2,
    "frame": 1000,
}
_TYPES = {
    "code": str, "n": int, "beta": float, "snr_start": float, "snr_stop": float, "snr_step": float,
    "trials": int, "seed": int, "out": str, "threads": int, "bits": int, "pam": int, "frame": int,
}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "puncture":
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{path}:{lineno}: puncture must be true or false")
            values[key] = value.lower() in ("true", "1", "yes")
        elif key in _TYPES:
            try:
                values[key] = _TYPES[key](value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--snr-start", type=float)
    sweep.add_argument("--snr-stop", type=float)
    sweep.add_argument("--snr-step", type=float)
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out", help="CSV path (default: stdout)")
    sweep.add_argument("--threads", type=int)

    code = argparse.ArgumentParser(add_help=False)
    code.add_argument("--code", choices=["tent", "tent-turbo", "baker", "baker-turbo"])
    code.add_argument("--n", type=int, help="orbit length per component map")
    code.add_argument("--beta", type=float, help="tent map slope (tent families)")
    code.add_argument("--puncture", action="store_true", default=None,
                      help="send the systematic part once (turbo families)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")

    parser = argparse.ArgumentParser(prog="chaoscodes", description="Chaotic analog error-correction codes")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common, code, sweep], help="ML-decoded MSE vs SNR sweep")
    sub.add_parser("genie", parents=[common, code, sweep], help="tent code with known symbolic coding")
    base = sub.add_parser("baseline", parents=[common, sweep], help="quantizer + conv code + PAM sweep")
    base.add_argument("--bits", type=int, help="quantizer bits")
    base.add_argument("--pam", type=int, help="PAM order")
    base.add_argument("--frame", type=int, help="source symbols per frame")
    sub.add_parser("segments", parents=[common, code], help="list the affine segments of a code")
    sub.add_parser("rate", parents=[common, code], help="print the code rate")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if args.config:
        try:
            merged.update(read_config(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    merged.update({k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")})
    return merged


def _code_spec(s: dict) -> CodeSpec:
    if not s.get("code"):
        raise ConfigError("--code is required")
    if s.get("n") is None:
        raise ConfigError("--n is required")
    try:
        return CodeSpec(s["code"], s["n"], s["beta"], s["puncture"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _snr_grid(s: dict) -> tuple[float, ...]:
    start, stop, step = s["snr_start"], s["snr_stop"], s["snr_step"]
    if step <= 0:
        raise ConfigError("--snr-step must be positive")
    if stop < start:
        raise ConfigError("--snr-stop must not be below --snr-start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def _sim_config(system, s: dict) -> SimulationConfig:
    return SimulationConfig(system, _snr_grid(s), s["trials"], s["seed"],
                            Path(s["out"]) if s.get("out") else None, s["threads"])


def _format_region(seg) -> str:
    if seg.k == 1:
        lo, hi = seg.region
        return f"[{float(lo)!r}, {float(hi)!r}]"
    return " ".join(f"({float(x)!r}, {float(y)!r})" for x, y in seg.region)


def run(args: argparse.Namespace) -> int:
    s = _settings(args)
    cmd = args.command
    if cmd == "rate":
        print(rate(_code_spec(s)))
        return EXIT_OK
    if cmd == "segments":
        segs = enumerate_segments(_code_spec(s))
        print(len(segs))
        for i, seg in enumerate(segs):
            signs = " | ".join("".join("+" if v > 0 else "-" for v in pat) for pat in seg.signs)
            print(f"{i}\t{signs}\t{_format_region(seg)}")
        return EXIT_OK
    if cmd == "baseline":
        try:
            system = DigitalSpec(s["bits"], s["pam"], s["frame"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        system = _code_spec(s)
    cfg = _sim_config(system, s)
    result = run_genie(cfg) if cmd == "genie" else run_sweep(cfg)
    if cfg.out is None:
        sys.stdout.write(result.csv_text())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"chaoscodes: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError) as exc:
        print(f"chaoscodes: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
