"""Command-line entry point.

Config files hold one ``key = value`` per line (``#`` starts a comment); keys
are the long flag names without dashes, list values are comma separated.
Flags override the file. Exit codes: 0 success, 1 verification failure,
2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
COMMANDS = ("verify-gadgets", "benchmark", "ising", "vqe", "epsilon-sweep", "tables")


class ConfigError(ValueError):
    pass


# key -> (parser, is_list)
SCHEMA: dict[str, tuple[type, bool]] = {
    "p": (float, False), "epsilon": (float, True), "shots": (int, False), "depth": (int, True),
    "seed": (int, False), "variant": (str, True), "out": (str, False), "format": (str, False),
    "threads": (int, False), "steps": (int, False), "delta": (float, False), "h": (float, False),
}


@dataclass
class RunConfig:
    command: str
    p: float = 1e-3
    epsilon: list[float] = field(default_factory=lambda: [0.0])
    shots: Optional[int] = None
    depth: list[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 128, 256, 512])
    seed: int = 0
    variant: list[str] = field(default_factory=lambda: ["bare", "encoded", "encoded_with_EC"])
    out: Optional[str] = None
    format: str = "csv"
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    steps: int = 50
    delta: float = 0.1
    h: float = 1.0

    def validate(self) -> "RunConfig":
        from .experiments.common import VARIANTS
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if not 0 <= self.p <= 1:
            raise ConfigError("p: must lie in [0, 1]")
        if any(not 0 <= e <= 1 for e in self.epsilon):
            raise ConfigError("epsilon: values must lie in [0, 1]")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots: must be positive")
        if any(d < 1 for d in self.depth):
            raise ConfigError("depth: values must be positive")
        bad = [v for v in self.variant if v not in VARIANTS]
        if bad:
            raise ConfigError(f"variant: unknown {bad}; choose from {list(VARIANTS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format: must be csv or json")
        if self.threads < 1:
            raise ConfigError("threads: must be positive")
        if self.steps < 1 or self.delta <= 0:
            raise ConfigError("steps and delta must be positive")
        if self.out is not None:
            parent = os.path.dirname(os.path.abspath(self.out))
            if not os.access(parent, os.W_OK):
                raise ConfigError(f"out: directory {parent} is not writable")
        return self

    def hashable(self) -> dict:
        d = dict(self.__dict__)
        d.pop("out")
        d.pop("threads")
        d.pop("format")
        return d


def _convert(key: str, raw: str, where: str):
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    kind, is_list = SCHEMA[key]
    parts = [s.strip() for s in raw.split(",")] if is_list else [raw.strip()]
    try:
        vals = [kind(s) for s in parts if s]
    except ValueError:
        raise ConfigError(f"{where}: {key} expects {kind.__name__}, got {raw.strip()!r}") from None
    if not vals:
        raise ConfigError(f"{where}: {key} has no value")
    return vals if is_list else vals[0]


def read_config(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    out = {}
    for n, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, raw = (s.strip() for s in text.split("=", 1))
        out[key] = _convert(key, raw, f"{path}:{n}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bitflip-ft", description="Bit-flip code gadget verification and experiments")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value file; flags override it")
    ap.add_argument("--p", type=float)
    ap.add_argument("--epsilon", type=float, action="append", help="repeatable")
    ap.add_argument("--shots", type=int, help="accepted shots per point (per group for vqe)")
    ap.add_argument("--depth", "--d", type=int, action="append", help="benchmark depth; repeatable")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--variant", action="append", help="bare, encoded or encoded_with_EC; repeatable")
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--threads", type=int)
    ap.add_argument("--steps", type=int, help="Trotter steps")
    ap.add_argument("--delta", type=float, help="Trotter step length")
    ap.add_argument("--h", type=float, help="transverse field")
    return ap


def resolve(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("invalid command line") if exc.code else exc
    values = read_config(ns.config) if ns.config else {}
    for key in SCHEMA:
        v = getattr(ns, key)
        if v is not None:
            values[key] = v
    return RunConfig(ns.command, **values).validate()


# ---------------------------------------------------------------- workflows

DEFAULT_SHOTS = {"benchmark": 100_000, "ising": 10_000, "vqe": 100_000, "epsilon-sweep": 100_000}


def _emit(cfg: RunConfig, columns, rows, extra: dict) -> str:
    from .experiments.common import config_hash, header_lines, to_csv, to_json, tool_version
    if cfg.format == "json":
        meta = {"tool": "bitflip_ft", "version": tool_version(), "command": cfg.command,
                "config_hash": config_hash(cfg.hashable()), "seed": cfg.seed, "channel": "product", **extra}
        return to_json(rows, meta) + "\n"
    return to_csv(columns, rows, header_lines(cfg.command, cfg.hashable(), cfg.seed, extra))


def _benchmark(cfg: RunConfig) -> tuple[str, int]:
    from .experiments.benchmark import BENCHMARK_COLUMNS, BenchmarkConfig, benchmark_rows, run_benchmark
    shots = cfg.shots or DEFAULT_SHOTS["benchmark"]
    results = [run_benchmark(BenchmarkConfig(d, cfg.p, shots, v, cfg.epsilon[0]), cfg.seed, cfg.threads)
               for v in cfg.variant for d in cfg.depth]
    total = shots * len(results)
    return _emit(cfg, BENCHMARK_COLUMNS, benchmark_rows(results),
                 {"accepted_shots": total, "raw_shots": total}), EXIT_OK


def _ising(cfg: RunConfig) -> tuple[str, int]:
    from .experiments.ising import ISING_COLUMNS, IsingConfig, run_ising
    shots = cfg.shots or DEFAULT_SHOTS["ising"]
    rows, raw, acc = [], 0, 0
    for v in cfg.variant:
        s = run_ising(IsingConfig(2, cfg.h, cfg.delta, cfg.steps, shots, v, cfg.p, cfg.epsilon[0]), cfg.seed)
        rows.extend(s.rows())
        raw += int(s.raw_shots.sum())
        acc += shots * cfg.steps
    return _emit(cfg, ISING_COLUMNS, rows, {"accepted_shots": acc, "raw_shots": raw}), EXIT_OK


def _vqe(cfg: RunConfig, sweep: bool) -> tuple[str, int]:
    from .experiments.vqe import VQE_COLUMNS, epsilon_sweep, exact_ground_energy, optimize_ansatz
    shots = cfg.shots or DEFAULT_SHOTS["vqe"]
    theta = optimize_ansatz(seed=cfg.seed).theta
    eps = cfg.epsilon if sweep else cfg.epsilon[:1]
    est = epsilon_sweep(theta, eps, cfg.p, cfg.variant, shots, cfg.seed)
    e0 = exact_ground_energy()
    rows = [dict(e.row(), abs_error=abs(e.energy - e0)) for e in est]
    extra = {"exact_energy": repr(e0), "accepted_shots": sum(e.accepted_shots for e in est),
             "raw_shots": sum(e.raw_shots for e in est)}
    return _emit(cfg, VQE_COLUMNS + ("abs_error",), rows, extra), EXIT_OK


def _verify(cfg: RunConfig) -> tuple[str, int]:
    from .oracle import bias_scan, report_json, verify_all
    reports, scan = verify_all(), bias_scan()
    ok = all(r.passed for r in reports) and all(s["status"] == "PASS" for s in scan)
    return report_json(reports, scan) + "\n", EXIT_OK if ok else EXIT_VERIFY


def _tables(cfg: RunConfig) -> tuple[str, int]:
    from .repcode import tables_csv
    return tables_csv(), EXIT_OK


def dispatch(cfg: RunConfig) -> int:
    runners = {
        "benchmark": _benchmark, "ising": _ising, "vqe": lambda c: _vqe(c, False),
        "epsilon-sweep": lambda c: _vqe(c, True), "verify-gadgets": _verify, "tables": _tables,
    }
    try:
        text, code = runners[cfg.command](cfg)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = resolve(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
