"""``dmt-sim`` command line: outage sweeps, tradeoff-surface tables and the
property report.

Config files are INI-style with sections ``[system]``, ``[sweep]``,
``[rate]``, ``[rng]`` and optionally ``[fit]``, ``[surface]``, ``[verify]``::

    [system]
    M = 2
    N = 4
    interferers = 3
    xi = 0.5

    [sweep]
    snr_db = 15:2.5:40
    trials = 1000000

    [rate]
    mode = fixed
    R = 5

Exit codes: 0 success, 1 property failure, 2 config error, 3 run invalid.
"""

import argparse
import configparser
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .analysis import (
    InsufficientPoints,
    RunInvalid,
    dmt_p2p,
    dmt_theoretical,
    estimate_slope,
    ml_dmt_reference,
    sweep_curve,
    theoretical_diversity,
)
from .model import FixedRate, ScalingRate, SystemConfig, ValidationError
from .verify import DEFAULT_TOLERANCES, run_all

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_INVALID = 0, 1, 2, 3

# which config key a model-level validation message refers to
_MESSAGE_KEYS = [
    ("M must", "system.m"),
    ("N must", "system.n"),
    ("interferers", "system.interferers"),
    ("xi must", "system.xi"),
    ("each xi_k", "system.xi_k"),
    ("SNR grid", "sweep.snr_db"),
    ("trials", "sweep.trials"),
    ("seed", "rng.seed"),
    ("fit window", "fit.p_min"),
    ("fixed rate", "rate.R"),
    ("multiplexing gain", "rate.r"),
]


class ParseError(ValueError):
    """The config file is not well-formed."""


@dataclass
class RunSpec:
    command: str
    config_path: Path
    output_dir: Path = Path(".")
    overrides: List[str] = field(default_factory=list)
    workers: Optional[int] = None
    seed: Optional[int] = None


@dataclass
class ParsedConfig:
    system: SystemConfig
    raw: Dict[str, str]
    lines: Dict[str, int]


def _norm(key):
    # rate.R (fixed bits) and rate.r (multiplexing gain) differ only by case
    section, _, name = key.partition(".")
    section, name = section.strip().lower(), name.strip()
    if not (section == "rate" and name in ("R", "r")):
        name = name.lower()
    return f"{section}.{name}"


def _key_lines(text):
    lines, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", stripped)
        if section and m:
            lines[_norm(f"{section}.{m.group(1)}")] = lineno
    return lines


def parse_grid(text):
    """Parse ``a, b, c`` or the inclusive range ``start:step:stop``."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise ValueError(f"bad range {text!r}, expected start:step:stop with step > 0")
        start, step, stop = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(n, 0))]
    return [float(p) for p in text.replace("[", "").replace("]", "").split(",") if p.strip()]


class _Reader:
    def __init__(self, raw, lines):
        self.raw, self.lines = raw, lines

    def where(self, key):
        line = self.lines.get(key)
        return f"line {line}: {key}" if line else key

    def get(self, key, conv, default=None):
        if key not in self.raw:
            if default is None:
                raise ValidationError(f"{key}: missing required key")
            return default
        try:
            return conv(self.raw[key])
        except ValueError as exc:
            raise ValidationError(f"{self.where(key)}: {exc}") from None


def _to_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def parse_config(path, overrides=(), seed=None):
    """Read and validate a config file.

    ``overrides`` are ``section.key=value`` strings applied on top of the
    file. Raises :class:`ParseError` or :class:`ValidationError` with the
    offending line number where one exists.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None
    raw = {_norm(f"{s}.{k}"): v for s in parser.sections() for k, v in parser[s].items()}
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ParseError(f"override {item!r} is not section.key=value")
        key, value = item.split("=", 1)
        raw[_norm(key.strip())] = value.strip()
    if seed is not None:
        raw["rng.seed"] = str(seed)
    lines = _key_lines(text)
    reader = _Reader(raw, lines)

    mode = reader.get("rate.mode", lambda t: t.strip().lower(), "fixed")
    try:
        if mode == "fixed":
            rate = FixedRate(reader.get("rate.R", float))
        elif mode == "scaling":
            rate = ScalingRate(reader.get("rate.r", float))
        else:
            raise ValidationError(f"{reader.where('rate.mode')}: expected fixed or scaling")
        xi_k = reader.get("system.xi_k", parse_grid, []) or None
        system = SystemConfig(
            M=reader.get("system.m", _to_int),
            N=reader.get("system.n", _to_int),
            num_interferers=reader.get("system.interferers", _to_int, 0),
            xi=reader.get("system.xi", float, 0.0),
            xi_k=xi_k,
            snr_grid_db=reader.get("sweep.snr_db", parse_grid),
            rate=rate,
            trials_per_point=reader.get("sweep.trials", _to_int),
            seed=reader.get("rng.seed", _to_int, 0),
            fit_window=(
                reader.get("fit.p_min", float, 1e-4),
                reader.get("fit.p_max", float, 1e-1),
            ),
        )
    except ValidationError as exc:
        msg = str(exc)
        if not msg.startswith(("line ", "rate.", "system.", "sweep.", "rng.", "fit.")):
            for prefix, key in _MESSAGE_KEYS:
                if msg.startswith(prefix):
                    msg = f"{reader.where(key)}: {msg}"
                    break
        raise ValidationError(msg) from None
    return ParsedConfig(system=system, raw=raw, lines=lines)


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _header(config, command):
    lines = [f"# dmtsim {__version__} {command}"]
    lines += [f"# {line}" for line in config.describe()]
    return "\n".join(lines) + "\n"


OUTAGE_COLUMNS = "snr_db,target_rate_bits,trials,outages,p_out,ci_low,ci_high,discarded"


def format_outage_csv(curve):
    rows = [_header(curve.config, "sweep") + OUTAGE_COLUMNS]
    for p in curve.points:
        values = (p.snr_db, p.target_rate_bits, p.trials, p.outages,
                  p.p_out, p.ci_low, p.ci_high, p.discarded)
        rows.append(",".join(_fmt(v) for v in values))
    return "\n".join(rows) + "\n"


def _load(spec):
    return parse_config(spec.config_path, spec.overrides, spec.seed)


def run_sweep(spec):
    parsed = _load(spec)
    config = parsed.system
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    curve = sweep_curve(config, workers=spec.workers)
    (out / "outage.csv").write_text(format_outage_csv(curve))

    summary = [_header(config, "sweep").rstrip("\n")]
    p_min, p_max = config.fit_window
    try:
        est = estimate_slope(curve)
        summary.append(f"diversity_estimate = {est.slope:.6f} +/- {est.stderr:.6f}")
        summary.append(f"points_used = {est.points_used}")
    except InsufficientPoints as exc:
        summary.append(f"diversity_estimate = InsufficientPoints ({exc})")
        print(f"warning: slope fit skipped: InsufficientPoints: {exc}", file=sys.stderr)
    summary.append(f"theoretical_d = {theoretical_diversity(config):.6f}")
    summary.append(f"fit_window = [{p_min:g}, {p_max:g}]")
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return EXIT_OK


def ml_dmt_curve(M, N, r):
    """ML tradeoff at real ``r``: piecewise linear through the integer points."""
    knots = np.arange(min(M, N) + 1)
    return float(np.interp(r, knots, [ml_dmt_reference(M, N, k) for k in knots], right=0.0))


def run_dmt_surface(spec):
    parsed = _load(spec)
    config, reader = parsed.system, _Reader(parsed.raw, parsed.lines)
    M, N = config.M, config.N
    r_grid = reader.get("surface.r", parse_grid, parse_grid(f"0:{M / 8!r}:{M}"))
    xi_grid = reader.get("surface.xi", parse_grid, parse_grid("0:0.1:0.9"))
    if any(r < 0 for r in r_grid):
        raise ValidationError(f"{reader.where('surface.r')}: r must be >= 0")
    if any(not 0.0 <= x < 1.0 for x in xi_grid):
        raise ValidationError(f"{reader.where('surface.xi')}: xi must lie in [0, 1)")
    rows = [_header(config, "dmt-surface") + "r,xi,d_mmse,d_p2p,d_ml"]
    for r in r_grid:
        for xi in xi_grid:
            values = (r, xi, dmt_theoretical(M, N, r, xi), dmt_p2p(M, N, r), ml_dmt_curve(M, N, r))
            rows.append(",".join(_fmt(float(v)) for v in values))
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "dmt_surface.csv").write_text("\n".join(rows) + "\n")
    return EXIT_OK


def run_verify(spec):
    parsed = _load(spec)
    reader = _Reader(parsed.raw, parsed.lines)
    tolerances = {
        name: reader.get(f"verify.{name}", float, default) for name, default in DEFAULT_TOLERANCES.items()
    }
    results = run_all(
        parsed.system,
        realizations=reader.get("verify.realizations", _to_int, 1000),
        tail_samples=reader.get("verify.tail_samples", _to_int, 1_000_000),
        tolerances=tolerances,
    )
    for res in results:
        print(res.line())
    failed = [r.name for r in results if r.status == "fail"]
    if failed:
        print(f"failed: {', '.join(failed)}")
        return EXIT_PROPERTY
    return EXIT_OK


COMMANDS = {"sweep": run_sweep, "dmt-surface": run_dmt_surface, "verify": run_verify}


def build_parser():
    parser = argparse.ArgumentParser(prog="dmt-sim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = RunSpec(
        command=args.command,
        config_path=args.config,
        output_dir=args.out,
        overrides=args.overrides,
        workers=args.workers,
        seed=args.seed,
    )
    try:
        return COMMANDS[spec.command](spec)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunInvalid as exc:
        print(f"run invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
