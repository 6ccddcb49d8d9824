"""Run configuration and on-disk records: branch CSV, profile snapshots, checkpoints.

Floats in rows and checkpoints are written with ``repr`` (shortest round-trip
form), so identical runs give byte-identical rows and a checkpoint restores
the continuation state exactly. Wall-clock data only ever goes in headers.
"""
import configparser
import dataclasses
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bifurcation import check_admissible
from .continuation import BranchRow, ContinuationOptions, ContinuationState
from .errors import CheckpointVersionError, InvalidParameter
from .solvers import FDP, ProblemSpec, SolutionPoint, residual
from .spectral import PeriodicGrid

CHECKPOINT_FORMAT = "fracwave-checkpoint/1"
CSV_COLUMNS = ("step", "t", "mu", "max_phi", "min_phi", "crest_gap", "residual_norm", "N")

# config key -> (section, type); None in the file means "use the default"
_LAYOUT = {
    "equation": ("problem", str),
    "s": ("problem", float),
    "P": ("problem", float),
    "kappa": ("problem", float),
    "N": ("discretization", int),
    "dealias": ("discretization", bool),
    "t0": ("continuation", float),
    "max_steps": ("continuation", int),
    "gap_tol": ("continuation", float),
    "mu_max": ("continuation", float),
    "newton_tol": ("solver", float),
    "cond_cap": ("solver", float),
    "out": ("output", str),
    "snapshot_stride": ("output", int),
    "checkpoint_every": ("output", int),
}

# fields that must agree between a checkpoint and the run resuming from it
_RESUME_KEYS = ("equation", "s", "P", "kappa", "N", "dealias", "t0", "gap_tol", "mu_max", "newton_tol", "cond_cap")


@dataclasses.dataclass
class RunConfig:
    equation: str = "fkdv"
    s: float = 0.5
    P: float = 2 * math.pi
    kappa: float = 0.0
    N: int = 1024
    dealias: bool = False
    t0: float = 0.01
    max_steps: int = 500
    gap_tol: float = 1e-2
    mu_max: float | None = None
    newton_tol: float | None = None
    cond_cap: float = 1e14
    out: str = "run"
    snapshot_stride: int = 10
    checkpoint_every: int = 10

    def problem(self):
        """Validated ProblemSpec; fDP configs must also pass the k = 1 window."""
        spec = ProblemSpec(self.equation, self.s, self.P, self.kappa)
        if spec.kind == FDP:
            check_admissible(spec.P, spec.s, spec.kappa, 1)
        return spec

    def options(self):
        return ContinuationOptions(
            N=self.N, t0=self.t0, max_steps=self.max_steps, gap_tol=self.gap_tol,
            newton_tol=self.newton_tol, cond_cap=self.cond_cap, dealias=self.dealias,
            mu_max=self.mu_max,
        ).validate()

    def validate(self):
        if self.snapshot_stride < 0 or self.checkpoint_every < 0:
            raise InvalidParameter("snapshot_stride and checkpoint_every must be >= 0")
        self.options()
        return self.problem()

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_ini(self):
        """Config echo in the same format :func:`load_config` reads."""
        sections = {}
        for key, (section, _) in _LAYOUT.items():
            v = getattr(self, key)
            sections.setdefault(section, []).append(f"{key} = {'none' if v is None else _fmt(v)}")
        lines = []
        for section, items in sections.items():
            lines.append(f"[{section}]")
            lines.extend(items)
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(key, text):
    kind = _LAYOUT[key][1]
    text = text.strip()
    if text.lower() in ("none", ""):
        if key in ("mu_max", "newton_tol"):
            return None
        raise InvalidParameter(f"config key {key!r} needs a value")
    try:
        if kind is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        return kind(text)
    except ValueError:
        raise InvalidParameter(f"config key {key!r}: cannot parse {text!r}") from None


def load_config(path=None, overrides=None):
    """RunConfig from an INI file (sections problem, discretization,
    continuation, solver, output) with ``overrides`` applied on top.

    Unknown sections or keys are errors, so typos do not pass silently.
    """
    values = {}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keep 'P' and 'N' as written
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as e:
            raise InvalidParameter(f"cannot read config {path}: {e}") from None
        for section in cp.sections():
            for key, text in cp.items(section):
                if key not in _LAYOUT:
                    raise InvalidParameter(f"unknown config key {key!r} in [{section}]")
                if _LAYOUT[key][0] != section:
                    raise InvalidParameter(f"config key {key!r} belongs in [{_LAYOUT[key][0]}], not [{section}]")
                values[key] = _parse(key, text)
    for key, v in (overrides or {}).items():
        if key not in _LAYOUT:
            raise InvalidParameter(f"unknown config key {key!r}")
        if v is not None:
            values[key] = v
    return RunConfig(**values)


def config_from_dict(d):
    unknown = set(d) - set(_LAYOUT)
    if unknown:
        raise InvalidParameter(f"unknown config keys {sorted(unknown)}")
    return RunConfig(**d)


def header_lines(config, title, extra=None):
    """'# '-prefixed header: title, version, timestamp, config echo."""
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    lines = [f"# {title}", f"# version = {__version__}", f"# written = {stamp}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} = {v}")
    lines.append("# config:")
    lines.extend("#   " + ln for ln in config.to_ini().splitlines())
    return lines


# ---------------------------------------------------------------------------
# branch CSV


def format_row(row):
    return ",".join([str(int(row.step)), repr(float(row.t)), repr(float(row.mu)), repr(float(row.max_phi)),
                     repr(float(row.min_phi)), repr(float(row.crest_gap)), repr(float(row.residual_norm)),
                     str(int(row.N))])


def parse_row(line):
    f = line.strip().split(",")
    if len(f) != len(CSV_COLUMNS):
        raise InvalidParameter(f"branch row has {len(f)} fields, expected {len(CSV_COLUMNS)}")
    return BranchRow(int(f[0]), *map(float, f[1:7]), int(f[7]))


class BranchWriter:
    """Writes the branch CSV a row at a time, flushing after each row."""

    def __init__(self, path, config, rows=(), extra=None):
        self.path = path
        self.fh = open(path, "w", newline="")
        for ln in header_lines(config, "fracwave branch record", extra):
            self.fh.write(ln + "\n")
        self.fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            self.fh.write(r + "\n")
        self.fh.flush()

    def write(self, row):
        self.fh.write(format_row(row) + "\n")
        self.fh.flush()

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_branch_rows(path):
    """Data lines of a branch CSV (header and comments dropped), as written."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise InvalidParameter(f"{path}: missing branch CSV column header")
    return lines[1:]


# ---------------------------------------------------------------------------
# solution snapshots


def write_snapshot(path, point, spec, step=None):
    grid = point.phi.grid
    lines = [
        "# fracwave solution snapshot",
        f"# equation = {spec.kind}",
        f"# s = {spec.s!r}",
        f"# P = {spec.P!r}",
        f"# kappa = {spec.kappa!r}",
        f"# mu = {point.mu!r}",
        f"# N = {grid.N}",
    ]
    if step is not None:
        lines.append(f"# step = {step}")
    lines.extend(f"{x:.17g} {v:.17g}" for x, v in zip(grid.nodes, point.phi.values))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path):
    """(ProblemSpec, SolutionPoint) from a snapshot file; the residual is recomputed."""
    meta = {}
    data = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                if "=" in ln:
                    k, v = ln[1:].split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            data.append(ln.split())
    missing = [k for k in ("equation", "s", "P", "kappa", "mu", "N") if k not in meta]
    if missing:
        raise InvalidParameter(f"{path}: snapshot header lacks {missing}")
    spec = ProblemSpec(meta["equation"], float(meta["s"]), float(meta["P"]), float(meta["kappa"]))
    N = int(meta["N"])
    arr = np.array(data, dtype=float)
    if arr.shape != (N, 2):
        raise InvalidParameter(f"{path}: expected {N} rows of 'x value', got shape {arr.shape}")
    grid = PeriodicGrid(spec.P, N)
    if not np.allclose(arr[:, 0], grid.nodes, rtol=0, atol=1e-12 * spec.P):
        raise InvalidParameter(f"{path}: nodes do not match the grid -P/2 + jP/N")
    phi = grid.field(arr[:, 1])
    mu = float(meta["mu"])
    r = float(np.max(np.abs(residual(spec, phi, mu).values)))
    return spec, SolutionPoint(phi, mu, r)


# ---------------------------------------------------------------------------
# checkpoints


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float)]


def write_checkpoint(path, config, state, rows, steps=()):
    """Atomically write everything needed to resume after ``state.step``."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": __version__,
        "config": config.to_dict(),
        "state": {
            "step": int(state.step),
            "t": float(state.t),
            "h": float(state.h),
            "easy": int(state.easy),
            "X_prev": _floats(state.X_prev),
            "X_curr": _floats(state.X_curr),
        },
        "rows": list(rows),
        "steps": _floats(steps),
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


@dataclasses.dataclass
class Checkpoint:
    config: RunConfig
    state: ContinuationState
    rows: list
    steps: list
    version: str


def read_checkpoint(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as e:
        raise InvalidParameter(f"cannot read checkpoint {path}: {e}") from None
    tag = payload.get("format") if isinstance(payload, dict) else None
    if tag != CHECKPOINT_FORMAT:
        raise CheckpointVersionError(
            f"{path}: checkpoint format {tag!r} is not supported (this build reads {CHECKPOINT_FORMAT!r})")
    st = payload["state"]
    state = ContinuationState(
        int(st["step"]), float(st["t"]), np.array(st["X_prev"], dtype=float),
        np.array(st["X_curr"], dtype=float), float(st["h"]), int(st["easy"]))
    return Checkpoint(config_from_dict(payload["config"]), state, list(payload["rows"]),
                      list(payload.get("steps", [])), payload.get("version", "?"))


def check_resume_compatible(config, saved):
    diff = [k for k in _RESUME_KEYS if getattr(config, k) != getattr(saved, k)]
    if diff:
        raise InvalidParameter("checkpoint was written with a different configuration: "
                               + ", ".join(f"{k} {getattr(saved, k)!r} vs {getattr(config, k)!r}" for k in diff))
