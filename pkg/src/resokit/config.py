"""Structured run configuration: a flat key=value tree in a text file.

Every constant the underlying theory leaves open (cutoff widths, the linear
part of the interaction symbol, the dyadic gap, tolerances, baseline paths)
lives here with a default, so the full set of calibration choices is
auditable in one place.  Keys are dotted paths; values parse as int, float,
complex, comma-separated lists of those, or strings.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

from .evolution import ExperimentConfig
from .grid import ConfigurationError

DEFAULTS = {
    "grid.box_size": 24.0,
    "grid.points": 32,
    "data.eps": 0.01,
    "data.width": 1.0,
    "data.offset_x": 0.0,
    "data.offset_y": 0.0,
    "data.carrier_x": 0.0,
    "data.carrier_y": 0.0,
    "nl.alpha": (1 + 0j),
    "nl.beta": (1 + 0j),
    "nl.gamma": 0j,
    "q.ell": (0.25, 0.0, 0.25, 0.0),
    "q.blend": "radial",
    "cutoffs.delta_t": 0.1,
    "cutoffs.delta_s": 0.1,
    "time.t0": 2.0,
    "time.t_final": 50.0,
    "time.dt": 0.1,
    "time.out_every": 0.5,
    "eval.u_pad": "auto",
    "normalform.cadence": 4,
    "normalform.refine_steps": 8,
    "resonance.box_radius": 4.0,
    "resonance.quad_points": 33,
    "resonance.cubic_points": 17,
    "gaps.flag_gap": 3,
    "selftest.tol_scale": 1.0,
    "baselines.path": "baselines.json",
}


def _parse_scalar(text: str):
    text = text.strip()
    for cast in (int, float, complex):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return tuple(_parse_scalar(part) for part in text.split(","))
    return _parse_scalar(text)


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = _parse_value(value)
    return out


def load_config(path: Optional[str] = None) -> dict:
    """Defaults overlaid with the file's entries; unknown keys are rejected."""
    cfg = dict(DEFAULTS)
    if path is not None:
        overrides = parse_config(Path(path).read_text())
        unknown = set(overrides) - set(DEFAULTS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(overrides)
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps({k: repr(v) for k, v in sorted(cfg.items())})
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def experiment_config(cfg: dict) -> ExperimentConfig:
    pad = cfg["eval.u_pad"]
    return ExperimentConfig(
        box_size=float(cfg["grid.box_size"]),
        points=int(cfg["grid.points"]),
        eps=float(cfg["data.eps"]),
        width=float(cfg["data.width"]),
        offset=(float(cfg["data.offset_x"]), float(cfg["data.offset_y"])),
        carrier=(float(cfg["data.carrier_x"]), float(cfg["data.carrier_y"])),
        alpha=complex(cfg["nl.alpha"]),
        beta=complex(cfg["nl.beta"]),
        gamma=complex(cfg["nl.gamma"]),
        ell=tuple(float(c) for c in cfg["q.ell"]),
        q_blend=str(cfg["q.blend"]),
        t0=float(cfg["time.t0"]),
        t_final=float(cfg["time.t_final"]),
        dt=float(cfg["time.dt"]),
        out_every=float(cfg["time.out_every"]),
        u_pad=None if pad == "auto" else int(pad),
    )


def dump_config(cfg: dict) -> str:
    lines = [f"{k} = {_format_value(v)}" for k, v in sorted(cfg.items())]
    return "\n".join(lines) + "\n"


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, complex):
        return repr(v).strip("()")
    return repr(v) if isinstance(v, str) is False else v
