"""Run configuration: ``[section]`` / ``key = value`` text files plus ``section.key=value`` overrides.

Files are read with :mod:`configparser`; surrounding quotes on values are
stripped so simple TOML files with flat sections parse the same way.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .potential import Potential


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# section -> key -> (type, default); None default means "unset"
SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "mesh": {"n": (int, 8), "file": (str, None)},
    "space": {"q": (int, 1), "sigma": (float, None)},
    "scheme": {"tau": (float, 1e-3), "T": (float, 0.02), "kappa": (float, 0.01),
               "mu_s": (float, 1.0), "newton_atol": (float, 1e-10), "newton_maxit": (int, 30)},
    "potential": {"kind": (str, "ginzburg_landau"), "theta": (float, 1.0), "theta_c": (float, 2.0),
                  "delta_trunc": (float, 0.05), "trunc_radius": (float, None)},
    "initial": {"preset": (str, "spinodal"), "seed": (int, 0), "amplitude": (float, 0.01),
                "modes": (int, 6), "mean": (float, 0.0), "cbar": (float, 0.0)},
    "output": {"dir": (str, "out"), "every": (int, 1), "fields": (bool, True)},
    "run": {"mode": (str, "simulate"), "probes": (bool, True), "probe_max_dofs": (int, 6000)},
    "mms": {"study": (str, "spatial"), "ns": (str, "4,8,16"), "T": (float, 0.1),
            "tau_factor": (float, 0.1), "n": (int, 32), "divisions": (str, "4,8,16"),
            "kappa": (float, 0.05), "mu_s": (float, 1.0), "velocity_time": (str, None)},
    "probe": {"ns": (str, "2,4,8")},
}

MODES = ("simulate", "verify-mms", "probe-constants")
PRESETS = ("spinodal", "constant", "mms")


def _convert(key: str, typ: type, raw: str):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    if raw == "" or raw.lower() == "none":
        return None
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError(raw)
            return val
        return raw
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {typ.__name__}") from None


def _int_list(key: str, raw: str | None) -> list[int]:
    if raw is None:
        raise ConfigError(key, "missing value")
    try:
        out = [int(s) for s in raw.replace(" ", "").split(",") if s]
    except ValueError:
        raise ConfigError(key, f"expected comma-separated integers, got {raw!r}") from None
    if not out or any(v < 1 for v in out):
        raise ConfigError(key, "expected positive integers")
    return out


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def get(self, dotted: str):
        sec, key = dotted.split(".", 1)
        return self.values[sec][key]

    # typed views -----------------------------------------------------------
    @property
    def mode(self) -> str:
        return self.get("run.mode")

    @property
    def q(self) -> int:
        return self.get("space.q")

    @property
    def n_steps(self) -> int:
        return int(round(self.get("scheme.T") / self.get("scheme.tau")))

    def potential(self) -> Potential:
        p = self.values["potential"]
        return Potential(p["kind"], theta=p["theta"], theta_c=p["theta_c"],
                         delta_trunc=p["delta_trunc"], trunc_radius=p["trunc_radius"])

    def int_list(self, dotted: str) -> list[int]:
        return _int_list(dotted, self.get(dotted))

    def output_dir(self, override=None) -> Path:
        return Path(override) if override else Path(self.get("output.dir"))

    def mesh_file(self) -> Path | None:
        f = self.get("mesh.file")
        if f is None:
            return None
        p = Path(f)
        return p if p.is_absolute() else self.base_dir / p


def defaults() -> dict:
    return {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}


def _set(values: dict, dotted: str, raw: str) -> None:
    if "." not in dotted:
        raise ConfigError(dotted, "expected section.key")
    sec, key = dotted.split(".", 1)
    if sec not in SCHEMA:
        raise ConfigError(dotted, f"unknown section {sec!r}")
    if key not in SCHEMA[sec]:
        raise ConfigError(dotted, f"unknown key {key!r} in section [{sec}]")
    values[sec][key] = _convert(dotted, SCHEMA[sec][key][0], raw)


def load_config(path=None, overrides=()) -> RunConfig:
    values = defaults()
    base = Path(".")
    if path is not None:
        path = Path(path)
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        parser.optionxform = str  # keep key case (e.g. ``T``)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError("--config", f"malformed file: {exc}") from None
        for sec in parser.sections():
            for key, raw in parser.items(sec):
                _set(values, f"{sec}.{key}", raw)
        base = path.parent
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        k, v = item.split("=", 1)
        _set(values, k.strip(), v)
    cfg = RunConfig(values, base)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    g = cfg.get

    def positive(key):
        v = g(key)
        if v is None or v <= 0:
            raise ConfigError(key, f"must be positive, got {v!r}")

    for key in ("mesh.n", "space.q", "scheme.tau", "scheme.T", "scheme.kappa", "scheme.mu_s",
                "scheme.newton_atol", "scheme.newton_maxit", "output.every",
                "mms.T", "mms.tau_factor", "mms.n", "mms.kappa", "mms.mu_s", "run.probe_max_dofs"):
        positive(key)
    if g("space.sigma") is not None:
        positive("space.sigma")
    N = g("scheme.T") / g("scheme.tau")
    if abs(N - round(N)) > 1e-9 * max(1.0, N):
        raise ConfigError("scheme.T", f"T={g('scheme.T')} is not an integer multiple of tau={g('scheme.tau')}")
    if g("run.mode") not in MODES:
        raise ConfigError("run.mode", f"expected one of {', '.join(MODES)}")
    if g("initial.preset") not in PRESETS:
        raise ConfigError("initial.preset", f"expected one of {', '.join(PRESETS)}")
    if g("mms.study") not in ("spatial", "temporal"):
        raise ConfigError("mms.study", "expected spatial or temporal")
    for key in ("mms.ns", "mms.divisions", "probe.ns"):
        cfg.int_list(key)
    try:
        cfg.potential()
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in ("trunc_radius", "delta_trunc", "theta", "kind") if k in msg), "kind")
        raise ConfigError(f"potential.{key}", msg) from None
    if not -1.0 < g("initial.cbar") < 1.0 and g("potential.kind") == "logarithmic":
        raise ConfigError("initial.cbar", "must lie in (-1, 1) for the logarithmic potential")


def keys_doc() -> str:
    """Human-readable list of every accepted key with its default."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for k, (t, d) in keys.items():
            lines.append(f"  {k} ({t.__name__}) = {d!r}")
    return "\n".join(lines)


__all__ = ["ConfigError", "RunConfig", "SCHEMA", "load_config", "validate", "keys_doc"]
