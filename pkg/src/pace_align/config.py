"""Session configuration: one JSON or TOML file describes a full run.

File keys use the controller's conventional symbols (M0, D0, K, ...);
asset references are paths relative to the config file, absolute paths,
or "builtin:<name>" for packaged defaults.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomli
except ImportError:  # pragma: no cover
    tomli = None

__all__ = [
    "ConfigError",
    "UserConfig",
    "SessionConfig",
    "load_config",
    "load_config_doc",
    "config_from_dict",
    "apply_overrides",
    "resolve_asset",
    "SCHEMES",
]

SCHEMES = ("AC", "LC_noAP", "LC")


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed or validated."""


@dataclass(frozen=True)
class UserConfig:
    """Simulated user: viscous resistance plus optional scripted pushes.

    profile: piecewise-constant resistance level r(t), as (t_start, r)
    breakpoints with non-decreasing times; r holds until the next one.
    pushes: (t_start, duration, direction, magnitude) fixed-direction
    force bursts, only meaningful for kind "scripted_profile".
    """

    kind: str = "scripted_profile"
    profile: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    r_max: float = 300.0
    noise_std: float = 0.0
    pushes: tuple[tuple[float, float, tuple[float, ...], float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("scripted_profile", "viscous_resistor"):
            raise ConfigError(f"unknown user kind {self.kind!r}")
        prof = tuple((float(t), float(r)) for t, r in self.profile)
        if not prof:
            raise ConfigError("resistance profile must have at least one entry")
        times = [t for t, _ in prof]
        if times != sorted(times) or times[0] > 0.0:
            raise ConfigError("profile times must be non-decreasing and start at 0")
        for _, r in prof:
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"resistance level {r} outside [0, 1]")
        if self.r_max < 0.0 or self.noise_std < 0.0:
            raise ConfigError("r_max and noise_std must be non-negative")
        pushes = tuple(
            (float(t0), float(dur), tuple(float(c) for c in direction), float(mag))
            for t0, dur, direction, mag in self.pushes
        )
        if pushes and self.kind != "scripted_profile":
            raise ConfigError("pushes require kind scripted_profile")
        for t0, dur, direction, mag in pushes:
            if dur <= 0.0 or mag < 0.0:
                raise ConfigError("push duration must be positive, magnitude >= 0")
        object.__setattr__(self, "profile", prof)
        object.__setattr__(self, "pushes", pushes)


@dataclass(frozen=True)
class SessionConfig:
    trajectory: str
    graph: str
    scheme: str = "LC"
    seed: int = 0
    dt: float = 0.002
    m0: float | tuple = 15.0
    d0: float | tuple = 310.0
    k: float | tuple = 500.0
    f_propell: float = 20.0
    m_robot: float | tuple = 4.0
    c_gain: float = 400.0
    etc_rate_hz: float = 10.0
    completion_d: float = 0.995
    completion_dist: float = 0.01
    k_p: float = 2.0
    k_a: float = 2.0
    k_c: float = 0.5
    alpha: float = 0.1
    f_max: float = 30.0
    deadband: float = 1.5
    pace_min: float = 0.6
    pace_max: float = 1.4
    cap_s: float = 120.0
    user: UserConfig = field(default_factory=UserConfig)
    base_dir: str = "."

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dt <= 0.0 or self.cap_s <= 0.0 or self.etc_rate_hz <= 0.0:
            raise ConfigError("dt, cap_s, etc_rate_hz must be positive")

    def to_dict(self) -> dict:
        doc = {}
        for file_key, attr in _KEY_MAP.items():
            value = getattr(self, attr)
            doc[file_key] = value
        doc["user"] = asdict(self.user)
        return doc


# config-file key -> dataclass attribute
_KEY_MAP = {
    "trajectory": "trajectory",
    "graph": "graph",
    "scheme": "scheme",
    "seed": "seed",
    "dt": "dt",
    "M0": "m0",
    "D0": "d0",
    "K": "k",
    "F_propell": "f_propell",
    "M_robot": "m_robot",
    "C_gain": "c_gain",
    "etc_rate_hz": "etc_rate_hz",
    "completion_d": "completion_d",
    "completion_dist": "completion_dist",
    "k_p": "k_p",
    "k_a": "k_a",
    "k_c": "k_c",
    "alpha": "alpha",
    "F_max": "f_max",
    "deadband": "deadband",
    "pace_min": "pace_min",
    "pace_max": "pace_max",
    "cap_s": "cap_s",
}


def config_from_dict(doc: dict, base_dir: str | Path = ".") -> SessionConfig:
    doc = dict(doc)
    user_doc = doc.pop("user", {})
    unknown = set(doc) - set(_KEY_MAP)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {attr: doc[key] for key, attr in _KEY_MAP.items() if key in doc}
    for key in ("trajectory", "graph"):
        if key not in kwargs:
            raise ConfigError(f"config missing required key {key!r}")
    try:
        user = UserConfig(**user_doc) if not isinstance(user_doc, UserConfig) else user_doc
    except TypeError as e:
        raise ConfigError(f"bad user block: {e}") from e
    listy = (list, tuple)
    for attr in ("m0", "d0", "k", "m_robot"):
        if attr in kwargs and isinstance(kwargs[attr], listy):
            kwargs[attr] = tuple(float(v) for v in kwargs[attr])
    return SessionConfig(user=user, base_dir=str(base_dir), **kwargs)


def load_config_doc(path: str | Path) -> dict:
    """Parse a config file to its raw dict, without validation."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if path.suffix == ".toml":
        if tomli is None:  # pragma: no cover
            raise ConfigError("TOML support needs the tomli package")
        try:
            doc = tomli.loads(raw.decode())
        except tomli.TOMLDecodeError as e:
            raise ConfigError(f"invalid TOML in {path}: {e}") from e
    else:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be a table/object")
    return doc


def load_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    return config_from_dict(load_config_doc(path), base_dir=path.parent)


def resolve_asset(ref: str, base_dir: str | Path) -> Path:
    """Resolve an asset reference from a config.

    "builtin:<name>" maps into the packaged assets directory; other
    references resolve relative to the config file's directory.
    """
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        root = resources.files("pace_align").joinpath("assets")
        return Path(str(root.joinpath(name)))
    p = Path(ref)
    return p if p.is_absolute() else Path(base_dir) / p


def apply_overrides(doc: dict, overrides: list[tuple[str, str]]) -> dict:
    """Apply dotted-path overrides ("user.r_max", "450") onto a config dict.

    Values parse as JSON when possible, else stay strings.
    """
    out = json.loads(json.dumps(doc))  # deep copy, plain types only
    for dotted, raw in overrides:
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {dotted!r} crosses a scalar")
        node[parts[-1]] = value
    return out


def with_scheme_and_seed(cfg: SessionConfig, scheme: str, seed: int) -> SessionConfig:
    return replace(cfg, scheme=scheme, seed=seed)
