"""INI-style run configuration.

Example::

    [beam]
    E = 1.0
    I = 1.0
    rho = 1.0
    l = 1.0

    [shaker]
    m = 0.2
    kappa = 50.0
    l0 = 0.3333333333333333
    alpha0 = 1.0

    [actuator.1]
    center = 0.7
    width = 0.2
    height = 1.0
    alpha = 2.0

Sections ``[spectral]``, ``[sim]`` and ``[output]`` are optional.
:meth:`RunConfig.to_ini` writes every default explicitly, and
``RunConfig.from_ini(cfg.to_ini()) == cfg`` holds exactly.
"""

from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .model import Actuator, BeamSystem


class ConfigError(ValueError):
    """Malformed or incomplete configuration."""


_BEAM = ("E", "I", "rho", "l")
_SHAKER_REQ = ("m", "kappa", "l0")
_ACT = ("center", "width", "height", "alpha")
_SPECTRAL = ("mu_max", "grid_step", "n_modes", "root_tol", "ratio")
_SIM = ("t_end", "dt", "initial", "every")
_OUTPUT = ("directory", "precision")
_ACT_RE = re.compile(r"^actuator\.(\d+)$")


@dataclass(frozen=True)
class RunConfig:
    system: BeamSystem
    actuators: tuple[Actuator, ...] = ()
    mu_max: float | None = None
    grid_step: float | None = None
    n_modes: int = 10
    root_tol: float = 1e-12
    ratio: tuple[int, int] | None = None
    t_end: float = 10.0
    dt: float = 1e-3
    initial: str | tuple[float, ...] = "first_mode_displacement"
    every: int = 1
    directory: str = "."
    precision: int | None = None

    # ------------------------------------------------------------------
    def to_ini(self) -> str:
        s = self.system
        out = ["[beam]"]
        out += [f"{k} = {getattr(s, k)!r}" for k in _BEAM]
        out += ["", "[shaker]"]
        out += [f"{k} = {getattr(s, k)!r}" for k in (*_SHAKER_REQ, "alpha0")]
        for j, a in enumerate(self.actuators, start=1):
            out += ["", f"[actuator.{j}]"]
            out += [f"{k} = {getattr(a, k)!r}" for k in _ACT]
        out += [
            "",
            "[spectral]",
            f"mu_max = {_opt(self.mu_max)}",
            f"grid_step = {_opt(self.grid_step)}",
            f"n_modes = {self.n_modes}",
            f"root_tol = {self.root_tol!r}",
            f"ratio = {'auto' if self.ratio is None else '%d/%d' % self.ratio}",
            "",
            "[sim]",
            f"t_end = {self.t_end!r}",
            f"dt = {self.dt!r}",
            "initial = "
            + (self.initial if isinstance(self.initial, str) else ", ".join(repr(v) for v in self.initial)),
            f"every = {self.every}",
            "",
            "[output]",
            f"directory = {self.directory}",
            f"precision = {_opt(self.precision)}",
        ]
        return "\n".join(out) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()

    @classmethod
    def from_ini(cls, text: str, source: str = "<config>") -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        parser.optionxform = str  # keys are case sensitive (E vs e)
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        lines = text.splitlines()

        def where(section, key):
            sec_seen = False
            for i, ln in enumerate(lines, start=1):
                s = ln.strip()
                if s.startswith("["):
                    sec_seen = s == f"[{section}]"
                elif sec_seen and re.match(rf"^{re.escape(key)}\s*[=:]", s):
                    return f"{source}:{i}"
            return source

        def get(section, key, conv, required=False, default=None):
            if not parser.has_section(section) or not parser.has_option(section, key):
                if required:
                    raise ConfigError(f"{source}: missing required key `{section}.{key}`")
                return default
            raw = parser.get(section, key).strip()
            if raw in ("", "none", "auto") and not required:
                return default
            try:
                return conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{where(section, key)}: bad value for `{section}.{key}`: {raw!r} ({exc})") from exc

        def check_keys(section, allowed):
            for key in parser.options(section):
                if key not in allowed:
                    raise ConfigError(f"{where(section, key)}: unknown key `{section}.{key}`")

        known = {"beam": _BEAM, "shaker": (*_SHAKER_REQ, "alpha0"), "spectral": _SPECTRAL, "sim": _SIM, "output": _OUTPUT}
        act_ids = []
        for sec in parser.sections():
            m = _ACT_RE.match(sec)
            if m:
                act_ids.append(int(m.group(1)))
                check_keys(sec, _ACT)
            elif sec in known:
                check_keys(sec, known[sec])
            else:
                raise ConfigError(f"{source}: unknown section [{sec}]")
        for sec in ("beam", "shaker"):
            if not parser.has_section(sec):
                raise ConfigError(f"{source}: missing required section [{sec}]")

        system = BeamSystem(
            **{k: get("beam", k, float, required=True) for k in _BEAM},
            **{k: get("shaker", k, float, required=True) for k in _SHAKER_REQ},
            alpha0=get("shaker", "alpha0", float, default=0.0),
        )
        actuators = []
        for j in sorted(act_ids):
            sec = f"actuator.{j}"
            actuators.append(
                Actuator(
                    center=get(sec, "center", float, required=True),
                    width=get(sec, "width", float, required=True),
                    height=get(sec, "height", float, default=1.0),
                    alpha=get(sec, "alpha", float, default=1.0),
                )
            )
        return cls(
            system=system,
            actuators=tuple(actuators),
            mu_max=get("spectral", "mu_max", float),
            grid_step=get("spectral", "grid_step", float),
            n_modes=get("spectral", "n_modes", _posint, default=10),
            root_tol=get("spectral", "root_tol", float, default=1e-12),
            ratio=get("spectral", "ratio", _ratio),
            t_end=get("sim", "t_end", float, default=10.0),
            dt=get("sim", "dt", float, default=1e-3),
            initial=get("sim", "initial", _initial, default="first_mode_displacement"),
            every=get("sim", "every", _posint, default=1),
            directory=get("output", "directory", str, default="."),
            precision=get("output", "precision", _posint),
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_ini(text, source=str(path))

    # ------------------------------------------------------------------
    def with_param(self, name: str, value: float) -> "RunConfig":
        """Copy with one scalar replaced, e.g. ``shaker.alpha0`` or ``actuator.1.center``."""
        parts = name.split(".")
        if parts[0] == "beam" and len(parts) == 2 and parts[1] in _BEAM:
            return replace(self, system=replace(self.system, **{parts[1]: value}))
        if parts[0] == "shaker" and len(parts) == 2 and parts[1] in (*_SHAKER_REQ, "alpha0"):
            return replace(self, system=replace(self.system, **{parts[1]: value}))
        if parts[0] == "actuator" and len(parts) == 3 and parts[2] in _ACT and parts[1].isdigit():
            j = int(parts[1])
            if 1 <= j <= len(self.actuators):
                acts = list(self.actuators)
                acts[j - 1] = replace(acts[j - 1], **{parts[2]: value})
                return replace(self, actuators=tuple(acts))
        raise KeyError(f"unknown sweep parameter {name!r}")


def _opt(v):
    return "none" if v is None else repr(v)


def _posint(raw: str) -> int:
    v = int(raw)
    if v <= 0:
        raise ValueError("must be a positive integer")
    return v


def _ratio(raw: str) -> tuple[int, int]:
    p1, p2 = (int(s) for s in raw.split("/"))
    if p1 <= 0 or p2 <= 0:
        raise ValueError("ratio terms must be positive")
    return p1, p2


def _initial(raw: str):
    if raw == "first_mode_displacement":
        return raw
    try:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError:
        raise ValueError("expected `first_mode_displacement` or a list of modal amplitudes") from None


__all__ = ["ConfigError", "RunConfig"]
