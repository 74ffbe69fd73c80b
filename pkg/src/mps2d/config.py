"""Run configuration: a flat key = value text format with arrays.

Example::

    # smooth blob, filtered Neumann scan
    radial_cos = [0.1, 0.0, 0.05]
    radial_sin = []
    bc = "neumann"
    basis = "mfs"
    mfs_points = 400
    mfs_offset = 0.15
    n_boundary = 450
    e_lo = 1990.0
    e_hi = 2010.0
    n_grid = 60
    out = "scan.csv"
    format = "csv"

Parsing and serialization round-trip exactly; flags given on the command line
override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .basis import make_fourier_bessel_basis, make_mfs_basis
from .errors import ConfigError, MPSError
from .geometry import DomainSpec
from .scanner import (BOUNDARY_CONDITIONS, ProblemSpec,
                      auto_interior_resolution)


@dataclass
class RunConfig:
    radial_cos: list = None
    radial_sin: list = None
    bc: str = "dirichlet"
    basis: str = "fourier_bessel"
    fb_max_order: int = 20
    mfs_points: int = 100
    mfs_offset: float = 0.15
    n_boundary: int = 256
    interior_nr: int = 0          # 0 = choose from the energy window
    interior_nt: int = 0
    reg_eps: float = 1e-14
    n_higher: int = 5
    e_lo: float = 0.0
    e_hi: float = 0.0
    n_grid: int = 100
    grid_n: int = 200
    threads: int = 1
    out: str = ""
    format: str = "csv"
    plot: str = ""                # "" = alongside `out`; "none" = disabled

    def __post_init__(self):
        if self.radial_cos is None:
            self.radial_cos = []
        if self.radial_sin is None:
            self.radial_sin = []

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def validate(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigError(f"bc must be one of {BOUNDARY_CONDITIONS}")
        if self.basis not in ("fourier_bessel", "mfs"):
            raise ConfigError('basis must be "fourier_bessel" or "mfs"')
        if self.format not in ("csv", "json"):
            raise ConfigError('format must be "csv" or "json"')
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        for name in ("radial_cos", "radial_sin"):
            vals = getattr(self, name)
            if not all(isinstance(v, (int, float)) for v in vals):
                raise ConfigError(f"{name} must be a numeric array")

    def domain(self) -> DomainSpec:
        try:
            return DomainSpec(radial_cos=tuple(self.radial_cos),
                              radial_sin=tuple(self.radial_sin))
        except MPSError as exc:
            raise ConfigError(str(exc)) from exc

    def problem(self) -> ProblemSpec:
        """Build the ProblemSpec, resolving automatic interior resolution
        against the window's upper energy."""
        domain = self.domain()
        try:
            if self.basis == "mfs":
                basis = make_mfs_basis(domain, self.mfs_points, self.mfs_offset)
            else:
                basis = make_fourier_bessel_basis(self.fb_max_order)
        except (MPSError, ValueError) as exc:
            raise ConfigError(f"basis construction failed: {exc}") from exc
        n_r, n_t = self.interior_nr, self.interior_nt
        if n_r <= 0 or n_t <= 0:
            if not self.e_hi > 0:
                raise ConfigError("e_hi must be set (interior resolution is automatic)")
            auto_r, auto_t = auto_interior_resolution(domain, basis, self.e_hi)
            n_r = n_r if n_r > 0 else auto_r
            n_t = n_t if n_t > 0 else auto_t
        try:
            return ProblemSpec(domain=domain, basis=basis, bc=self.bc,
                               n_boundary=self.n_boundary, interior_nr=n_r,
                               interior_nt=n_t, reg_eps=self.reg_eps,
                               n_higher=self.n_higher)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def window(self):
        if not 0 < self.e_lo < self.e_hi:
            raise ConfigError("need 0 < e_lo < e_hi")
        return self.e_lo, self.e_hi


def parse_config(text: str) -> dict:
    """Parse the key = value format; values are numbers, quoted strings,
    booleans, or bracketed numeric arrays."""
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key.isidentifier():
            raise ConfigError(f"line {lineno}: bad key {key!r}")
        try:
            data[key] = _parse_value(value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return data


def _strip_comment(line):
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        elif ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _parse_value(token):
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token in ("true", "false"):
        return token == "true"
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        if not inner:
            return []
        return [_parse_number(item.strip()) for item in inner.split(",")]
    return _parse_number(token)


def _parse_number(token):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"cannot parse value {token!r}")


def serialize_config(data: dict) -> str:
    lines = [_format_entry(key, value) for key, value in data.items()]
    return "\n".join(lines) + "\n"


def _format_entry(key, value):
    return f"{key} = {_format_value(value)}"


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
