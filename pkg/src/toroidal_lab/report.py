"""Deterministic JSON/CSV output and the flat key=value run configuration."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .errors import ConfigError
from .group import GroupParams
from .reals import DecimalApprox, LiouvilleSum, QuadraticSurd, format_real, parse_real

SCHEMA = "toroidal-lab/1"


def _float_token(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def _plain(obj):
    """Reduce to JSON-native types (floats kept as floats)."""
    if hasattr(obj, "as_dict"):
        return _plain(obj.as_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, mpmath.mpf):
        return float(obj) if abs(obj) > mpmath.mpf("1e-300") or obj == 0 else mpmath.nstr(obj, 17)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (Fraction, QuadraticSurd, LiouvilleSum, DecimalApprox)):
        return format_real(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, out: list, indent: int, level: int):
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            out.append(("," if i else "") + pad + json.dumps(k) + ": ")
            _emit(obj[k], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append(("," if i else "") + pad)
            _emit(v, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float_token(obj))
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(obj, ensure_ascii=False))


def canonical_json(obj, indent: int = 2) -> str:
    """Sorted keys, 17 significant digits, non-finite floats as null."""
    out: list[str] = []
    _emit(_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def envelope(command: str, payload: dict, config: "RunConfig | None" = None) -> dict:
    doc = {"schema": SCHEMA, "command": command, "result": payload}
    if config is not None:
        doc["config"] = config.canonical_dict()
    return doc


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_float_token(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def distances_csv(*seqs) -> str:
    rows = []
    for seq in seqs:
        for n, val, err in zip(seq.indices, seq.values, seq.errors):
            rows.append([seq.kind, n, mpmath.nstr(val, 17, min_fixed=-4, max_fixed=4),
                         mpmath.nstr(err, 3, min_fixed=-4, max_fixed=4)])
    return csv_text(["kind", "n", "d_n", "err"], rows)


# -- configuration -------------------------------------------------------------

_REAL_KEYS = ("p", "q", "theta1", "theta2")


@dataclass(frozen=True)
class RunConfig:
    tau_re: str = "0"
    tau_im: str = "1"
    p: object = Fraction(0)
    q: object = QuadraticSurd.sqrt(2)
    theta1: object = Fraction(0)
    theta2: object = Fraction(1, 3)
    precision_bits: int = 128
    N: int | None = None
    box: int = 20
    trunc: int = 32
    tol: float = 1e-6
    quad_tol: float = 1e-8
    out: str = "out"
    seed: int = 0
    format: str = "json"
    recipe: str = "exact"
    delta0: float = 0.9
    window_start: int = 100
    n_box: int = 1000
    hs_a: float = 0.1
    kazama_a: float = 0.5
    grid_x: int = 64
    grid_v: int = 192
    suite: str = "all"

    def __post_init__(self):
        try:
            tau = self.tau
        except ValueError as exc:
            raise ConfigError(f"bad tau: {exc}") from None
        if not tau.imag > 0:
            raise ConfigError("tau_im must be positive")
        if self.precision_bits < 53:
            raise ConfigError("precision_bits must be >= 53")
        if self.N is not None and self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.box < 1 or self.trunc < 2 or self.n_box < 1:
            raise ConfigError("box, trunc and n_box must be positive")
        if not (self.tol > 0 and self.quad_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if not 0 < self.delta0 < 1:
            raise ConfigError("delta0 must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def tau(self) -> complex:
        return complex(float(Fraction(self.tau_re)), float(Fraction(self.tau_im)))

    def params(self) -> GroupParams:
        return GroupParams(self.tau, self.p, self.q, self.precision_bits)

    def scan_depth(self, kind: str = "lattice2d") -> int:
        """Default N: 10^4 for lattice2d scans with exact inputs, 10^3 otherwise."""
        if self.N is not None:
            return self.N
        exact = all(isinstance(x, (Fraction, QuadraticSurd)) for x in (self.p, self.q))
        return 10_000 if (kind == "lattice2d" and exact) else 1_000

    def canonical_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = format_real(v) if f.name in _REAL_KEYS else v
        return out

    def serialize(self) -> str:
        lines = []
        for k, v in sorted(self.canonical_dict().items()):
            if v is None:
                continue
            lines.append(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


_INT_KEYS = {f.name for f in fields(RunConfig) if f.type in ("int", "int | None")}
_FLOAT_KEYS = {f.name for f in fields(RunConfig) if f.type == "float"}


def _check_rational_token(key: str, value: str) -> str:
    try:
        Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key} must be a decimal or a/b rational, got {value!r}") from None
    return str(Fraction(value))


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key=value`` lines; blank lines and # comments are ignored."""
    known = {f.name for f in fields(RunConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in kw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kw[key] = parse_value(key, value)
    return RunConfig(**kw)


def parse_value(key: str, value: str):
    try:
        if key in _REAL_KEYS:
            return parse_real(value)
        if key in ("tau_re", "tau_im"):
            return _check_rational_token(key, value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return value


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def write_outputs(out_dir: str | Path, files: dict[str, str]) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted(files.items()):
        (out / name).write_text(text)
        written.append(str(out / name))
    return written
