"""Problem files and run configuration.

A problem file is JSON with a fixed key order and every number stored as a
decimal string.  Keeping the strings verbatim makes serialization
canonical (parse followed by write is byte-identical) and preserves the
distinction between two readings of the input: ``binary`` (the double
nearest the decimal string, padded with zero bits) and ``decimal`` (the
exact decimal value, carried to doubled precision).  The reading only
matters on the doubled-precision code paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .applications import HermitianArrowhead, NonsymArrowhead, TriangularArrowhead
from .dd import DoubleDouble, dd_from_decimal_string, dd_from_float
from .matrices import ArrowheadMatrix, DPR1Matrix
from .refine import GateConfig

__all__ = ["ProblemFile", "RunConfig", "parse_problem", "write_problem"]

_KINDS = {
    "arrowhead": ("d", "z", "alpha"),
    "hermitian-arrowhead": ("d", "z", "alpha"),
    "nonsym-arrowhead": ("d", "z_up", "z_low", "alpha"),
    "triangular-arrowhead": ("d", "z", "alpha"),
    "dpr1": ("d", "u", "rho"),
}
_COMPLEX_FIELDS = {("hermitian-arrowhead", "z")}
_SCALAR_FIELDS = {"alpha", "rho"}


def _check_decimal(s):
    if not isinstance(s, str):
        raise ValueError(f"numbers must be decimal strings, got {s!r}")
    try:
        v = float(s)
    except ValueError as exc:
        raise ValueError(f"not a decimal literal: {s!r}") from exc
    if not np.isfinite(v):
        raise ValueError(f"decimal literal out of range: {s!r}")
    return s


@dataclass
class ProblemFile:
    """Parsed problem file: kind plus the verbatim decimal-string payload."""

    kind: str
    payload: dict
    version: int = 1

    def __post_init__(self):
        if self.version != 1:
            raise ValueError(f"unsupported version {self.version!r}")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        fields = _KINDS[self.kind]
        if set(self.payload) != set(fields):
            raise ValueError(
                f"kind {self.kind!r} needs fields {list(fields)}, "
                f"got {sorted(self.payload)}")
        lengths = set()
        for name in fields:
            val = self.payload[name]
            if name in _SCALAR_FIELDS:
                _check_decimal(val)
                continue
            if not isinstance(val, list) or not val:
                raise ValueError(f"field {name!r} must be a nonempty list")
            lengths.add(len(val))
            for item in val:
                if (self.kind, name) in _COMPLEX_FIELDS:
                    if not (isinstance(item, list) and len(item) == 2):
                        raise ValueError("complex entries are [re, im] pairs")
                    _check_decimal(item[0])
                    _check_decimal(item[1])
                else:
                    _check_decimal(item)
        if len(lengths) > 1:
            raise ValueError("vector fields must have equal length")

    # -- numeric views --------------------------------------------------------

    def _floats(self, name):
        val = self.payload[name]
        if name in _SCALAR_FIELDS:
            return float(val)
        if (self.kind, name) in _COMPLEX_FIELDS:
            return np.array([complex(float(re), float(im)) for re, im in val])
        return np.array([float(s) for s in val])

    def promoted(self, name, input_repr="decimal"):
        """Payload numbers as DoubleDouble values under the chosen reading."""
        conv = (dd_from_decimal_string if input_repr == "decimal"
                else lambda s: dd_from_float(float(s)))
        val = self.payload[name]
        if name in _SCALAR_FIELDS:
            return conv(val)
        if (self.kind, name) in _COMPLEX_FIELDS:
            return [(conv(re), conv(im)) for re, im in val]
        return [conv(s) for s in val]

    def to_matrix(self, input_repr="decimal"):
        """Build the matrix object this file describes.

        Under the decimal reading, plain arrowhead payloads carry their
        double-double trailing parts into the matrix so the
        doubled-precision tip consumes the exact decimal values.
        """
        if input_repr not in ("binary", "decimal"):
            raise ValueError(f"input_repr must be binary or decimal, got {input_repr!r}")
        if self.kind == "arrowhead":
            d = self._floats("d")
            z = self._floats("z")
            alpha = self._floats("alpha")
            if input_repr == "decimal":
                ddd = self.promoted("d")
                zdd = self.promoted("z")
                add = self.promoted("alpha")
                return ArrowheadMatrix(
                    d, z, alpha,
                    d_lo=np.array([x.lo for x in ddd]),
                    z_lo=np.array([x.lo for x in zdd]),
                    alpha_lo=add.lo)
            return ArrowheadMatrix(d, z, alpha)
        if self.kind == "hermitian-arrowhead":
            return HermitianArrowhead(self._floats("d"), self._floats("z"),
                                      self._floats("alpha"))
        if self.kind == "nonsym-arrowhead":
            return NonsymArrowhead(self._floats("d"), self._floats("z_up"),
                                   self._floats("z_low"), self._floats("alpha"))
        if self.kind == "triangular-arrowhead":
            return TriangularArrowhead(self._floats("d"), self._floats("z"),
                                       self._floats("alpha"))
        return DPR1Matrix(self._floats("d"), self._floats("u"),
                          self._floats("rho"))


def parse_problem(text: str) -> ProblemFile:
    """Parse problem-file JSON, keeping the number strings verbatim."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed problem file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("problem file must be a JSON object")
    try:
        version = doc.pop("version")
        kind = doc.pop("kind")
    except KeyError as exc:
        raise ValueError(f"missing field {exc}") from exc
    return ProblemFile(kind=kind, payload=doc, version=version)


def write_problem(pf: ProblemFile) -> str:
    """Canonical serialization: fixed key order, strings verbatim."""
    doc = {"version": pf.version, "kind": pf.kind}
    for name in _KINDS[pf.kind]:
        doc[name] = pf.payload[name]
    return json.dumps(doc, indent=2) + "\n"


def matrix_to_problem(kind, **arrays) -> ProblemFile:
    """Build a ProblemFile from numeric data, using shortest round-trip strings."""
    payload = {}
    for name in _KINDS[kind]:
        val = arrays[name]
        if name in _SCALAR_FIELDS:
            payload[name] = repr(float(val))
        elif (kind, name) in _COMPLEX_FIELDS:
            payload[name] = [[repr(float(c.real)), repr(float(c.imag))] for c in val]
        else:
            payload[name] = [repr(float(x)) for x in val]
    return ProblemFile(kind=kind, payload=payload)


@dataclass
class RunConfig:
    """How the command-line driver reads inputs and runs the solvers."""

    input_repr: str = "decimal"        # binary | decimal
    policy: str = "auto"               # auto | force-standard | force-doubled
    gates: GateConfig = field(default_factory=GateConfig)
    output_format: str = "text"        # text | structured
    which: int | None = None           # 1-based k, or None for all
    vectors: bool = False

    def __post_init__(self):
        if self.input_repr not in ("binary", "decimal"):
            raise ValueError(f"bad input_repr {self.input_repr!r}")
        if self.policy not in ("auto", "force-standard", "force-doubled"):
            raise ValueError(f"bad policy {self.policy!r}")
        if self.output_format not in ("text", "structured"):
            raise ValueError(f"bad output format {self.output_format!r}")

    def with_thresholds(self, kb=None, knu=None, zeta_factor=None):
        g = self.gates
        return replace(self, gates=GateConfig(
            zeta_ratio_factor=zeta_factor if zeta_factor is not None else g.zeta_ratio_factor,
            kb_threshold=kb if kb is not None else g.kb_threshold,
            knu_threshold=knu if knu is not None else g.knu_threshold))
