"""Run configuration: a JSON document describing one model and what to do with it.

Complex numbers are written as ``[re, im]`` pairs (plain numbers are real).
A minimal document::

    {"operator": {"eigenvalues": [1, 2]}, "z1": 0, "m": 1,
     "phi": [[1, 1]], "gram": {"matrix": [[1]]}, "grid": [[-1, 0]]}

Operator forms
    ``{"eigenvalues": [...]}``, ``{"levels": [[value, multiplicity], ...]}``
    or ``{"ramp": {"levels": K, "power": p, "degeneracy": d}}``.
Functionals ``phi``
    explicit ``d x N`` rows, or ``{"random": {"d": d, "seed": s}}``.
Gram source
    ``{"matrix": ...}``, ``{"identity": true}`` or ``{"sample_seed": s}``.
Theta list
    entries ``{"X": ..., "Y": ...}`` (optionally ``"self_adjoint": bool``),
    ``{"tau": [...]}`` for the scalar graphs ``Y = tau X`` with ``d = 1``,
    ``{"a0": true}`` or ``{"random": k, "seed": s}``.
Projection
    ``{"indices": [...]}`` or ``{"blocks": [{"indices", "unitary", "rank"}]}``.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AModel, build_jordan, sample_admissible_gram, validate_gram
from .operator_model import SingularFamily, SpectralOperator
from .subspace import ReducingProjection
from .weyl import RelationParam


class ConfigError(ValueError):
    pass


def complex_array(x, ndim: int) -> np.ndarray:
    """Parse an array of complex numbers with the expected dimension ``ndim``.

    A trailing axis of length 2 is read as ``[re, im]`` only when the plain
    reading would have one dimension too many.
    """
    raw = np.asarray(x, dtype=float)
    if raw.ndim == ndim:
        return raw.astype(complex)
    if raw.ndim == ndim + 1 and raw.shape[-1] == 2:
        return raw[..., 0] + 1j * raw[..., 1]
    raise ConfigError(f"expected a {ndim}-dimensional array, got shape {raw.shape}")


def encode_complex(a):
    """Inverse of :func:`complex_array` for JSON output."""
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return np.real(a).tolist()


@dataclass
class RunConfig:
    data: dict

    # ---- loading --------------------------------------------------------
    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls(copy.deepcopy(data))
        cfg.validate()
        return cfg

    def dumps(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)

    def save(self, path):
        Path(path).write_text(self.dumps() + "\n")

    @property
    def hash(self) -> str:
        """Digest of the run-defining content; the output path is left out."""
        data = {k: v for k, v in self.data.items() if k != "out"}
        canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def with_overrides(self, *, seed=None, out=None, grid=None) -> "RunConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["seed"] = int(seed)
        if out is not None:
            data["out"] = str(out)
        if grid is not None:
            data["grid"] = parse_grid_spec(grid)
        return RunConfig.from_dict(data)

    # ---- scalar fields ---------------------------------------------------
    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def out(self):
        return self.data.get("out")

    @property
    def m(self) -> int:
        return int(self.data["m"])

    @property
    def z1(self) -> float:
        return float(self.data["z1"])

    # ---- model pieces ----------------------------------------------------
    def operator(self) -> SpectralOperator:
        spec = self.data["operator"]
        if "eigenvalues" in spec:
            return SpectralOperator(np.sort(np.asarray(spec["eigenvalues"], dtype=float)), self.z1)
        if "levels" in spec:
            return SpectralOperator.from_multiplicities(spec["levels"], self.z1)
        if "ramp" in spec:
            r = spec["ramp"]
            lam = (np.arange(int(r["levels"])) + 1.0) ** float(r.get("power", 2))
            return SpectralOperator(np.repeat(lam, int(r.get("degeneracy", 1))), self.z1)
        raise ConfigError("operator needs 'eigenvalues', 'levels' or 'ramp'")

    def family(self, op: SpectralOperator | None = None) -> SingularFamily:
        op = op or self.operator()
        spec = self.data["phi"]
        if isinstance(spec, dict):
            if "random" not in spec:
                raise ConfigError("phi must be explicit rows or {'random': {...}}")
            r = spec["random"]
            rng = np.random.default_rng(int(r.get("seed", self.seed)))
            d = int(r["d"])
            phi = rng.standard_normal((d, op.dim)) + 1j * rng.standard_normal((d, op.dim))
        else:
            phi = complex_array(spec, 2)
        return SingularFamily(phi, self.m)

    def gram_matrix(self, d: int, op: SpectralOperator):
        spec = self.data.get("gram", {"sample_seed": self.seed})
        M = build_jordan(self.m, d, op.z1)
        if "matrix" in spec:
            return validate_gram(complex_array(spec["matrix"], 2), M)
        if spec.get("identity"):
            return validate_gram(np.eye(self.m * d), M)
        if "sample_seed" in spec:
            return sample_admissible_gram(self.m, d, seed=int(spec["sample_seed"]), z1=op.z1)
        raise ConfigError("gram needs 'matrix', 'identity' or 'sample_seed'")

    def model(self, *, require_admissible=True) -> AModel:
        op = self.operator()
        fam = self.family(op)
        gram = self.gram_matrix(fam.d, op)
        return AModel(op, fam, gram, require_admissible=require_admissible)

    def thetas(self, d: int):
        """``(label, RelationParam)`` pairs."""
        out = []
        for k, spec in enumerate(self.data.get("thetas", [{"a0": True}])):
            if "tau" in spec:
                if d != 1:
                    raise ConfigError("tau grids need d = 1")
                for tau in spec["tau"]:
                    out.append((f"tau={float(tau):.17g}", RelationParam(np.eye(1), np.eye(1) * float(tau))))
            elif spec.get("a0"):
                out.append(("A0", RelationParam.a0(d)))
            elif "random" in spec:
                rng = np.random.default_rng(int(spec.get("seed", self.seed)))
                for j in range(int(spec["random"])):
                    out.append((f"random{k}.{j}", RelationParam.random_self_adjoint(d, rng)))
            elif "X" in spec and "Y" in spec:
                th = RelationParam(complex_array(spec["X"], 2), complex_array(spec["Y"], 2))
                if th.d != d:
                    raise ConfigError(f"theta {k} has size {th.d}, expected d = {d}")
                tagged = spec.get("self_adjoint")
                if tagged is not None and bool(tagged) != th.is_self_adjoint:
                    raise ConfigError(f"theta {k} is tagged self_adjoint={tagged} but is not")
                out.append((spec.get("label", f"theta{k}"), th))
            else:
                raise ConfigError(f"cannot read theta entry {k}")
        return out

    def projection(self, op: SpectralOperator) -> ReducingProjection:
        spec = self.data.get("projection")
        if spec is None:
            raise ConfigError("config has no 'projection' section")
        if "indices" in spec:
            return ReducingProjection.diagonal(op.dim, spec["indices"])
        if "blocks" in spec:
            blocks = [(b["indices"], complex_array(b["unitary"], 2), int(b["rank"])) for b in spec["blocks"]]
            return ReducingProjection.from_blocks(op, blocks)
        raise ConfigError("projection needs 'indices' or 'blocks'")

    def grid(self) -> np.ndarray:
        spec = self.data.get("grid", [])
        if isinstance(spec, dict):
            return parse_grid_dict(spec)
        if not spec:
            return np.zeros(0, dtype=complex)
        return complex_array(spec, 1)

    def interval(self):
        a, b = self.data.get("interval", [None, None])
        if a is None:
            lam = self.operator().eigenvalues
            a, b = self.z1 - 5.0, lam[-1] + 5.0
        return float(a), float(b)

    # ---- validation -----------------------------------------------------
    def validate(self):
        d = self.data
        if "example" in d and "operator" not in d:
            return
        for key in ("operator", "z1", "m", "phi"):
            if key not in d:
                raise ConfigError(f"missing required field '{key}'")
        op = self.operator()
        fam = self.family(op)
        if fam.dim != op.dim:
            raise ConfigError(f"phi has {fam.dim} columns but the operator has N = {op.dim}")
        if fam.dim < self.m * fam.d:
            raise ConfigError("need N >= m*d")
        if "gram" in d and "matrix" in d["gram"]:
            G = complex_array(d["gram"]["matrix"], 2)
            if G.shape != (self.m * fam.d,) * 2:
                raise ConfigError(f"gram matrix must be {self.m * fam.d}x{self.m * fam.d}")
        if "projection" in d and "indices" in d["projection"]:
            if any(not 0 <= i < op.dim for i in d["projection"]["indices"]):
                raise ConfigError("projection index out of range")


def parse_grid_dict(spec: dict) -> np.ndarray:
    if "linspace" in spec:
        a, b, n = spec["linspace"]
        pts = np.linspace(float(a), float(b), int(n))
        return pts + 1j * float(spec.get("imag", 0.0))
    if "points" in spec:
        return complex_array(spec["points"], 1)
    raise ConfigError("grid dict needs 'linspace' or 'points'")


def parse_grid_spec(text: str):
    """Command-line grid: ``a:b:n`` (real linspace, optional ``:imag``) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError("grid 'a:b:n[:imag]' expected")
        out = {"linspace": [float(parts[0]), float(parts[1]), int(parts[2])]}
        if len(parts) == 4:
            out["imag"] = float(parts[3])
        return out
    pts = [complex(p.replace(" ", "")) for p in text.split(",") if p.strip()]
    return [[p.real, p.imag] for p in pts]
