"""Command-line front end.

Exit codes: 0 success, 1 bad configuration, 2 Gram matrix rejected,
3 projection rejected, 4 numerical consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import acceptance
from .config import ConfigError, RunConfig
from .core import GramError, IllConditionedError, ProjectionError, admissible_dimension, corner_pattern_dimension
from .operator_model import PoleError
from .rashba import CancellationAlarm, RashbaParams, gram_element_closed, gram_element_limit
from .subspace import q_pm_eval
from .weyl import (
    POLE_ZONE,
    EigenvalueHit,
    M_eval,
    extension_eigenvalues,
    krein_naimark,
    solve_extension,
    spectrum_scan,
)

EXIT_CONFIG, EXIT_GRAM, EXIT_PROJECTION, EXIT_NUMERIC = 1, 2, 3, 4


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class Table:
    """CSV accumulator: comment lines, one header row, then data rows."""

    def __init__(self, cfg: RunConfig | None, command: str, header):
        self.comments = [f"amodel {command}"]
        if cfg is not None:
            self.comments.append(f"config_sha256={cfg.hash}")
        self.header = list(header)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.header):
            raise ValueError("row length does not match header")
        self.rows.append([fmt(v) for v in values])

    def render(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _matrix_columns(prefix, d):
    cols = []
    for i in range(d):
        for j in range(d):
            cols += [f"{prefix}{i}{j}_re", f"{prefix}{i}{j}_im"]
    return cols


def _matrix_values(A):
    out = []
    for v in np.asarray(A).ravel():
        out += [v.real, v.imag]
    return out


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _z_ok(model, z) -> bool:
    if abs(z - model.op.z1) < POLE_ZONE or np.min(np.abs(model.op.eigenvalues - z)) < POLE_ZONE:
        _warn(f"z={z} lies in a pole exclusion zone; skipped")
        return False
    return True


# --- commands ---------------------------------------------------------------

def cmd_gram(cfg: RunConfig) -> tuple[Table, int]:
    model = cfg.model(require_admissible=False)
    g = model.gram
    t = Table(cfg, "gram", ["key", "value"])
    t.add("m", model.m)
    t.add("d", model.d)
    t.add("admissible", g.admissible)
    t.add("hermitian", g.hermitian)
    t.add("commutator_norm", g.commutator_norm)
    t.add("condition_number", g.cond)
    t.add("signature_positive", g.signature[0])
    t.add("signature_negative", g.signature[1])
    t.add("space", "hilbert" if g.is_hilbert else "pontryagin")
    t.add("matches_hankel_family", g.matches_hankel)
    t.add("matches_corner_pattern", g.matches_corner_pattern)
    t.add("admissible_family_dimension", admissible_dimension(model.m, model.d))
    t.add("corner_pattern_dimension", corner_pattern_dimension(model.m, model.d))
    return t, (0 if g.admissible else EXIT_GRAM)


def cmd_weyl(cfg: RunConfig):
    model = cfg.model()
    d = model.d
    t = Table(cfg, "weyl", ["z_re", "z_im"] + _matrix_columns("q", d) + _matrix_columns("r", d)
              + _matrix_columns("M", d) + ["symmetry_residual"])
    for z in cfg.grid():
        if not _z_ok(model, z):
            continue
        s = M_eval(model, z)
        sc = M_eval(model, np.conj(z))
        sym = float(np.abs(sc.M - s.M.conj().T).max())
        t.add(z.real, z.imag, *_matrix_values(s.q), *_matrix_values(s.r), *_matrix_values(s.M), sym)
    if not t.rows:
        _warn("no grid point outside the pole zones; empty output")
    return t, 0


def cmd_spectrum(cfg: RunConfig, oracle_tol=1e-8):
    model = cfg.model()
    a, b = cfg.interval()
    n = int(cfg.data.get("scan_points", 2000))
    t = Table(cfg, "spectrum", ["theta", "eigenvalue", "abs_det", "oracle_eigenvalue", "oracle_diff", "flag"])
    bad = 0
    for label, theta in cfg.thetas(model.d):
        if not theta.is_self_adjoint:
            _warn(f"{label} is not self-adjoint; skipped")
            continue
        scan = spectrum_scan(model, theta, a, b, n)
        ev = extension_eigenvalues(model, theta)
        ev = ev[(np.abs(ev.imag) < 1e-8) & (ev.real > a) & (ev.real < b)].real
        matched = set()
        for x, det in scan.roots:
            if ev.size:
                k = int(np.argmin(np.abs(ev - x)))
                diff = abs(ev[k] - x)
                matched.add(k)
                ref = ev[k]
            else:
                diff, ref = np.inf, np.nan
            flag = "ok" if diff <= oracle_tol else "oracle_mismatch"
            bad += flag != "ok"
            t.add(label, x, det, ref, diff, flag)
        for k, e in enumerate(ev):
            if k not in matched:
                near_pole = np.min(np.abs(np.append(model.op.eigenvalues, model.op.z1) - e)) < POLE_ZONE
                flag = "near_pole" if near_pole else "missed_by_scan"
                bad += not near_pole
                t.add(label, np.nan, np.nan, e, np.inf, flag)
        for x in scan.flagged:
            t.add(label, x, np.nan, np.nan, np.nan, "near_pole")
    return t, (EXIT_NUMERIC if bad else 0)


def cmd_resolve(cfg: RunConfig, rtol=1e-8):
    from .core import Pair

    model = cfg.model()
    rng = np.random.default_rng(cfg.seed)
    t = Table(cfg, "resolve", ["theta", "z_re", "z_im", "norm_krein", "norm_oracle", "rel_err"])
    bad = 0
    for label, theta in cfg.thetas(model.d):
        for z in cfg.grid():
            if not _z_ok(model, z):
                continue
            y = Pair(rng.standard_normal(model.N) + 1j * rng.standard_normal(model.N),
                     rng.standard_normal(model.m * model.d) + 1j * rng.standard_normal(model.m * model.d))
            try:
                a = krein_naimark(model, y, z, theta).flat()
                b = solve_extension(model, y, z, theta).flat()
            except EigenvalueHit:
                _warn(f"z={z} is an eigenvalue of {label}; skipped")
                continue
            err = np.linalg.norm(a - b) / np.linalg.norm(b)
            bad += err > rtol
            t.add(label, z.real, z.imag, np.linalg.norm(a), np.linalg.norm(b), err)
    return t, (EXIT_NUMERIC if bad else 0)


def cmd_subspace(cfg: RunConfig, tol=1e-12):
    model = cfg.model()
    P = cfg.projection(model.op)
    P.check(model.op)
    t = Table(cfg, "subspace", ["z_re", "z_im", "rank_P", "additivity_residual", "relative_residual"])
    bad = 0
    for z in cfg.grid():
        if not _z_ok(model, z):
            continue
        q = M_eval(model, z).q
        qm, qp = q_pm_eval(model, P, z, "-"), q_pm_eval(model, P, z, "+")
        res = float(np.abs(qm + qp - q).max())
        rel = res / max(1.0, float(np.abs(q).max()))
        bad += rel > tol
        t.add(z.real, z.imag, P.rank, res, rel)
    if not t.rows:
        _warn("no grid point outside the pole zones; empty output")
    return t, (EXIT_NUMERIC if bad else 0)


def cmd_example(cfg: RunConfig, tol=1e-4):
    ex = cfg.data.get("example", {})
    N = float(ex.get("N_sigma", 1.0))
    pairs = [tuple(p) for p in ex.get("pairs", [[1.0, 2.0]])]
    k = int(ex.get("random_pairs", 0))
    if k:
        rng = np.random.default_rng(cfg.seed)
        pairs += [tuple(rng.uniform(0.5, 5.0, 2)) for _ in range(k)]
    r_seq = tuple(ex.get("r_seq", (1e-2, 5e-3, 2.5e-3)))
    fd = float(ex.get("fd_step", 1e-4))
    t = Table(cfg, "example", ["N_sigma", "a1", "a2", "closed", "extrapolated", "rel_err"])
    bad = 0
    for a1, a2 in pairs:
        p = RashbaParams(N, float(a1), float(a2))
        closed = gram_element_closed(p)
        limit = gram_element_limit(p, r_seq, fd)
        err = abs(limit / closed - 1)
        bad += err > tol
        t.add(N, p.a1, p.a2, closed, limit, err)
    return t, (EXIT_NUMERIC if bad else 0)


def cmd_selftest(cfg):
    t = Table(cfg, "selftest", ["criterion", "name", "passed", "worst", "threshold"])
    failed = 0
    for res in acceptance.run_all():
        print(res.line(), file=sys.stderr)
        failed += not res.passed
        t.add(res.number, res.name, res.passed, res.worst, res.threshold)
    return t, (EXIT_NUMERIC if failed else 0)


COMMANDS = {
    "gram": cmd_gram,
    "weyl": cmd_weyl,
    "spectrum": cmd_spectrum,
    "resolve": cmd_resolve,
    "subspace": cmd_subspace,
    "example": cmd_example,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amodel", description="Finite A-model spectral computations.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", nargs="?", help="JSON run configuration (optional for selftest and example)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--grid", help="override the z grid: 'a:b:n[:imag]' or a comma list like '-1,0.5+1j'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command not in ("selftest", "example"):
                raise ConfigError(f"'{args.command}' needs a config file")
            cfg = RunConfig({"example": {}})
        else:
            cfg = RunConfig.load(args.config)
        cfg = cfg.with_overrides(seed=args.seed, out=args.out, grid=args.grid)
        table, code = COMMANDS[args.command](cfg)
    except GramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRAM
    except ProjectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROJECTION
    except (ConfigError, FileNotFoundError, KeyError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, IllConditionedError, CancellationAlarm, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = table.render()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"exit {code}: invariant violated", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
