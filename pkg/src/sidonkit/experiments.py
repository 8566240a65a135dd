"""Desk-scale experiment runners producing deterministic tables.

Every runner returns a list of ``ExperimentRow``; ``to_csv`` renders them
with a header comment (tool version and parameters) and floats in their
shortest round-trip form, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .hadamard import is_prime, paley1, paley2, paley_tower, sylvester, system_from_tower
from .qc import (
    RNG_NAME,
    block_values_at_zero,
    log_poly,
    oskolkov_poly,
    qc_block_lower_proxy,
    qc_exact,
    qc_monte_carlo,
)
from .rademacher import khintchine_tail_check
from .sidon import riesz_product
from .trigpoly import evaluate, grid_values, norm_sup
from .walsh import DiscreteSystem

LAMBDAS = tuple(0.5 * i for i in range(1, 9))  # 0.5, 1.0, ..., 4.0


@dataclass(frozen=True)
class ExperimentRow:
    experiment: str
    params: dict
    outputs: dict
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {"experiment": self.experiment, "params": self.params, "outputs": self.outputs, "seed": self.seed},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRow":
        d = json.loads(text)
        return cls(d["experiment"], d["params"], d["outputs"], d["seed"])


# Column order and golden tolerances per experiment: (name, kind, rel_tol).
# kind "exact" must match the golden text verbatim, "float" within a relative
# tolerance and "atol" within an absolute one.
COLUMNS = {
    "oskolkov": [("n", "exact", 0), ("sup_norm", "float", 1e-6), ("qc_exact", "float", 0.05), ("qc_over_sqrt_n", "float", 0.05)],
    "logcos": [
        ("k", "exact", 0),
        ("N", "exact", 0),
        ("qc", "float", 0.05),
        ("qc_over_sqrt_lnN", "float", 0.05),
        ("proxy", "float", 1e-12),
        ("proxy_gt_half_sqrt_k", "exact", 0),
    ],
    "khintchine": [
        ("trial", "exact", 0),
        ("n", "exact", 0),
        ("worst_lambda", "exact", 0),
        ("worst_measure", "exact", 0),
        ("worst_bound", "float", 1e-12),
        ("violations", "exact", 0),
    ],
    "riesz": [
        ("m", "exact", 0),
        ("min_grid", "atol", 1e-9),
        ("mean", "exact", 0),
        ("max_point_error", "atol", 1e-10),
        ("min_ok", "exact", 0),
    ],
    "hadamard-audit": [
        ("construction", "exact", 0),
        ("param", "exact", 0),
        ("order", "exact", 0),
        ("hadamard", "exact", 0),
        ("tower_orders", "exact", 0),
        ("tower_verdict", "exact", 0),
    ],
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(text: str):
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def to_csv(name: str, params: dict, rows: list[ExperimentRow]) -> str:
    cols = [c for c, _, _ in COLUMNS[name]]
    buf = io.StringIO()
    meta = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(params.items()))
    buf.write(f"# sidonkit {__version__} experiment={name} {meta}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.outputs[c]) for c in cols])
    return buf.getvalue()


def from_csv(text: str) -> list[ExperimentRow]:
    """Inverse of ``to_csv``."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# sidonkit "):
        raise ValueError("missing sidonkit header comment")
    fields = lines[0].split()[3:]
    name = fields[0].split("=", 1)[1]
    params = {k: _parse(v) for k, v in (f.split("=", 1) for f in fields[1:])}
    if params.get("seed") == "None":
        params["seed"] = None
    reader = csv.reader(lines[1:])
    cols = next(reader)
    seed = params.get("seed")
    return [ExperimentRow(name, params, {c: _parse(v) for c, v in zip(cols, vals)}, seed) for vals in reader]


@dataclass(frozen=True)
class GoldenMismatch:
    row: int
    column: str
    expected: str
    actual: str


def compare_golden(name: str, actual_csv: str, golden_csv: str) -> list[GoldenMismatch]:
    """Per-column comparison; the header comment is not compared."""
    tol = {c: (kind, rt) for c, kind, rt in COLUMNS[name]}
    a = list(csv.DictReader(actual_csv.splitlines()[1:]))
    g = list(csv.DictReader(golden_csv.splitlines()[1:]))
    out = []
    if len(a) != len(g):
        out.append(GoldenMismatch(-1, "<rows>", str(len(g)), str(len(a))))
    for i, (ra, rg) in enumerate(zip(a, g)):
        for c, (kind, rt) in tol.items():
            if c not in rg:
                continue
            if kind == "exact":
                ok = ra[c] == rg[c]
            elif kind == "atol":
                ok = abs(float(ra[c]) - float(rg[c])) <= rt
            else:
                x, y = float(ra[c]), float(rg[c])
                ok = x == y or abs(x - y) <= rt * abs(y)
            if not ok:
                out.append(GoldenMismatch(i, c, rg[c], ra[c]))
    return out


def run_oskolkov(nmax: int = 10, inner_tol: float = 1e-6, nmin: int = 2, tol: float = 1e-8) -> list[ExperimentRow]:
    """Rows (n, sup_norm, qc_exact, qc_over_sqrt_n) for the Oskolkov polynomials."""
    params = {"nmin": nmin, "nmax": nmax, "inner_tol": inner_tol, "tol": tol}
    rows = []
    for n in range(nmin, nmax + 1):
        t = oskolkov_poly(n)
        sup = norm_sup(t, tol).mid
        qc = qc_exact(t, inner_tol).value
        rows.append(ExperimentRow("oskolkov", params, {"n": n, "sup_norm": sup, "qc_exact": qc, "qc_over_sqrt_n": qc / math.sqrt(n)}))
    return rows


def run_logcos(
    kmax: int = 10,
    inner_tol: float = 1e-5,
    kmin: int = 2,
    mode: str = "exact",
    samples: int = 256,
    seed: int | None = None,
) -> list[ExperimentRow]:
    """Rows for ``sum_{n<=N} cos(nx)/n`` with N = 2^k - 1.

    ``proxy`` is ``(sum_j delta_j(f, 0)^2)^{1/2}``; every block value at 0
    exceeds 1/2, so ``proxy > sqrt(k)/2``.
    """
    params = {"kmin": kmin, "kmax": kmax, "inner_tol": inner_tol, "mode": mode, "seed": seed}
    if mode == "mc":
        params["samples"] = samples
        params["rng"] = RNG_NAME
    rows = []
    for k in range(kmin, kmax + 1):
        N = (1 << k) - 1
        t = log_poly(N)
        if mode == "exact":
            qc = qc_exact(t, inner_tol).value
        elif mode == "mc":
            qc = qc_monte_carlo(t, samples, 0 if seed is None else seed + k, inner_tol).value
        else:
            raise ValueError(f"unknown mode {mode!r}")
        proxy = qc_block_lower_proxy(t)
        flag = proxy > math.sqrt(k) / 2 and all(v > 0.5 for v in block_values_at_zero(t))
        out = {
            "k": k,
            "N": N,
            "qc": qc,
            "qc_over_sqrt_lnN": qc / math.sqrt(math.log(N)),
            "proxy": proxy,
            "proxy_gt_half_sqrt_k": flag,
        }
        rows.append(ExperimentRow("logcos", params, out, seed))
    return rows


def khintchine_trials(trials: int, nmax: int, seed: int):
    """Deterministic trial inputs: n uniform in [1, nmax] and coefficients
    ``j / 1024`` with j uniform in [-1024, 1024] (redrawn if all zero)."""
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    for _ in range(trials):
        n = int(rng.integers(1, nmax + 1))
        a = rng.integers(-1024, 1025, size=n)
        while not a.any():
            a = rng.integers(-1024, 1025, size=n)
        out.append([int(v) / 1024 for v in a])
    return out


def run_khintchine(trials: int = 500, nmax: int = 16, seed: int = 0) -> list[ExperimentRow]:
    """Exact tail measures against ``2 exp(-lambda^2/2)`` for lambda in 0.5..4.0.

    Each row reports the lambda with the largest measure/bound ratio and
    the number of violated lambdas for that trial.
    """
    params = {"trials": trials, "nmax": nmax, "seed": seed, "rng": RNG_NAME}
    rows = []
    for i, a in enumerate(khintchine_trials(trials, nmax, seed)):
        reports = [khintchine_tail_check(a, lam) for lam in LAMBDAS]
        worst = max(range(len(LAMBDAS)), key=lambda j: float(reports[j].measure) / reports[j].bound)
        r = reports[worst]
        out = {
            "trial": i,
            "n": len(a),
            "worst_lambda": LAMBDAS[worst],
            "worst_measure": f"{r.measure.numerator}/{r.measure.denominator}",
            "worst_bound": r.bound,
            "violations": sum(not rep.holds for rep in reports),
        }
        rows.append(ExperimentRow("khintchine", params, out, seed))
    return rows


def run_riesz(mmax: int = 8, base: int = 3, seed: int = 0, grid: int = 1 << 16, points: int = 128) -> list[ExperimentRow]:
    """Riesz products over ``base^k``: grid minimum, mean and pointwise check."""
    params = {"mmax": mmax, "base": base, "seed": seed, "grid": grid, "points": points}
    seq = [base**k for k in range(mmax)]
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.uniform(0, 2 * math.pi, points)
    rows = []
    for m in range(1, mmax + 1):
        r = riesz_product(seq, m)
        direct = np.prod([1 + np.cos(nk * x) for nk in seq[:m]], axis=0)
        min_grid = float(grid_values(r, grid).min())
        out = {
            "m": m,
            "min_grid": min_grid,
            "mean": r.constant,  # exactly 1.0 for a valid product
            "max_point_error": float(np.max(np.abs(evaluate(r, x) - direct))),
            "min_ok": min_grid >= -1e-9,
        }
        rows.append(ExperimentRow("riesz", params, out, seed))
    return rows


def _tower_cell(p: int, levels: int):
    if levels < 2:
        return "", "skipped"
    tower = paley_tower(p, levels)
    res = system_from_tower(tower)
    orders = "|".join(str(H.order) for H in tower)
    if isinstance(res, DiscreteSystem):
        return orders, "accepted"
    return orders, f"rejected:{res.condition}"


def run_hadamard_audit(
    kmax: int = 10, pmax: int = 199, p2max: int = 197, levels: int = 3, tower_pmax: int = 60
) -> list[ExperimentRow]:
    """Exact ``H H^T = n I`` for Sylvester k <= kmax, Paley I (p <= pmax) and
    Paley II (p <= p2max); Paley towers (orders 1, alpha, 2 alpha, ...) for
    p <= tower_pmax."""
    params = {"kmax": kmax, "pmax": pmax, "p2max": p2max, "levels": levels, "tower_pmax": tower_pmax}
    rows = []

    def add(kind, param, H, tower=("", "skipped")):
        rows.append(
            ExperimentRow(
                "hadamard-audit",
                params,
                {
                    "construction": kind,
                    "param": param,
                    "order": H.order,
                    "hadamard": True,  # HadamardMatrix verifies on construction
                    "tower_orders": tower[0],
                    "tower_verdict": tower[1],
                },
            )
        )

    for k in range(kmax + 1):
        add("sylvester", k, sylvester(k))
    for p in range(3, max(pmax, p2max) + 1):
        if not is_prime(p):
            continue
        tower = _tower_cell(p, levels) if p <= tower_pmax else ("", "skipped")
        if p % 4 == 3 and p <= pmax:
            add("paley1", p, paley1(p), tower)
        elif p % 4 == 1 and p <= p2max:
            add("paley2", p, paley2(p), tower)
    return rows


RUNNERS: dict[str, Callable[..., list[ExperimentRow]]] = {
    "oskolkov": run_oskolkov,
    "logcos": run_logcos,
    "khintchine": run_khintchine,
    "riesz": run_riesz,
    "hadamard-audit": run_hadamard_audit,
}


def run_experiment(name: str, **params) -> list[ExperimentRow]:
    if name not in RUNNERS:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(RUNNERS)}")
    return RUNNERS[name](**params)


def experiment_params(rows: list[ExperimentRow]) -> dict:
    return dict(rows[0].params) if rows else {}
