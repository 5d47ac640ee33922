"""Reproducible experiment sweeps with CSV and JSON reports.

A configuration selects sweeps, row counts and constants.  Rows are produced
in declared order from per-row seeds derived deterministically from the
master seed, so two runs of one configuration emit byte-identical files.
CSV schema: one header row; integers unquoted, rationals rendered "p/q",
reals with a decimal point.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import families, paramflow
from .bigraph import cheap_regularize
from .errors import ToolkitError
from .fibering import ConstantsConfig, fibering_lemma
from .intset import FiniteIntSet, energy_plus
from .separation import (
    CoverSystem,
    chang_bound,
    empirical_ratio,
    energy_cover_bound,
    final_assembly,
    trivial_bound,
)

ALL_OPERATIONS = (
    "energy_oracle",
    "ap_closed_form",
    "one_prime_separation",
    "trivial_separation",
    "chang_energy",
    "cheap_regularity",
    "fibering_pipeline",
    "energy_cover",
    "final_assembly",
    "paramflow_monotonic",
    "tree_bounds",
)

CSV_COLUMNS = ("experiment", "row", "seed", "family", "size", "measured", "bound", "pass", "error")

DEFAULT_ROWS = {
    "energy_oracle": 60,
    "ap_closed_form": 50,
    "one_prime_separation": 100,
    "trivial_separation": 100,
    "chang_energy": 63,
    "cheap_regularity": 100,
    "fibering_pipeline": 15,
    "energy_cover": 60,
    "final_assembly": 29,
    "paramflow_monotonic": 27,
    "tree_bounds": 4,
}


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 20240
    out_dir: str = "reports"
    operations: tuple[str, ...] = ALL_OPERATIONS
    rows: dict = field(default_factory=lambda: dict(DEFAULT_ROWS))
    constants: ConstantsConfig = field(
        default_factory=lambda: ConstantsConfig(c_small=Fraction(1, 1000), C_big=Fraction(1000))
    )
    strong_constants: paramflow.StrongPairConstants = field(
        default_factory=paramflow.StrongPairConstants
    )

    def __post_init__(self) -> None:
        for op in self.operations:
            if op not in ALL_OPERATIONS:
                raise ValueError(f"unknown operation {op!r}")

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "out_dir": self.out_dir,
            "operations": list(self.operations),
            "rows": dict(self.rows),
            "constants": {
                "c_small": f"{self.constants.c_small.numerator}/{self.constants.c_small.denominator}",
                "C_big": f"{self.constants.C_big.numerator}/{self.constants.C_big.denominator}",
                "auto_swap": self.constants.auto_swap,
            },
            "strong_constants": {
                k: getattr(self.strong_constants, k)
                for k in ("tau", "gamma", "A1", "A2", "A3", "B1", "B2", "B3", "Nbar", "bootstrap_C")
            },
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "ExperimentConfig":
        if isinstance(data, str):
            data = json.loads(data)
        kwargs: dict = {}
        for key in ("seed", "out_dir"):
            if key in data:
                kwargs[key] = data[key]
        if "operations" in data:
            kwargs["operations"] = tuple(data["operations"])
        if "rows" in data:
            rows = dict(DEFAULT_ROWS)
            rows.update({k: int(v) for k, v in data["rows"].items()})
            kwargs["rows"] = rows
        if "constants" in data:
            c = data["constants"]
            kwargs["constants"] = ConstantsConfig(
                c_small=Fraction(c.get("c_small", "1/1000")),
                C_big=Fraction(c.get("C_big", "1000")),
                auto_swap=bool(c.get("auto_swap", True)),
            )
        if "strong_constants" in data:
            kwargs["strong_constants"] = paramflow.StrongPairConstants(**data["strong_constants"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(experiment: str, index: int, seed: int, family: str, size, measured, bound,
         ok: bool, error: str = "") -> dict:
    return {
        "experiment": experiment,
        "row": index,
        "seed": seed,
        "family": family,
        "size": size,
        "measured": measured,
        "bound": bound,
        "pass": ok,
        "error": error,
    }


def _seed_for(master: int, op: str, index: int) -> int:
    digest = hashlib.sha256(f"{master}:{op}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --- individual sweeps ------------------------------------------------------


def _rows_energy_oracle(cfg, count):
    rows = []
    for i in range(count):
        seed = _seed_for(cfg.seed, "energy_oracle", i)
        rng = random.Random(seed)
        size = rng.randint(1, 30)
        a = FiniteIntSet.from_iterable(rng.sample(range(-1000, 1001), size))
        conv = energy_plus(a, method="convolution").energy
        oracle = energy_plus(a, method="quadruple-oracle").energy
        rows.append(_row("energy_oracle", i, seed, "random_subset", len(a), conv, oracle,
                         conv == oracle))
    return rows


def _rows_ap_closed_form(cfg, count):
    rows = []
    for i in range(count):
        n = i + 1
        a = families.generate(families.FamilySpec("arithmetic_progression", {"length": n}))
        e = energy_plus(a).energy
        expected = (2 * n**3 + n) // 3
        rows.append(_row("ap_closed_form", i, cfg.seed, "arithmetic_progression", n, e,
                         expected, e == expected))
    return rows


def _rows_separation(cfg, count, op):
    rows = []
    for i in range(count):
        seed = _seed_for(cfg.seed, op, i)
        rng = random.Random(seed)
        if op == "one_prime_separation":
            fam = families.one_prime_family(rng, prime=rng.choice((2, 3, 5)))
            bound = Fraction(6)
        else:
            fam = families.unstructured_family(rng)
            bound = trivial_bound(fam.coefficients).value
        report = empirical_ratio(fam)
        rows.append(_row(op, i, seed, "sliced_family", len(fam.coefficients),
                         report.ratio, bound, report.within(bound)))
    return rows


def _rows_chang_energy(cfg, count):
    rows = []
    for i in range(count):
        n = i + 2
        a = families.generate(families.FamilySpec("geometric", {"ratio": 2, "length": n}))
        e = energy_plus(a).energy
        psi = chang_bound(a).bound.value
        bound = psi**2 * n**2
        rows.append(_row("chang_energy", i, cfg.seed, "geometric", n, e, bound, e <= bound))
    return rows


def _rows_cheap_regularity(cfg, count):
    rows = []
    for i in range(count):
        seed = _seed_for(cfg.seed, "cheap_regularity", i)
        rng = random.Random(seed)
        nl, nr = rng.randint(10, 200), rng.randint(10, 200)
        density = rng.uniform(0.05, 1.0)
        left = FiniteIntSet.from_iterable(range(nl))
        right = FiniteIntSet.from_iterable(range(nr))
        g = families.random_bigraph(rng, left, right, density)
        checks = cheap_regularize(g).conclusions()
        rows.append(_row("cheap_regularity", i, seed, "random_bigraph",
                         f"{nl}x{nr}", sum(checks.values()), len(checks),
                         all(checks.values())))
    return rows


def _rows_fibering(cfg, count):
    rows = []
    instances = families.fibering_instances(cfg.seed, count)
    for i, (a1, a2, g) in enumerate(instances):
        try:
            decomp, _ = fibering_lemma(a1, a2, g, cfg=cfg.constants)
            table = decomp.verify(cfg.constants)
            ok = all(r["pass"] for r in table.values())
            slack = min(
                r["slack"] for k, r in table.items() if "slack" in r
            )
            rows.append(_row("fibering_pipeline", i, cfg.seed, "lattice_instance",
                             f"{len(a1)}x{len(a2)}", slack, 1.0, ok))
        except ToolkitError as exc:
            rows.append(_row("fibering_pipeline", i, cfg.seed, "lattice_instance",
                             f"{len(a1)}x{len(a2)}", "", "", False, str(exc)))
    return rows


def _rows_energy_cover(cfg, count):
    rows = []
    for i in range(count):
        seed = _seed_for(cfg.seed, "energy_cover", i)
        rng = random.Random(seed)
        base = FiniteIntSet.from_iterable(rng.sample(range(-100, 101), rng.randint(2, 40)))
        n_parts = rng.randint(1, 6)
        parts = []
        for _ in range(n_parts):
            size = rng.randint(1, len(base))
            parts.append(FiniteIntSet.from_iterable(rng.sample(base.elements, size)))
        # pad so every element is covered at least once
        parts.append(base)
        cov = CoverSystem.build(base, parts)
        rep = energy_cover_bound(cov)
        rows.append(_row("energy_cover", i, seed, "random_cover", len(base),
                         rep.actual, rep.bound, rep.passed))
    return rows


def _rows_final_assembly(cfg, count):
    rows = []
    for i in range(count):
        n = i + 4
        a = families.generate(families.FamilySpec("geometric", {"ratio": 2, "length": n}))
        a_prime = FiniteIntSet(a.elements[: n // 2])
        rep = final_assembly(a, a_prime)
        rows.append(_row("final_assembly", i, cfg.seed, "geometric", n,
                         rep.actual_energy, rep.energy_bound,
                         rep.actual_energy <= rep.energy_bound))
    return rows


def _rows_paramflow_monotonic(cfg, count):
    # K-axis monotonicity of psi and phi at a few (N, delta) slices
    rows = []
    evaluators = {
        "freiman": lambda t: paramflow.freiman_pair(t),
        "better": lambda t: paramflow.better_pair(t),
        "strong": lambda t: paramflow.strong_pair(t, cfg.strong_constants),
    }
    slices = [(1e4, 1.0), (1e8, 0.5), (1e12, 0.1)]
    ks = [16.0 * 2**j for j in range(count)]
    idx = 0
    for name, ev in sorted(evaluators.items()):
        for n_val, d_val in slices:
            vals = [ev(paramflow.ParamTriple(n_val, d_val, k)) for k in ks]
            psi_ok = all(b.log_psi >= a.log_psi - 1e-9 for a, b in zip(vals, vals[1:]))
            phi_ok = all(b.log_phi <= a.log_phi + 1e-9 for a, b in zip(vals, vals[1:]))
            rows.append(_row("paramflow_monotonic", idx, cfg.seed, name,
                             f"N={n_val:g},delta={d_val:g}", len(ks), "",
                             psi_ok and phi_ok))
            idx += 1
    return rows


def _rows_tree_bounds(cfg, count):
    rows = []
    root = paramflow.ParamTriple(1e20, 1.0, 1e4)
    for depth in range(1, count + 1):
        report = paramflow.tree_simulate(root, depth)
        worst = min(
            lv.kdelta_bound["bound"] - lv.kdelta_bound["measured"] for lv in report.levels
        )
        rows.append(_row("tree_bounds", depth - 1, cfg.seed, "adversarial_tree", depth,
                         worst, 0.0, report.all_bounds_pass))
    return rows


_SWEEPS = {
    "energy_oracle": _rows_energy_oracle,
    "ap_closed_form": _rows_ap_closed_form,
    "one_prime_separation": lambda c, n: _rows_separation(c, n, "one_prime_separation"),
    "trivial_separation": lambda c, n: _rows_separation(c, n, "trivial_separation"),
    "chang_energy": _rows_chang_energy,
    "cheap_regularity": _rows_cheap_regularity,
    "fibering_pipeline": _rows_fibering,
    "energy_cover": _rows_energy_cover,
    "final_assembly": _rows_final_assembly,
    "paramflow_monotonic": _rows_paramflow_monotonic,
    "tree_bounds": _rows_tree_bounds,
}


@dataclass(frozen=True)
class ExperimentResult:
    csv_path: Path
    json_path: Path
    rows: tuple[dict, ...]
    summary: dict


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute the selected sweeps and write report.csv / report.json.

    Per-row failures are recorded in the row's error column; the run
    continues.  Output is deterministic for a fixed configuration."""
    all_rows: list[dict] = []
    for op in cfg.operations:
        count = int(cfg.rows.get(op, DEFAULT_ROWS[op]))
        try:
            all_rows.extend(_SWEEPS[op](cfg, count))
        except ToolkitError as exc:  # sweep-level failure: one error row
            all_rows.append(_row(op, 0, cfg.seed, "", "", "", "", False, str(exc)))

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_digest = hashlib.sha256(
        json.dumps(cfg.to_json(), sort_keys=True).encode()
    ).hexdigest()

    buf = io.StringIO()
    buf.write(f"# config_sha256={config_digest}\n")
    buf.write(f"# seed={cfg.seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in all_rows:
        writer.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    csv_path = out_dir / "report.csv"
    csv_path.write_text(buf.getvalue())

    summary = {
        "config_sha256": config_digest,
        "total_rows": len(all_rows),
        "passes": sum(1 for r in all_rows if r["pass"]),
        "failures": sum(1 for r in all_rows if not r["pass"]),
        "by_experiment": {
            op: {
                "rows": sum(1 for r in all_rows if r["experiment"] == op),
                "passes": sum(1 for r in all_rows if r["experiment"] == op and r["pass"]),
            }
            for op in cfg.operations
        },
    }
    json_path = out_dir / "report.json"
    json_path.write_text(
        json.dumps(
            {
                "config": cfg.to_json(),
                "summary": summary,
                "rows": [{k: _fmt(v) for k, v in r.items()} for r in all_rows],
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return ExperimentResult(csv_path, json_path, tuple(all_rows), summary)
