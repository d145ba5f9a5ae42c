"""Configuration, table rendering and file output for the command line tools.

Config files are YAML::

    scenario:          # any ScenarioConfig field
      mu_law: integer-uniform
      cases: 100000
      seed: 2021
    methods: [conventional, small_alpha, mesp, distance_only, interval_based, thick_t]
    decision: {alpha_conventional: 0.05, alpha_small: 0.005, alpha_thick: 0.05, ci_level: 0.95}
    thick_priors:      # one entry per thick_t* method
      thick_t: {kind: discrete-uniform, step: 1}
    quadrature: {rule: gauss-legendre, nodes: 64, abs_tol: 1.0e-10}
    output_dir: results
    emit_raw_cases: false
    workers: 1
    jitter_seed: 7
    alpha_grid: {start: 0.0, stop: 1.0, step: 0.01}

A thick prior may also be ``{kind: fitted, path: prior.json, variant:
truncated-normal | kde}`` pointing at a file written by ``fit-prior``.
Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from importlib import metadata, resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import analytics
from .decisions import DecisionConfig, Method, method_kind
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec
from .priors import (
    DiscreteUniform,
    InsufficientDataError,
    Prior,
    fit_kde,
    fit_truncated_normal,
    prior_from_dict,
)
from .simulation import DEFAULT_METHODS, POWER_CATEGORIES, ScenarioConfig, StudyResults

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "config_hash",
    "write_tables",
    "write_raw_cases",
    "write_alpha_sweep",
    "write_manifest",
    "read_effect_sizes",
    "prior_description",
    "load_reference",
    "compare_reference",
    "computed_cells",
    "REFERENCE_CASES",
]

SCHEMA_VERSION = 1
REFERENCE_CASES = 100_000
METHOD_LABELS = {
    "conventional": "Conventional",
    "small_alpha": "Small-alpha",
    "mesp": "MESP",
    "distance_only": "Distance-only",
    "interval_based": "Interval-based",
    "thick_t": "Thick t-test",
}


class ConfigError(ValueError):
    """The run configuration is malformed."""


@dataclass
class RunConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    methods: tuple = DEFAULT_METHODS
    decision: DecisionConfig = DecisionConfig()
    thick_priors: dict = field(default_factory=dict)
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    output_dir: Path = Path("results")
    emit_raw_cases: bool = False
    workers: int = 1
    jitter_seed: int = 7
    alpha_grid: tuple = (0.0, 1.0, 0.01)

    def alphas(self) -> np.ndarray:
        start, stop, step = self.alpha_grid
        count = int(round((stop - start) / step))
        return np.round(start + step * np.arange(count + 1), 12)

    def to_dict(self) -> dict:
        scenario = asdict(self.scenario)
        for key in ("mu_range", "sigma_range", "n_range", "mpsd_range"):
            scenario[key] = list(scenario[key])
        return {
            "scenario": scenario,
            "methods": list(self.methods),
            "decision": asdict(self.decision),
            "thick_priors": {k: v.to_dict() for k, v in self.thick_priors.items()},
            "quadrature": asdict(self.quadrature),
            "emit_raw_cases": self.emit_raw_cases,
            "jitter_seed": self.jitter_seed,
            "alpha_grid": {"start": self.alpha_grid[0], "stop": self.alpha_grid[1], "step": self.alpha_grid[2]},
        }


def _fitted_prior(spec: dict, base: Path) -> Prior:
    path = Path(spec["path"])
    if not path.is_absolute():
        path = base / path
    try:
        desc = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read prior file {path}: {exc.strerror}") from exc
    variant = spec.get("variant", "truncated-normal")
    key = {"truncated-normal": "truncated_normal", "kde": "kde"}.get(variant)
    if key is None or key not in desc:
        raise ConfigError(f"prior file {path} has no {variant!r} variant")
    return prior_from_dict(desc[key])


def config_from_dict(raw: dict, base: Path = Path(".")) -> RunConfig:
    """Build a :class:`RunConfig` from parsed YAML, validating every field."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    known = {"scenario", "methods", "decision", "thick_priors", "quadrature", "output_dir",
             "emit_raw_cases", "workers", "jitter_seed", "alpha_grid"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        scenario = ScenarioConfig(**raw.get("scenario", {}))
        methods = tuple(raw.get("methods", DEFAULT_METHODS))
        if not methods:
            raise ConfigError("method list must not be empty")
        for m in methods:
            method_kind(m)
        decision = DecisionConfig(**raw.get("decision", {}))
        quad = QuadratureSpec(**raw.get("quadrature", {}))
        priors = {}
        for name, spec in (raw.get("thick_priors") or {}).items():
            priors[name] = _fitted_prior(spec, base) if spec.get("kind") == "fitted" else prior_from_dict(spec)
        for m in methods:
            if method_kind(m) is Method.THICK_T and m not in priors:
                if m != "thick_t":
                    raise ConfigError(f"thick t-test {m!r} needs an entry in thick_priors")
                priors[m] = DiscreteUniform()
        grid = raw.get("alpha_grid", {})
        alpha_grid = (float(grid.get("start", 0.0)), float(grid.get("stop", 1.0)), float(grid.get("step", 0.01)))
        if not (0 <= alpha_grid[0] <= alpha_grid[1] <= 1 and alpha_grid[2] > 0):
            raise ConfigError("alpha_grid must satisfy 0 <= start <= stop <= 1 and step > 0")
        out = Path(raw.get("output_dir", "results"))
        if not out.is_absolute():
            out = base / out
        workers = int(raw.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be at least 1")
        return RunConfig(scenario, methods, decision, priors, quad, out, bool(raw.get("emit_raw_cases", False)),
                         workers, int(raw.get("jitter_seed", 7)), alpha_grid)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, path.parent)


def config_hash(cfg: RunConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- formatting ------------------------------------------------------------

def _full(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return repr(float(value))


def _pct(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return f"{100.0 * value:.1f}%"


def _label(method: str) -> str:
    if method in METHOD_LABELS:
        return METHOD_LABELS[method]
    if method.startswith("thick_t_"):
        return "Thick t-test " + method[len("thick_t_"):]
    return method


def _csv_text(schema: str, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# thicknull/{schema} v{SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _aligned(title: str, header: list, rows: list) -> str:
    table = [header] + rows
    widths = [max(len(str(r[i])) for r in table) for i in range(len(header))]
    lines = [title, ""]
    for k, r in enumerate(table):
        lines.append("  ".join(str(c).rjust(w) if j else str(c).ljust(w) for j, (c, w) in enumerate(zip(r, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _truth(flag: bool) -> str:
    return "yes" if flag else "no"


def _table1(results, methods):
    t = analytics.success_by_power(results, methods)
    csv_rows, txt_rows = [], []
    for truth in (True, False):
        for cat in POWER_CATEGORIES:
            rates = [t.rate(truth, cat, m) for m in methods]
            csv_rows.append([_truth(truth), cat, t.count(truth, cat)] + [_full(v) for v in rates])
            txt_rows.append([_truth(truth), cat, f"{t.count(truth, cat):,}"] + [_pct(v) for v in rates])
    header = ["null_true", "power_category", "cases"] + list(methods)
    return ("table1_power", "Inference success by nominal power and true location", header, csv_rows,
            ["Null true", "Nominal power", "Cases"] + [_label(m) for m in methods], txt_rows)


def _table2(results, methods, jitter_seed):
    bins = analytics.decile_bins(results, jitter_seed)
    t = analytics.success_by_decile(results, bins, methods)
    csv_rows, txt_rows = [], []
    for truth in (True, False):
        for d in range(1, 11):
            lo, hi = bins.bounds[d - 1]
            rates = [t.rate(truth, d, m) for m in methods]
            csv_rows.append([_truth(truth), d, repr(lo), repr(hi), t.count(truth, d)] + [_full(v) for v in rates])
            txt_rows.append([_truth(truth), d, f"{lo:.3f}-{hi:.3f}", f"{t.count(truth, d):,}"] + [_pct(v) for v in rates])
    header = ["null_true", "decile", "lower", "upper", "cases"] + list(methods)
    return ("table2_decile", "Inference success by relative MPSD decile and true location", header, csv_rows,
            ["Null true", "Decile", "MPSD/sigma", "Cases"] + [_label(m) for m in methods], txt_rows)


_METRICS = (("fpr", "False positive rate"), ("fnr", "False negative rate"), ("fdr", "False discovery rate"),
            ("for_", "False omission rate"), ("success", "Inference success rate"))


def _table3(results, methods):
    rows = analytics.error_table(results, methods)
    csv_rows, txt_rows = [], []
    for attr, title in _METRICS:
        vals = [getattr(r, attr) for r in rows]
        csv_rows.append([attr.rstrip("_")] + [_full(v) for v in vals])
        txt_rows.append([title] + [_pct(v) for v in vals])
    return ("table3_error_rates", "Error rates and inference success rate", ["metric"] + list(methods), csv_rows,
            [""] + [_label(m) for m in methods], txt_rows)


def _table4(results, methods):
    rows = analytics.normalized_rates_by_power(results, methods)
    by = {(r.stratum, r.method): r for r in rows}
    csv_rows, txt_rows = [], []
    for measure, title in (("nfdr", "Normalized false discovery rate"), ("nfor", "Normalized false omission rate")):
        for cat in POWER_CATEGORIES:
            vals = [getattr(by[(cat, m)], measure) for m in methods]
            cases = by[(cat, methods[0])].cases
            csv_rows.append([measure, cat, cases] + [_full(v) for v in vals])
            txt_rows.append([title, cat, f"{cases:,}"] + [_pct(v) for v in vals])
    header = ["measure", "power_category", "cases"] + list(methods)
    return ("table4_normalized", "Normalized false discovery and false omission rates by nominal power", header,
            csv_rows, ["", "Nominal power", "Cases"] + [_label(m) for m in methods], txt_rows)


def _write(path: Path, text: str):
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_tables(results: StudyResults, out_dir: Path, jitter_seed: int = 7) -> list[Path]:
    """Write the four tables as CSV and aligned text; returns the paths written."""
    methods = tuple(results.methods)
    written = []
    for name, title, header, csv_rows, txt_header, txt_rows in (
        _table1(results, methods),
        _table2(results, methods, jitter_seed),
        _table3(results, methods),
        _table4(results, methods),
    ):
        for suffix, text in ((".csv", _csv_text(name, header, csv_rows)), (".txt", _aligned(title, txt_header, txt_rows))):
            path = out_dir / (name + suffix)
            _write(path, text)
            written.append(path)
    return written


def write_raw_cases(results: StudyResults, path: Path) -> Path:
    """One row per case: parameters, statistics, then reject/p-value per method."""
    header = ["case_index", "mu", "sigma", "n", "mpsd", "mean", "sd", "null_true", "nominal_power", "relative_mpsd"]
    for m in results.methods:
        header += [f"{m}_reject", f"{m}_p_value"]
    null_true = results.null_true
    rel = results.relative_mpsd
    rows = []
    for i in range(len(results)):
        row = [int(results.case_index[i]), repr(float(results.mu[i])), repr(float(results.sigma[i])), int(results.n[i]),
               repr(float(results.mpsd[i])), repr(float(results.mean[i])), repr(float(results.sd[i])),
               int(null_true[i]), repr(float(results.nominal_power[i])), repr(float(rel[i]))]
        for m in results.methods:
            p = float(results.p_value[m][i])
            row += [int(results.reject[m][i]), "" if math.isnan(p) else repr(p)]
        rows.append(row)
    _write(path, _csv_text("raw-cases", header, rows))
    return path


def write_alpha_sweep(sweep: analytics.AlphaSweep, path: Path) -> Path:
    rows = [[repr(a), m, _full(f), _full(t)] for a, m, f, t in sweep.rows()]
    _write(path, _csv_text("alpha-sweep", ["alpha", "method", "fpr", "tpr"], rows))
    return path


def _versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for pkg in ("scipy", "pyyaml", "artifact"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def write_manifest(cfg: RunConfig, out_dir: Path, files: list, command: str) -> Path:
    """Record what is needed to rerun: full config, its hash, seed and library versions."""
    manifest = {
        "schema": f"thicknull/manifest v{SCHEMA_VERSION}",
        "command": command,
        "seed": cfg.scenario.seed,
        "cases": cfg.scenario.cases,
        "config_hash": config_hash(cfg),
        "config": cfg.to_dict(),
        "versions": _versions(),
        "files": {Path(f).name: hashlib.sha256(Path(f).read_bytes()).hexdigest() for f in files},
    }
    path = out_dir / "manifest.json"
    _write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- effect sizes and fitted priors ---------------------------------------

def read_effect_sizes(path) -> list[float]:
    """Read a single-column CSV of effect sizes; a non-numeric first line is a header."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read effect-size file {path}: {exc.strerror}") from exc
    values = []
    first = True
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        cell = text.split(",")[0].strip().strip('"')
        try:
            v = float(cell)
        except ValueError:
            if first:
                first = False
                continue
            raise ConfigError(f"{path}:{lineno}: not a number: {cell!r}") from None
        first = False
        if not math.isfinite(v):
            raise ConfigError(f"{path}:{lineno}: effect size must be finite")
        values.append(v)
    return values


def prior_description(effects, bounds, *, inclusive: bool = False, source: Optional[str] = None) -> dict:
    """Filter ``effects`` to ``bounds`` and fit both prior variants.

    The bounds are exclusive unless ``inclusive`` is set.
    """
    lo, hi = bounds
    arr = np.asarray(effects, dtype=float)
    keep = (arr >= lo) & (arr <= hi) if inclusive else (arr > lo) & (arr < hi)
    kept = arr[keep]
    if kept.size < 3:
        raise InsufficientDataError(
            f"need at least 3 effect sizes inside the bounds, got {kept.size} of {arr.size}")
    tn = fit_truncated_normal(kept, bounds)
    kde = fit_kde(kept, bounds)
    return {
        "schema": f"thicknull/prior v{SCHEMA_VERSION}",
        "source": source,
        "bounds": [float(lo), float(hi)],
        "inclusive": inclusive,
        "n_total": int(arr.size),
        "n_used": int(kept.size),
        "truncated_normal": tn.to_dict(),
        "kde": kde.to_dict(),
    }


# -- reference comparison --------------------------------------------------

@dataclass(frozen=True)
class ReferenceCell:
    scenario: str
    table: str
    null_true: str
    stratum: str
    method: str
    metric: str
    value: float
    tolerance: float

    @property
    def key(self):
        return (self.table, self.null_true, self.stratum, self.method, self.metric)


@dataclass(frozen=True)
class CellCheck:
    cell: ReferenceCell
    computed: Optional[float]
    tolerance: float
    status: str  # "pass", "fail", "skip"
    note: str = ""

    def line(self) -> str:
        c = self.cell
        where = "/".join(x for x in (c.table, c.null_true, c.stratum, c.method, c.metric) if x)
        if self.status == "skip":
            return f"SKIP {where}: {self.note}"
        got = "NA" if self.computed is None else f"{self.computed:.4f}"
        diff = "" if self.computed is None else f" diff={self.computed - c.value:+.4f}"
        return f"{self.status.upper()} {where}: computed={got} reference={c.value:g}{diff} tol={self.tolerance:.4f}"


def load_reference(path=None) -> list[ReferenceCell]:
    """Reference cells; defaults to the shipped published table values."""
    if path is None:
        text = resources.files("thicknull").joinpath("data/reference_tables.csv").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise OSError(f"cannot read reference {path}: {exc.strerror}") from exc
    reader = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    try:
        return [ReferenceCell(r["scenario"], r["table"], r["null_true"], r["stratum"], r["method"], r["metric"],
                              float(r["value"]), float(r["tolerance"])) for r in reader]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed reference file: {exc}") from exc


def computed_cells(results: StudyResults, jitter_seed: int = 7) -> dict:
    """Every comparable table cell as ``key -> (value, denominator)``.

    Rates are in percent; ``denominator`` is the number of cases the rate is
    computed on (``None`` for decile bounds).
    """
    cells = {}
    methods = results.methods
    null_true = results.null_true
    total = len(results)

    t1 = analytics.success_by_power(results, methods)
    cats = results.power_category
    for cat in POWER_CATEGORIES:
        cells[("table1", "all", cat, "", "case_share")] = (100.0 * np.mean(cats == cat), total)
        for truth in (True, False):
            for m in methods:
                v = t1.rate(truth, cat, m)
                cells[("table1", _truth(truth), cat, m, "success")] = (None if v is None else 100 * v, t1.count(truth, cat))
    cells[("table1", "yes", "all", "", "case_share")] = (100.0 * null_true.mean(), total)

    bins = analytics.decile_bins(results, jitter_seed)
    t2 = analytics.success_by_decile(results, bins, methods)
    for d in range(1, 11):
        lo, hi = bins.bounds[d - 1]
        cells[("table2", "all", str(d), "", "lower_bound")] = (lo, None)
        cells[("table2", "all", str(d), "", "upper_bound")] = (hi, None)
        for truth in (True, False):
            for m in methods:
                v = t2.rate(truth, d, m)
                cells[("table2", _truth(truth), str(d), m, "success")] = (None if v is None else 100 * v, t2.count(truth, d))

    for table in ("table3", "tableA2"):
        for row in analytics.error_table(results, methods):
            c = row.counts
            dens = {"fpr": c.fp + c.tn, "fnr": c.fn + c.tp, "fdr": c.fp + c.tp, "for": c.fn + c.tn, "success": c.total}
            for metric, attr in (("fpr", "fpr"), ("fnr", "fnr"), ("fdr", "fdr"), ("for", "for_"), ("success", "success")):
                v = getattr(row, attr)
                cells[(table, "all", "all", row.method, metric)] = (None if v is None else 100 * v, dens[metric])

    for r in analytics.normalized_rates_by_power(results, methods):
        mask = cats == r.stratum
        den = int(min((mask & null_true).sum(), (mask & ~null_true).sum()))
        for metric in ("nfdr", "nfor"):
            v = getattr(r, metric)
            cells[("table4", "all", r.stratum, r.method, metric)] = (None if v is None else 100 * v, den)
    return cells


def compare_reference(results: StudyResults, reference: list, scenario: str, cases: int,
                      jitter_seed: int = 7) -> list[CellCheck]:
    """Check each reference cell of ``scenario`` against a study.

    Runs smaller than the 100,000 cases behind the published tables widen every rate tolerance to
    at least ``4 * sqrt(0.25 / N)`` (in percent), with ``N`` the cell's
    denominator; decile-bound cells are only checked at full size.
    """
    cells = computed_cells(results, jitter_seed)
    checks = []
    quick = cases < REFERENCE_CASES
    for ref in reference:
        if ref.scenario != scenario:
            continue
        if ref.key not in cells:
            checks.append(CellCheck(ref, None, ref.tolerance, "skip", "method or cell not in this run"))
            continue
        value, den = cells[ref.key]
        tol = ref.tolerance
        if quick:
            if den is None:
                checks.append(CellCheck(ref, value, tol, "skip", "decile bounds are checked only at full size"))
                continue
            tol = max(tol, 100.0 * 4.0 * math.sqrt(0.25 / max(den, 1)))
        ok = value is not None and abs(value - ref.value) <= tol + 1e-9
        checks.append(CellCheck(ref, value, tol, "pass" if ok else "fail"))
    return checks
