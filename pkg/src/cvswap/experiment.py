"""Parameter scans of direct and swapped distribution, and the verification gate.

A scan row describes one value of the input squeezing ``r`` for one scheme.
Both schemes bridge a total fibre length ``loss`` (in absorption lengths).
In the swapping scheme each of the two source states covers half of it, and
a fraction ``split`` of that half lies in the arm of the first mode. The
direct scheme sends one state over the whole length with the same split, so
its arm transmittivities are the squares of the swapping ones.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import optimize

from . import __version__
from .channels import (
    ChannelSpec,
    direct_state,
    effective_decomposition,
    effective_params_after_swap,
    lossy_tmss,
    split_transmittivities,
    swap_lossy,
    total_effective_transmittivity,
)
from .errors import ConfigError, CVSwapError, NotEntangled, VerificationFailed
from .gaussian import SimpleFormParams, as_standard, cm_is_physical, is_separable, random_physical_params, to_standard_form
from .measures import eof, epr_opt, epr_opt_squeezing, log_negativity, purity
from .oracle import OracleConfig, sample_conditional, sample_ensemble
from .swap import (
    GainSetting,
    beam_splitter_cm,
    condition_on_homodyne,
    conditional_cm,
    conditional_mean,
    ensemble_cm,
    four_mode_input_cm,
    optimal_gains,
    optimal_gains_general,
)

SCHEMES = ("direct", "swap")
GAIN_STRATEGIES = ("optimal", "optimal-pq", "one-sided", "custom")
FORMATS = ("csv", "jsonl")

COLUMNS = [
    ("r", "", "input two-mode squeezing"),
    ("scheme", "", "direct or swap"),
    ("tau_a", "", "arm transmittivity of the first mode for this scheme"),
    ("tau_b", "", "arm transmittivity of the second mode for this scheme"),
    ("eof", "eof_unit", "entanglement of formation of the output"),
    ("eof_unit", "", "unit of eof"),
    ("log_neg", "log_neg_unit", "logarithmic negativity of the output"),
    ("log_neg_unit", "", "unit of log_neg"),
    ("epr_opt", "vacuum variance", "EPR variance minimised over local operations; vacuum = 2"),
    ("purity", "", "tr(rho^2) of the output"),
    ("r_eff", "", "effective squeezing of the output (blank if separable)"),
    ("tau_a_eff", "", "effective transmittivity of the first arm"),
    ("tau_b_eff", "", "effective transmittivity of the second arm"),
    ("tau_eff_product", "", "tau_a_eff * tau_b_eff"),
    ("direct_bound", "", "total transmittivity of direct transmission over the full length"),
    ("physical", "", "post-hoc audit: input and output covariance matrices are physical"),
]
COLUMN_NAMES = [c[0] for c in COLUMNS]


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of a scan.

    Args:
        schemes: subset of ``("direct", "swap")``
        r_values: squeezing grid
        loss: total length in absorption lengths, ``>= 0``
        split: fraction of each segment in the first arm, in ``[0, 1]``
        gains: one of :data:`GAIN_STRATEGIES`
        custom_gains: ``(g1, g4)`` when ``gains == "custom"``
        fmt: ``"csv"`` or ``"jsonl"``
        out: output path, or ``None`` for stdout
        epr_method: ``"reduced"`` (one-dimensional squeezing search of the
            standard form) or ``"numeric"`` (five-parameter simplex search)
        workers: processes used to compute rows
    """

    schemes: tuple = SCHEMES
    r_values: tuple = tuple(np.round(np.linspace(0.0, 3.0, 61), 12))
    loss: float = 0.5
    split: float = 0.0
    gains: str = "optimal"
    custom_gains: tuple | None = None
    fmt: str = "csv"
    out: str | None = None
    epr_method: str = "reduced"
    workers: int = 1

    def __post_init__(self):
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEMES}", field="scheme")
        if len(self.r_values) == 0:
            raise ConfigError("squeezing grid is empty", field="r_range")
        if any(not math.isfinite(r) or r < 0 for r in self.r_values):
            raise ConfigError("squeezing values must be finite and non-negative", field="r_range")
        if not (math.isfinite(self.loss) and self.loss >= 0):
            raise ConfigError(f"loss must be >= 0, got {self.loss}", field="loss")
        if not 0.0 <= self.split <= 1.0:
            raise ConfigError(f"split must lie in [0, 1], got {self.split}", field="split")
        if self.gains not in GAIN_STRATEGIES:
            raise ConfigError(f"gains must be one of {GAIN_STRATEGIES}", field="gains")
        if self.gains == "custom" and (self.custom_gains is None or len(self.custom_gains) != 2):
            raise ConfigError("custom gains need two values g1 g4", field="gains")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}", field="format")
        if self.epr_method not in ("reduced", "numeric"):
            raise ConfigError("epr_method must be 'reduced' or 'numeric'", field="epr_method")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", field="workers")

    def transmittivities(self):
        """Per-segment ``(tau_a, tau_b)`` of the swapping scheme."""
        return split_transmittivities(self.loss, self.split)


def parse_range(text: str) -> tuple:
    """Parse ``start:stop:num`` (inclusive, like ``numpy.linspace``) or a comma list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            vals = np.linspace(float(start), float(stop), int(num))
        else:
            vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse range {text!r}: {exc}", field="r_range") from None
    return tuple(float(v) for v in np.round(vals, 12))


# gains --------------------------------------------------------------------


def best_one_sided_gain(p: SimpleFormParams, mode: int = 4) -> GainSetting:
    """One-sided gain minimising the optimised EPR variance of the ensemble output."""

    def f(g):
        return epr_opt_squeezing(ensemble_cm(p, GainSetting.one_sided(g, mode)))[0]

    grid = np.arange(-1.5, 1.5 + 1e-9, 0.05)
    vals = [f(g) for g in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    g = float(res.x) if res.fun <= vals[i] else float(grid[i])
    return GainSetting.one_sided(g, mode)


def choose_gains(p: SimpleFormParams, strategy: str, custom=None) -> GainSetting:
    if strategy == "optimal":
        return optimal_gains(p)
    if strategy == "optimal-pq":
        return optimal_gains_general(p)
    if strategy == "one-sided":
        return best_one_sided_gain(p)
    if strategy == "custom":
        return GainSetting.per_mode(*custom)
    raise ConfigError(f"unknown gain strategy {strategy!r}", field="gains")


# rows ---------------------------------------------------------------------


def _nan():
    return float("nan")


def state_measures(cm, epr_method: str = "reduced") -> dict:
    """EoF (bits), E_N (nats), optimised EPR variance and purity of a state."""
    if epr_method == "numeric":
        dv = epr_opt(cm).value
    else:
        dv = epr_opt_squeezing(cm)[0]
    return {
        "eof": eof(cm),
        "eof_unit": "bit",
        "log_neg": log_negativity(cm),
        "log_neg_unit": "nat",
        "epr_opt": dv,
        "purity": purity(cm),
    }


def _decomposition(cm) -> dict:
    out = dict.fromkeys(("r_eff", "tau_a_eff", "tau_b_eff", "tau_eff_product"), _nan())
    sf = to_standard_form(cm)
    if not sf.is_simple(1e-9):
        return out
    p = sf.to_simple()
    p = SimpleFormParams(p.a, p.b, abs(p.c))
    try:
        d = effective_decomposition(p)
    except CVSwapError:
        return out
    return {
        "r_eff": d.r_eff,
        "tau_a_eff": d.tau_a_eff,
        "tau_b_eff": d.tau_b_eff,
        "tau_eff_product": d.total_transmittivity,
    }


def scan_row(r: float, scheme: str, cfg: ExperimentConfig) -> dict:
    """Compute one output row; see :data:`COLUMNS`."""
    ta, tb = cfg.transmittivities()
    spec = ChannelSpec(r, ta, tb)
    if scheme == "direct":
        p_in = direct_state(spec)
        out_cm = p_in.cm()
        arm = (ta**2, tb**2)
    else:
        p_in = lossy_tmss(spec)
        g = choose_gains(p_in, cfg.gains, cfg.custom_gains)
        out_cm = ensemble_cm(p_in, g)
        arm = (ta, tb)
    row = {"r": r, "scheme": scheme, "tau_a": arm[0], "tau_b": arm[1]}
    row.update(state_measures(out_cm, cfg.epr_method))
    row.update(_decomposition(out_cm))
    row["direct_bound"] = ta**2 * tb**2
    row["physical"] = bool(cm_is_physical(p_in.cm()) and cm_is_physical(out_cm))
    return row


def _row_task(args):
    return scan_row(*args)


def run_scan(cfg: ExperimentConfig) -> list:
    """Rows for every ``(r, scheme)`` pair in grid order.

    Rows are computed in parallel when ``cfg.workers > 1``; the order of the
    result never depends on the number of workers.
    """
    tasks = [(float(r), s, cfg) for r in cfg.r_values for s in cfg.schemes]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(_row_task, tasks, chunksize=8))
    return [_row_task(t) for t in tasks]


# output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".12g")
    return str(v)


def _json_value(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(format(float(v), ".12g"))
    return v


def format_rows(rows, fmt: str = "csv") -> str:
    """Serialise rows as RFC 4180 CSV or JSON lines with 12 significant digits."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(COLUMN_NAMES)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in COLUMN_NAMES])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps({c: _json_value(row[c]) for c in COLUMN_NAMES}) + "\n" for row in rows)
    raise ConfigError(f"unknown format {fmt!r}", field="format")


def manifest(cfg: ExperimentConfig) -> dict:
    """Column semantics and the settings that produced a table."""
    ta, tb = cfg.transmittivities()
    settings = asdict(cfg)
    settings["r_values"] = [float(r) for r in cfg.r_values]
    settings.pop("out")
    settings.pop("workers")
    return {
        "generator": f"cvswap {__version__}",
        "format": cfg.fmt,
        "settings": settings,
        "segment_transmittivities": {"tau_a": ta, "tau_b": tb},
        "columns": [{"name": n, "unit": u, "description": d} for n, u, d in COLUMNS],
        "plots": [
            {"x": "r", "y": "eof", "group_by": "scheme", "title": "entanglement of formation (bits)"},
            {"x": "r", "y": "epr_opt", "group_by": "scheme", "title": "optimised EPR variance"},
        ],
    }


def write_scan(rows, cfg: ExperimentConfig, path):
    """Write the table and ``<path>.manifest.json`` next to it."""
    path = os.fspath(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_rows(rows, cfg.fmt))
    with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


# verification -------------------------------------------------------------


@dataclass(frozen=True)
class VerifyConfig:
    """Settings of the verification gate.

    ``fast`` drops the budget to 1e5 samples and widens the Monte Carlo
    tolerance from ``z_tol`` to 5 standard errors. ``mutate`` replaces the
    ensemble formula by a copy with a flipped sign, which must be caught.
    """

    samples: int = 1_000_000
    seed: int = 20240611
    n_states: int = 200
    n_oracle: int = 8
    z_tol: float = 4.0
    fast: bool = False
    mutate: bool = False

    def effective(self) -> "VerifyConfig":
        if self.fast:
            return replace(self, samples=min(self.samples, 100_000), z_tol=max(self.z_tol, 5.0))
        return self


def mutated_ensemble_cm(p, gains):
    """Ensemble formula with the sign of the ``c_plus (g1 + g4)`` term flipped."""
    cm = ensemble_cm(p, gains).copy()
    delta = 2 * as_standard(p).c_plus * (gains.g1q + gains.g4q)
    cm[0, 2] -= delta
    cm[2, 0] -= delta
    return cm


class _Report:
    def __init__(self):
        self.checks = []

    def add(self, name, observed, expected, tolerance, ok=None):
        if ok is None:
            ok = abs(observed - expected) <= tolerance
        self.checks.append(
            {
                "name": name,
                "observed": float(observed),
                "expected": float(expected),
                "tolerance": float(tolerance),
                "passed": bool(ok),
            }
        )

    @property
    def failures(self):
        return [c for c in self.checks if not c["passed"]]


def _max_abs(x):
    return float(np.max(np.abs(x)))


def verify(cfg: VerifyConfig | None = None, raise_on_failure: bool = True) -> dict:
    """Run the oracle-versus-closed-form suite and the transmittivity grid.

    Returns:
        dict: JSON-ready report with one entry per check and a summary

    Raises:
        VerificationFailed: if any check fails and ``raise_on_failure``
    """
    cfg = (cfg or VerifyConfig()).effective()
    rng = np.random.default_rng(cfg.seed)
    rep = _Report()
    ens = mutated_ensemble_cm if cfg.mutate else ensemble_cm

    # closed-form conditional state against the 8x8 construction
    worst = 0.0
    for _ in range(cfg.n_states):
        p = random_physical_params(rng)
        worst = max(worst, _max_abs(condition_on_homodyne(beam_splitter_cm(four_mode_input_cm(p))).state.cm - conditional_cm(p)))
    rep.add("conditional_cm vs 8x8 conditioning (max abs)", worst, 0.0, 1e-12)

    # optimal quadrature gains cancel the displacement and the averaging noise
    worst_mean = worst_cm = 0.0
    for _ in range(cfg.n_states):
        p = random_physical_params(rng)
        g = optimal_gains_general(p)
        worst_mean = max(worst_mean, _max_abs(conditional_mean(p, rng.normal(scale=3, size=2), g)))
        worst_cm = max(worst_cm, _max_abs(ens(p, g) - conditional_cm(p)))
    rep.add("conditional_mean with optimal gains (max abs)", worst_mean, 0.0, 1e-12)
    rep.add("ensemble_cm - conditional_cm at optimal gains (max abs)", worst_cm, 0.0, 1e-12)

    # Monte Carlo oracle
    ocfg = OracleConfig(cfg.samples, cfg.seed)
    iu = np.triu_indices(4)
    for k in range(cfg.n_oracle):
        p = random_physical_params(rng)
        g = GainSetting.per_mode(*rng.uniform(-1.0, 1.0, size=2))
        est = sample_ensemble(p, g, replace(ocfg, seed=cfg.seed + k))
        ref = ens(p, g)
        for i, j in zip(*iu):
            rep.add(
                f"oracle ensemble pair {k} entry ({i},{j}) [z]",
                (est.cm[i, j] - ref[i, j]) / est.cm_se[i, j],
                0.0,
                cfg.z_tol,
            )
    p = random_physical_params(rng)
    g = GainSetting.per_mode(*rng.uniform(-1.0, 1.0, size=2))
    outcome = rng.normal(scale=2, size=2)
    cond = sample_conditional(p, outcome, replace(ocfg, batch=max(ocfg.samples // 20, 1)), g)
    ref_cm, ref_mean = conditional_cm(p), conditional_mean(p, outcome, g)
    for i, j in zip(*iu):
        rep.add(f"oracle conditional cm ({i},{j}) [z]", (cond.cm[i, j] - ref_cm[i, j]) / cond.cm_se[i, j], 0.0, cfg.z_tol)
    for i in range(4):
        rep.add(f"oracle conditional mean [{i}] [z]", (cond.mean[i] - ref_mean[i]) / cond.mean_se[i], 0.0, cfg.z_tol)

    # transmittivity theorem and closed forms on a grid
    violations, worst_eq25, worst_eq27 = 0, 0.0, 0.0
    for r in np.linspace(0.05, 3.0, 30):
        for ta in np.linspace(0.5, 1.0, 11):
            for tb in np.linspace(0.5, 1.0, 11):
                spec = ChannelSpec(float(r), float(ta), float(tb))
                if is_separable(swap_lossy(spec)):
                    continue
                try:
                    e25 = effective_params_after_swap(spec)
                except NotEntangled:
                    continue
                dec = effective_decomposition(swap_lossy(spec))
                worst_eq25 = max(
                    worst_eq25,
                    abs(e25.r_eff - dec.r_eff), abs(e25.tau_a_eff - dec.tau_a_eff), abs(e25.tau_b_eff - dec.tau_b_eff),
                )
                prod = total_effective_transmittivity(spec)
                worst_eq27 = max(worst_eq27, abs(prod - dec.total_transmittivity))
                if prod > ta**2 * tb**2 + 1e-12:
                    violations += 1
    rep.add("effective parameters closed form vs decomposition (max abs)", worst_eq25, 0.0, 1e-9)
    rep.add("total effective transmittivity vs product (max abs)", worst_eq27, 0.0, 1e-9)
    rep.add("transmittivity theorem violations", violations, 0, 0)

    failures = rep.failures
    report = {
        "passed": not failures,
        "n_checks": len(rep.checks),
        "n_failed": len(failures),
        "config": asdict(cfg),
        "checks": rep.checks,
    }
    if failures and raise_on_failure:
        err = VerificationFailed(failures)
        err.report = report
        raise err
    return report


def format_report(report: dict) -> str:
    """Human-readable summary: failing checks in full, passing ones counted."""
    lines = [f"{'PASS' if report['passed'] else 'FAIL'}: {report['n_checks'] - report['n_failed']}/{report['n_checks']} checks passed"]
    for c in report["checks"]:
        if not c["passed"]:
            lines.append(f"  FAIL {c['name']}: observed={c['observed']:.6g} expected={c['expected']:.6g} tol={c['tolerance']:.3g}")
    return "\n".join(lines)
