"""End-to-end orchestration: config, per-country fits, panel fits, reports.

A run loads every country found in the data directory, estimates the
HAR-X model per country and sample period with Newey-West inference,
stacks the countries into fixed-effects panels with Driscoll-Kraay
errors, runs the panel unit-root check and writes deterministic CSV /
markdown tables plus plot-ready map and scatter files.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import attention, calendars, panel as panel_mod, regression, volatility
from .exceptions import AttnvolError, DataError, InsufficientDataError

logger = logging.getLogger(__name__)

FLOAT_FMT = "%.6g"

COEF_ORDER = ["const", "v_d", "v_w", "c_att", "g_att", "d_c", "d"]
PANEL_COEF_ORDER = ["v_d", "v_w", "c_att", "g_att", "c_doo", "c_dist"]


@dataclass
class RunConfig:
    data_dir: Path
    split_date: str = "2022-01-01"
    robustness_splits: tuple = ("2021-12-01", "2021-12-15", "2022-01-15")
    log_variance: bool = False
    log_offset: float = 1.0
    nw_lags: int | None = None
    dk_lags: int | None = None
    lb_lags: int = 5
    white_cross_terms: bool = True
    dummy_sets: dict = field(default_factory=dict)
    interaction: str = "both"  # none | doo | dist | both
    attention_scope: str = "worldwide"  # worldwide | local
    zero_offset: float = 1.0
    tz_shift_threshold_hours: int = calendars.DEFAULT_TZ_SHIFT_THRESHOLD_HOURS
    min_rows: int = regression.DEFAULT_MIN_ROWS
    adf_lags: int = 0
    cips_trend: bool = False
    threads: int = 4
    scatter_exclude: tuple = ("LV",)


def _parse_bool(value: str) -> bool:
    value = value.strip().lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise DataError(f"cannot parse boolean value {value!r}")


def _parse_date_set(value: str) -> tuple:
    dates = []
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        if ".." in item:
            lo, hi = item.split("..", 1)
            dates.extend(pd.date_range(lo.strip(), hi.strip(), freq="D"))
        else:
            dates.append(pd.Timestamp(item))
    return tuple(dates)


def load_config(path) -> RunConfig:
    """Parse a flat ``key = value`` config file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"config file not found: {path}")
    cfg = RunConfig(data_dir=path.parent)
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "data_dir":
            cfg.data_dir = (path.parent / value).resolve()
        elif key == "split_date":
            cfg.split_date = str(pd.Timestamp(value).date())
        elif key == "robustness_splits":
            cfg.robustness_splits = tuple(
                str(pd.Timestamp(v.strip()).date()) for v in value.split(",") if v.strip()
            )
        elif key == "log_variance":
            cfg.log_variance = _parse_bool(value)
        elif key == "log_offset":
            cfg.log_offset = float(value)
        elif key in ("nw_lags", "dk_lags"):
            setattr(cfg, key, int(value))
        elif key == "lb_lags":
            cfg.lb_lags = int(value)
        elif key == "white_cross_terms":
            cfg.white_cross_terms = _parse_bool(value)
        elif key.startswith("dummy_set."):
            cfg.dummy_sets[key.split(".", 1)[1]] = _parse_date_set(value)
        elif key == "interaction":
            if value not in ("none", "doo", "dist", "both"):
                raise DataError(f"{path}:{line_no}: bad interaction {value!r}")
            cfg.interaction = value
        elif key == "attention_scope":
            if value not in ("worldwide", "local"):
                raise DataError(f"{path}:{line_no}: bad attention_scope {value!r}")
            cfg.attention_scope = value
        elif key == "zero_offset":
            cfg.zero_offset = float(value)
        elif key == "tz_shift_threshold_hours":
            cfg.tz_shift_threshold_hours = int(value)
        elif key == "min_rows":
            cfg.min_rows = int(value)
        elif key == "adf_lags":
            cfg.adf_lags = int(value)
        elif key == "cips_trend":
            cfg.cips_trend = _parse_bool(value)
        elif key == "threads":
            cfg.threads = int(value)
        elif key == "scatter_exclude":
            cfg.scatter_exclude = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            raise DataError(f"{path}:{line_no}: unknown config key {key!r}")
    return cfg


def validate_config(cfg: RunConfig) -> list[str]:
    """Return a list of problems; empty means the config is runnable."""
    problems = []
    if not cfg.data_dir.is_dir():
        problems.append(f"data_dir does not exist: {cfg.data_dir}")
        return problems
    if not (cfg.data_dir / "countries.csv").is_file():
        problems.append("missing countries.csv")
    if cfg.attention_scope == "worldwide":
        for name in ("conflict.csv", "general.csv"):
            if not (cfg.data_dir / name).is_file():
                problems.append(f"missing {name}")
    if not problems:
        meta = calendars.load_country_meta(cfg.data_dir / "countries.csv")
        for iso2 in sorted(meta):
            for suffix in (".csv", "_calendar.csv"):
                if not (cfg.data_dir / f"{iso2}{suffix}").is_file():
                    problems.append(f"missing {iso2}{suffix}")
    return problems


@dataclass
class CountryResult:
    country: str
    fits: list  # (sample, variant, RegressionData, OlsFit, DiagnosticsReport)
    sample_data: dict  # sample -> base RegressionData (for panel stacking)
    full_data: object  # unsplit base RegressionData (for CIPS)


@dataclass
class PipelineResult:
    country_rows: list
    panel_rows: list
    cips_rows: list
    skipped: list  # (country, reason)
    meta: dict


def _attention_series(cfg: RunConfig, calendar, pruned_panels, iso2):
    """Country-aligned conflict and general indices."""
    out = {}
    for kind in ("conflict", "general"):
        if cfg.attention_scope == "worldwide":
            pruned = pruned_panels[kind]
        else:
            path = cfg.data_dir / f"{kind}_{iso2}.csv"
            raw = calendars.load_svi_long(path)
            pruned, _ = attention.prune_topics(raw)
        collapsed = {}
        first_day = calendar.trading_days[0]
        for topic in pruned.columns:
            shifted = calendars.shift_to_exchange_day(
                pruned[topic], calendar, cfg.tz_shift_threshold_hours
            )
            # search activity before the first trading day has no anchor
            shifted = shifted[shifted.index >= first_day]
            collapsed[topic] = calendars.collapse_nontrading(shifted, calendar)
        aligned = pd.DataFrame(collapsed).dropna()
        out[kind] = attention.build_index(aligned, zero_offset=cfg.zero_offset)
    return out["conflict"], out["general"]


def _fit_country(cfg: RunConfig, meta, pruned_panels, iso2) -> CountryResult:
    calendar = calendars.load_calendar(
        cfg.data_dir / f"{iso2}_calendar.csv", iso2, meta[iso2].utc_offset_hours
    )
    ohlc = calendars.load_ohlc(cfg.data_dir / f"{iso2}.csv", calendar)
    vol = volatility.realized_range_series(ohlc)
    if cfg.log_variance:
        vol = volatility.log_variance(vol, offset=cfg.log_offset)
    v = vol["v"]
    c_att, g_att = _attention_series(cfg, calendar, pruned_panels, iso2)

    samples = {}
    v_pre, v_onset = calendars.split_sample(v, cfg.split_date)
    c_pre, c_onset = calendars.split_sample(c_att, cfg.split_date)
    g_pre, g_onset = calendars.split_sample(g_att, cfg.split_date)
    samples["pre"] = (v_pre, c_pre, g_pre)
    samples["onset"] = (v_onset, c_onset, g_onset)

    fits = []
    sample_data = {}
    for sample in ("pre", "onset"):
        v_s, c_s, g_s = samples[sample]
        data = regression.build_har_dataset(
            v_s, c_s, g_s, variant="base", min_rows=cfg.min_rows
        )
        fit = regression.ols_fit(data)
        fit = regression.apply_cov(data, fit, cfg.nw_lags)
        diag = regression.diagnostics(
            data, fit, lb_lags=cfg.lb_lags, white_cross_terms=cfg.white_cross_terms
        )
        fits.append((sample, "base", data, fit, diag))
        sample_data[sample] = data

        for name in sorted(cfg.dummy_sets):
            dates = cfg.dummy_sets[name]
            for variant in ("dummy_interaction", "dummy_separate"):
                d_data = regression.build_har_dataset(
                    v_s, c_s, g_s, dummy_dates=dates, variant=variant,
                    min_rows=cfg.min_rows,
                )
                d_fit = regression.ols_fit(d_data)
                d_fit = regression.apply_cov(d_data, d_fit, cfg.nw_lags)
                d_diag = regression.diagnostics(
                    d_data, d_fit, lb_lags=cfg.lb_lags,
                    white_cross_terms=cfg.white_cross_terms,
                )
                fits.append((sample, f"{name}:{variant}", d_data, d_fit, d_diag))

    full_data = regression.build_har_dataset(
        v, c_att, g_att, variant="base", min_rows=cfg.min_rows
    )
    return CountryResult(iso2, fits, sample_data, full_data)


def _country_row(country, sample, variant, data, fit, diag) -> dict:
    row = {
        "country": country,
        "sample": sample,
        "variant": variant,
        "n": fit.n,
        "r2": fit.r2,
        "white_p": diag.white_p,
        "lb_p": diag.lb_p,
    }
    by_name = dict(zip(fit.columns, range(len(fit.columns))))
    for name in COEF_ORDER:
        if name in by_name:
            i = by_name[name]
            row[f"coef_{name}"] = fit.beta[i]
            row[f"t_{name}"] = fit.tstats[i]
            row[f"p_{name}"] = fit.pvalues[i]
        else:
            row[f"coef_{name}"] = row[f"t_{name}"] = row[f"p_{name}"] = np.nan
    return row


def _panel_row(model, sample, fit) -> dict:
    row = {
        "model": model,
        "sample": sample,
        "n": fit.n,
        "n_units": fit.n_units,
        "r2_within": fit.r2_within,
    }
    by_name = dict(zip(fit.columns, range(len(fit.columns))))
    for name in PANEL_COEF_ORDER:
        if name in by_name:
            i = by_name[name]
            row[f"coef_{name}"] = fit.beta[i]
            row[f"t_{name}"] = fit.tstats[i]
            row[f"p_{name}"] = fit.pvalues[i]
        else:
            row[f"coef_{name}"] = row[f"t_{name}"] = row[f"p_{name}"] = np.nan
    return row


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Run the whole estimation batch; per-country failures are skipped."""
    meta = calendars.load_country_meta(cfg.data_dir / "countries.csv")

    pruned_panels = {}
    if cfg.attention_scope == "worldwide":
        for kind in ("conflict", "general"):
            raw = calendars.load_svi_long(cfg.data_dir / f"{kind}.csv")
            pruned_panels[kind], _ = attention.prune_topics(raw)

    threads = int(os.environ.get("ATTNVOL_THREADS", cfg.threads))
    codes = sorted(meta)
    results: dict[str, CountryResult] = {}
    skipped: list[tuple[str, str]] = []

    def work(iso2):
        return iso2, _fit_country(cfg, meta, pruned_panels, iso2)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {iso2: pool.submit(work, iso2) for iso2 in codes}
            for iso2 in codes:
                try:
                    results[iso2] = futures[iso2].result()[1]
                except AttnvolError as exc:
                    logger.warning("skipping %s: %s", iso2, exc)
                    skipped.append((iso2, str(exc)))
    else:
        for iso2 in codes:
            try:
                results[iso2] = work(iso2)[1]
            except AttnvolError as exc:
                logger.warning("skipping %s: %s", iso2, exc)
                skipped.append((iso2, str(exc)))

    country_rows = []
    for iso2 in sorted(results):
        for sample, variant, data, fit, diag in results[iso2].fits:
            country_rows.append(_country_row(iso2, sample, variant, data, fit, diag))

    panel_rows = []
    interactions = {"none": [None], "doo": [None, "doo"], "dist": [None, "dist"],
                    "both": [None, "doo", "dist"]}[cfg.interaction]
    for sample in ("pre", "onset"):
        stack = {
            iso2: res.sample_data[sample]
            for iso2, res in results.items()
            if sample in res.sample_data
        }
        if len(stack) < 2:
            continue
        for inter in interactions:
            model = "fe_dk" if inter is None else f"fe_dk_{inter}"
            try:
                pdata = panel_mod.build_panel(
                    stack, meta=meta, interaction=inter, min_rows=cfg.min_rows
                )
                fit = panel_mod.fe_dk_fit(pdata, lags=cfg.dk_lags)
            except AttnvolError as exc:
                logger.warning("panel %s/%s failed: %s", model, sample, exc)
                continue
            panel_rows.append(_panel_row(model, sample, fit))

    cips_rows = []
    full_stack = {iso2: res.full_data for iso2, res in results.items()}
    if len(full_stack) >= 2:
        try:
            full_panel = panel_mod.build_panel(
                full_stack, meta=meta, interaction=None, min_rows=cfg.min_rows
            )
            for column in ("v_d", "c_att", "g_att"):
                res = panel_mod.cips_test(
                    full_panel.frame, column, adf_lags=cfg.adf_lags,
                    trend=cfg.cips_trend,
                )
                cips_rows.append({
                    "column": column,
                    "cips_stat": res.statistic,
                    "cv_10": res.critical_values[0.10],
                    "cv_5": res.critical_values[0.05],
                    "cv_1": res.critical_values[0.01],
                    "verdict": res.verdict,
                    "n_units": res.n_units,
                })
        except AttnvolError as exc:
            logger.warning("CIPS failed: %s", exc)

    return PipelineResult(country_rows, panel_rows, cips_rows, skipped, meta)


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def _f(x) -> str:
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return ""
    if isinstance(x, float):
        return FLOAT_FMT % x
    return str(x)


def emit_tables(result: PipelineResult, out_dir, fmt: str = "csv") -> list[Path]:
    """Write the country, panel and unit-root tables; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if not result.country_rows and not result.panel_rows:
        raise InsufficientDataError("no results to emit")

    if fmt == "csv":
        written.append(_write_csv(out / "country_fits.csv", result.country_rows))
        written.append(_write_csv(out / "panel_fits.csv", result.panel_rows))
        written.append(_write_csv(out / "cips.csv", result.cips_rows))
    elif fmt == "markdown":
        written.append(_write_country_md(out / "country_fits.md", result.country_rows))
        written.append(_write_panel_md(out / "panel_fits.md", result.panel_rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return written


def _write_csv(path: Path, rows: list) -> Path:
    with open(path, "w", newline="") as handle:
        if not rows:
            handle.write("")
            return path
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _f(v) for k, v in row.items()})
    return path


def _write_country_md(path: Path, rows: list) -> Path:
    names = [n for n in COEF_ORDER]
    lines = []
    # Panel A: onset-of-invasion sample; Panel B: pre-invasion sample
    for label, sample in (("Panel A (onset-of-invasion)", "onset"),
                          ("Panel B (pre-invasion)", "pre")):
        block = [r for r in rows if r["sample"] == sample]
        if not block:
            continue
        lines.append(f"## {label}")
        lines.append("")
        header = ["country", "variant"] + names + ["R2", "White p", "LB p", "n"]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for row in block:
            cells = [row["country"], row["variant"]]
            for name in names:
                coef = row.get(f"coef_{name}")
                if coef is None or (isinstance(coef, float) and not np.isfinite(coef)):
                    cells.append("")
                    continue
                stars = _stars(row[f"p_{name}"])
                cells.append(f"{_f(coef)}{stars} ({_f(row[f't_{name}'])})")
            cells += [_f(row["r2"]), _f(row["white_p"]), _f(row["lb_p"]), str(row["n"])]
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
    path.write_text("\n".join(lines))
    return path


def _write_panel_md(path: Path, rows: list) -> Path:
    lines = ["## Panel regressions (Driscoll-Kraay errors)", ""]
    header = ["model", "sample"] + PANEL_COEF_ORDER + ["within R2", "n", "units"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for row in rows:
        cells = [row["model"], row["sample"]]
        for name in PANEL_COEF_ORDER:
            coef = row.get(f"coef_{name}")
            if coef is None or (isinstance(coef, float) and not np.isfinite(coef)):
                cells.append("")
                continue
            stars = _stars(row[f"p_{name}"])
            cells.append(f"{_f(coef)}{stars} ({_f(row[f't_{name}'])})")
        cells += [_f(row["r2_within"]), str(row["n"]), str(row["n_units"])]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    path.write_text("\n".join(lines))
    return path


def emit_map_data(result: PipelineResult, out_dir) -> Path:
    """Plot-ready file for the significance map (onset base fits)."""
    rows = [
        r for r in result.country_rows
        if r["sample"] == "onset" and r["variant"] == "base"
    ]
    if not rows:
        raise InsufficientDataError("no onset-sample results for map data")
    max_abs = max(abs(r["coef_c_att"]) for r in rows) or 1.0
    out_rows = []
    for r in rows:
        meta = result.meta.get(r["country"])
        out_rows.append({
            "country": r["country"],
            "c_coef": r["coef_c_att"],
            "c_coef_relative": r["coef_c_att"] / max_abs,
            "c_pvalue_capped": min(r["p_c_att"], 0.2),
            "lat": meta.capital_lat if meta else np.nan,
            "lon": meta.capital_lon if meta else np.nan,
        })
    return _write_csv(Path(out_dir) / "map_data.csv", out_rows)


def emit_scatter_data(result: PipelineResult, out_dir, exclude=("LV",)) -> Path:
    """Plot-ready |t| vs openness/distance file (onset base fits).

    Countries in ``exclude`` stay in the file but carry a presentation
    flag so charts can drop extreme outliers without losing the row.
    """
    rows = [
        r for r in result.country_rows
        if r["sample"] == "onset" and r["variant"] == "base"
    ]
    out_rows = []
    for r in rows:
        meta = result.meta.get(r["country"])
        if meta is None:
            logger.warning("%s: no metadata, omitted from scatter data", r["country"])
            continue
        out_rows.append({
            "country": r["country"],
            "abs_t_c": abs(r["t_c_att"]),
            "doo": meta.doo,
            "dist_1e3km": meta.dist,
            "exclude_from_chart": str(r["country"] in exclude).lower(),
        })
    return _write_csv(Path(out_dir) / "scatter_data.csv", out_rows)


def emit_skip_log(result: PipelineResult, out_dir) -> Path:
    rows = [{"country": c, "reason": reason} for c, reason in result.skipped]
    return _write_csv(Path(out_dir) / "skipped.csv", rows)
