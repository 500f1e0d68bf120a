"""Fixed-effects panel estimation with Driscoll-Kraay inference and the
CIPS panel unit-root test.

The within transformation demeans each country's observations; standard
errors are built from the cross-sectionally summed per-date moment vectors
so they survive both serial and cross-sectional dependence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .exceptions import (
    CollinearityError,
    DataError,
    InsufficientDataError,
)
from .regression import nw_auto_lags

logger = logging.getLogger(__name__)

DEFAULT_PANEL_MIN_ROWS = 20
CIPS_MIN_UNIT_OBS = 20


@dataclass(frozen=True)
class PanelData:
    """Stacked country x time observations."""

    frame: pd.DataFrame  # columns: unit, date, y, <regressors>
    regressors: tuple

    @property
    def units(self):
        return sorted(self.frame["unit"].unique())

    @property
    def balanced(self) -> bool:
        counts = self.frame.groupby("unit").size()
        return counts.nunique() == 1


@dataclass(frozen=True)
class FePanelFit:
    columns: tuple
    beta: np.ndarray
    unit_effects: dict
    residuals: np.ndarray  # within (demeaned) residuals, row-aligned with frame
    r2_within: float
    cov: np.ndarray
    cov_label: str
    tstats: np.ndarray
    pvalues: np.ndarray
    n: int
    k: int
    n_units: int


@dataclass(frozen=True)
class CipsResult:
    statistic: float
    critical_values: dict  # level -> value
    verdict: str  # "reject" or "fail to reject"
    level: float
    n_units: int
    avg_obs: float
    excluded_units: tuple


def build_panel(
    country_data: dict,
    meta: dict | None = None,
    interaction: str | None = None,
    min_rows: int = DEFAULT_PANEL_MIN_ROWS,
) -> PanelData:
    """Stack per-country regression datasets into one unbalanced panel.

    ``country_data`` maps country code to a RegressionData with the common
    column set.  ``interaction`` adds a column c_att * X_i where X_i is the
    country's static ``doo`` or ``dist`` covariate; countries lacking the
    covariate are dropped with a warning.
    """
    if interaction not in (None, "doo", "dist"):
        raise ValueError(f"unknown interaction {interaction!r}")
    pieces = []
    for code in sorted(country_data):
        data = country_data[code]
        if data.n < min_rows:
            logger.warning("%s: only %d rows, excluded from panel", code, data.n)
            continue
        block = data.X.drop(columns="const", errors="ignore").copy()
        block.insert(0, "unit", code)
        block.insert(1, "date", data.dates)
        block.insert(2, "y", data.y)
        if interaction is not None:
            if meta is None or code not in meta:
                logger.warning("%s: missing static covariates, dropped", code)
                continue
            x_i = getattr(meta[code], interaction)
            if not np.isfinite(x_i):
                logger.warning("%s: missing %s covariate, dropped", code, interaction)
                continue
            block[f"c_{interaction}"] = block["c_att"] * x_i
        pieces.append(block.reset_index(drop=True))
    if len(pieces) < 2:
        raise InsufficientDataError("panel needs at least 2 countries")
    frame = pd.concat(pieces, ignore_index=True)
    regressors = tuple(c for c in frame.columns if c not in ("unit", "date", "y"))
    if not np.isfinite(frame[list(regressors) + ["y"]].to_numpy(float)).all():
        raise DataError("non-finite entries in panel")
    return PanelData(frame=frame, regressors=regressors)


def _demean(panel: PanelData):
    frame = panel.frame
    cols = list(panel.regressors)
    y = frame["y"].to_numpy(float)
    X = frame[cols].to_numpy(float)
    codes, _ = pd.factorize(frame["unit"], sort=True)
    n_units = codes.max() + 1
    counts = np.bincount(codes, minlength=n_units).astype(float)
    y_means = np.bincount(codes, weights=y, minlength=n_units) / counts
    x_means = np.column_stack([
        np.bincount(codes, weights=X[:, j], minlength=n_units) / counts
        for j in range(X.shape[1])
    ])
    return y - y_means[codes], X - x_means[codes], codes, y_means, x_means


def fe_within(panel: PanelData) -> FePanelFit:
    """Within (fixed-effects) estimator with classical covariance.

    Slopes come from OLS on unit-demeaned data; unit effects are recovered
    as the unit mean of y minus the fitted mean of X.
    """
    y_dm, X_dm, codes, y_means, x_means = _demean(panel)
    n, k = X_dm.shape
    n_units = len(y_means)
    counts = np.bincount(codes)
    if (counts <= k).any():
        small = np.flatnonzero(counts <= k)
        raise InsufficientDataError(
            f"units with too few observations: {[panel.units[i] for i in small]}"
        )
    rank = np.linalg.matrix_rank(X_dm)
    if rank < k:
        from .regression import _collinear_columns

        raise CollinearityError(_collinear_columns(X_dm, list(panel.regressors)))

    beta, *_ = np.linalg.lstsq(X_dm, y_dm, rcond=None)
    resid = y_dm - X_dm @ beta
    sse = float(resid @ resid)
    sst = float(y_dm @ y_dm)
    r2_within = 1.0 - sse / sst if sst > 0 else 0.0
    alphas = y_means - x_means @ beta
    unit_effects = {u: float(alphas[i]) for i, u in enumerate(panel.units)}

    dof = n - k - n_units
    sigma2 = sse / max(dof, 1)
    xtx_inv = np.linalg.inv(X_dm.T @ X_dm)
    cov = sigma2 * xtx_inv
    fit = FePanelFit(
        columns=tuple(panel.regressors),
        beta=beta,
        unit_effects=unit_effects,
        residuals=resid,
        r2_within=r2_within,
        cov=cov,
        cov_label="classical",
        tstats=np.zeros(k),
        pvalues=np.ones(k),
        n=n,
        k=k,
        n_units=n_units,
    )
    return _with_panel_inference(fit, cov, "classical")


def _with_panel_inference(fit: FePanelFit, cov, label) -> FePanelFit:
    from dataclasses import replace

    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, fit.beta / se, np.inf * np.sign(fit.beta))
    dof = max(fit.n - fit.k - fit.n_units, 1)
    p = 2.0 * stats.t.sf(np.abs(t), df=dof)
    return replace(fit, cov=cov, cov_label=label, tstats=t, pvalues=p)


def driscoll_kraay_cov(panel: PanelData, fit: FePanelFit, lags: int | None = None):
    """Driscoll-Kraay sandwich over date-summed moment vectors.

    With a single unit this is exactly the Newey-West covariance of the
    demeaned regression.
    """
    y_dm, X_dm, codes, _, _ = _demean(panel)
    resid = fit.residuals
    dates = panel.frame["date"].to_numpy()
    order = np.argsort(dates, kind="stable")
    date_codes, _ = pd.factorize(pd.Series(dates[order]), sort=True)
    n_dates = date_codes.max() + 1
    if lags is None:
        lags = nw_auto_lags(n_dates)
    if lags < 0:
        raise ValueError("lags must be >= 0")
    if lags >= n_dates:
        raise ValueError(f"lags={lags} must be < number of dates ({n_dates})")

    U = (X_dm * resid[:, None])[order]
    k = U.shape[1]
    H = np.zeros((n_dates, k))
    for j in range(k):
        H[:, j] = np.bincount(date_codes, weights=U[:, j], minlength=n_dates)
    S = H.T @ H
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        gamma = H[j:].T @ H[:-j]
        S += w * (gamma + gamma.T)
    xtx_inv = np.linalg.inv(X_dm.T @ X_dm)
    cov = xtx_inv @ S @ xtx_inv
    return (cov + cov.T) / 2.0


def fe_dk_fit(panel: PanelData, lags: int | None = None) -> FePanelFit:
    """Within estimator with Driscoll-Kraay covariance and inference."""
    fit = fe_within(panel)
    n_dates = panel.frame["date"].nunique()
    actual = nw_auto_lags(n_dates) if lags is None else lags
    cov = driscoll_kraay_cov(panel, fit, actual)
    return _with_panel_inference(fit, cov, f"driscoll_kraay({actual})")


# CIPS critical values, intercept-only case, from Pesaran (2007),
# "A simple panel unit root test in the presence of cross-section
# dependence", Table II(b).  Rows: T; columns: N.  Values between the
# tabulated (N, T) buckets are bilinearly interpolated, outside they are
# clamped to the nearest bucket.
_CIPS_N = np.array([10, 15, 20, 30, 50, 70, 100, 200])
_CIPS_T = np.array([10, 15, 20, 30, 50, 70, 100, 200])

_CIPS_CV_INTERCEPT = {
    0.01: np.array([
        [-2.97, -2.76, -2.64, -2.51, -2.41, -2.37, -2.33, -2.28],
        [-2.76, -2.58, -2.49, -2.41, -2.32, -2.28, -2.26, -2.23],
        [-2.67, -2.52, -2.44, -2.37, -2.29, -2.25, -2.23, -2.19],
        [-2.61, -2.48, -2.41, -2.34, -2.26, -2.23, -2.20, -2.17],
        [-2.58, -2.46, -2.38, -2.32, -2.25, -2.22, -2.19, -2.16],
        [-2.57, -2.45, -2.38, -2.31, -2.24, -2.21, -2.18, -2.15],
        [-2.56, -2.44, -2.37, -2.31, -2.24, -2.21, -2.18, -2.15],
        [-2.55, -2.44, -2.37, -2.30, -2.23, -2.20, -2.17, -2.14],
    ]),
    0.05: np.array([
        [-2.52, -2.40, -2.33, -2.25, -2.19, -2.16, -2.14, -2.10],
        [-2.40, -2.30, -2.25, -2.19, -2.14, -2.11, -2.10, -2.07],
        [-2.36, -2.28, -2.22, -2.17, -2.11, -2.09, -2.07, -2.04],
        [-2.32, -2.24, -2.19, -2.15, -2.10, -2.07, -2.05, -2.02],
        [-2.30, -2.23, -2.18, -2.13, -2.08, -2.06, -2.04, -2.01],
        [-2.29, -2.22, -2.17, -2.12, -2.07, -2.05, -2.03, -2.00],
        [-2.28, -2.21, -2.16, -2.12, -2.07, -2.04, -2.02, -1.99],
        [-2.27, -2.20, -2.15, -2.11, -2.06, -2.03, -2.01, -1.98],
    ]),
    0.10: np.array([
        [-2.31, -2.22, -2.18, -2.12, -2.07, -2.05, -2.03, -2.01],
        [-2.22, -2.16, -2.11, -2.07, -2.03, -2.01, -2.00, -1.98],
        [-2.19, -2.13, -2.09, -2.05, -2.01, -1.99, -1.98, -1.95],
        [-2.15, -2.11, -2.07, -2.03, -1.99, -1.97, -1.96, -1.93],
        [-2.14, -2.10, -2.06, -2.02, -1.98, -1.96, -1.95, -1.92],
        [-2.14, -2.09, -2.05, -2.01, -1.97, -1.95, -1.94, -1.91],
        [-2.13, -2.08, -2.04, -2.00, -1.97, -1.95, -1.93, -1.90],
        [-2.12, -2.08, -2.04, -2.00, -1.96, -1.94, -1.92, -1.90],
    ]),
}

# Intercept + trend case, Table II(c).
_CIPS_CV_TREND = {
    0.01: np.array([
        [-3.88, -3.61, -3.46, -3.30, -3.15, -3.10, -3.05, -2.98],
        [-3.24, -3.09, -3.00, -2.89, -2.81, -2.77, -2.74, -2.71],
        [-3.15, -3.01, -2.92, -2.83, -2.76, -2.72, -2.70, -2.65],
        [-3.10, -2.96, -2.88, -2.81, -2.73, -2.69, -2.66, -2.63],
        [-3.06, -2.93, -2.85, -2.78, -2.72, -2.68, -2.65, -2.61],
        [-3.04, -2.93, -2.85, -2.78, -2.71, -2.68, -2.64, -2.61],
        [-3.03, -2.92, -2.85, -2.77, -2.71, -2.67, -2.63, -2.60],
        [-3.03, -2.91, -2.85, -2.76, -2.70, -2.66, -2.63, -2.60],
    ]),
    0.05: np.array([
        [-3.27, -3.11, -3.02, -2.94, -2.86, -2.82, -2.79, -2.75],
        [-2.93, -2.83, -2.77, -2.70, -2.64, -2.62, -2.60, -2.57],
        [-2.88, -2.78, -2.73, -2.67, -2.62, -2.59, -2.57, -2.55],
        [-2.84, -2.76, -2.70, -2.65, -2.60, -2.57, -2.55, -2.53],
        [-2.82, -2.74, -2.69, -2.64, -2.58, -2.56, -2.54, -2.51],
        [-2.82, -2.74, -2.68, -2.63, -2.58, -2.55, -2.53, -2.51],
        [-2.81, -2.73, -2.68, -2.63, -2.58, -2.55, -2.53, -2.50],
        [-2.81, -2.73, -2.67, -2.62, -2.57, -2.55, -2.53, -2.50],
    ]),
    0.10: np.array([
        [-2.98, -2.89, -2.82, -2.76, -2.71, -2.68, -2.66, -2.63],
        [-2.76, -2.69, -2.65, -2.60, -2.56, -2.54, -2.52, -2.50],
        [-2.74, -2.67, -2.63, -2.58, -2.54, -2.52, -2.50, -2.48],
        [-2.71, -2.65, -2.60, -2.56, -2.52, -2.50, -2.49, -2.47],
        [-2.69, -2.64, -2.60, -2.55, -2.52, -2.50, -2.48, -2.46],
        [-2.69, -2.63, -2.59, -2.55, -2.51, -2.49, -2.48, -2.46],
        [-2.69, -2.63, -2.59, -2.55, -2.51, -2.49, -2.47, -2.45],
        [-2.68, -2.63, -2.59, -2.54, -2.51, -2.49, -2.47, -2.45],
    ]),
}


def _interp_cv(table: np.ndarray, n: float, t: float) -> float:
    n = float(np.clip(n, _CIPS_N[0], _CIPS_N[-1]))
    t = float(np.clip(t, _CIPS_T[0], _CIPS_T[-1]))
    ti = int(np.clip(np.searchsorted(_CIPS_T, t) - 1, 0, len(_CIPS_T) - 2))
    ni = int(np.clip(np.searchsorted(_CIPS_N, n) - 1, 0, len(_CIPS_N) - 2))
    t0, t1 = _CIPS_T[ti], _CIPS_T[ti + 1]
    n0, n1 = _CIPS_N[ni], _CIPS_N[ni + 1]
    wt = (t - t0) / (t1 - t0)
    wn = (n - n0) / (n1 - n0)
    q = table[ti:ti + 2, ni:ni + 2]
    return float(
        (1 - wt) * ((1 - wn) * q[0, 0] + wn * q[0, 1])
        + wt * ((1 - wn) * q[1, 0] + wn * q[1, 1])
    )


def _cadf_tstat(y: np.ndarray, ybar: np.ndarray, adf_lags: int, trend: bool):
    """t-statistic on the lagged level in one unit's augmented regression."""
    dy = np.diff(y)
    dybar = np.diff(ybar)
    t_len = len(dy)
    start = adf_lags
    rows = t_len - start
    cols = [np.ones(rows), y[start:-1], ybar[start:-1], dybar[start:]]
    for j in range(1, adf_lags + 1):
        cols.append(dy[start - j:t_len - j])
    if trend:
        cols.append(np.arange(rows, dtype=float))
    Z = np.column_stack(cols)
    target = dy[start:]
    n, k = Z.shape
    if n <= k + 2:
        raise InsufficientDataError("unit too short for CADF regression")
    beta, *_ = np.linalg.lstsq(Z, target, rcond=None)
    resid = target - Z @ beta
    sigma2 = float(resid @ resid) / (n - k)
    cov = sigma2 * np.linalg.inv(Z.T @ Z)
    return beta[1] / np.sqrt(cov[1, 1])


def cips_test(
    panel_frame: pd.DataFrame,
    column: str,
    adf_lags: int = 0,
    level: float = 0.05,
    trend: bool = False,
) -> CipsResult:
    """CIPS panel unit-root test on one column of a stacked panel.

    Each unit contributes the t-statistic on its lagged level from a
    Dickey-Fuller regression augmented with cross-section mean levels and
    differences; the CIPS statistic is the average.  Units with fewer than
    20 usable observations are excluded with a note.
    """
    if level not in (0.01, 0.05, 0.10):
        raise ValueError("level must be one of 0.01, 0.05, 0.10")
    wide = panel_frame.pivot_table(index="date", columns="unit", values=column)
    if wide.shape[1] < 2:
        raise InsufficientDataError("CIPS needs at least 2 units")
    ybar = wide.mean(axis=1)

    tstats = []
    lengths = []
    excluded = []
    for unit in wide.columns:
        series = wide[unit].dropna()
        if len(series) < CIPS_MIN_UNIT_OBS:
            excluded.append(unit)
            continue
        yb = ybar.loc[series.index].to_numpy(float)
        try:
            t = _cadf_tstat(series.to_numpy(float), yb, adf_lags, trend)
        except InsufficientDataError:
            excluded.append(unit)
            continue
        tstats.append(float(t))
        lengths.append(len(series))
    if excluded:
        logger.warning("CIPS: excluded units with too few observations: %s", excluded)
    if len(tstats) < 2:
        raise InsufficientDataError("fewer than 2 units usable for CIPS")

    stat = float(np.mean(tstats))
    n_units = len(tstats)
    avg_obs = float(np.mean(lengths))
    table = _CIPS_CV_TREND if trend else _CIPS_CV_INTERCEPT
    cvs = {lv: _interp_cv(tab, n_units, avg_obs) for lv, tab in table.items()}
    verdict = "reject" if stat < cvs[level] else "fail to reject"
    return CipsResult(
        statistic=stat,
        critical_values=cvs,
        verdict=verdict,
        level=level,
        n_units=n_units,
        avg_obs=avg_obs,
        excluded_units=tuple(excluded),
    )


class FixedEffectsPanelRegressor:
    """sklearn-style wrapper: fit(X, y, groups, dates) runs FE with DK errors."""

    def __init__(self, dk_lags: int | None = None):
        self.dk_lags = dk_lags

    def get_params(self, deep=True):
        return {"dk_lags": self.dk_lags}

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def fit(self, X: pd.DataFrame, y, groups, dates=None):
        frame = pd.DataFrame(X).copy()
        regressors = tuple(frame.columns)
        frame.insert(0, "unit", np.asarray(groups))
        frame.insert(1, "date", np.asarray(dates) if dates is not None
                     else np.arange(len(frame)))
        frame.insert(2, "y", np.asarray(y, float))
        panel = PanelData(frame=frame.reset_index(drop=True), regressors=regressors)
        self.panel_ = panel
        self.fit_ = fe_dk_fit(panel, lags=self.dk_lags)
        self.coef_ = self.fit_.beta
        self.unit_effects_ = self.fit_.unit_effects
        self.r2_within_ = self.fit_.r2_within
        self.tstats_ = self.fit_.tstats
        self.pvalues_ = self.fit_.pvalues
        return self

    def predict(self, X: pd.DataFrame, groups):
        frame = pd.DataFrame(X)
        base = frame.to_numpy(float) @ self.coef_
        effects = np.array([self.unit_effects_.get(g, np.nan) for g in np.asarray(groups)])
        return base + effects
