"""Per-country time-series estimation: HAR-X via OLS with HAC inference.

The model regresses next-day price variation on today's daily and weekly
variation plus the two attention indices, optionally extended with an
invasion-week dummy (alone or interacted with conflict attention).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin

from .exceptions import CollinearityError, DataError, InsufficientDataError

logger = logging.getLogger(__name__)

BASE_COLUMNS = ["const", "v_d", "v_w", "c_att", "g_att"]
VARIANTS = ("base", "dummy_interaction", "dummy_separate")

DEFAULT_LB_LAGS = 5
DEFAULT_MIN_ROWS = 20


@dataclass(frozen=True)
class RegressionData:
    """Aligned design for one country and sample period."""

    y: np.ndarray
    X: pd.DataFrame
    dates: pd.DatetimeIndex  # predictor-side dates

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class OlsFit:
    columns: tuple
    beta: np.ndarray
    residuals: np.ndarray
    sigma2: float
    r2: float
    cov: np.ndarray
    cov_label: str
    tstats: np.ndarray
    pvalues: np.ndarray
    n: int
    k: int


@dataclass(frozen=True)
class DiagnosticsReport:
    white_stat: float
    white_p: float
    lb_stat: float
    lb_p: float
    lb_lags: int


def nw_auto_lags(n: int) -> int:
    """Automatic truncation lag, floor(4 (n/100)^(2/9))."""
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def build_har_dataset(
    v: pd.Series,
    c_att: pd.Series,
    g_att: pd.Series,
    dummy_dates=None,
    variant: str = "base",
    min_rows: int = DEFAULT_MIN_ROWS,
) -> RegressionData:
    """Pair next-day variation with today's predictors.

    The weekly component is built from ``v`` inside the given window, so
    the first four rows (incomplete history) and the last row (no lead)
    are lost.  Dummy membership is evaluated on the predictor date.  An
    all-zero dummy column is dropped so the fit collapses to the base
    model when the dummy set misses the sample.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    from .calendars import join_on_dates
    from .volatility import weekly_component

    aligned = join_on_dates(
        v.rename("v"), c_att.rename("c_att"), g_att.rename("g_att")
    )
    aligned["v_w"] = weekly_component(aligned["v"])
    aligned["y"] = aligned["v"].shift(-1)
    usable = aligned.dropna(subset=["v_w", "y"])
    if len(usable) < min_rows:
        raise InsufficientDataError(
            f"only {len(usable)} usable rows after lag construction "
            f"(need {min_rows})"
        )

    X = pd.DataFrame(index=usable.index)
    X["const"] = 1.0
    X["v_d"] = usable["v"]
    X["v_w"] = usable["v_w"]
    X["c_att"] = usable["c_att"]
    X["g_att"] = usable["g_att"]
    if variant != "base":
        if dummy_dates is None:
            raise ValueError(f"variant {variant!r} requires dummy_dates")
        dummies = pd.DatetimeIndex(pd.to_datetime(list(dummy_dates)))
        d = usable.index.isin(dummies).astype(float)
        col = "d_c" if variant == "dummy_interaction" else "d"
        values = d * usable["c_att"].to_numpy() if variant == "dummy_interaction" else d
        if not np.any(values):
            logger.info("dummy set misses the sample; %s column dropped", col)
        else:
            X[col] = values

    values = X.to_numpy(float)
    yv = usable["y"].to_numpy(float)
    if not (np.isfinite(values).all() and np.isfinite(yv).all()):
        raise DataError("non-finite entries in regression data")
    return RegressionData(y=yv, X=X, dates=pd.DatetimeIndex(usable.index))


def _collinear_columns(X: np.ndarray, columns) -> list[str]:
    # pivoted QR: columns past the numerical rank are the dependent ones
    from scipy.linalg import qr

    _, r, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps
    rank = int((diag > tol).sum())
    return [columns[i] for i in sorted(piv[rank:])]


def ols_fit(data: RegressionData) -> OlsFit:
    """Least-squares fit with classical covariance and centered R^2."""
    X = data.X.to_numpy(float)
    y = np.asarray(data.y, float)
    n, k = X.shape
    if n <= k:
        raise InsufficientDataError(f"n={n} rows for k={k} regressors")
    if np.linalg.matrix_rank(X) < k:
        raise CollinearityError(_collinear_columns(X, list(data.X.columns)))

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sse = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    sigma2 = sse / (n - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    cov = sigma2 * xtx_inv
    fit = OlsFit(
        columns=tuple(data.X.columns),
        beta=beta,
        residuals=resid,
        sigma2=sigma2,
        r2=r2,
        cov=cov,
        cov_label="classical",
        tstats=np.zeros(k),
        pvalues=np.ones(k),
        n=n,
        k=k,
    )
    return _with_inference(fit, cov, "classical")


def _with_inference(fit: OlsFit, cov: np.ndarray, label: str) -> OlsFit:
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, fit.beta / se, np.inf * np.sign(fit.beta))
    p = 2.0 * stats.t.sf(np.abs(t), df=fit.n - fit.k)
    return replace(fit, cov=cov, cov_label=label, tstats=t, pvalues=p)


def newey_west_cov(data: RegressionData, fit: OlsFit, lags: int | None = None) -> np.ndarray:
    """Bartlett-kernel HAC sandwich for an OLS fit.

    With lags = 0 this reduces exactly to the HC0 sandwich.
    """
    X = data.X.to_numpy(float)
    e = fit.residuals
    n = len(e)
    if lags is None:
        lags = nw_auto_lags(n)
    if lags < 0:
        raise ValueError("lags must be >= 0")
    if lags >= n:
        raise ValueError(f"lags={lags} must be < n={n}")
    U = X * e[:, None]
    S = U.T @ U
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        gamma = U[j:].T @ U[:-j]
        S += w * (gamma + gamma.T)
    xtx_inv = np.linalg.inv(X.T @ X)
    cov = xtx_inv @ S @ xtx_inv
    return (cov + cov.T) / 2.0


def apply_cov(data: RegressionData, fit: OlsFit, lags: int | None = None) -> OlsFit:
    """Replace the fit's covariance (and t/p) with the Newey-West one."""
    actual = nw_auto_lags(fit.n) if lags is None else lags
    cov = newey_west_cov(data, fit, actual)
    return _with_inference(fit, cov, f"newey_west({actual})")


def white_test(data: RegressionData, fit: OlsFit, cross_terms: bool = True):
    """White heteroskedasticity test: n R^2 of e^2 on levels/squares/crosses.

    Duplicate auxiliary columns (e.g. a dummy equal to its own square) are
    dropped; degrees of freedom follow the rank of the auxiliary design.
    """
    X = data.X.to_numpy(float)
    names = list(data.X.columns)
    e2 = fit.residuals ** 2
    n = len(e2)

    nonconst = [i for i, name in enumerate(names) if X[:, i].std() > 0]
    cols = [np.ones(n)]
    for i in nonconst:
        cols.append(X[:, i])
    for i in nonconst:
        cols.append(X[:, i] ** 2)
    if cross_terms:
        for a_pos, i in enumerate(nonconst):
            for j in nonconst[a_pos + 1:]:
                cols.append(X[:, i] * X[:, j])

    aux = []
    for col in cols:
        if any(np.allclose(col, kept) for kept in aux):
            continue
        aux.append(col)
    Z = np.column_stack(aux)
    rank = np.linalg.matrix_rank(Z)
    df = rank - 1
    if df < 1:
        return 0.0, 1.0
    if df >= n:
        raise InsufficientDataError("auxiliary regression has more terms than rows")

    beta, *_ = np.linalg.lstsq(Z, e2, rcond=None)
    resid = e2 - Z @ beta
    centered = e2 - e2.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 0.0
    stat = n * max(r2, 0.0)
    return float(stat), float(stats.chi2.sf(stat, df))


def ljung_box(residuals, lags: int = DEFAULT_LB_LAGS):
    """Portmanteau test Q = n (n+2) sum rho_k^2 / (n-k), chi^2(lags)."""
    e = np.asarray(residuals, float)
    n = len(e)
    if lags < 1:
        raise ValueError("lags must be >= 1")
    if n <= lags:
        raise InsufficientDataError(f"need more than {lags} observations")
    d = e - e.mean()
    denom = float(d @ d)
    if denom == 0:
        raise DataError("constant residuals: autocorrelations undefined")
    q = 0.0
    for k in range(1, lags + 1):
        rho = float(d[k:] @ d[:-k]) / denom
        q += rho ** 2 / (n - k)
    q *= n * (n + 2.0)
    return float(q), float(stats.chi2.sf(q, lags))


def diagnostics(data: RegressionData, fit: OlsFit, lb_lags: int = DEFAULT_LB_LAGS,
                white_cross_terms: bool = True) -> DiagnosticsReport:
    ws, wp = white_test(data, fit, cross_terms=white_cross_terms)
    ls, lp = ljung_box(fit.residuals, lags=lb_lags)
    return DiagnosticsReport(ws, wp, ls, lp, lb_lags)


class HarXRegressor(BaseEstimator, RegressorMixin):
    """sklearn-style front end for the HAR-X regression.

    fit() expects a named-column DataFrame of predictors (a constant is
    added automatically) and computes OLS coefficients with Newey-West
    inference plus residual diagnostics.
    """

    def __init__(self, nw_lags: int | None = None, lb_lags: int = DEFAULT_LB_LAGS,
                 white_cross_terms: bool = True):
        self.nw_lags = nw_lags
        self.lb_lags = lb_lags
        self.white_cross_terms = white_cross_terms

    def fit(self, X: pd.DataFrame, y):
        X = pd.DataFrame(X)
        design = X.copy()
        if "const" not in design.columns:
            design.insert(0, "const", 1.0)
        data = RegressionData(
            y=np.asarray(y, float),
            X=design,
            dates=pd.DatetimeIndex(X.index) if isinstance(X.index, pd.DatetimeIndex)
            else pd.DatetimeIndex([]),
        )
        fit = ols_fit(data)
        fit = apply_cov(data, fit, self.nw_lags)
        self.data_ = data
        self.fit_ = fit
        self.columns_ = list(design.columns)
        self.coef_ = fit.beta
        self.resid_ = fit.residuals
        self.r2_ = fit.r2
        self.cov_ = fit.cov
        self.tstats_ = fit.tstats
        self.pvalues_ = fit.pvalues
        self.diagnostics_ = diagnostics(
            data, fit, lb_lags=self.lb_lags, white_cross_terms=self.white_cross_terms
        )
        return self

    def predict(self, X: pd.DataFrame):
        design = pd.DataFrame(X).copy()
        if "const" not in design.columns:
            design.insert(0, "const", 1.0)
        return design[self.columns_].to_numpy(float) @ self.coef_
