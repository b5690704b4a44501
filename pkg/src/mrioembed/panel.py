"""Country-year panel, pooled models, country slopes and trajectories."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .core import (
    CORE,
    EAST,
    GIPS,
    REGIONS,
    MrioError,
    MrioTable,
    analysis_countries,
    derive_national_accounts,
)
from .inference import (
    DesignMatrix,
    RegressionResult,
    as_seed_sequence,
    fit_with_permutation,
    marginal_effects,
    ols_fit,
    permutation_pvalues,
)
from .metrics import METRICS_COLUMNS, MetricsRecord, metrics_record

logger = logging.getLogger(__name__)

FIRST_YEAR, LAST_YEAR = 1995, 2011
YEARS = tuple(range(FIRST_YEAR, LAST_YEAR + 1))
# non-overlapping smoothing bins; 17 years leave a 2-year tail
BINS = ((1995, 1997), (1998, 2000), (2001, 2003), (2004, 2006), (2007, 2009), (2010, 2011))
DEFAULT_ALPHA = 0.05
RISE_FRACTION = 0.01

POOLED_TERMS = (
    "Openness", "Year", "Year*Openness", "Size",
    "GIPS", "East", "GIPS*Openness", "East*Openness",
)


class IncompletePanelError(MrioError):
    pass


class Panel:
    """Metrics records keyed by (country, year), held as a DataFrame."""

    def __init__(self, records: Iterable[MetricsRecord] | pd.DataFrame, years: Sequence[int] = YEARS):
        if isinstance(records, pd.DataFrame):
            df = records[METRICS_COLUMNS].copy()
        else:
            df = pd.DataFrame([r.__dict__ for r in records], columns=METRICS_COLUMNS)
        df = df.sort_values(["country", "year"], kind="stable").reset_index(drop=True)
        if df.duplicated(["country", "year"]).any():
            raise MrioError("duplicate (country, year) records")
        self.df = df
        self.years = tuple(years)

    def __len__(self) -> int:
        return len(self.df)

    @property
    def countries(self) -> list[str]:
        return list(dict.fromkeys(self.df["country"]))

    def region_of(self, country: str) -> str:
        return self.df.loc[self.df["country"] == country, "region"].iat[0]

    def series(self, country: str) -> pd.DataFrame:
        s = self.df[self.df["country"] == country].set_index("year").sort_index()
        if s.empty:
            raise MrioError(f"country not in panel: {country}")
        return s

    def check_complete(self) -> None:
        gaps = []
        for c, g in self.df.groupby("country", sort=False):
            missing = sorted(set(self.years) - set(g["year"]))
            if missing:
                gaps.append(f"{c}: missing years {_span(missing)}")
        if gaps:
            raise IncompletePanelError("; ".join(gaps))

    def design_frame(self) -> pd.DataFrame:
        """Regression variables: Year coded 1 for the first panel year."""
        df = self.df.copy()
        df["Openness"] = df["openness"]
        df["Year"] = df["year"] - self.years[0] + 1
        df["Size"] = df["size"]
        for r in REGIONS:
            df[r] = (df["region"] == r).astype(float)
        df["Unevenness100"] = df["unevenness"] * 100.0
        df["Dependency100"] = df["dependency"] * 100.0
        return df


def _span(years: Sequence[int]) -> str:
    """Compact ranges: [1996, 1997, 1998, 2003] -> '1996..1998, 2003'."""
    out, start, prev = [], None, None
    for y in years:
        if start is None:
            start = prev = y
        elif y == prev + 1:
            prev = y
        else:
            out.append(f"{start}..{prev}" if prev > start else f"{start}")
            start = prev = y
    if start is not None:
        out.append(f"{start}..{prev}" if prev > start else f"{start}")
    return ", ".join(out)


def build_panel(
    tables: Iterable[MrioTable],
    taxonomy: Mapping[str, str] | None = None,
    years: Sequence[int] = YEARS,
    include_row_partner: bool = True,
    dependency_final_use: bool = False,
) -> Panel:
    """One MetricsRecord per analysis country and year."""
    by_year = {}
    for t in tables:
        if t.year in by_year:
            raise MrioError(f"two tables for {t.year}")
        by_year[t.year] = t
    missing = sorted(set(years) - set(by_year))
    if missing:
        raise IncompletePanelError(f"missing years {_span(missing)}")

    countries = analysis_countries(taxonomy)
    records = []
    for y in years:
        t = by_year[y]
        for c in countries:
            if c.iso3 not in t.countries:
                raise IncompletePanelError(f"{c.iso3} missing from {y} table")
            acc = derive_national_accounts(t, c, include_row_partner=include_row_partner)
            records.append(metrics_record(acc, dependency_final_use=dependency_final_use))
    return Panel(records, years)


def pooled_design(panel: Panel, response: str, omitted: str = CORE) -> DesignMatrix:
    """Pooled model design with ``omitted`` as the reference region."""
    df = panel.design_frame()
    others = [r for r in REGIONS if r != omitted]
    terms = ["Openness", "Year", "Year*Openness", "Size", *others,
             *(f"{r}*Openness" for r in others)]
    return DesignMatrix.from_frame(df, response, terms)


def _pooled(panel, response, replications, seed, scheme, omitted=CORE):
    panel.check_complete()
    d = pooled_design(panel, response, omitted)
    return fit_with_permutation(d, replications=replications, seed=seed, scheme=scheme)


def pooled_model_unevenness(panel: Panel, replications: int = 10_000, seed=None,
                            scheme: str = "manly") -> RegressionResult:
    """Unevenness x 100 on openness, trend, size, regions and interactions."""
    return _pooled(panel, "Unevenness100", replications, seed, scheme)


def pooled_model_dependency(panel: Panel, replications: int = 10_000, seed=None,
                            scheme: str = "manly") -> RegressionResult:
    """Dependency x 100 on the same regressors as the unevenness model."""
    return _pooled(panel, "Dependency100", replications, seed, scheme)


def region_marginal_effects(panel: Panel, fit: RegressionResult, response: str,
                            grid: Sequence[float] | None = None) -> pd.DataFrame:
    """Predicted response over an openness grid for Core, GIPS and East."""
    d = pooled_design(panel, response)
    if grid is None:
        o = d.column("Openness")
        grid = np.linspace(o.min(), o.max(), 21)
    groups = {
        CORE: {GIPS: 0.0, EAST: 0.0},
        GIPS: {GIPS: 1.0, EAST: 0.0},
        EAST: {GIPS: 0.0, EAST: 1.0},
    }
    return marginal_effects(fit, d, "Openness", grid, groups)


@dataclass(frozen=True)
class CountrySlope:
    country: str
    b: float
    p: float


def country_slope(panel: Panel, country: str, replications: int = 10_000, seed=None) -> CountrySlope:
    """Bivariate slope of unevenness on openness with a permutation p-value."""
    s = panel.series(country)
    x = s["openness"].to_numpy(float)
    if np.ptp(x) == 0:
        raise MrioError("degenerate predictor: openness is constant")
    d = DesignMatrix(np.column_stack([np.ones(len(x)), x]), s["unevenness"].to_numpy(float),
                     ("Intercept", "Openness"))
    fit = ols_fit(d)
    if fit.degenerate:
        return CountrySlope(country, float(fit.b[1]), 1.0)
    p = permutation_pvalues(d, fit, replications=replications, seed=seed)
    return CountrySlope(country, float(fit.b[1]), float(p[1]))


def country_slopes(panel: Panel, replications: int = 10_000, seed=None,
                   alpha: float = DEFAULT_ALPHA) -> pd.DataFrame:
    rows = []
    seeds = as_seed_sequence(seed).spawn(len(panel.countries))
    for c, ss in zip(panel.countries, seeds):
        cs = country_slope(panel, c, replications, ss)
        rows.append({"country": c, "region": panel.region_of(c), "b": cs.b, "p": cs.p,
                     "significant": cs.p <= alpha})
    return pd.DataFrame(rows)


def relative_change(panel: Panel, start: int | None = None, end: int | None = None) -> pd.DataFrame:
    """(end - start) / start of openness and unevenness for each country."""
    start = panel.years[0] if start is None else start
    end = panel.years[-1] if end is None else end
    rows = []
    for c in panel.countries:
        s = panel.series(c)
        if start not in s.index or end not in s.index:
            raise MrioError(f"{c}: endpoint year missing")
        row = {"country": c, "region": panel.region_of(c)}
        for col in ("openness", "unevenness"):
            v0, v1 = s.at[start, col], s.at[end, col]
            if v0 == 0:
                raise MrioError(f"{c}: zero {col} in {start}")
            row[col] = (v1 - v0) / v0
        rows.append(row)
    return pd.DataFrame(rows)


def region_means(panel: Panel, column: str = "openness") -> pd.DataFrame:
    """Unweighted mean over countries, one column per region, indexed by year."""
    df = panel.df[panel.df["region"].isin(REGIONS)]
    out = df.pivot_table(index="year", columns="region", values=column, aggfunc="mean")
    return out.reindex(columns=[r for r in REGIONS if r in out.columns])


# --- trajectories -------------------------------------------------------------

NEGATIVE, POSITIVE, INSIGNIFICANT = "negative-slope", "positive-slope", "insignificant"
TURNING_POINT, RETROGRADE, MONOTONE, OTHER = "turning-point", "retrograde", "monotone", "other"


@dataclass(frozen=True)
class Trajectory:
    country: str
    bins: tuple[tuple[int, int], ...]
    points: np.ndarray  # (n_bins, 2): openness, unevenness
    slope_b: float
    slope_p: float
    classification: str
    shape: str

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "bin": [f"{a}-{b}" for a, b in self.bins],
            "openness": self.points[:, 0],
            "unevenness": self.points[:, 1],
        })


def smooth(series: pd.DataFrame, bins=BINS) -> np.ndarray:
    """Bin means of (openness, unevenness) over non-overlapping year bins."""
    pts = []
    for a, b in bins:
        chunk = series.loc[a:b, ["openness", "unevenness"]]
        if len(chunk) != b - a + 1:
            raise MrioError(f"incomplete smoothing bin {a}-{b}")
        pts.append(chunk.mean().to_numpy())
    return np.array(pts)


def shape_tag(points: np.ndarray, rise_fraction: float = RISE_FRACTION) -> str:
    """Label a smoothed path in (openness, unevenness) space.

    A change counts only if it exceeds ``rise_fraction`` of the axis range.

    * monotone: no segment reverses direction on either axis;
    * turning-point: openness and unevenness rise together up to the
      unevenness peak, after which unevenness falls while openness keeps
      rising;
    * retrograde: the same joint rise, after which both fall;
    * other: anything else.
    """
    o, u = points[:, 0], points[:, 1]
    thr_o = rise_fraction * np.ptp(o)
    thr_u = rise_fraction * np.ptp(u)

    def sgn(v, thr):
        return np.where(v > thr, 1, np.where(v < -thr, -1, 0))

    dirs = {(a, b) for a, b in zip(sgn(np.diff(o), thr_o), sgn(np.diff(u), thr_u)) if (a, b) != (0, 0)}
    if len(dirs) <= 1:
        return MONOTONE

    peak = int(np.argmax(u))
    last = len(u) - 1
    rose = peak > 0 and o[peak] - o[0] > thr_o and u[peak] - u[0] > thr_u
    if rose and peak < last and u[last] - u[peak] < -thr_u:
        d_o = o[last] - o[peak]
        if d_o > thr_o:
            return TURNING_POINT
        if d_o < -thr_o:
            return RETROGRADE
    return OTHER


def smooth_and_classify(panel: Panel, country: str, alpha: float = DEFAULT_ALPHA,
                        replications: int = 10_000, seed=None,
                        rise_fraction: float = RISE_FRACTION) -> Trajectory:
    points = smooth(panel.series(country))
    cs = country_slope(panel, country, replications, seed)
    if cs.p <= alpha:
        cls = NEGATIVE if cs.b < 0 else POSITIVE
    else:
        cls = INSIGNIFICANT
    return Trajectory(country, BINS, points, cs.b, cs.p, cls, shape_tag(points, rise_fraction))
