"""Random world tables and panels for demos and tests."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .core import DEFAULT_TAXONOMY, REGIONS, MrioTable, analysis_countries
from .panel import YEARS, Panel


def random_world(
    year: int,
    countries: Sequence[str],
    sectors: Sequence[str],
    n_final: int = 2,
    seed=None,
    home_bias: float = 4.0,
    density: float = 0.8,
) -> MrioTable:
    """Lognormal flows with a domestic bias and some empty cells."""
    rng = np.random.default_rng(seed)
    nc, ns = len(countries), len(sectors)
    Z = rng.lognormal(mean=2.0, sigma=1.0, size=(nc * ns, nc * ns))
    Z *= rng.random(Z.shape) < density
    F = rng.lognormal(mean=3.0, sigma=1.0, size=(nc * ns, nc * n_final))
    own = np.kron(np.eye(nc), np.ones((ns, ns))).astype(bool)
    Z[own] *= home_bias
    ownF = np.kron(np.eye(nc), np.ones((ns, n_final))).astype(bool)
    F[ownF] *= home_bias
    return MrioTable(year, tuple(countries), tuple(sectors), Z, F, n_final)


def random_panel_tables(
    sectors: Sequence[str] = ("c1", "c2", "c3", "c4", "c5"),
    years: Sequence[int] = YEARS,
    taxonomy: Mapping[str, str] | None = None,
    seed=0,
    extra: Sequence[str] = ("USA", "RoW"),
) -> list[MrioTable]:
    """One random world table per year over the analysis countries."""
    countries = sorted(c.iso3 for c in analysis_countries(taxonomy)) + list(extra)
    ss = np.random.SeedSequence(seed).spawn(len(years))
    return [random_world(y, countries, sectors, seed=s) for y, s in zip(years, ss)]


UNEVENNESS_MODEL_COEFS = {
    "Intercept": 7.656, "Openness": -4.420, "Year": 0.168, "Year*Openness": -0.161,
    "Size": -0.486, "GIPS": 2.054, "East": -5.709, "GIPS*Openness": 3.741,
    "East*Openness": 8.280,
}
DEPENDENCY_MODEL_COEFS = {
    "Intercept": 1.532, "Openness": 4.441, "Year": 0.493, "Year*Openness": -0.511,
    "Size": -0.699, "GIPS": -0.227, "East": -1.808, "GIPS*Openness": 2.138,
    "East*Openness": 4.923,
}


def simulated_panel(
    coefs: Mapping[str, float] = UNEVENNESS_MODEL_COEFS,
    noise_sd: float = 1.0,
    seed=None,
    taxonomy: Mapping[str, str] | None = None,
    years: Sequence[int] = YEARS,
    dependency_coefs: Mapping[str, float] | None = None,
) -> Panel:
    """A panel whose unevenness (x100) follows the pooled model exactly plus noise.

    Openness drifts upward from about 1 with country-specific noise, and
    size is a lognormal country level with growth.
    """
    rng = np.random.default_rng(seed)
    taxonomy = DEFAULT_TAXONOMY if taxonomy is None else taxonomy
    rows = []
    for iso, region in taxonomy.items():
        if region not in REGIONS:
            continue
        level = rng.uniform(0.7, 1.3)
        size0 = rng.lognormal(0.0, 1.0)
        for t, y in enumerate(years, start=1):
            o = level + 0.03 * t + rng.normal(0, 0.05)
            s = size0 * (1 + 0.04 * t)
            x = {
                "Intercept": 1.0, "Openness": o, "Year": t, "Year*Openness": t * o, "Size": s,
                "GIPS": float(region == "GIPS"), "East": float(region == "East"),
            }
            x["GIPS*Openness"] = x["GIPS"] * o
            x["East*Openness"] = x["East"] * o
            u = sum(coefs[k] * x[k] for k in coefs) + rng.normal(0, noise_sd)
            dcoefs = dependency_coefs or coefs
            dep = sum(dcoefs[k] * x[k] for k in dcoefs) + rng.normal(0, noise_sd)
            rows.append({"country": iso, "year": y, "region": region, "openness": o,
                         "unevenness": u / 100.0, "dependency": dep / 100.0, "size": s})
    return Panel(pd.DataFrame(rows), years)
