"""Country-level integration indices and sector profiles.

All indices ignore intra-sector (diagonal) domestic flows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .core import MrioError, NationalAccounts, SectorCode, sector

# million USD -> trillion USD
SIZE_SCALE = 1e-6


@dataclass(frozen=True)
class SectorProfile:
    sector: SectorCode
    ude: float
    export_share: float
    import_share: float
    domestic_input_share: float


@dataclass(frozen=True)
class MetricsRecord:
    country: str
    year: int
    openness: float
    unevenness: float
    dependency: float
    size: float
    region: str


@dataclass(frozen=True)
class DependencyResult:
    value: float
    gaps: np.ndarray  # per sector, nan where excluded
    n_excluded: int


def openness(acc: NationalAccounts) -> float:
    """Cross-border flows over domestic flows.

    ``(sum(e) + sum(m) + IFU) / (off-diagonal sum of Zdom + DFU)``
    """
    denom = acc.domestic_offdiag().sum() + acc.dfu
    if denom <= 0:
        raise MrioError("degenerate domestic economy")
    return float((acc.e.sum() + acc.m.sum() + acc.ifu) / denom)


def domestic_input_shares(acc: NationalAccounts) -> np.ndarray:
    z = acc.domestic_offdiag()
    total = z.sum()
    if total <= 0:
        raise MrioError("no inter-sectoral domestic flows: UDE undefined")
    return z.sum(axis=0) / total


def export_shares(acc: NationalAccounts) -> np.ndarray:
    total = acc.e.sum()
    if total <= 0:
        raise MrioError("no exports: UDE undefined")
    return acc.e / total


def import_shares(acc: NationalAccounts) -> np.ndarray:
    total = acc.m.sum()
    return acc.m / total if total > 0 else np.zeros_like(acc.m)


def ude_vector(acc: NationalAccounts) -> np.ndarray:
    """Upstream domestic embedding of every sector.

    A sector's share of all inter-sectoral domestic inputs minus its share
    of total exports. Negative values mark sectors whose export weight
    exceeds their pull on domestic suppliers.
    """
    return domestic_input_shares(acc) - export_shares(acc)


def unevenness(ude) -> float:
    ude = np.asarray(ude, dtype=float)
    return float(np.dot(ude, ude))


def dependency(acc: NationalAccounts, final_use: bool = False) -> DependencyResult:
    """Mean gap between the two largest foreign-partner export shares.

    Partners are foreign destination sectors (intermediate flows). With
    ``final_use=True`` each partner country's final use is appended as an
    extra pseudo-partner. Sectors without foreign outflow are left out of
    the mean.
    """
    flows = acc.e_foreign
    if final_use:
        flows = np.hstack([flows, acc.e_foreign_final])
    totals = flows.sum(axis=1)
    exporting = totals > 0
    if not exporting.any():
        raise MrioError("dependency undefined: no sector exports")

    gaps = np.full(acc.n_sectors, np.nan)
    shares = flows[exporting] / totals[exporting, None]
    if shares.shape[1] == 1:
        gaps[exporting] = 1.0
    else:
        top2 = -np.partition(-shares, 1, axis=1)[:, :2]
        gaps[exporting] = top2[:, 0] - top2[:, 1]
    return DependencyResult(
        value=float(np.mean(gaps[exporting])),
        gaps=gaps,
        n_excluded=int((~exporting).sum()),
    )


def sector_profiles(acc: NationalAccounts) -> list[SectorProfile]:
    """Per-sector shares, sorted by UDE ascending (ties by sector index)."""
    dom = domestic_input_shares(acc)
    exp = export_shares(acc)
    imp = import_shares(acc)
    ude = dom - exp
    codes = [sector(s) for s in acc.sectors]
    order = sorted(range(acc.n_sectors), key=lambda i: (ude[i], codes[i].index))
    return [
        SectorProfile(codes[i], float(ude[i]), float(exp[i]), float(imp[i]), float(dom[i]))
        for i in order
    ]


def total_size(acc: NationalAccounts) -> float:
    """All flows touching the economy, in trillion USD."""
    total = (acc.domestic_offdiag().sum() + acc.dfu + acc.e.sum() + acc.m.sum() + acc.ifu)
    return float(total * SIZE_SCALE)


def metrics_record(acc: NationalAccounts, dependency_final_use: bool = False) -> MetricsRecord:
    return MetricsRecord(
        country=acc.country.iso3,
        year=acc.year,
        openness=openness(acc),
        unevenness=unevenness(ude_vector(acc)),
        dependency=dependency(acc, final_use=dependency_final_use).value,
        size=total_size(acc),
        region=acc.country.region,
    )


METRICS_COLUMNS = ["country", "year", "region", "openness", "unevenness", "dependency", "size"]
PROFILE_COLUMNS = ["sector", "ude", "export_share", "import_share", "domestic_input_share"]


def metrics_frame(records) -> pd.DataFrame:
    return pd.DataFrame([r.__dict__ for r in records], columns=METRICS_COLUMNS)


def profiles_frame(profiles) -> pd.DataFrame:
    return pd.DataFrame(
        [(p.sector.code, p.ude, p.export_share, p.import_share, p.domestic_input_share)
         for p in profiles],
        columns=PROFILE_COLUMNS,
    )
