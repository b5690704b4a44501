"""Domain types for multi-regional input-output tables.

A world table is stored as dense numpy blocks with (country, sector) rows
and (country, sector) / (country, final-use category) columns. National
accounts for one country are sliced out of it with
:func:`derive_national_accounts`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

# WIOD 2013 release, 35-sector nomenclature minus c35 (private households
# with employed persons), which carries no intermediate flows.
SECTOR_NAMES: dict[str, str] = {
    "c1": "Agriculture, Hunting, Forestry and Fishing",
    "c2": "Mining and Quarrying",
    "c3": "Food, Beverages and Tobacco",
    "c4": "Textiles and Textile Products",
    "c5": "Leather, Leather and Footwear",
    "c6": "Wood and Products of Wood and Cork",
    "c7": "Pulp, Paper, Printing and Publishing",
    "c8": "Coke, Refined Petroleum and Nuclear Fuel",
    "c9": "Chemicals and Chemical Products",
    "c10": "Rubber and Plastics",
    "c11": "Other Non-Metallic Mineral",
    "c12": "Basic Metals and Fabricated Metal",
    "c13": "Machinery, Nec",
    "c14": "Electrical and Optical Equipment",
    "c15": "Transport Equipment",
    "c16": "Manufacturing, Nec; Recycling",
    "c17": "Electricity, Gas and Water Supply",
    "c18": "Construction",
    "c19": "Sale, Maintenance and Repair of Motor Vehicles; Retail Sale of Fuel",
    "c20": "Wholesale Trade and Commission Trade",
    "c21": "Retail Trade; Repair of Household Goods",
    "c22": "Hotels and Restaurants",
    "c23": "Inland Transport",
    "c24": "Water Transport",
    "c25": "Air Transport",
    "c26": "Other Supporting and Auxiliary Transport Activities",
    "c27": "Post and Telecommunications",
    "c28": "Financial Intermediation",
    "c29": "Real Estate Activities",
    "c30": "Renting of Machinery and Equipment and Other Business Activities",
    "c31": "Public Administration and Defence; Compulsory Social Security",
    "c32": "Education",
    "c33": "Health and Social Work",
    "c34": "Other Community, Social and Personal Services",
}
EXCLUDED_SECTOR = "c35"
N_SECTORS = 34

CORE = "Core"
GIPS = "GIPS"
EAST = "East"
NON_EU = "NonEU"
REGIONS = (CORE, GIPS, EAST)

DEFAULT_TAXONOMY: dict[str, str] = {
    **{c: CORE for c in ("AUT", "BEL", "DEU", "DNK", "FIN", "FRA", "GBR", "ITA", "NLD", "SWE")},
    **{c: GIPS for c in ("GRC", "IRL", "PRT", "ESP")},
    **{c: EAST for c in ("BGR", "CZE", "EST", "HUN", "LTU", "LVA", "POL", "ROU", "SVK", "SVN")},
}

# spellings of the rest-of-world pseudo-country seen in WIOD releases
ROW_CODES = frozenset({"RoW", "ROW"})


class MrioError(ValueError):
    """Raised for malformed tables or undefined indices."""


@dataclass(frozen=True, order=True)
class SectorCode:
    code: str
    index: int

    @property
    def name(self) -> str:
        return SECTOR_NAMES[self.code]


SECTORS: tuple[SectorCode, ...] = tuple(
    SectorCode(code, i) for i, code in enumerate(SECTOR_NAMES)
)
SECTOR_INDEX: dict[str, int] = {s.code: s.index for s in SECTORS}


def sector(code: str) -> SectorCode:
    """Look up a registered sector code, rejecting c35 explicitly."""
    if code == EXCLUDED_SECTOR:
        raise MrioError(
            f"sector {code} (Private Households with Employed Persons) is excluded"
        )
    try:
        return SECTORS[SECTOR_INDEX[code]]
    except KeyError:
        raise MrioError(f"unknown sector code {code!r}") from None


@dataclass(frozen=True)
class CountryCode:
    iso3: str
    region: str = NON_EU

    @classmethod
    def lookup(cls, iso3: str, taxonomy: Mapping[str, str] | None = None) -> "CountryCode":
        taxonomy = DEFAULT_TAXONOMY if taxonomy is None else taxonomy
        return cls(iso3, taxonomy.get(iso3, NON_EU))

    @property
    def is_rest_of_world(self) -> bool:
        return self.iso3 in ROW_CODES


def analysis_countries(taxonomy: Mapping[str, str] | None = None) -> list[CountryCode]:
    """Countries with an analysis region, in taxonomy order."""
    taxonomy = DEFAULT_TAXONOMY if taxonomy is None else taxonomy
    return [CountryCode(c, r) for c, r in taxonomy.items() if r in REGIONS]


def final_use_codes(k: int) -> tuple[str, ...]:
    return tuple(f"FU{i}" for i in range(1, k + 1))


@dataclass(frozen=True, eq=False)
class MrioTable:
    """One year of a world input-output table.

    ``Z`` has shape ``(nc * ns, nc * ns)`` and ``F`` has shape
    ``(nc * ns, nc * k)``; both are indexed country-major, so row
    ``c * ns + i`` is sector ``i`` of country ``c``. Values are current
    million USD and non-negative.
    """

    year: int
    countries: tuple[str, ...]
    sectors: tuple[str, ...]
    Z: np.ndarray
    F: np.ndarray
    n_final: int = 1

    def __post_init__(self):
        nc, ns, k = len(self.countries), len(self.sectors), self.n_final
        Z = np.asarray(self.Z, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if Z.shape != (nc * ns, nc * ns) or F.shape != (nc * ns, nc * k):
            raise MrioError(
                f"malformed table: Z {Z.shape}, F {F.shape} for "
                f"{nc} countries x {ns} sectors x {k} final-use categories"
            )
        if len(set(self.countries)) != nc or len(set(self.sectors)) != ns:
            raise MrioError("malformed table: duplicate country or sector labels")
        if not (np.isfinite(Z).all() and np.isfinite(F).all()):
            raise MrioError("malformed table: non-finite flows")
        if (Z < 0).any() or (F < 0).any():
            raise MrioError("malformed table: negative flows (clamp at ingestion)")
        Z.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "sectors", tuple(self.sectors))

    @property
    def n_countries(self) -> int:
        return len(self.countries)

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    @property
    def final_use_codes(self) -> tuple[str, ...]:
        return final_use_codes(self.n_final)

    def country_index(self, country: str | CountryCode) -> int:
        iso3 = country.iso3 if isinstance(country, CountryCode) else country
        try:
            return self.countries.index(iso3)
        except ValueError:
            raise MrioError(f"country not in table: {iso3}") from None

    def rows(self, c: int) -> slice:
        ns = self.n_sectors
        return slice(c * ns, (c + 1) * ns)

    def final_cols(self, c: int) -> slice:
        k = self.n_final
        return slice(c * k, (c + 1) * k)

    def grand_total(self) -> float:
        return float(self.Z.sum() + self.F.sum())

    def scaled(self, factor: float) -> "MrioTable":
        return MrioTable(self.year, self.countries, self.sectors,
                         self.Z * factor, self.F * factor, self.n_final)

    def equals(self, other: "MrioTable") -> bool:
        """Exact (bit-identical) equality of labels and values."""
        return (
            self.year == other.year
            and self.countries == other.countries
            and self.sectors == other.sectors
            and self.n_final == other.n_final
            and np.array_equal(self.Z, other.Z)
            and np.array_equal(self.F, other.F)
        )


@dataclass(frozen=True, eq=False)
class NationalAccounts:
    """The national input-output blocks of one country-year.

    Attributes
    ----------
    Zdom : (ns, ns) domestic intermediate flows, diagonal kept.
    e : (ns,) total exports per sector (intermediate + foreign final use).
    m : (ns,) intermediate imports used by each sector.
    ifu : imports for final use.
    dfu : domestic final use of domestic output.
    e_foreign : (ns, n_partners * ns) intermediate exports by foreign
        destination sector.
    e_foreign_final : (ns, n_partners) exports to foreign final use,
        one column per partner country.
    partners : partner country codes, in column-block order.
    """

    country: CountryCode
    year: int
    sectors: tuple[str, ...]
    Zdom: np.ndarray
    e: np.ndarray
    m: np.ndarray
    ifu: float
    dfu: float
    e_foreign: np.ndarray
    e_foreign_final: np.ndarray
    partners: tuple[str, ...] = field(default=())

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    def domestic_offdiag(self) -> np.ndarray:
        """Zdom with intra-sector flows masked to zero."""
        z = np.array(self.Zdom, dtype=float)
        np.fill_diagonal(z, 0.0)
        return z

    def scaled(self, factor: float) -> "NationalAccounts":
        return NationalAccounts(
            self.country, self.year, self.sectors,
            self.Zdom * factor, self.e * factor, self.m * factor,
            self.ifu * factor, self.dfu * factor,
            self.e_foreign * factor, self.e_foreign_final * factor,
            self.partners,
        )

    def permuted(self, order: Sequence[int]) -> "NationalAccounts":
        """Relabel sectors: new sector ``k`` is old sector ``order[k]``."""
        order = np.asarray(order)
        ns = self.n_sectors
        npart = len(self.partners)
        # foreign destination sectors are relabelled too, within each partner block
        cols = (np.arange(npart)[:, None] * ns + order[None, :]).ravel()
        return NationalAccounts(
            self.country, self.year, tuple(self.sectors[i] for i in order),
            self.Zdom[np.ix_(order, order)], self.e[order], self.m[order],
            self.ifu, self.dfu,
            self.e_foreign[np.ix_(order, cols)] if npart else self.e_foreign[order],
            self.e_foreign_final[order], self.partners,
        )


def derive_national_accounts(
    table: MrioTable,
    country: str | CountryCode,
    include_row_partner: bool = True,
    taxonomy: Mapping[str, str] | None = None,
) -> NationalAccounts:
    """Slice the national blocks of one country out of a world table.

    With ``include_row_partner=False`` flows to the rest-of-world
    pseudo-country are left out of the exports ``e`` and of the partner
    matrices used by the dependency index.
    """
    if not isinstance(country, CountryCode):
        country = CountryCode.lookup(country, taxonomy)
    c = table.country_index(country)
    ns = table.n_sectors
    rows = table.rows(c)
    Z, F = table.Z, table.F

    partners = [
        p for p, iso in enumerate(table.countries)
        if p != c and (include_row_partner or iso not in ROW_CODES)
    ]
    foreign = [p for p in range(table.n_countries) if p != c]

    e_foreign = (
        np.hstack([Z[rows, table.rows(p)] for p in partners])
        if partners else np.zeros((ns, 0))
    )
    e_foreign_final = (
        np.column_stack([F[rows, table.final_cols(p)].sum(axis=1) for p in partners])
        if partners else np.zeros((ns, 0))
    )
    e = e_foreign.sum(axis=1) + e_foreign_final.sum(axis=1)

    if foreign:
        m = sum(Z[table.rows(p), rows].sum(axis=0) for p in foreign)
        ifu = float(sum(F[table.rows(p), table.final_cols(c)].sum() for p in foreign))
    else:
        m = np.zeros(ns)
        ifu = 0.0

    return NationalAccounts(
        country=country,
        year=table.year,
        sectors=table.sectors,
        Zdom=Z[rows, rows].copy(),
        e=np.asarray(e, dtype=float),
        m=np.asarray(m, dtype=float),
        ifu=ifu,
        dfu=float(F[rows, table.final_cols(c)].sum()),
        e_foreign=e_foreign,
        e_foreign_final=e_foreign_final,
        partners=tuple(table.countries[p] for p in partners),
    )


def load_taxonomy(path) -> dict[str, str]:
    """Read a ``country,region`` CSV into a taxonomy mapping."""
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"country", "region"} <= set(reader.fieldnames):
            raise MrioError(f"{path}: taxonomy needs columns country,region")
        return {row["country"].strip(): row["region"].strip() for row in reader}


def region_counts(countries: Iterable[CountryCode]) -> dict[str, int]:
    out = {r: 0 for r in REGIONS}
    for c in countries:
        if c.region in out:
            out[c.region] += 1
    return out
