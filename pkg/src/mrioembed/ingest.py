"""Readers and writers for world input-output tables.

Two formats are supported:

* the canonical long CSV, one table cell per line, with header
  ``year,origin_country,origin_sector,dest_country,dest_code,value``;
* a WIOD 2013-release WIOT sheet saved as CSV.
"""

from __future__ import annotations

import io
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from .core import (
    EXCLUDED_SECTOR,
    SECTOR_INDEX,
    MrioError,
    MrioTable,
)

logger = logging.getLogger(__name__)

CANONICAL_COLUMNS = ("year", "origin_country", "origin_sector", "dest_country", "dest_code", "value")
CANONICAL_HEADER = ",".join(CANONICAL_COLUMNS)

_FU_RE = re.compile(r"^FU([1-9][0-9]*)$")

# WIOD 2013 final-use columns; c36 and c40 are unused in that release
WIOT_FINAL_USE = ("c37", "c38", "c39", "c41", "c42")


class IngestError(MrioError):
    pass


@dataclass(frozen=True)
class FlowRecord:
    year: int
    origin_country: str
    origin_sector: str
    dest_country: str
    dest_code: str
    value: float


@dataclass
class IngestReport:
    year: int
    clamped_cells: int = 0
    clamped_total: float = 0.0
    dropped_c35_rows: int = 0
    dropped_c35_cols: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _check_code(code: str, line: int, what: str) -> None:
    if code == EXCLUDED_SECTOR:
        raise IngestError(
            f"line {line}: {what} {code} (Private Households with Employed Persons) "
            "is an excluded sector"
        )
    raise IngestError(f"line {line}: unknown {what} {code!r}")


def _read_frame(source) -> pd.DataFrame:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        header = text.split("\n", 1)[0].strip()
        source = io.StringIO(text)
    if header != CANONICAL_HEADER:
        raise IngestError(f"bad header {header!r}; expected {CANONICAL_HEADER!r}")
    return pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")


def _exact_floats(col: pd.Series) -> np.ndarray:
    """Correctly rounded string->float; unparseable cells become nan.

    ``pd.to_numeric`` uses a fast parser that can be off by an ulp, which
    breaks bit-exact round trips.
    """
    try:
        return col.astype(float).to_numpy()
    except ValueError:
        def conv(v):
            try:
                return float(v)
            except ValueError:
                return np.nan
        return np.array([conv(v) for v in col], dtype=float)


def parse_canonical(source, sectors: Iterable[str] | None = None,
                    n_final: int | None = None) -> MrioTable:
    """Build an :class:`MrioTable` from canonical long-format CSV.

    Parameters
    ----------
    source : path or text/binary stream
    sectors : optional sector codes to use as the table's sector axis.
        By default the axis is every code that appears in the file, in
        registry order.
    n_final : optional number of final-use categories; defaults to the
        highest ``FUk`` seen (or 1 when there are none).

    Countries are ordered alphabetically. Cells not mentioned are zero and
    duplicate keys are summed.
    """
    df = _read_frame(source)
    lines = np.arange(len(df)) + 2  # 1-based, after the header

    if df.empty:
        raise IngestError("no records")
    years = df["year"].str.strip().unique()
    if len(years) > 1:
        raise IngestError("multiple years in one table stream")
    try:
        year = int(years[0])
    except ValueError:
        raise IngestError(f"line 2: bad year {years[0]!r}") from None

    values = _exact_floats(df["value"])
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise IngestError(f"line {lines[i]}: non-numeric value {df['value'].iat[i]!r}")

    osec = df["origin_sector"].to_numpy()
    dcode = df["dest_code"].to_numpy()
    for codes, what in ((osec, "sector code"),):
        known = pd.Series(codes).isin(SECTOR_INDEX.keys()).to_numpy()
        if not known.all():
            i = int(np.argmin(known))
            _check_code(codes[i], lines[i], what)
    is_fu = pd.Series(dcode).str.match(_FU_RE.pattern).to_numpy()
    is_sec = pd.Series(dcode).isin(SECTOR_INDEX.keys()).to_numpy()
    if not (is_fu | is_sec).all():
        i = int(np.argmin(is_fu | is_sec))
        _check_code(dcode[i], lines[i], "sector/final-use code")

    fu_k = np.zeros(len(df), dtype=int)
    if is_fu.any():
        fu_k[is_fu] = pd.Series(dcode[is_fu]).str.slice(2).astype(int).to_numpy()
    k = int(fu_k.max()) if is_fu.any() else 1
    if n_final is not None:
        if n_final < k:
            raise IngestError(f"final-use code FU{k} exceeds n_final={n_final}")
        k = n_final

    if sectors is None:
        seen = set(osec) | set(dcode[is_sec])
        sectors = sorted(seen, key=SECTOR_INDEX.__getitem__)
    sectors = tuple(sectors)
    sec_pos = {s: i for i, s in enumerate(sectors)}
    missing = (set(osec) | set(dcode[is_sec])) - set(sec_pos)
    if missing:
        raise IngestError(f"sectors {sorted(missing)} not on the requested sector axis")

    countries = tuple(sorted(set(df["origin_country"]) | set(df["dest_country"])))
    cpos = {c: i for i, c in enumerate(countries)}
    ns, nc = len(sectors), len(countries)

    oc = df["origin_country"].map(cpos).to_numpy()
    dc = df["dest_country"].map(cpos).to_numpy()
    row = oc * ns + pd.Series(osec).map(sec_pos).to_numpy()

    Z = np.zeros((nc * ns, nc * ns))
    F = np.zeros((nc * ns, nc * k))
    if is_sec.any():
        col = dc[is_sec] * ns + pd.Series(dcode[is_sec]).map(sec_pos).to_numpy()
        np.add.at(Z, (row[is_sec], col), values[is_sec])
    if is_fu.any():
        col = dc[is_fu] * k + fu_k[is_fu] - 1
        np.add.at(F, (row[is_fu], col), values[is_fu])
    return MrioTable(year, countries, sectors, Z, F, k)


def table_records(table: MrioTable) -> pd.DataFrame:
    """Canonical records for a table.

    Non-zero cells are emitted in row-major order. A zero record is added
    for any (country, sector) with no flows at all, and for the last
    final-use category, so that re-parsing recovers the same axes.
    """
    ns, nc, k = table.n_sectors, table.n_countries, table.n_final
    row_c = np.repeat(np.arange(nc), ns)
    row_s = np.tile(np.arange(ns), nc)

    zi, zj = np.nonzero(table.Z)
    fi, fj = np.nonzero(table.F)
    parts = [
        pd.DataFrame({
            "r": zi, "dc": zj // ns,
            "dest_code": np.asarray(table.sectors, dtype=object)[zj % ns],
            "value": table.Z[zi, zj], "order": zj,
        }),
        pd.DataFrame({
            "r": fi, "dc": fj // k,
            "dest_code": np.array([f"FU{x + 1}" for x in fj % k], dtype=object),
            "value": table.F[fi, fj], "order": nc * ns + fj,
        }),
    ]
    idle = np.flatnonzero(
        (table.Z.sum(axis=1) == 0) & (table.Z.sum(axis=0) == 0) & (table.F.sum(axis=1) == 0)
    )
    if len(idle):
        parts.append(pd.DataFrame({
            "r": idle, "dc": row_c[idle],
            "dest_code": np.asarray(table.sectors, dtype=object)[row_s[idle]],
            "value": 0.0, "order": idle,
        }))
    if not len(fi) or not (fj % k == k - 1).any():
        parts.append(pd.DataFrame({
            "r": [0], "dc": [0], "dest_code": [f"FU{k}"], "value": [0.0],
            "order": [nc * ns + k - 1],
        }))
    recs = pd.concat(parts, ignore_index=True).sort_values(["r", "order"], kind="stable")
    countries = np.asarray(table.countries, dtype=object)
    return pd.DataFrame({
        "year": table.year,
        "origin_country": countries[row_c[recs["r"]]],
        "origin_sector": np.asarray(table.sectors, dtype=object)[row_s[recs["r"]]],
        "dest_country": countries[recs["dc"].to_numpy()],
        "dest_code": recs["dest_code"].to_numpy(),
        "value": recs["value"].to_numpy(),
    })


def write_canonical(table: MrioTable, dest) -> None:
    """Write a table as canonical CSV (floats in shortest round-trip form)."""
    recs = table_records(table)
    recs["value"] = [repr(float(v)) for v in recs["value"]]
    if isinstance(dest, (str, os.PathLike)):
        recs.to_csv(dest, index=False, lineterminator="\n", encoding="utf-8")
    else:
        dest.write(recs.to_csv(index=False, lineterminator="\n"))


# --- WIOT sheets --------------------------------------------------------------
#
# Layout of a WIOD 2013 WIOT sheet saved as CSV (0-based rows/columns):
#   row 0, col 0     title ending in the year, e.g. "World Input-Output Table 1995"
#   rows 2..5        column headers: industry code, description, country, c-code
#   cols 0..3        row headers, same four fields
#   rows/cols >= 4   data; intermediate block ends at the last c35, followed by
#                    final-use columns c37..c42 and a total column

_HDR_ROWS = 6
_HDR_COLS = 4
_REGION, _CCODE = 2, 3


def _wiot_frame(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                           encoding="utf-8", skip_blank_lines=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestError(f"{path}: unrecognized WIOT layout ({exc})") from None


def parse_wiot(path, year: int, report: IngestReport | None = None) -> MrioTable:
    """Parse a WIOD 2013-release WIOT sheet exported to CSV.

    Sector ``c35`` rows and columns are dropped, final-use columns
    c37..c42 become ``FU1``..``FU5``, and negative cells (inventory
    changes) are clamped to zero. Pass an :class:`IngestReport` to collect
    the clamp and drop counts.
    """
    raw = _wiot_frame(path)
    if raw.shape[0] <= _HDR_ROWS or raw.shape[1] <= _HDR_COLS:
        raise IngestError(f"{path}: unrecognized WIOT layout")

    title = raw.iat[0, 0].strip()
    m = re.search(r"(\d{4})\s*$", title)
    if not m:
        raise IngestError(f"{path}: unrecognized WIOT layout (no year in title {title!r})")
    if int(m.group(1)) != int(year):
        raise IngestError(f"{path}: file is for year {m.group(1)}, expected {year}")

    col_region = raw.iloc[_HDR_ROWS - 4 + _REGION, _HDR_COLS:].str.strip().to_numpy()
    col_code = raw.iloc[_HDR_ROWS - 4 + _CCODE, _HDR_COLS:].str.strip().to_numpy()
    row_region = raw.iloc[_HDR_ROWS:, _REGION].str.strip().to_numpy()
    row_code = raw.iloc[_HDR_ROWS:, _CCODE].str.strip().to_numpy()
    if col_code[0] != "c1" or row_code[0] != "c1":
        raise IngestError(f"{path}: unrecognized WIOT layout")

    # early vintages spell Romania ROM
    col_region = np.where(col_region == "ROM", "ROU", col_region)
    row_region = np.where(row_region == "ROM", "ROU", row_region)

    def sector_mask(codes):
        return np.array([c in SECTOR_INDEX for c in codes])

    row_keep = sector_mask(row_code)
    col_sec = sector_mask(col_code)
    col_fu = np.isin(col_code, WIOT_FINAL_USE)
    if report is None:
        report = IngestReport(year)
    report.dropped_c35_rows = int((row_code == EXCLUDED_SECTOR).sum())
    report.dropped_c35_cols = int((col_code == EXCLUDED_SECTOR).sum())

    countries = list(dict.fromkeys(row_region[row_keep]))
    if list(dict.fromkeys(col_region[col_sec])) != countries:
        raise IngestError(f"{path}: unrecognized WIOT layout (row/column countries differ)")
    sectors = list(dict.fromkeys(row_code[row_keep]))
    if sorted(sectors, key=SECTOR_INDEX.__getitem__) != sectors:
        raise IngestError(f"{path}: unrecognized WIOT layout (sector order)")

    body = raw.iloc[_HDR_ROWS:, _HDR_COLS:]
    cells = body.to_numpy()[np.ix_(row_keep, col_sec | col_fu)]
    flat = pd.Series(cells.ravel()).str.strip().str.replace(",", "", regex=False)
    values = _exact_floats(flat.mask(flat.eq(""), "0")).reshape(cells.shape)
    if not np.isfinite(values).all():
        r, c = np.argwhere(~np.isfinite(values))[0]
        raise IngestError(f"{path}: non-numeric cell {cells[r, c]!r}")
    neg = values < 0
    report.clamped_cells = int(neg.sum())
    report.clamped_total = float(values[neg].sum())
    if report.clamped_cells:
        logger.info("%s: clamped %d negative cells (total %.3f) to 0",
                    path, report.clamped_cells, report.clamped_total)
    values[neg] = 0.0

    ns, nc = len(sectors), len(countries)
    sel_region = col_region[col_sec | col_fu]
    sel_code = col_code[col_sec | col_fu]
    is_sec = np.isin(sel_code, sectors)
    sec_region, sec_code = sel_region[is_sec], sel_code[is_sec]
    expect = [(c, s) for c in countries for s in sectors]
    if list(zip(sec_region, sec_code)) != expect:
        raise IngestError(f"{path}: unrecognized WIOT layout (intermediate columns)")
    if list(zip(row_region[row_keep], row_code[row_keep])) != expect:
        raise IngestError(f"{path}: unrecognized WIOT layout (intermediate rows)")

    k = len(WIOT_FINAL_USE)
    F = np.zeros((nc * ns, nc * k))
    cpos = {c: i for i, c in enumerate(countries)}
    fu_pos = {code: i for i, code in enumerate(WIOT_FINAL_USE)}
    fu_idx = np.flatnonzero(~is_sec)
    for j in fu_idx:
        if sel_region[j] not in cpos:
            raise IngestError(f"{path}: final-use column for unknown country {sel_region[j]!r}")
        F[:, cpos[sel_region[j]] * k + fu_pos[sel_code[j]]] += values[:, j]
    Z = values[:, is_sec]
    return MrioTable(int(year), tuple(countries), tuple(sectors), Z, F, k)


def write_wiot(table: MrioTable, path, title: str | None = None) -> None:
    """Write a table in the WIOT CSV layout read by :func:`parse_wiot`.

    Mostly useful for fixtures; the c35 row/column is emitted as zeros and
    final-use categories map back to c37..c42 (c40 unused).
    """
    if table.n_final > len(WIOT_FINAL_USE):
        raise MrioError("too many final-use categories for the WIOT layout")
    sectors = list(table.sectors) + [EXCLUDED_SECTOR]
    ns = len(sectors)
    col_heads = []
    for c in table.countries:
        col_heads += [("", "", c, s) for s in sectors]
    for c in table.countries:
        col_heads += [("", "", c, WIOT_FINAL_USE[f]) for f in range(table.n_final)]
    col_heads.append(("GO", "Total output", "TOT", "c62"))

    nc = table.n_countries
    rows = []
    rows.append([title or f"World Input-Output Table {table.year}"] + [""] * (len(col_heads) + 3))
    rows.append([""] * (len(col_heads) + 4))
    for h in range(4):
        lead = ["(industry-by-industry)", "", "", ""] if h == 0 else ["(millions of US$)", "", "", ""] if h == 1 else [""] * 4
        rows.append(lead + [ch[h] for ch in col_heads])
    fmt = repr
    for ci, c in enumerate(table.countries):
        for s in sectors:
            if s == EXCLUDED_SECTOR:
                vals = [0.0] * (nc * ns + nc * table.n_final)
            else:
                r = ci * table.n_sectors + table.sectors.index(s)
                vals = []
                for cj in range(nc):
                    vals += list(table.Z[r, cj * table.n_sectors:(cj + 1) * table.n_sectors]) + [0.0]
                vals += list(table.F[r])
            rows.append(["", "", c, s] + [fmt(float(v)) for v in vals] + [fmt(float(sum(vals)))])
    rows.append(["", "Total intermediate consumption", "TOT", "r60"] + ["0.0"] * len(col_heads))
    pd.DataFrame(rows).to_csv(path, header=False, index=False, lineterminator="\n")


def find_wiot_file(data_dir, year: int) -> Path:
    """Locate the WIOT CSV for ``year`` (e.g. ``wiot95_row_apr12.csv``)."""
    data_dir = Path(data_dir)
    yy = f"{year % 100:02d}"
    patterns = [f"wiot{yy}_*.csv", f"wiot{yy}.csv", f"*{year}*.csv"]
    for pat in patterns:
        hits = sorted(data_dir.glob(pat))
        if hits:
            return hits[0]
    raise FileNotFoundError(f"no WIOT CSV for {year} in {data_dir}")


def canonical_path(data_dir, year: int) -> Path:
    return Path(data_dir) / f"canonical_{year}.csv"
