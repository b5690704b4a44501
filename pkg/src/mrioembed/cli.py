"""Command-line driver: ``mrioembed ingest|analyze|validate``.

Exit codes: 0 success, 2 ingest error, 3 incomplete panel, 4 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .core import (
    DEFAULT_TAXONOMY,
    REGIONS,
    MrioError,
    analysis_countries,
    derive_national_accounts,
    load_taxonomy,
)
from .ingest import (
    IngestError,
    IngestReport,
    canonical_path,
    find_wiot_file,
    parse_canonical,
    parse_wiot,
    write_canonical,
)
from .metrics import metrics_record, profiles_frame, sector_profiles, ude_vector
from .output import base_metadata, file_sha256, write_csv, write_json
from .panel import (
    DEFAULT_ALPHA,
    YEARS,
    IncompletePanelError,
    build_panel,
    country_slopes,
    pooled_model_dependency,
    pooled_model_unevenness,
    region_marginal_effects,
    region_means,
    relative_change,
    smooth_and_classify,
)

logger = logging.getLogger("mrioembed")

EXIT_OK, EXIT_INGEST, EXIT_INCOMPLETE, EXIT_VALIDATION = 0, 2, 3, 4


@dataclass
class RunConfig:
    data_dir: Path
    years: tuple[int, ...] = YEARS
    taxonomy: dict = field(default_factory=lambda: dict(DEFAULT_TAXONOMY))
    taxonomy_file: str | None = None
    replications: int = 10_000
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    include_row_partner: bool = True
    dependency_final_use: bool = False
    freedman_lane: bool = False

    def metadata(self, **extra) -> dict:
        return base_metadata(
            seed=self.seed, replications=self.replications, alpha=self.alpha,
            years=[self.years[0], self.years[-1]], taxonomy=self.taxonomy_file,
            include_row_partner=self.include_row_partner,
            dependency_final_use=self.dependency_final_use,
            freedman_lane=self.freedman_lane, **extra,
        )


def parse_years(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return tuple(sorted(set(out)))


def parse_profiles(text: str | None) -> list[tuple[str, int]]:
    if not text:
        return []
    out = []
    for item in text.split(","):
        c, _, y = item.strip().partition(":")
        out.append((c.strip(), int(y)))
    return out


# --- ingest -------------------------------------------------------------------

def cmd_ingest(args) -> int:
    jobs = []
    if args.wiot:
        if args.year is None or args.out is None:
            print("ingest --wiot needs --year and --out", file=sys.stderr)
            return EXIT_INGEST
        jobs.append((args.year, Path(args.wiot), Path(args.out)))
    else:
        if args.data_dir is None or args.out_dir is None:
            print("ingest needs --wiot/--year/--out or --data-dir/--out-dir", file=sys.stderr)
            return EXIT_INGEST
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for y in parse_years(args.years):
            try:
                src = find_wiot_file(args.data_dir, y)
            except FileNotFoundError:
                print(f"missing WIOT file for year {y} in {args.data_dir}", file=sys.stderr)
                return EXIT_INGEST
            jobs.append((y, src, canonical_path(out_dir, y)))

    reports = []
    for year, src, dest in jobs:
        report = IngestReport(year)
        try:
            table = parse_wiot(src, year, report)
        except (IngestError, MrioError, OSError) as exc:
            print(f"ingest failed for {src}: {exc}", file=sys.stderr)
            return EXIT_INGEST
        dest.parent.mkdir(parents=True, exist_ok=True)
        write_canonical(table, dest)
        reports.append({"source": str(src), "output": str(dest), **report.as_dict()})
        logger.info("%s -> %s (%d clamped cells)", src, dest, report.clamped_cells)

    report_path = (Path(args.out_dir) if args.out_dir else jobs[0][2].parent) / "ingest_report.json"
    report_path.write_text(json.dumps({"files": reports}, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


# --- analyze ------------------------------------------------------------------

def _config(args) -> RunConfig:
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else dict(DEFAULT_TAXONOMY)
    return RunConfig(
        data_dir=Path(args.data_dir), years=parse_years(args.years), taxonomy=taxonomy,
        taxonomy_file=args.taxonomy, replications=args.replications, seed=args.seed,
        alpha=args.alpha, include_row_partner=args.include_row_partner,
        dependency_final_use=args.dependency_final_use, freedman_lane=args.freedman_lane,
    )


def _load_tables(cfg: RunConfig, strict: bool = True):
    tables, hashes, missing = [], {}, []
    for y in cfg.years:
        path = canonical_path(cfg.data_dir, y)
        if not path.exists():
            missing.append(y)
            continue
        tables.append(parse_canonical(path))
        hashes[path.name] = file_sha256(path)
    if missing and strict:
        raise IncompletePanelError(f"no canonical table for years {missing} in {cfg.data_dir}")
    return tables, hashes


def cmd_analyze(args) -> int:
    cfg = _config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        tables, hashes = _load_tables(cfg)
        panel = build_panel(tables, cfg.taxonomy, cfg.years,
                            include_row_partner=cfg.include_row_partner,
                            dependency_final_use=cfg.dependency_final_use)
        panel.check_complete()
    except IncompletePanelError as exc:
        print(f"incomplete panel: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except (IngestError, MrioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST

    meta = cfg.metadata(inputs=hashes)
    write_csv(panel.df, out / "metrics.csv", meta)
    design = panel.design_frame()
    write_csv(design[["country", "year", "region", "Year", "openness", "unevenness",
                      "dependency", "size", "GIPS", "East"]],
              out / "panel.csv", meta)

    scheme = "freedman-lane" if cfg.freedman_lane else "manly"
    for name, fn, response in (("table2", pooled_model_unevenness, "Unevenness100"),
                               ("table3", pooled_model_dependency, "Dependency100")):
        fit = fn(panel, replications=cfg.replications, seed=cfg.seed, scheme=scheme)
        me = region_marginal_effects(panel, fit, response)
        write_json({"response": response, **fit.to_dict(),
                    "marginal_effects": me.to_dict(orient="records")},
                   out / f"{name}.json", meta)

    slopes = country_slopes(panel, cfg.replications, cfg.seed, cfg.alpha)
    write_csv(slopes[["country", "b", "p", "significant"]], out / "country_slopes.csv", meta)

    seeds = np.random.SeedSequence(cfg.seed).spawn(len(panel.countries))
    summary = []
    for c, ss in zip(panel.countries, seeds):
        traj = smooth_and_classify(panel, c, cfg.alpha, cfg.replications, ss)
        write_csv(traj.frame(), out / f"trajectory_{c}.csv",
                  {**meta, "last_bin": "2010-2011 (2 years)"})
        summary.append({"country": c, "region": panel.region_of(c), "b": traj.slope_b,
                        "p": traj.slope_p, "classification": traj.classification,
                        "shape": traj.shape})
    write_csv(pd.DataFrame(summary), out / "trajectories.csv", meta)
    write_csv(region_means(panel).reset_index(), out / "region_means.csv", meta)
    write_csv(relative_change(panel), out / "relative_change.csv", meta)

    by_year = {t.year: t for t in tables}
    for country, year in parse_profiles(args.profiles):
        if year not in by_year:
            print(f"no table for profile year {year}", file=sys.stderr)
            return EXIT_INCOMPLETE
        acc = derive_national_accounts(by_year[year], country, cfg.include_row_partner, cfg.taxonomy)
        write_csv(profiles_frame(sector_profiles(acc)), out / f"profiles_{country}_{year}.csv", meta)
    return EXIT_OK


# --- validate -----------------------------------------------------------------

def cmd_validate(args) -> int:
    cfg = _config(args)
    tables, _ = _load_tables(cfg, strict=False)
    countries = analysis_countries(cfg.taxonomy)
    checks: list[tuple[str, bool, str]] = []

    worst, n_records = 0.0, 0
    for t in tables:
        for c in countries:
            if c.iso3 not in t.countries:
                continue
            acc = derive_national_accounts(t, c, cfg.include_row_partner)
            worst = max(worst, abs(float(ude_vector(acc).sum())))
            n_records += 1
    checks.append(("sum of UDE is zero", worst < 1e-9, f"max |sum| = {worst:.3g}"))

    if tables:
        t = tables[0]
        scaled = t.scaled(args.scale)
        ok, detail = True, []
        for c in countries:
            if c.iso3 not in t.countries:
                continue
            a = derive_national_accounts(t, c, cfg.include_row_partner)
            b = derive_national_accounts(scaled, c, cfg.include_row_partner)
            ra, rb = metrics_record(a), metrics_record(b)
            same = all(np.isclose(getattr(ra, f), getattr(rb, f), rtol=1e-9, atol=1e-12)
                       for f in ("openness", "unevenness", "dependency"))
            size_ok = np.isclose(rb.size, ra.size * args.scale, rtol=1e-9)
            if not (same and size_ok):
                ok = False
                detail.append(c.iso3)
        checks.append(("scale invariance", ok,
                       f"{t.year} x{args.scale}" + (f"; failed {detail}" if detail else "")))

    expected = len(cfg.years) * len(countries)
    checks.append(("panel record count", n_records == expected, f"{n_records} of {expected}"))
    counts = {r: sum(c.region == r for c in countries) for r in REGIONS}
    checks.append(("region country counts", sum(counts.values()) == len(countries),
                   json.dumps(counts)))

    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed += not ok
    return EXIT_VALIDATION if failed else EXIT_OK


# --- entry point --------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data-dir", required=True, help="directory of canonical_<year>.csv files")
    p.add_argument("--years", default=f"{YEARS[0]}-{YEARS[-1]}")
    p.add_argument("--taxonomy", help="CSV with columns country,region")
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--include-row-partner", action=argparse.BooleanOptionalAction, default=True,
                   help="count flows to the rest-of-world as exports and dependency partners")
    p.add_argument("--dependency-final-use", action="store_true",
                   help="add foreign final use as dependency pseudo-partners")
    p.add_argument("--freedman-lane", action="store_true",
                   help="permute reduced-model residuals instead of the response")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrioembed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert WIOT CSV sheets to canonical CSV")
    p.add_argument("--wiot", help="single WIOT CSV file")
    p.add_argument("--year", type=int)
    p.add_argument("--out", help="canonical CSV output for --wiot")
    p.add_argument("--data-dir", help="directory of WIOT CSVs (batch mode)")
    p.add_argument("--years", default=f"{YEARS[0]}-{YEARS[-1]}")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="build the panel and write every analysis output")
    _common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--profiles", help="comma list of COUNTRY:YEAR, e.g. DEU:1995,DEU:2011")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="run invariant checks on canonical tables")
    _common(p)
    p.add_argument("--scale", type=float, default=3.0, help="factor for the scale-invariance copy")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
