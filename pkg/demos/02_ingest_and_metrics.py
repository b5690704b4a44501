"""
From a WIOT sheet to country metrics
====================================

Write a small synthetic world table in the WIOD sheet layout, read it back,
convert it to the long canonical CSV and compute the indices for every
country in it.
"""

import tempfile
from pathlib import Path

from mrioembed.core import SECTORS, derive_national_accounts
from mrioembed.ingest import IngestReport, parse_canonical, parse_wiot, write_canonical, write_wiot
from mrioembed.metrics import metrics_frame, metrics_record
from mrioembed.synthetic import random_world

work = Path(tempfile.mkdtemp())
codes = tuple(s.code for s in SECTORS)

# three countries, all 34 sectors, five final-use columns each
world = random_world(2004, ("CZE", "HUN", "RoW"), codes, n_final=5, seed=4, density=0.6)
sheet = work / "wiot04_row_apr12.csv"
write_wiot(world, sheet)

# %%
# The reader drops the household sector (c35), clamps negative cells
# (inventory changes in real sheets) and reports what it did.
report = IngestReport(2004)
table = parse_wiot(sheet, 2004, report)
print(table.Z.shape, table.F.shape)
print(report.as_dict())

canon = work / "canonical_2004.csv"
write_canonical(table, canon)
print(canon.read_text().splitlines()[:3])
assert parse_canonical(canon).equals(table)

# %%
# One record per country. The rest of world is a trade partner here, not
# an analysed economy, but its indices are still defined.
records = [metrics_record(derive_national_accounts(table, c)) for c in ("CZE", "HUN")]
print(metrics_frame(records).to_string(index=False))

# Hungary's electronics sector (c14) in the sector profile
hun = derive_national_accounts(table, "HUN")
print("HUN c14 export share:", hun.e[codes.index("c14")] / hun.e.sum())
