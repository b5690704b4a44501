"""
A four-sector economy by hand
=============================

Build the smallest table that exercises every index: one home country with
four sectors and a rest-of-world that buys its exports and sells it imports.
"""

import numpy as np

from mrioembed import MrioTable, derive_national_accounts
from mrioembed.metrics import openness, profiles_frame, sector_profiles, ude_vector, unevenness

# domestic inter-sector flows, rows sell to columns; the diagonal is ignored
domestic = np.array([
    [0, 40, 0, 25],
    [0, 0, 25, 50],
    [0, 30, 0, 0],
    [0, 30, 0, 0],
], dtype=float)
exports = np.array([30, 50, 20, 0], dtype=float)
imports = np.array([25, 15, 50, 10], dtype=float)

Z = np.zeros((8, 8))
Z[:4, :4] = domestic
Z[:4, 4] = exports       # all exports land on one foreign sector
Z[4, :4] = imports
table = MrioTable(2000, ("HOM", "RoW"), ("c1", "c2", "c3", "c4"), Z, np.zeros((8, 2)))

acc = derive_national_accounts(table, "HOM")
print("openness   ", openness(acc))   # 200 outside flows / 200 domestic flows

# %%
# UDE: a sector's share of domestic inflows minus its share of exports.
# c3 gets 1/8 of domestic inputs but ships 1/5 of exports.
ude = ude_vector(acc)
print("UDE        ", ude)
print("unevenness ", unevenness(ude))
print("sum of UDE ", ude.sum())

# %%
# The per-sector profile, ranked from most export-heavy to most embedded
print(profiles_frame(sector_profiles(acc)).to_string(index=False))
