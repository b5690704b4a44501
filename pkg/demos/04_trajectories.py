"""
Smoothed country paths
======================

Average each country's (openness, unevenness) pairs over six year bins,
then tag the path shape and colour it by the sign of its slope.
"""

import numpy as np
import pandas as pd

from mrioembed.core import EAST
from mrioembed.panel import YEARS, Panel, shape_tag, smooth_and_classify

t = np.arange(17.0)
paths = {
    # unevenness rises with openness, peaks, then falls as openness keeps growing
    "AAA": (1.0 + 0.04 * t, 0.10 + 0.08 * np.sin(np.pi * t / 16)),
    # rise and fall on both axes
    "BBB": (1.0 + 0.3 * np.sin(np.pi * t / 16), 0.10 + 0.08 * np.sin(np.pi * t / 16)),
    # steady decline in unevenness
    "CCC": (1.0 + 0.04 * t, 0.20 - 0.005 * t),
}
rows = [(c, y, o[i], u[i], 0.5, 1.0, EAST)
        for c, (o, u) in paths.items() for i, y in enumerate(YEARS)]
panel = Panel(pd.DataFrame(rows, columns=["country", "year", "openness", "unevenness",
                                          "dependency", "size", "region"]))

for c in panel.countries:
    traj = smooth_and_classify(panel, c, replications=2000, seed=1)
    print(c, traj.shape, traj.classification, f"b={traj.slope_b:.3f} p={traj.slope_p:.4f}")
    print(traj.frame().round(3).to_string(index=False))

# %%
# Small wiggles below 1% of an axis range do not count as a reversal.
pts = np.column_stack([np.arange(6.0), np.arange(6.0)])
pts[3, 1] -= 0.004
print(shape_tag(pts))
