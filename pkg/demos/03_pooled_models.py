"""
Pooled regressions with permutation p-values
============================================

Simulate a 24-country, 17-year panel whose unevenness follows a known
linear model, fit the pooled model and compare regions through predicted
values over an openness grid.
"""

import numpy as np

from mrioembed.panel import pooled_model_unevenness, region_marginal_effects
from mrioembed.synthetic import UNEVENNESS_MODEL_COEFS, simulated_panel

panel = simulated_panel(UNEVENNESS_MODEL_COEFS, noise_sd=1.5, seed=2)
print(len(panel), "country-years")

# %%
# 2000 permutations keeps this quick; the default is 10 000.
fit = pooled_model_unevenness(panel, replications=2000, seed=0)
tab = fit.table()
tab["true"] = [UNEVENNESS_MODEL_COEFS[t] for t in tab["term"]]
print(tab.round(3).to_string(index=False))
print("adj R2", round(fit.adj_r2, 3))

# %%
# Interaction terms are rebuilt from their factors, other regressors sit at
# their panel means. Points outside the observed openness range get a flag.
grid = np.linspace(0.8, 1.6, 5)
me = region_marginal_effects(panel, fit, "Unevenness100", grid)
print(me.pivot(index="Openness", columns="group", values="predicted").round(2))
