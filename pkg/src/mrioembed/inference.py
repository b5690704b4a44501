"""OLS with standardized coefficients and permutation p-values."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from .core import MrioError

MIN_REPLICATIONS = 1000
# permutations are drawn in fixed-size chunks, each from its own spawned
# seed, so the result does not depend on how chunks are scheduled
CHUNK = 500


class RankDeficientError(MrioError):
    pass


@dataclass(frozen=True)
class DesignMatrix:
    """Regressors (intercept included), response and column labels.

    ``interactions`` maps a product column to the two columns it is built
    from; :func:`marginal_effects` uses it to rebuild interaction terms.
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    interactions: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    intercept: str | None = "Intercept"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],) or X.shape[1] != len(self.names):
            raise MrioError(f"design shape mismatch: X {X.shape}, y {y.shape}, {len(self.names)} names")
        if X.shape[0] <= X.shape[1]:
            raise MrioError(f"need more rows than columns, got {X.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def with_response(self, y) -> "DesignMatrix":
        return replace(self, y=np.asarray(y, dtype=float))

    @classmethod
    def from_frame(cls, df: pd.DataFrame, response: str, terms: Sequence[str],
                   intercept: bool = True) -> "DesignMatrix":
        """Build a design from a frame; ``"a*b"`` terms become products."""
        cols, names, inter = [], [], {}
        if intercept:
            cols.append(np.ones(len(df)))
            names.append("Intercept")
        for term in terms:
            if "*" in term:
                a, b = (t.strip() for t in term.split("*"))
                cols.append(df[a].to_numpy(float) * df[b].to_numpy(float))
                inter[term] = (a, b)
            else:
                cols.append(df[term].to_numpy(float))
            names.append(term)
        return cls(np.column_stack(cols), df[response].to_numpy(float), tuple(names),
                   inter, "Intercept" if intercept else None)


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    b: np.ndarray
    beta: np.ndarray
    adj_r2: float
    r2: float
    f_stat: float
    f_pvalue: float
    n: int
    fitted: np.ndarray
    p: np.ndarray | None = None
    replications: int = 0
    seed: int | None = None
    scheme: str | None = None
    degenerate: bool = False

    def coef(self, name: str) -> float:
        return float(self.b[self.names.index(name)])

    def pvalue(self, name: str) -> float:
        if self.p is None:
            raise MrioError("fit has no permutation p-values")
        return float(self.p[self.names.index(name)])

    def table(self) -> pd.DataFrame:
        return pd.DataFrame({
            "term": self.names, "b": self.b, "beta": self.beta,
            "p": self.p if self.p is not None else np.nan,
        })

    def to_dict(self) -> dict:
        def num(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "terms": [
                {"term": t, "b": num(b), "beta": num(be),
                 "p": None if self.p is None else num(p)}
                for t, b, be, p in zip(
                    self.names, self.b, self.beta,
                    self.p if self.p is not None else [np.nan] * len(self.names))
            ],
            "n": self.n,
            "adj_r2": num(self.adj_r2),
            "f": num(self.f_stat),
            "f_pvalue": num(self.f_pvalue),
            "replications": self.replications,
            "seed": self.seed,
            "scheme": self.scheme,
            "degenerate": self.degenerate,
        }


class _Solver:
    """Least-squares solver reused across many responses for one X."""

    def __init__(self, X: np.ndarray, names: Sequence[str]):
        Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        tol = diag.max() * max(X.shape) * np.finfo(float).eps if diag.size else 0.0
        rank = int((diag > tol).sum())
        if rank < X.shape[1]:
            bad = sorted(names[i] for i in piv[rank:])
            raise RankDeficientError(f"rank-deficient design; collinear columns: {', '.join(bad)}")
        self.Q, self.R, self.piv = Q, R, piv
        self.inv_piv = np.argsort(piv)

    def solve(self, Y: np.ndarray) -> np.ndarray:
        """Coefficients for each column of ``Y`` (or a single vector)."""
        coef = scipy.linalg.solve_triangular(self.R, self.Q.T @ Y)
        return coef[self.inv_piv]


def ols_fit(d: DesignMatrix) -> RegressionResult:
    """Ordinary least squares through a pivoted QR decomposition."""
    solver = _Solver(d.X, d.names)
    b = solver.solve(d.y)
    fitted = d.X @ b
    resid = d.y - fitted
    n, k = d.X.shape
    has_int = d.intercept is not None
    ybar = d.y.mean() if has_int else 0.0
    tss = np.float64(((d.y - ybar) ** 2).sum())
    rss = np.float64(resid @ resid)
    df_model = k - 1 if has_int else k
    df_resid = n - k

    sd_y = d.y.std(ddof=1)
    sd_x = d.X.std(axis=0, ddof=1)
    degenerate = tss <= 0 or sd_y == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(sd_y > 0, b * sd_x / sd_y, np.nan)
        if has_int:
            beta[d.names.index(d.intercept)] = np.nan
        if degenerate:
            r2 = adj = f = fp = np.nan
        else:
            r2 = 1.0 - rss / tss
            adj = 1.0 - (1.0 - r2) * (n - (1 if has_int else 0)) / df_resid
            f = ((tss - rss) / df_model) / (rss / df_resid) if df_model else np.nan
            fp = float(stats.f.sf(f, df_model, df_resid)) if np.isfinite(f) else (0.0 if rss == 0 else np.nan)
    return RegressionResult(
        names=d.names, b=b, beta=beta, adj_r2=float(adj), r2=float(r2),
        f_stat=float(f), f_pvalue=float(fp), n=n, fitted=fitted, degenerate=bool(degenerate),
    )


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept None, an int or an already spawned SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _perm_chunks(n: int, replications: int, seed) -> list[tuple[np.random.SeedSequence, int]]:
    root = as_seed_sequence(seed)
    n_chunks = -(-replications // CHUNK)
    children = root.spawn(n_chunks)
    sizes = [CHUNK] * (n_chunks - 1) + [replications - CHUNK * (n_chunks - 1)]
    return list(zip(children, sizes))


def _permutations(ss: np.random.SeedSequence, size: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(ss)
    return rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)


def _count_extreme(coefs: np.ndarray, observed: np.ndarray, direction: np.ndarray) -> np.ndarray:
    # coefs: (k, size). Small relative slack so ties with the observed value
    # (e.g. identity permutations) are counted despite rounding.
    slack = 1e-12 * np.maximum(np.abs(observed), 1.0)
    ge = coefs >= (observed - slack)[:, None]
    le = coefs <= (observed + slack)[:, None]
    return np.where(direction[:, None] >= 0, ge, le).sum(axis=1)


def permutation_pvalues(
    d: DesignMatrix,
    fit: RegressionResult | None = None,
    replications: int = 10_000,
    seed=None,
    scheme: str = "manly",
    alternative: str = "observed",
    n_jobs: int = 1,
) -> np.ndarray:
    """One-sided permutation p-values for every coefficient.

    Parameters
    ----------
    scheme : ``"manly"`` permutes the raw response; ``"freedman-lane"``
        permutes residuals of the model without the tested column.
    alternative : ``"observed"`` tests in the direction of each observed
        coefficient's sign; ``"greater"``/``"less"`` fix the direction.

    Returns ``(1 + #{permuted b at least as extreme}) / (replications + 1)``.
    The same ``seed`` and ``replications`` always give the same vector,
    whatever ``n_jobs`` is.
    """
    if replications < MIN_REPLICATIONS:
        raise ValueError(f"replications must be >= {MIN_REPLICATIONS}, got {replications}")
    if fit is None:
        fit = ols_fit(d)
    observed = fit.b
    if alternative == "observed":
        direction = np.where(observed >= 0, 1.0, -1.0)
    elif alternative == "greater":
        direction = np.ones_like(observed)
    elif alternative == "less":
        direction = -np.ones_like(observed)
    else:
        raise ValueError(f"unknown alternative {alternative!r}")

    solver = _Solver(d.X, d.names)
    n, k = d.X.shape

    if scheme == "manly":
        def run(chunk):
            ss, size = chunk
            perms = _permutations(ss, size, n)
            coefs = solver.solve(d.y[perms].T)
            return _count_extreme(coefs, observed, direction)
    elif scheme == "freedman-lane":
        reduced = []
        for j in range(k):
            keep = [i for i in range(k) if i != j]
            Xr = d.X[:, keep]
            br = _Solver(Xr, [d.names[i] for i in keep]).solve(d.y)
            fit_r = Xr @ br
            reduced.append((fit_r, d.y - fit_r))

        def run(chunk):
            ss, size = chunk
            perms = _permutations(ss, size, n)
            counts = np.zeros(k, dtype=int)
            for j, (fit_r, res_r) in enumerate(reduced):
                Y = fit_r[:, None] + res_r[perms].T
                coefs = solver.solve(Y)[j:j + 1]
                counts[j] = _count_extreme(coefs, observed[j:j + 1], direction[j:j + 1])[0]
            return counts
    else:
        raise ValueError(f"unknown permutation scheme {scheme!r}")

    chunks = _perm_chunks(n, replications, seed)
    if n_jobs == 1:
        counts = sum(run(c) for c in chunks)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            counts = sum(pool.map(run, chunks))
    return (1.0 + counts) / (replications + 1.0)


def fit_with_permutation(d: DesignMatrix, replications: int = 10_000, seed=None,
                         scheme: str = "manly", n_jobs: int = 1) -> RegressionResult:
    """OLS fit plus permutation p-values, bundled in one result."""
    fit = ols_fit(d)
    if fit.degenerate:
        p = np.ones(len(fit.b))
    else:
        p = permutation_pvalues(d, fit, replications, seed, scheme, n_jobs=n_jobs)
    return replace(fit, p=p, replications=replications, seed=seed, scheme=scheme)


def marginal_effects(
    fit: RegressionResult,
    d: DesignMatrix,
    vary: str,
    grid: Sequence[float],
    groups: Mapping[str, Mapping[str, float]],
) -> pd.DataFrame:
    """Predicted response along ``grid`` for each group setting.

    Every column other than ``vary`` and the group indicators is held at
    its sample mean; interaction columns are rebuilt from their factors so
    that, e.g., ``Year*Openness`` becomes ``mean(Year) * grid``. Points
    outside the observed range of ``vary`` are flagged ``extrapolated``.
    """
    if vary not in d.names:
        raise MrioError(f"unknown column {vary!r}")
    for setting in groups.values():
        for col in setting:
            if col not in d.names:
                raise MrioError(f"unknown group column {col!r}")

    grid = np.asarray(grid, dtype=float)
    means = dict(zip(d.names, d.X.mean(axis=0)))
    lo, hi = d.column(vary).min(), d.column(vary).max()
    extrap = (grid < lo) | (grid > hi)
    if extrap.any():
        warnings.warn(f"{int(extrap.sum())} grid points outside observed range of {vary}",
                      stacklevel=2)

    frames = []
    for label, setting in groups.items():
        X = np.tile([means[nm] for nm in d.names], (len(grid), 1))
        base = {nm: np.full(len(grid), means[nm]) for nm in d.names}
        base[vary] = grid
        for col, val in setting.items():
            base[col] = np.full(len(grid), float(val))
        for j, nm in enumerate(d.names):
            if nm in d.interactions:
                a, b_ = d.interactions[nm]
                X[:, j] = base[a] * base[b_]
            else:
                X[:, j] = base[nm]
        frames.append(pd.DataFrame({
            "group": label, vary: grid, "predicted": X @ fit.b, "extrapolated": extrap,
        }))
    return pd.concat(frames, ignore_index=True)
