"""Design matrices, orthogonalization, and per-model sufficient statistics.

Every evidence formula downstream is a function of a handful of scalars per
model (sample size, model dimension, sums of squares) plus the triangular
factor of the selected Gram matrix.  This module computes those pieces from
raw data, builds the exactly-correlated simulation designs, and reads
datasets from CSV.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "Dataset",
    "SuffStats",
    "CorrelationSpec",
    "orthogonalize",
    "fit_suffstats",
    "make_correlated_design",
    "correlated_design_from_raw",
    "load_dataset_csv",
]

# A selected column is declared linearly dependent when its residual norm
# after projection on the previous columns falls below this fraction of its
# original norm.
RANK_RTOL = 1e-10

# Looser than RANK_RTOL: fit_suffstats only sanity-checks that the caller
# ran orthogonalize(); accumulated rounding must not trip it.
_ORTHO_CHECK_RTOL = 1e-8


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a vector or a 2-d array")
    return a


@dataclass(frozen=True)
class Dataset:
    """Response vector plus common and candidate predictor matrices.

    Parameters
    ----------
    y : (n,) response.
    x0 : (n, p0) common predictors shared by every model; p0 may be 0.
    x : (n, p) candidate predictors that models select subsets of.
    """

    y: np.ndarray
    x0: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        n = y.shape[0]
        if n < 1:
            raise ValueError("empty response")
        x0 = (
            np.zeros((n, 0))
            if self.x0 is None or np.size(self.x0) == 0
            else _as_matrix(self.x0, "x0")
        )
        x = _as_matrix(self.x, "x")
        if x0.shape[0] != n or x.shape[0] != n:
            raise ValueError("predictor row counts must match len(y)")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p0(self) -> int:
        return self.x0.shape[1]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @classmethod
    def with_intercept(cls, y, x) -> "Dataset":
        """Dataset whose only common predictor is an intercept column."""
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        return cls(y=y, x0=np.ones((y.shape[0], 1)), x=x)


@dataclass(frozen=True)
class SuffStats:
    """Per-model sufficient statistics for a subset of candidate predictors.

    ``sse`` and ``ssr`` decompose the total sum of squares about the
    common-predictor fit, ``r2 = ssr / (sse + ssr)``, and ``gram_chol`` is
    the upper-triangular factor R with R'R equal to the selected Gram
    matrix (so ``ssr == ||R beta_hat||^2``).
    """

    n: int
    p0: int
    p: int
    beta_hat: np.ndarray
    sse: float
    ssr: float
    r2: float
    gram_chol: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "beta_hat", np.asarray(self.beta_hat, dtype=np.float64).reshape(-1)
        )
        object.__setattr__(
            self, "gram_chol", np.asarray(self.gram_chol, dtype=np.float64)
        )
        if self.beta_hat.shape[0] != self.p or self.gram_chol.shape != (self.p, self.p):
            raise ValueError("beta_hat / gram_chol shapes inconsistent with p")

    @property
    def total_ss(self) -> float:
        return self.sse + self.ssr

    def gram_inverse(self) -> np.ndarray:
        """(X'X)^{-1} of the selected columns, from the stored factor."""
        if self.p == 0:
            return np.zeros((0, 0))
        rinv = solve_triangular(self.gram_chol, np.eye(self.p))
        return rinv @ rinv.T


def _common_basis(x0):
    """Orthonormal basis of span(x0); raises on rank deficiency."""
    if x0.shape[1] == 0:
        return np.zeros((x0.shape[0], 0))
    q0, r0 = np.linalg.qr(x0)
    col_norms = np.linalg.norm(x0, axis=0)
    if np.any(np.abs(np.diag(r0)) <= RANK_RTOL * np.maximum(col_norms, 1e-300)):
        raise ValueError("degenerate common predictors")
    return q0


def orthogonalize(dataset: Dataset) -> Dataset:
    """Project the common predictors out of every candidate column.

    Returns a dataset whose candidate matrix satisfies x0'x = 0 (each entry
    below 1e-10 times the product of the column norms); the response and
    common predictors are untouched.  With a single intercept column this is
    ordinary centering.
    """
    if dataset.p0 == 0:
        return dataset
    q0 = _common_basis(dataset.x0)
    x_new = dataset.x - q0 @ (q0.T @ dataset.x)
    # One more pass kills the O(eps * kappa) residue of the first projection.
    x_new -= q0 @ (q0.T @ x_new)
    return Dataset(y=dataset.y, x0=dataset.x0, x=x_new)


def _canonical_subset(subset, p):
    cols = tuple(sorted(int(j) for j in subset))
    if len(set(cols)) != len(cols):
        raise ValueError("subset contains repeated indices")
    if cols and (cols[0] < 0 or cols[-1] >= p):
        raise ValueError(f"subset indices must lie in [0, {p})")
    return cols


def fit_suffstats(dataset: Dataset, subset) -> SuffStats:
    """Least-squares sufficient statistics for one subset of predictors.

    The dataset must already be orthogonalized.  The empty subset yields the
    null model: p = 0, ssr = 0, r2 = 0 and sse equal to the total sum of
    squares about the common-predictor fit.
    """
    cols = _canonical_subset(subset, dataset.p)
    p_i = len(cols)
    n, p0 = dataset.n, dataset.p0
    if n <= p0 + p_i:
        raise ValueError(
            f"insufficient sample size: n={n} with p0={p0} and {p_i} selected predictors"
        )
    q0 = _common_basis(dataset.x0)
    ytilde = dataset.y - q0 @ (q0.T @ dataset.y)
    total = float(ytilde @ ytilde)
    if p_i == 0:
        return SuffStats(
            n=n,
            p0=p0,
            p=0,
            beta_hat=np.zeros(0),
            sse=total,
            ssr=0.0,
            r2=0.0,
            gram_chol=np.zeros((0, 0)),
        )
    xs = dataset.x[:, cols]
    if p0 > 0:
        cross = np.abs(q0.T @ xs)
        scale = np.linalg.norm(xs, axis=0) * max(np.linalg.norm(q0, axis=0).max(), 1.0)
        if np.any(cross > _ORTHO_CHECK_RTOL * np.maximum(scale, 1e-300)):
            raise ValueError("dataset not orthogonalized; call orthogonalize() first")
    q, r = np.linalg.qr(xs)
    col_norms = np.linalg.norm(xs, axis=0)
    if np.any(np.abs(np.diag(r)) <= RANK_RTOL * np.maximum(col_norms, 1e-300)):
        raise ValueError(f"selected columns {cols} are rank deficient")
    # Fix the QR sign convention so repeated fits agree bit for bit.
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    u = q.T @ ytilde
    beta = solve_triangular(r, u)
    resid = ytilde - q @ u
    sse = float(resid @ resid)
    ssr = float(u @ u)
    # Signal at the level of squared rounding noise in y is an exact zero.
    if ssr <= 1e-24 * max(float(dataset.y @ dataset.y), 1.0):
        ssr = 0.0
    r2 = ssr / (ssr + sse) if ssr > 0 else 0.0
    return SuffStats(
        n=n, p0=p0, p=p_i, beta_hat=beta, sse=sse, ssr=ssr, r2=r2, gram_chol=r
    )


@dataclass(frozen=True)
class CorrelationSpec:
    """Target sample correlation for simulated designs.

    ``kind`` is one of ``identity``, ``ar1`` (entries rho^|i-j|) or
    ``explicit`` (a full matrix, which must be symmetric positive definite
    with unit diagonal).
    """

    kind: str
    rho: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "ar1", "explicit"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        if self.kind == "ar1":
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise ValueError("ar1 correlation needs rho in (-1, 1)")
        if self.kind == "explicit":
            m = np.asarray(self.matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("explicit correlation matrix must be square")
            if not np.allclose(m, m.T, atol=1e-12):
                raise ValueError("correlation matrix must be symmetric")
            if not np.allclose(np.diag(m), 1.0, atol=1e-12):
                raise ValueError("correlation matrix must have unit diagonal")
            try:
                np.linalg.cholesky(m)
            except np.linalg.LinAlgError:
                raise ValueError("correlation matrix must be positive definite")
            object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "CorrelationSpec":
        return cls(kind="identity")

    @classmethod
    def ar1(cls, rho: float) -> "CorrelationSpec":
        return cls(kind="ar1", rho=float(rho))

    @classmethod
    def explicit(cls, matrix) -> "CorrelationSpec":
        return cls(kind="explicit", matrix=matrix)

    def matrix_for(self, p: int) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(p)
        if self.kind == "ar1":
            idx = np.arange(p)
            return self.rho ** np.abs(idx[:, None] - idx[None, :])
        if self.matrix.shape[0] != p:
            raise ValueError(
                f"explicit correlation is {self.matrix.shape[0]}x{self.matrix.shape[0]}, need {p}"
            )
        return self.matrix


def correlated_design_from_raw(raw: np.ndarray, spec: CorrelationSpec) -> np.ndarray:
    """Deterministically transform raw draws into an exactly-correlated design.

    The raw matrix is centered, its principal-component scores are rescaled
    to exact unit 1/n sample variance, and the result is multiplied by the
    transposed Cholesky factor of the target correlation.  The returned X is
    centered and satisfies (X'X)/n = target to floating-point accuracy.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise ValueError("raw draws must be a 2-d array")
    n, p = raw.shape
    if n <= p:
        raise ValueError(f"need n > p for the orthogonalization step, got n={n}, p={p}")
    z = raw - raw.mean(axis=0)
    u, s, _ = np.linalg.svd(z, full_matrices=False)
    if s[-1] <= 1e-12 * s[0]:
        raise ValueError("raw draws are numerically rank deficient")
    scores = np.sqrt(n) * u
    chol = np.linalg.cholesky(spec.matrix_for(p))
    return scores @ chol.T


def make_correlated_design(
    n: int, p: int, spec: CorrelationSpec, rng: np.random.Generator
) -> np.ndarray:
    """Centered, standardized n x p design whose (X'X)/n equals the target.

    Draws are standard normal from ``rng``; the same seed reproduces the
    same matrix bit for bit.
    """
    return correlated_design_from_raw(rng.standard_normal((n, p)), spec)


def load_dataset_csv(path) -> tuple[Dataset, list[str]]:
    """Read a dataset from CSV and return it with the candidate column labels.

    Expected layout: a header row with a ``y`` column, optional common
    predictors named ``x0_*`` (an intercept is added when none are present),
    and candidate predictors named ``x1`` .. ``xp``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("malformed CSV: empty file")
        header = [h.strip() for h in header]
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]

    if "y" not in header:
        raise ValueError("malformed CSV: missing required column 'y'")
    x0_names = [h for h in header if h.startswith("x0_")]
    x_names = [h for h in header if h != "y" and h not in x0_names]
    for name in x_names:
        if not (name.startswith("x") and name[1:].isdigit()):
            raise ValueError(f"malformed CSV: unexpected column {name!r}")
    order = sorted(x_names, key=lambda s: int(s[1:]))
    expected = [f"x{i}" for i in range(1, len(order) + 1)]
    if order != expected:
        missing = next(e for e, g in zip(expected, order + [None]) if e != g)
        raise ValueError(f"malformed CSV: candidate columns must be x1..xp, missing {missing!r}")

    idx = {name: header.index(name) for name in header}

    def column(name):
        out = np.empty(len(rows))
        for i, row in enumerate(rows):
            if len(row) != len(header):
                raise ValueError(f"malformed CSV: row {i + 2} has {len(row)} fields, expected {len(header)}")
            cell = row[idx[name]].strip()
            try:
                out[i] = float(cell)
            except ValueError:
                raise ValueError(
                    f"malformed CSV: column {name!r} row {i + 2} is not numeric: {cell!r}"
                )
        return out

    if not rows:
        raise ValueError("malformed CSV: no data rows")
    y = column("y")
    x = np.column_stack([column(name) for name in order]) if order else np.zeros((len(rows), 0))
    if x0_names:
        x0 = np.column_stack([column(name) for name in x0_names])
        dataset = Dataset(y=y, x0=x0, x=x)
    else:
        dataset = Dataset.with_intercept(y, x)
    return dataset, order
