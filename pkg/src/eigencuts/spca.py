"""Sparse-PCA frontend: sparsity-budgeted relaxation, deflation loop, scoring.

The target problem maximizes x'Cx over unit vectors with at most k nonzero
entries; its lift maximizes <C, X> over trace-one PSD X with an elementwise
l1 budget sum|X_ij| <= k.  The cut relaxation replaces PSD with cut rows,
pairwise diagonal-dominance rows, and a box.  Components are read off the
top eigenvector of the optimum, truncated to the k largest-magnitude
entries, and removed from C by deflation before the next round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateComponentError
from .linalg import SymMatrix, eig_decompose
from .relax import (PSD_TOL, CutSet, ExtraRow, RelaxationModel, SdpInstance,
                    SolveReport, build_LS, cutting_plane, reference_sdp)
from .solvers import SolverOptions, solve

# Relative floor for the smallest eigenvalue of a covariance input.
COV_PSD_REL_TOL = 1e-8

ALPHA_MAX = math.sqrt(2.0)


class CovMatrix(SymMatrix):
    """Symmetric matrix accepted as a covariance: PSD at tolerance.

    Rejects inputs with lambda_min < -COV_PSD_REL_TOL * ||C||_F.  Pass
    psd_tol=None to skip the check; deflation uses that path, since removing
    a truncated (non-eigenvector) direction can leave a slightly indefinite
    remainder that the pipeline still handles.
    """

    __slots__ = ()

    def __init__(self, entries, psd_tol: float | None = COV_PSD_REL_TOL) -> None:
        super().__init__(entries)
        if psd_tol is not None:
            lam_min = float(np.linalg.eigvalsh(self.entries)[0])
            if lam_min < -psd_tol * max(self.fro_norm(), 1e-300):
                raise ValueError(
                    f"not PSD at tolerance: lambda_min = {lam_min:.3e} vs "
                    f"-{psd_tol:.0e} * ||C||_F")

    @property
    def p(self) -> int:
        return self.n


@dataclass(frozen=True)
class SparseComponent:
    """Unit loading vector with at most k nonzeros and its variance x'Cx."""

    loading: np.ndarray
    support: tuple[int, ...]
    objective: float

    def __post_init__(self):
        norm = float(np.linalg.norm(self.loading))
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"loading norm {norm} is not 1 within 1e-8")
        outside = np.ones(len(self.loading), dtype=bool)
        outside[list(self.support)] = False
        if np.any(self.loading[outside] != 0.0):
            raise ValueError("loading has nonzeros outside the support")


def spca_instance(C: CovMatrix, k: int, alpha: float = 1.0) -> SdpInstance:
    """Trace-one instance with l1 budget k and pairwise side rows.

    Side rows X_ii + X_jj +- 2*alpha*X_ij >= 0 (both signs) and the box
    0 <= X_ii <= 1, |X_ij| <= 1 are PSD-implied at the preset alphas, so
    the PSD reference skips them.
    """
    p = C.n
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= {p}, got k={k}")
    if not 0.0 <= alpha <= ALPHA_MAX + 1e-12:
        raise ValueError(f"alpha must be in [0, sqrt(2)], got {alpha}")
    bounds = {}
    for i in range(p):
        bounds[(i, i)] = (0.0, 1.0)
        for j in range(i + 1, p):
            bounds[(i, j)] = (-1.0, 1.0)
    extras = []
    for i in range(p):
        for j in range(i + 1, p):
            extras.append(ExtraRow(
                tag=f"pair:+{i},{j}",
                terms=((i, i, 1.0), (j, j, 1.0), (i, j, 2.0 * alpha)),
                sense=">=", rhs=0.0, psd_implied=True))
            if alpha > 0.0:
                extras.append(ExtraRow(
                    tag=f"pair:-{i},{j}",
                    terms=((i, i, 1.0), (j, j, 1.0), (i, j, -2.0 * alpha)),
                    sense=">=", rhs=0.0, psd_implied=True))
    return SdpInstance(C=C, constraints=[(SymMatrix(np.eye(p)), 1.0, "=")],
                       sense="max", constraint_tags=["trace"],
                       extra_linear=extras, entry_bounds=bounds,
                       abs_budget=float(k))


def build_LSPCA(C: CovMatrix, k: int, S: CutSet,
                alpha: float = 1.0) -> RelaxationModel:
    """Cut relaxation of the sparse-PCA lift."""
    return build_LS(spca_instance(C, k, alpha), S)


def lspca_value(C: CovMatrix, k: int, S: CutSet, alpha: float = 1.0,
                opts: SolverOptions | None = None):
    """Solve the relaxation; returns (objective, SolveReport)."""
    report = solve(build_LSPCA(C, k, S, alpha), opts)
    if report.status != "optimal":
        raise RuntimeError(f"LSPCA solve ended with status {report.status}")
    return report.objective, report


def spca_reference(C: CovMatrix, k: int, method: str = "direct",
                   tol: float = PSD_TOL, budget: int | None = None,
                   opts: SolverOptions | None = None) -> SolveReport:
    """PSD-cone value of the sparse-PCA lift (upper bound on x'Cx at sparsity k)."""
    return reference_sdp(spca_instance(C, k), tol=tol, budget=budget,
                         method=method, opts=opts)


def extract_component(report: SolveReport, k: int, C: CovMatrix) -> SparseComponent:
    """Top eigenvector of the optimum, truncated to its k largest entries.

    Zeroes all but the k largest-magnitude entries, renormalizes, and flips
    the sign so the largest-magnitude entry is positive.
    """
    if report.primal_X is None:
        raise DegenerateComponentError("report carries no primal matrix")
    decomp = eig_decompose(report.primal_X)
    if decomp.lam_max <= 1e-12:
        raise DegenerateComponentError(
            f"no positive-variance direction (lambda_max = {decomp.lam_max:.3e})")
    u = decomp.vectors[:, 0].copy()
    order = np.argsort(-np.abs(u), kind="stable")
    u[order[k:]] = 0.0
    norm = float(np.linalg.norm(u))
    if norm < 1e-12:
        raise DegenerateComponentError("top eigenvector truncated to zero")
    u /= norm
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    support = tuple(int(i) for i in np.flatnonzero(u))
    return SparseComponent(loading=u, support=support,
                           objective=float(u @ C.entries @ u))


def deflate(C: CovMatrix, comp: SparseComponent) -> CovMatrix:
    """Remove the component's variance: C - (x'Cx) xx'.

    The deflated direction satisfies x' C2 x = 0.  The result can be
    slightly indefinite when x is a truncated eigenvector, so the PSD
    check is skipped on the returned matrix.
    """
    x = comp.loading
    M = C.entries - (x @ C.entries @ x) * np.outer(x, x)
    return CovMatrix(M, psd_tol=None)


def sparse_pca(C: CovMatrix, ks, policy: str = "eigen", budget: int = 100,
               batch: int = 1, alpha: float = 1.0,
               opts: SolverOptions | None = None) -> list[SparseComponent]:
    """Deflation loop: one sparse component per entry of ks.

    policy picks the cut set for each round: "eigen" solves once with the
    eigenbasis of the current (deflated) matrix, "oracle" runs the
    separation loop from an empty set, "hybrid" runs it from the eigenbasis.
    """
    if not ks:
        raise ValueError("ks must be non-empty")
    if policy not in ("eigen", "oracle", "hybrid"):
        raise ValueError(f"unknown policy {policy!r}")
    components = []
    current = C
    for k in ks:
        inst = spca_instance(current, k, alpha)
        if policy == "eigen":
            report = solve(build_LS(inst, CutSet.eigenbasis(current)), opts)
            if report.status != "optimal":
                raise RuntimeError(f"LSPCA solve ended with status {report.status}")
        else:
            S0 = CutSet() if policy == "oracle" else CutSet.eigenbasis(current)
            report, _, _ = cutting_plane(inst, S0, budget=budget, batch=batch,
                                         opts=opts)
            if report.status not in ("optimal", "iteration-limit"):
                raise RuntimeError(f"cut loop ended with status {report.status}")
        comp = extract_component(report, k, current)
        components.append(comp)
        current = deflate(current, comp)
    return components


def synthetic_covariance(seed: int | None = None,
                         n_obs: int | None = None) -> CovMatrix:
    """Three-factor benchmark covariance on 10 variables.

    Hidden factors: V1 ~ N(0, 290), V2 ~ N(0, 300), V3 = -0.3 V1 + 0.925 V2
    + N(0, 1).  Observables add unit noise: X_1..X_4 = V1, X_5..X_8 = V2,
    X_9..X_10 = V3, each plus N(0, 1).  By default returns the exact
    covariance of this model (seed is then irrelevant); with n_obs set,
    returns the sample covariance of n_obs seeded draws instead.
    """
    var3 = 0.09 * 290.0 + 0.925 ** 2 * 300.0 + 1.0
    factor_cov = np.array([
        [290.0, 0.0, -0.3 * 290.0],
        [0.0, 300.0, 0.925 * 300.0],
        [-0.3 * 290.0, 0.925 * 300.0, var3],
    ])
    groups = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2]
    if n_obs is None:
        C = factor_cov[np.ix_(groups, groups)] + np.eye(10)
        return CovMatrix(C)
    rng = np.random.default_rng(seed)
    v1 = rng.normal(0.0, math.sqrt(290.0), n_obs)
    v2 = rng.normal(0.0, math.sqrt(300.0), n_obs)
    v3 = -0.3 * v1 + 0.925 * v2 + rng.normal(0.0, 1.0, n_obs)
    V = np.column_stack([v1, v2, v3])
    X = V[:, groups] + rng.normal(0.0, 1.0, (n_obs, 10))
    return CovMatrix(np.cov(X, rowvar=False))


def wishart_covariance(seed: int | None = None, p: int = 80,
                       entry_var: float = 20.0) -> CovMatrix:
    """C = A'A for a p x p matrix A with iid N(0, entry_var) entries."""
    rng = np.random.default_rng(seed)
    A = rng.normal(0.0, math.sqrt(entry_var), (p, p))
    return CovMatrix(A.T @ A)


def explained_variance(data_or_C, components) -> float:
    """Fraction of total variance captured, adjusted for non-orthogonality.

    Projects onto the loading matrix, takes the triangular factor of the
    projected scores (so each component is credited only with variance not
    already claimed by earlier ones), and divides by the total variance.
    Square symmetric input is treated as a covariance matrix, anything else
    as a data matrix with observations in rows (columns are centered).
    Dependent loading columns contribute nothing.  Equals the classical
    spectrum ratio when the loadings are orthonormal eigenvectors.
    """
    if not components:
        raise ValueError("need at least one component")
    P = np.column_stack([
        comp.loading if isinstance(comp, SparseComponent) else np.asarray(comp, float)
        for comp in components])
    arr = data_or_C.entries if isinstance(data_or_C, SymMatrix) else np.asarray(
        data_or_C, dtype=float)
    square = arr.ndim == 2 and arr.shape[0] == arr.shape[1]
    if square and np.allclose(arr, arr.T, atol=1e-8 * max(1.0, float(np.abs(arr).max()))):
        w, V = np.linalg.eigh(arr)
        B = np.sqrt(np.clip(w, 0.0, None))[:, None] * V.T  # B'B = C
        total = float(np.trace(arr))
    else:
        if arr.shape[0] < 2:
            raise ValueError("data matrix needs at least 2 observations")
        B = (arr - arr.mean(axis=0)) / math.sqrt(arr.shape[0] - 1)
        total = float(np.sum(B * B))
    scores = B @ P
    R = np.linalg.qr(scores, mode="r")
    diag = np.diag(R)
    keep = np.abs(diag) > 1e-10 * max(1.0, float(np.linalg.norm(scores)))
    return float(np.sum(diag[keep] ** 2) / total)
