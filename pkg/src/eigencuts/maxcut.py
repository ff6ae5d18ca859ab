"""Max-cut frontend: SP/SD relaxation pair, spectral bound, GW rounding.

The raw relaxations optimize z = <-W, X>; reported cut bounds are
m_total/2 + z/4 throughout, so "value" always means a bound on the cut
weight.  SP_S is the cut relaxation of the unit-diagonal SDP; SD_S is the
restriction to conic combinations of the cut vectors, whose optimum is a
GW-roundable PSD matrix and a lower bound on the SDP value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeneratorError
from .linalg import SymMatrix, eig_decompose
from .relax import CutSet, RelaxationModel, SdpInstance, SolveReport, build_LS
from .solvers import SolverOptions, solve

BRUTE_FORCE_MAX_N = 22
GW_RATIO = 0.878


@dataclass(frozen=True)
class Graph:
    """Simple weighted undirected graph; edges are (u, v, w) with u < v."""

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        seen = set()
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            if w < 0:
                raise ValueError(f"negative weight on edge ({u},{v})")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, n: int, edges, default_weight: float = 1.0) -> "Graph":
        norm = []
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = default_weight
            else:
                u, v, w = e
            if u > v:
                u, v = v, u
            norm.append((int(u), int(v), float(w)))
        return cls(n=n, edges=tuple(norm))

    @property
    def m_total(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def adjacency(self) -> SymMatrix:
        W = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            W[u, v] = w
            W[v, u] = w
        return SymMatrix(W)

    def weighted_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n)
        for u, v, w in self.edges:
            deg[u] += w
            deg[v] += w
        return deg


@dataclass(frozen=True)
class CutResult:
    """A concrete cut: side in {-1,+1}^n, its weight, and how it was found."""

    side: np.ndarray
    value: float
    method: str


def cut_value(G: Graph, side) -> float:
    """Total weight of edges crossing the cut; equals m/2 - side'W side/4."""
    side = np.asarray(side)
    if side.shape != (G.n,):
        raise ValueError(f"side has shape {side.shape}, expected ({G.n},)")
    if not np.all(np.abs(side) == 1):
        raise ValueError("side entries must be +1 or -1")
    return float(sum(w for u, v, w in G.edges if side[u] != side[v]))


def gw_instance(G: Graph) -> SdpInstance:
    """The unit-diagonal SDP behind the GW relaxation, in raw form.

    Objective <-W, X>, rows X_ii = 1 (tags "diag:i"), entrywise box
    |X_ij| <= 1 (PSD-implied given the unit diagonal).
    """
    n = G.n
    W = G.adjacency()
    constraints = []
    tags = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        constraints.append((SymMatrix(E), 1.0, "="))
        tags.append(f"diag:{i}")
    bounds = {(i, j): (-1.0, 1.0) for i in range(n) for j in range(i, n)}
    return SdpInstance(C=SymMatrix(-W.entries), constraints=constraints,
                       sense="max", constraint_tags=tags, entry_bounds=bounds)


def gw_value(G: Graph, raw_objective: float) -> float:
    """Convert a raw <-W,X> objective into a cut-weight bound."""
    return G.m_total / 2.0 + raw_objective / 4.0


def build_SP(G: Graph, S: CutSet) -> RelaxationModel:
    return build_LS(gw_instance(G), S)


def sp_value(G: Graph, S: CutSet, opts: SolverOptions | None = None):
    """Solve SP_S; returns (cut-weight bound, SolveReport)."""
    report = solve(build_SP(G, S), opts)
    if report.status != "optimal":
        raise RuntimeError(f"SP solve ended with status {report.status}")
    return gw_value(G, report.objective), report


def build_SD(G: Graph, S: CutSet) -> RelaxationModel:
    """Restriction dual over multipliers eta_k >= 0 on the cut vectors.

    Y = sum eta_k v_k v_k' must satisfy diag(Y) <= 1; the objective is
    <-W, Y>.  The model has no X entries, only the eta variables.
    """
    if len(S) == 0:
        raise ValueError("SD requires a non-empty cut set")
    n = G.n
    W = G.adjacency().entries
    V = np.column_stack(list(S))
    model = RelaxationModel(0, "max")
    for k in range(V.shape[1]):
        model.add_aux(f"eta:{k}", 0.0, np.inf)
    model.objective = -np.einsum("ik,ij,jk->k", V, W, V)
    Vsq = V ** 2
    for i in range(n):
        model.add_row(f"diag:{i}", np.arange(V.shape[1]), Vsq[i], "<=", 1.0)
    return model


def sd_solution(S: CutSet, report: SolveReport) -> SymMatrix:
    """Assemble Y = sum eta_k v_k v_k' from a solved SD model."""
    V = np.column_stack(list(S))
    eta = np.array([report.aux[f"eta:{k}"] for k in range(V.shape[1])])
    return SymMatrix((V * eta) @ V.T)


def sd_value(G: Graph, S: CutSet, opts: SolverOptions | None = None):
    """Solve SD_S; returns (cut-weight bound, SolveReport, Y)."""
    report = solve(build_SD(G, S), opts)
    if report.status != "optimal":
        raise RuntimeError(f"SD solve ended with status {report.status}")
    return gw_value(G, report.objective), report, sd_solution(S, report)


def eigenvalue_bound(G: Graph) -> float:
    """Spectral max-cut bound m/2 - (n/4) lambda_min(W)."""
    decomp = eig_decompose(G.adjacency())
    return G.m_total / 2.0 - (G.n / 4.0) * decomp.lam_min


def rounding_matrix(G: Graph, sp_report: SolveReport,
                    opts: SolverOptions | None = None) -> SymMatrix:
    """GW-feasible matrix built from an SP optimum.

    Takes the eigenvectors of the SP primal with positive eigenvalues,
    augments them with the standard basis, optimizes the SD multipliers over
    that set, then lifts the diagonal to exactly 1 (free: diag(W) = 0, so
    e_i e_i' terms do not change the objective).  The result is PSD with
    unit diagonal.
    """
    X = sp_report.primal_X
    decomp = eig_decompose(X)
    S = CutSet()
    for k in range(X.n):
        if decomp.values[k] > 1e-10:
            S.add(decomp.vectors[:, k], "oracle")
    S.extend(CutSet.standard_basis(X.n))
    report = solve(build_SD(G, S), opts)
    if report.status != "optimal":
        raise RuntimeError(f"rounding-matrix SD solve ended with status {report.status}")
    Y = sd_solution(S, report).entries.copy()
    d = np.diag(Y)
    if np.any(d > 1.0 + 1e-6):
        raise RuntimeError(f"SD diagonal exceeds 1 by {d.max() - 1.0:.2e}")
    np.fill_diagonal(Y, 1.0)
    return SymMatrix(Y)


def gw_round(G: Graph, Y: SymMatrix, trials: int = 100,
             seed: int | None = None) -> CutResult:
    """Best-of-`trials` hyperplane rounding of a PSD unit-diagonal Y.

    Factors Y = B'B (negative eigenvalues clipped at 0), draws standard
    normal vectors r, and signs side_i = sign(b_i . r) with sign(0) -> +1.
    Deterministic for a fixed seed.
    """
    decomp = eig_decompose(Y)
    if decomp.lam_min < -1e-7:
        raise ValueError(f"Y is not PSD: lambda_min = {decomp.lam_min:.2e}")
    if np.max(np.abs(np.diag(Y.entries) - 1.0)) > 1e-7:
        raise ValueError("Y must have unit diagonal")
    lam = np.clip(decomp.values, 0.0, None)
    B = np.sqrt(lam)[:, None] * decomp.vectors.T
    rng = np.random.default_rng(seed)
    best_side, best_value = None, -1.0
    for _ in range(max(1, trials)):
        r = rng.standard_normal(G.n)
        side = np.where(B.T @ r >= 0.0, 1, -1)
        value = cut_value(G, side)
        if value > best_value:
            best_side, best_value = side, value
    return CutResult(side=best_side, value=best_value, method="gw-round")


def greedy_cut(G: Graph) -> CutResult:
    """Place vertices by descending weighted degree on the side that gains
    the most incremental cut weight; ties go to +1."""
    W = G.adjacency().entries
    order = np.argsort(-G.weighted_degrees(), kind="stable")
    side = np.zeros(G.n, dtype=int)
    for v in order:
        placed = side != 0
        to_plus = float(W[v, placed][side[placed] == 1].sum())
        to_minus = float(W[v, placed][side[placed] == -1].sum())
        # joining +1 cuts the edges toward -1 and vice versa
        side[v] = 1 if to_minus >= to_plus else -1
    return CutResult(side=side, value=cut_value(G, side), method="greedy")


def sweep_cut(G: Graph) -> CutResult:
    """Threshold the bottom eigenvector of W at 0, then 1-opt to a local
    optimum (each flip strictly increases the cut weight)."""
    W = G.adjacency().entries
    decomp = eig_decompose(G.adjacency())
    side = np.where(decomp.vectors[:, -1] >= 0.0, 1, -1)
    # flipping v changes the cut by side_v * (W side)_v
    for _ in range(10 * G.n * G.n + 10):
        gains = side * (W @ side)
        v = int(np.argmax(gains))
        if gains[v] <= 1e-9:
            break
        side[v] = -side[v]
    return CutResult(side=side, value=cut_value(G, side), method="sweep")


def brute_force_max_cut(G: Graph) -> CutResult:
    """Exact maximum cut by enumerating 2^(n-1) sign patterns (n <= 22)."""
    if G.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}")
    if G.n == 1:
        return CutResult(side=np.array([1]), value=0.0, method="brute-force")
    masks = np.arange(1 << (G.n - 1), dtype=np.int64)  # vertex n-1 fixed to +1
    values = np.zeros(len(masks))
    for u, v, w in G.edges:
        bu = (masks >> u) & 1 if u < G.n - 1 else np.zeros_like(masks)
        bv = (masks >> v) & 1 if v < G.n - 1 else np.zeros_like(masks)
        values += w * (bu ^ bv)
    best = int(np.argmax(values))
    side = np.array([1 - 2 * ((best >> v) & 1) for v in range(G.n - 1)] + [1])
    return CutResult(side=side, value=float(values[best]), method="brute-force")


def planted_instance(n: int, d: int, l: int, seed: int | None = None) -> Graph:
    """Random d-regular graph on n - 2*sqrt(n) vertices, disjoint from
    K_{sqrt(n),sqrt(n)}, plus l random cross edges between the components.

    sqrt(n) must be an integer; the regular part needs n - 2*sqrt(n) >= d+1
    with an even degree sum.  Seed-deterministic.
    """
    from .iogen import random_regular_edges

    r = math.isqrt(n)
    if r * r != n:
        raise GeneratorError(f"planted instance needs a square n, got {n}")
    n_reg = n - 2 * r
    if n_reg < d + 1:
        raise GeneratorError(f"regular part has {n_reg} vertices, needs >= {d + 1}")
    if (n_reg * d) % 2 != 0:
        raise GeneratorError(f"n_reg*d = {n_reg * d} must be even")
    if l > n_reg * 2 * r:
        raise GeneratorError(f"l={l} exceeds the {n_reg * 2 * r} available cross pairs")
    rng = np.random.default_rng(seed)
    edges = [(u, v, 1.0) for u, v in random_regular_edges(n_reg, d, rng)]
    for a in range(n_reg, n_reg + r):
        for b in range(n_reg + r, n):
            edges.append((a, b, 1.0))
    if l > 0:
        cross = rng.choice(n_reg * 2 * r, size=l, replace=False)
        for c in cross:
            u = int(c) % n_reg
            v = n_reg + int(c) // n_reg
            edges.append((u, v, 1.0))
    return Graph(n=n, edges=tuple(edges))
