"""Lovasz-theta frontend: shifted-objective relaxation and the eigencut experiment.

The theta SDP maximizes <J-W, X> over trace-one PSD matrices vanishing on
edges, where J-W is the all-ones matrix zeroed on edge positions (weights
are ignored; only the pattern matters).  The cut relaxation drops PSD in
favor of the cut rows, a diagonal/box safety net, and optionally one
second-order-cone row per 2x2 principal minor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError
from .linalg import SymMatrix, eig_decompose
from .maxcut import Graph
from .relax import (PSD_TOL, CutSet, RelaxationModel, SdpInstance, SocpRow,
                    SolveReport, build_LS, reference_sdp)
from .solvers import SolverOptions, solve


@dataclass(frozen=True)
class ThetaInstance:
    """Graph together with its shifted objective J - W."""

    graph: Graph
    shifted_objective: SymMatrix


def theta_instance(G: Graph) -> ThetaInstance:
    """Shifted objective: ones everywhere except exact zeros on edges."""
    M = np.ones((G.n, G.n))
    for u, v, _ in G.edges:
        M[u, v] = M[v, u] = 0.0
    return ThetaInstance(graph=G, shifted_objective=SymMatrix(M))


def sdp_instance(ti: ThetaInstance, socp: bool = False) -> SdpInstance:
    """Trace-one instance with edge equalities and PSD-valid side bounds.

    The bare relaxation is unbounded, so 0 <= X_ii <= 1 and |X_ij| <= 1
    (both implied by PSD plus unit trace) are always installed as entry
    bounds.  socp adds the 2x2-minor cone rows, also PSD-implied.
    """
    n = ti.graph.n
    constraints = [(SymMatrix(np.eye(n)), 1.0, "=")]
    tags = ["trace"]
    for u, v, _ in ti.graph.edges:
        A = np.zeros((n, n))
        A[u, v] = A[v, u] = 0.5
        constraints.append((SymMatrix(A), 0.0, "="))
        tags.append(f"edge:{u},{v}")
    bounds = {}
    for i in range(n):
        bounds[(i, i)] = (0.0, 1.0)
        for j in range(i + 1, n):
            bounds[(i, j)] = (-1.0, 1.0)
    cones = []
    if socp:
        for i in range(n):
            for j in range(i + 1, n):
                cones.append(SocpRow(
                    tag=f"socp:{i},{j}",
                    vector_parts=((((i, j, 2.0),), 0.0),
                                  (((i, i, 1.0), (j, j, -1.0)), 0.0)),
                    scalar_part=(((i, i, 1.0), (j, j, 1.0)), 0.0)))
    return SdpInstance(C=ti.shifted_objective, constraints=constraints,
                       sense="max", constraint_tags=tags,
                       extra_socp=cones, entry_bounds=bounds)


def build_LTn(ti: ThetaInstance, S: CutSet, socp: bool = False) -> RelaxationModel:
    """Cut relaxation of the theta SDP; socp adds the 2x2-minor cones."""
    return build_LS(sdp_instance(ti, socp=socp), S)


def ltn_value(ti: ThetaInstance, S: CutSet, socp: bool = False,
              opts: SolverOptions | None = None):
    """Solve the relaxation; returns (objective, SolveReport)."""
    report = solve(build_LTn(ti, S, socp=socp), opts)
    if report.status != "optimal":
        raise NumericalFailureError(f"LTn solve ended with status {report.status}")
    return report.objective, report


def theta_reference(G: Graph, method: str = "direct", tol: float = PSD_TOL,
                    budget: int | None = None,
                    opts: SolverOptions | None = None):
    """Reference theta value of G; returns (value, SolveReport).

    The cutting-plane method may stop at "iteration-limit" with the value
    converged but the iterate not yet PSD at tol; that value is an upper
    bound on theta and is returned with the status visible in the report.
    """
    report = reference_sdp(sdp_instance(theta_instance(G)), tol=tol,
                           budget=budget, method=method, opts=opts)
    if report.status not in ("optimal", "iteration-limit"):
        raise NumericalFailureError(f"theta reference ended with status {report.status}")
    return report.objective, report


def theta_experiment(G: Graph, policy: str = "eigen", socp: bool = False,
                     budget: int = 500, batch: int = 20,
                     tol: float = PSD_TOL, reference: float | None = None,
                     opts: SolverOptions | None = None):
    """Quotient reference/value(L_S) as cuts accumulate in batches.

    Returns [(cuts, ratio), ...] starting at zero cuts; ratio climbs toward
    1 as the relaxation tightens.  The eigen policy spends the budget on
    the eigenbasis of the shifted objective, smallest eigenvalue first, and
    falls back to separation-oracle cuts once the basis is exhausted; the
    oracle policy uses separation cuts from the start.
    """
    if policy not in ("eigen", "oracle"):
        raise ValueError(f"unknown policy {policy!r}")
    if batch < 1 or budget < batch:
        raise ValueError(f"need budget >= batch >= 1, got {budget}, {batch}")
    ti = theta_instance(G)
    inst = sdp_instance(ti, socp=socp)
    if reference is None:
        reference, _ = theta_reference(G, opts=opts)

    queue = []
    if policy == "eigen":
        decomp = eig_decompose(ti.shifted_objective)
        queue = [decomp.vectors[:, c] for c in range(G.n - 1, -1, -1)]

    def solved(S):
        report = solve(build_LS(inst, S), opts)
        if report.status != "optimal":
            raise NumericalFailureError(
                f"experiment solve at {len(S)} cuts: {report.status}")
        return report

    S = CutSet()
    report = solved(S)
    trace = [(0, reference / report.objective)]
    while len(S) < budget:
        want = min(batch, budget - len(S))
        fresh = 0
        while queue and fresh < want:
            fresh += S.add(queue.pop(0), "eigen")
        if fresh < want:
            decomp = eig_decompose(report.primal_X)
            for r in range(G.n - 1, -1, -1):
                if decomp.values[r] >= -tol or fresh >= want:
                    break
                fresh += S.add(decomp.vectors[:, r], "oracle")
        if fresh == 0:
            break  # incumbent PSD at tol, or only duplicate cuts left
        report = solved(S)
        trace.append((len(S), reference / report.objective))
    return trace
