"""Solver backends behind the uniform SolveReport contract.

Pure-LP models go to HiGHS through scipy.optimize.linprog; models with
second-order-cone rows and the PSD reference problem go through cvxpy
(CLARABEL for small dimensions, SCS above).  Every path reports duals with
the same sign convention: duals[tag] = d(objective as posed)/d(rhs).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ConeUnsupportedError
from .linalg import SymMatrix
from .relax import RelaxationModel, SdpInstance, SolveReport

# Dimension at which the PSD reference switches from CLARABEL to SCS;
# CLARABEL is more accurate but its runtime grows steeply with the cone size.
PSD_BACKEND_SWITCH_N = 60

# Row count past which HiGHS interior point beats dual simplex by a wide
# margin on these models (measured on the dense-cut LP family).
LP_IPM_SWITCH_ROWS = 5000

_LINPROG_STATUS = {
    0: "optimal",
    1: "iteration-limit",
    2: "infeasible",
    3: "unbounded",
    4: "numerical-failure",
}


@dataclass(frozen=True)
class SolverOptions:
    """Backend choice and tolerances.

    backend "auto" picks HiGHS for pure LPs and a conic backend otherwise;
    explicit values: "highs", "clarabel", "scs".  sdp_eps is the SCS
    convergence tolerance for PSD reference solves.
    """

    backend: str = "auto"
    lp_method: str = "auto"
    opt_tol: float = 1e-7
    feas_tol: float = 1e-7
    sdp_eps: float = 1e-6
    verbose: bool = False


DEFAULT_OPTIONS = SolverOptions()


def backend_supports_cones(backend: str) -> bool:
    return backend in ("clarabel", "scs")


def solve(model: RelaxationModel, opts: SolverOptions | None = None) -> SolveReport:
    """Solve a RelaxationModel, dispatching on cone rows and options."""
    opts = opts or DEFAULT_OPTIONS
    backend = opts.backend
    if backend == "auto":
        backend = "clarabel" if model.cones else "highs"
    if model.cones and not backend_supports_cones(backend):
        raise ConeUnsupportedError(
            f"model has {len(model.cones)} cone rows but backend {backend!r} is LP-only"
        )
    if backend == "highs":
        return _solve_highs(model, opts)
    if backend in ("clarabel", "scs"):
        return _solve_cvxpy(model, backend, opts)
    raise ValueError(f"unknown backend {opts.backend!r}")


def _solve_highs(model: RelaxationModel, opts: SolverOptions) -> SolveReport:
    t0 = time.perf_counter()
    minimize = model.sense == "min"
    c = model.objective if minimize else -model.objective

    eq_rows, ub_rows = [], []
    for r, row in enumerate(model.rows):
        if row.sense == "==":
            eq_rows.append((r, 1.0))
        elif row.sense == "<=":
            ub_rows.append((r, 1.0))
        else:  # >= becomes <= with flipped signs
            ub_rows.append((r, -1.0))

    def assemble(entries):
        if not entries:
            return None, None
        data, ri, ci, rhs = [], [], [], []
        for k, (r, flip) in enumerate(entries):
            row = model.rows[r]
            data.extend(flip * row.coef)
            ri.extend([k] * len(row.idx))
            ci.extend(row.idx)
            rhs.append(flip * row.rhs)
        A = sparse.csr_matrix((data, (ri, ci)), shape=(len(entries), model.n_vars))
        return A, np.array(rhs)

    A_eq, b_eq = assemble(eq_rows)
    A_ub, b_ub = assemble(ub_rows)
    bounds = np.column_stack([model.lb, model.ub])

    method = opts.lp_method
    if method == "auto":
        method = "highs-ipm" if len(model.rows) > LP_IPM_SWITCH_ROWS else "highs"
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method=method)
    status = _LINPROG_STATUS.get(res.status, "numerical-failure")
    wall = time.perf_counter() - t0
    if status != "optimal":
        return SolveReport(status=status, objective=None, primal_X=None,
                           iterations=int(getattr(res, "nit", 0) or 0),
                           wall_time=wall, backend_status=str(res.message))

    x = np.asarray(res.x)
    objective = float(res.fun) if minimize else -float(res.fun)
    # marginals are sensitivities of the posed min problem; convert to
    # d(objective as posed)/d(rhs), un-flipping the >= rows
    sens = 1.0 if minimize else -1.0
    duals: dict[str, float] = {}
    for k, (r, flip) in enumerate(eq_rows):
        duals[model.rows[r].tag] = sens * flip * float(res.eqlin.marginals[k])
    for k, (r, flip) in enumerate(ub_rows):
        duals[model.rows[r].tag] = sens * flip * float(res.ineqlin.marginals[k])
    for v, tag in model.bound_tags.items():
        m = float(res.lower.marginals[v]) + float(res.upper.marginals[v])
        duals[tag] = sens * m

    primal_X = model.X_from_vector(x) if model.n > 0 else None
    return SolveReport(status="optimal", objective=objective, primal_X=primal_X,
                       aux=model.aux_values(x), duals=duals,
                       iterations=int(getattr(res, "nit", 0) or 0),
                       wall_time=wall, backend_status=str(res.message))


def _affine(x, idx, coef, const):
    import cvxpy as cp

    if len(idx) == 0:
        return const
    return cp.sum(cp.multiply(coef, x[idx])) + const


def _cvxpy_status(prob, raw_status: str) -> str:
    if raw_status in ("optimal", "optimal_inaccurate"):
        return "optimal"
    if raw_status in ("infeasible", "infeasible_inaccurate"):
        return "infeasible"
    if raw_status in ("unbounded", "unbounded_inaccurate"):
        return "unbounded"
    return "numerical-failure"


def _solve_cvxpy(model: RelaxationModel, backend: str, opts: SolverOptions) -> SolveReport:
    import cvxpy as cp

    t0 = time.perf_counter()
    x = cp.Variable(model.n_vars)
    constraints = []

    eq_rows = [(r, 1.0) for r, row in enumerate(model.rows) if row.sense == "=="]
    ub_rows = [(r, 1.0) if model.rows[r].sense == "<=" else (r, -1.0)
               for r, row in enumerate(model.rows) if row.sense != "=="]

    def group(entries, op):
        if not entries:
            return None
        data, ri, ci, rhs = [], [], [], []
        for k, (r, flip) in enumerate(entries):
            row = model.rows[r]
            data.extend(flip * row.coef)
            ri.extend([k] * len(row.idx))
            ci.extend(row.idx)
            rhs.append(flip * row.rhs)
        A = sparse.csr_matrix((data, (ri, ci)), shape=(len(entries), model.n_vars))
        b = np.array(rhs)
        con = A @ x == b if op == "==" else A @ x <= b
        constraints.append(con)
        return con

    eq_con = group(eq_rows, "==")
    ub_con = group(ub_rows, "<=")

    lb_mask = np.isfinite(model.lb)
    ub_mask = np.isfinite(model.ub)
    lb_con = ub_bound_con = None
    if lb_mask.any():
        lb_con = x[lb_mask] >= model.lb[lb_mask]
        constraints.append(lb_con)
    if ub_mask.any():
        ub_bound_con = x[ub_mask] <= model.ub[ub_mask]
        constraints.append(ub_bound_con)

    for cone in model.cones:
        vec = cp.hstack([_affine(x, i, cf, c) for i, cf, c in cone.vec])
        s_idx, s_coef, s_const = cone.scal
        constraints.append(cp.SOC(_affine(x, s_idx, s_coef, s_const), vec))

    obj_expr = model.objective @ x
    objective = cp.Maximize(obj_expr) if model.sense == "max" else cp.Minimize(obj_expr)
    prob = cp.Problem(objective, constraints)
    try:
        if backend == "clarabel":
            prob.solve(solver=cp.CLARABEL, verbose=opts.verbose)
        else:
            prob.solve(solver=cp.SCS, eps=opts.sdp_eps, verbose=opts.verbose)
    except cp.error.SolverError as exc:
        return SolveReport(status="numerical-failure", objective=None, primal_X=None,
                           wall_time=time.perf_counter() - t0, backend_status=str(exc))

    status = _cvxpy_status(prob, prob.status)
    wall = time.perf_counter() - t0
    if status != "optimal":
        return SolveReport(status=status, objective=None, primal_X=None,
                           wall_time=wall, backend_status=prob.status)

    xv = np.asarray(x.value)
    # cvxpy duals satisfy d(max obj)/d(rhs) = +dual; min-sense flips the sign
    sens = 1.0 if model.sense == "max" else -1.0
    duals: dict[str, float] = {}
    if eq_con is not None and eq_con.dual_value is not None:
        for k, (r, flip) in enumerate(eq_rows):
            duals[model.rows[r].tag] = sens * flip * float(eq_con.dual_value[k])
    if ub_con is not None and ub_con.dual_value is not None:
        for k, (r, flip) in enumerate(ub_rows):
            duals[model.rows[r].tag] = sens * flip * float(ub_con.dual_value[k])

    primal_X = model.X_from_vector(xv) if model.n > 0 else None
    iters = getattr(prob.solver_stats, "num_iters", 0) or 0
    return SolveReport(status="optimal", objective=float(prob.value), primal_X=primal_X,
                       aux=model.aux_values(xv), duals=duals, iterations=int(iters),
                       wall_time=wall, backend_status=prob.status)


def _vec_of_terms(n: int, terms) -> np.ndarray:
    """Column-major vectorization of the symmetric matrix whose inner product
    with X reproduces sum coeff * X_ij over the given entry terms."""
    A = np.zeros((n, n))
    for i, j, c in terms:
        if i == j:
            A[i, i] += c
        else:
            A[i, j] += c / 2.0
            A[j, i] += c / 2.0
    return A.flatten(order="F")


def solve_psd(inst: SdpInstance, opts: SolverOptions | None = None) -> SolveReport:
    """Solve inst exactly, with X constrained to the PSD cone.

    Matrix constraints and non-PSD-implied extra rows are honored; rows
    flagged psd_implied (box, diagonal sign, pairwise, SOCP strengthening)
    are valid for every PSD point of the instance and are skipped.  An
    abs_budget is encoded natively as sum|X_ij| <= k.
    """
    import cvxpy as cp

    opts = opts or DEFAULT_OPTIONS
    inst.validate()
    n = inst.n
    backend = opts.backend
    if backend in ("auto", "highs"):
        backend = "clarabel" if n <= PSD_BACKEND_SWITCH_N else "scs"

    t0 = time.perf_counter()
    X = cp.Variable((n, n), symmetric=True)
    xvec = cp.vec(X, order="F")
    constraints = [X >> 0]

    # rows grouped by operator; >= rows are stored pre-flipped into <= form
    groups: dict[str, tuple[list[tuple[str, float]], list[np.ndarray], list[float]]] = {
        "==": ([], [], []), "<=": ([], [], [])}

    def push(tag: str, row_vec: np.ndarray, rhs: float, sense: str) -> None:
        op = "==" if sense == "=" else "<="
        flip = -1.0 if sense == ">=" else 1.0
        keys, rows, rhss = groups[op]
        keys.append((tag, flip))
        rows.append(flip * row_vec)
        rhss.append(flip * rhs)

    for tag, (A, b, sense) in zip(inst.tags(), inst.constraints):
        push(tag, A.entries.flatten(order="F"), b, sense)
    for row in inst.extra_linear:
        if row.psd_implied:
            continue
        push(row.tag, _vec_of_terms(n, row.terms), row.rhs, row.sense)

    con_by_op = {}
    for op, (keys, rows, rhss) in groups.items():
        if not keys:
            continue
        M = sparse.csr_matrix(np.vstack(rows))
        b = np.array(rhss)
        con = M @ xvec == b if op == "==" else M @ xvec <= b
        con_by_op[op] = con
        constraints.append(con)

    if inst.abs_budget is not None:
        constraints.append(cp.sum(cp.abs(X)) <= inst.abs_budget)

    obj_expr = cp.sum(cp.multiply(inst.C.entries, X))
    objective = cp.Maximize(obj_expr) if inst.sense == "max" else cp.Minimize(obj_expr)
    prob = cp.Problem(objective, constraints)
    try:
        if backend == "clarabel":
            prob.solve(solver=cp.CLARABEL, verbose=opts.verbose)
        else:
            prob.solve(solver=cp.SCS, eps=opts.sdp_eps, verbose=opts.verbose)
    except cp.error.SolverError as exc:
        return SolveReport(status="numerical-failure", objective=None, primal_X=None,
                           wall_time=time.perf_counter() - t0, backend_status=str(exc))

    status = _cvxpy_status(prob, prob.status)
    wall = time.perf_counter() - t0
    if status != "optimal":
        return SolveReport(status=status, objective=None, primal_X=None,
                           wall_time=wall, backend_status=prob.status)

    sens = 1.0 if inst.sense == "max" else -1.0
    duals: dict[str, float] = {}
    for op in ("==", "<="):
        con = con_by_op.get(op)
        if con is None or con.dual_value is None:
            continue
        dv = np.atleast_1d(con.dual_value)
        for k, (tag, flip) in enumerate(groups[op][0]):
            duals[tag] = sens * flip * float(dv[k])

    iters = getattr(prob.solver_stats, "num_iters", 0) or 0
    return SolveReport(status="optimal", objective=float(prob.value),
                       primal_X=SymMatrix(np.asarray(X.value)),
                       duals=duals, iterations=int(iters),
                       wall_time=wall, backend_status=prob.status)
