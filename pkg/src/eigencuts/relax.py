"""Cut relaxations of SDP instances and the separation-oracle loop.

An SdpInstance describes max/min <C,X> over symmetric X subject to matrix
constraints <A_i,X> {=,<=,>=} b_i, plus optional side rows.  PSD-ness of X is
replaced by the finite family v'Xv >= 0 for v in a CutSet; build_LS emits the
resulting LP/SOCP over the n(n+1)/2 distinct entries of X.  cutting_plane
grows the cut set from the most negative eigenvectors of the incumbent
optimum until it is PSD at tolerance; reference_sdp produces the target value
the relaxations are measured against.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import SymMatrix, eig_decompose, min_eig_cut

# Shared tolerances, inherited by every module.
FEAS_TOL = 1e-7
PSD_TOL = 1e-6
OBJ_REL_TOL = 1e-7
CUT_DEDUP_TOL = 1e-9


class CutSet:
    """Ordered collection of unit vectors v, each standing for v'Xv >= 0.

    Vectors are normalized at insertion; duplicates within CUT_DEDUP_TOL (up
    to sign) are rejected so repeated oracle cuts cannot stall the loop.
    Provenance per vector is one of "eigen", "standard-basis", "oracle",
    "user" (free-form suffixes allowed, e.g. "eigen:W").
    """

    def __init__(self) -> None:
        self.vectors: list[np.ndarray] = []
        self.provenance: list[str] = []

    @classmethod
    def from_vectors(cls, vectors, provenance: str = "user") -> "CutSet":
        S = cls()
        for v in vectors:
            S.add(v, provenance)
        return S

    @classmethod
    def eigenbasis(cls, A: SymMatrix, provenance: str = "eigen",
                   order: str = "descending") -> "CutSet":
        """Full orthonormal eigenbasis of A as a cut set.

        order="descending" lists eigenvectors from the largest eigenvalue
        down; "ascending" from the smallest up.
        """
        decomp = eig_decompose(A)
        cols = range(A.n) if order == "descending" else range(A.n - 1, -1, -1)
        S = cls()
        for c in cols:
            S.add(decomp.vectors[:, c], provenance)
        return S

    @classmethod
    def standard_basis(cls, n: int) -> "CutSet":
        S = cls()
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            S.add(e, "standard-basis")
        return S

    def add(self, v, provenance: str) -> bool:
        """Insert v (normalized); returns False if a duplicate up to sign."""
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("cannot add a zero vector as a cut")
        v = v / norm
        for w in self.vectors:
            if min(np.linalg.norm(v - w), np.linalg.norm(v + w)) <= CUT_DEDUP_TOL:
                return False
        self.vectors.append(v)
        self.provenance.append(provenance)
        return True

    def extend(self, other: "CutSet") -> int:
        added = 0
        for v, p in zip(other.vectors, other.provenance):
            added += self.add(v, p)
        return added

    def copy(self) -> "CutSet":
        S = CutSet()
        S.vectors = [v.copy() for v in self.vectors]
        S.provenance = list(self.provenance)
        return S

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __repr__(self) -> str:
        return f"CutSet({len(self)} vectors)"


@dataclass(frozen=True)
class ExtraRow:
    """Linear side row over the distinct entries of X.

    terms are (i, j, coeff) with coeff multiplying the single variable X_ij
    (i <= j); no implicit doubling.  psd_implied marks rows valid for every
    PSD-feasible point (box, diagonal sign, pairwise bounds): they tighten
    the cut relaxation but cannot change the PSD reference optimum, so the
    reference solve skips them.
    """

    tag: str
    terms: tuple[tuple[int, int, float], ...]
    sense: str
    rhs: float
    psd_implied: bool = False


@dataclass(frozen=True)
class SocpRow:
    """Second-order-cone row ||(affine vector)||_2 <= affine scalar.

    Each component of the vector part, and the scalar part, is a pair
    (terms, const) with terms as in ExtraRow.
    """

    tag: str
    vector_parts: tuple[tuple[tuple[tuple[int, int, float], ...], float], ...]
    scalar_part: tuple[tuple[tuple[int, int, float], ...], float]
    psd_implied: bool = True


@dataclass
class SdpInstance:
    """An SDP in objective/constraint form, before any relaxation.

    constraints are (A_i, b_i, sense) with sense in {"=", "<=", ">="}.
    entry_bounds maps (i, j) with i <= j to (lo, hi) bounds on X_ij; these
    must be PSD-valid side bounds (they are installed as variable bounds in
    the relaxation and skipped by the PSD reference).  abs_budget k, if set,
    adds the constraint sum_ij |X_ij| <= k (linearized through auxiliary
    variables in the relaxation, native in the reference).
    """

    C: SymMatrix
    constraints: list[tuple[SymMatrix, float, str]]
    sense: str = "max"
    constraint_tags: list[str] | None = None
    extra_linear: list[ExtraRow] = field(default_factory=list)
    extra_socp: list[SocpRow] = field(default_factory=list)
    entry_bounds: dict[tuple[int, int], tuple[float, float]] = field(default_factory=dict)
    abs_budget: float | None = None

    @property
    def n(self) -> int:
        return self.C.n

    def tags(self) -> list[str]:
        if self.constraint_tags is not None:
            if len(self.constraint_tags) != len(self.constraints):
                raise ValueError("constraint_tags length mismatch")
            return list(self.constraint_tags)
        return [f"con:{i}" for i in range(len(self.constraints))]

    def validate(self) -> None:
        n = self.n
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be max or min, got {self.sense!r}")
        for A, _, sense in self.constraints:
            if A.n != n:
                raise ValueError(f"constraint dimension {A.n} != {n}")
            if sense not in ("=", "<=", ">="):
                raise ValueError(f"bad constraint sense {sense!r}")


@dataclass
class Row:
    """One linear row of a RelaxationModel, sparse over the variable vector."""

    tag: str
    idx: np.ndarray
    coef: np.ndarray
    sense: str
    rhs: float
    psd_implied: bool = False


@dataclass
class ConeRow:
    """||vec||_2 <= scal with affine parts (idx, coef, const) over variables."""

    tag: str
    vec: list[tuple[np.ndarray, np.ndarray, float]]
    scal: tuple[np.ndarray, np.ndarray, float]


class RelaxationModel:
    """Solver-agnostic LP/SOCP over the distinct entries of X plus aux vars.

    Variables are the n(n+1)/2 upper-triangle entries of X in row-major
    order, followed by named auxiliary variables.  Quadratic forms expand
    with factor 2 on off-diagonal entries.  Bounds coming from
    entry_bounds carry the tag "box:(i,j)"; their multipliers are reported
    under that tag alongside row duals.
    """

    def __init__(self, n: int, sense: str) -> None:
        self.n = n
        self.sense = sense
        self.iu, self.ju = np.triu_indices(n)
        self.n_entries = len(self.iu)
        # weight of each entry variable inside a full-matrix inner product
        self.entry_weight = np.where(self.iu == self.ju, 1.0, 2.0)
        self._pos = np.full((n, n), -1, dtype=int)
        self._pos[self.iu, self.ju] = np.arange(self.n_entries)
        self._pos[self.ju, self.iu] = self._pos[self.iu, self.ju]
        self.aux_names: list[str] = []
        self.objective = np.zeros(self.n_entries)
        self.rows: list[Row] = []
        self.cones: list[ConeRow] = []
        self.lb = np.full(self.n_entries, -np.inf)
        self.ub = np.full(self.n_entries, np.inf)
        self.bound_tags: dict[int, str] = {}

    @property
    def n_vars(self) -> int:
        return self.n_entries + len(self.aux_names)

    def entry_index(self, i: int, j: int) -> int:
        p = int(self._pos[i, j])
        if p < 0:
            raise IndexError(f"entry ({i},{j}) out of range")
        return p

    def add_aux(self, name: str, lo: float = -np.inf, hi: float = np.inf) -> int:
        self.aux_names.append(name)
        self.objective = np.append(self.objective, 0.0)
        self.lb = np.append(self.lb, lo)
        self.ub = np.append(self.ub, hi)
        return self.n_entries + len(self.aux_names) - 1

    def quad_form_coeffs(self, v: np.ndarray) -> np.ndarray:
        """Coefficients of v'Xv over the entry block (factor 2 off-diagonal)."""
        Q = np.outer(v, v)
        return self.entry_weight * Q[self.iu, self.ju]

    def matrix_inner_coeffs(self, A: SymMatrix) -> np.ndarray:
        """Coefficients of <A,X> over the entry block."""
        return self.entry_weight * A.entries[self.iu, self.ju]

    def add_row(self, tag: str, idx, coef, sense: str, rhs: float,
                psd_implied: bool = False) -> None:
        idx = np.asarray(idx, dtype=int)
        coef = np.asarray(coef, dtype=float)
        keep = coef != 0.0
        self.rows.append(Row(tag, idx[keep], coef[keep], sense, float(rhs), psd_implied))

    def row_tags(self) -> list[str]:
        return [r.tag for r in self.rows] + sorted(self.bound_tags.values())

    def X_from_vector(self, x: np.ndarray) -> SymMatrix:
        X = np.zeros((self.n, self.n))
        X[self.iu, self.ju] = x[: self.n_entries]
        X = X + X.T
        X[np.arange(self.n), np.arange(self.n)] /= 2.0
        return SymMatrix(X)

    def aux_values(self, x: np.ndarray) -> dict[str, float]:
        return {name: float(x[self.n_entries + k]) for k, name in enumerate(self.aux_names)}


@dataclass
class SolveReport:
    """Uniform result of a solve: status, objective, primal, duals, timing.

    status is one of "optimal", "infeasible", "unbounded", "iteration-limit",
    "numerical-failure".  duals are keyed by row tag and, for active entry
    bounds, by the bound tag; their sign convention is d(objective)/d(rhs)
    for the problem as posed (so for a max-sense instance with equality rows,
    sum_i duals[i]*A_i - C is the PSD dual slack at the SDP optimum).
    """

    status: str
    objective: float | None
    primal_X: SymMatrix | None
    aux: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    wall_time: float = 0.0
    backend_status: str = ""


def _terms_to_coeffs(model: RelaxationModel, terms) -> tuple[np.ndarray, np.ndarray]:
    idx = np.array([model.entry_index(i, j) for i, j, _ in terms], dtype=int)
    coef = np.array([c for _, _, c in terms], dtype=float)
    return idx, coef


def build_LS(inst: SdpInstance, S: CutSet) -> RelaxationModel:
    """Assemble the cut relaxation L_S of inst as an explicit model.

    One row per matrix constraint, one "cut:k" row per cut vector, all extra
    linear and SOCP rows; entry bounds become variable bounds; abs_budget is
    linearized through T variables with T >= X, T >= -X, sum T <= k.
    """
    inst.validate()
    n = inst.n
    model = RelaxationModel(n, inst.sense)
    model.objective[: model.n_entries] = model.matrix_inner_coeffs(inst.C)

    all_idx = np.arange(model.n_entries)
    for tag, (A, b, sense) in zip(inst.tags(), inst.constraints):
        coef = model.matrix_inner_coeffs(A)
        op = {"=": "==", "<=": "<=", ">=": ">="}[sense]
        model.add_row(tag, all_idx, coef, op, b)

    for (i, j), (lo, hi) in inst.entry_bounds.items():
        if i > j:
            i, j = j, i
        p = model.entry_index(i, j)
        model.lb[p] = max(model.lb[p], lo)
        model.ub[p] = min(model.ub[p], hi)
        model.bound_tags[p] = f"box:({i},{j})"

    for row in inst.extra_linear:
        idx, coef = _terms_to_coeffs(model, row.terms)
        op = {"=": "==", "<=": "<=", ">=": ">="}[row.sense]
        model.add_row(row.tag, idx, coef, op, row.rhs, row.psd_implied)

    if inst.abs_budget is not None:
        t_idx = np.empty(model.n_entries, dtype=int)
        for p in range(model.n_entries):
            i, j = int(model.iu[p]), int(model.ju[p])
            t_idx[p] = model.add_aux(f"T:({i},{j})", 0.0, np.inf)
            model.add_row(f"abs:+({i},{j})", [p, t_idx[p]], [1.0, -1.0], "<=", 0.0)
            model.add_row(f"abs:-({i},{j})", [p, t_idx[p]], [-1.0, -1.0], "<=", 0.0)
        model.add_row("abs-budget", t_idx, model.entry_weight, "<=", float(inst.abs_budget))

    for k, v in enumerate(S):
        if len(v) != n:
            raise ValueError(f"cut vector {k} has length {len(v)}, expected {n}")
        model.add_row(f"cut:{k}", all_idx, model.quad_form_coeffs(v), ">=", 0.0)

    for cone in inst.extra_socp:
        vec = []
        for terms, const in cone.vector_parts:
            idx, coef = _terms_to_coeffs(model, terms)
            vec.append((idx, coef, float(const)))
        s_terms, s_const = cone.scalar_part
        s_idx, s_coef = _terms_to_coeffs(model, s_terms)
        model.cones.append(ConeRow(cone.tag, vec, (s_idx, s_coef, float(s_const))))

    return model


def cutting_plane(inst: SdpInstance, S0: CutSet, budget: int, batch: int = 1,
                  tol: float = PSD_TOL, opts=None):
    """Kelley loop: solve L_S, cut with the most negative eigenvectors, repeat.

    Adds up to `batch` eigenvectors with eigenvalue < -tol per round, never
    exceeding `budget` added cuts in total.  Returns (report, S, trace) with
    trace entries (cuts_in_model, objective) per solve.  Terminates with
    status "optimal" once the incumbent is PSD at tol, "iteration-limit"
    when the budget runs out first, and "numerical-failure" if every
    candidate cut is a duplicate while the incumbent is still not PSD.
    """
    from .solvers import solve

    if budget < 0:
        raise ValueError("budget must be >= 0")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    S = S0.copy()
    trace: list[tuple[int, float]] = []
    added = 0
    t0 = time.perf_counter()
    n_solves = 0
    while True:
        model = build_LS(inst, S)
        report = solve(model, opts)
        n_solves += 1
        if report.status != "optimal":
            break
        trace.append((len(S), report.objective))
        cut = min_eig_cut(report.primal_X, tol)
        if cut is None:
            break
        if added >= budget:
            report.status = "iteration-limit"
            break
        decomp = eig_decompose(report.primal_X)
        limit = min(batch, budget - added)
        fresh = 0
        for r in range(inst.n - 1, -1, -1):  # ascending from the most negative
            if decomp.values[r] >= -tol or fresh >= limit:
                break
            if S.add(decomp.vectors[:, r], "oracle"):
                fresh += 1
        if fresh == 0:
            report.status = "numerical-failure"
            break
        added += fresh
    report.iterations = n_solves
    report.wall_time = time.perf_counter() - t0
    return report, S, trace


def reference_sdp(inst: SdpInstance, tol: float = PSD_TOL, budget: int | None = None,
                  method: str = "direct", opts=None) -> SolveReport:
    """Reference SDP value of inst, the target all relaxations are gauged by.

    method="direct" (default) hands the instance to a conic backend with an
    explicit PSD cone; exact and fast at desk scale, with reliable duals.
    method="cutting-plane" instead runs the oracle loop seeded with the
    eigenbasis of C plus the standard basis until the optimum is PSD at tol
    (budget defaults to 50 n added cuts); it reaches the same value on small
    instances but is far slower, and is kept for cross-validation.
    """
    from .solvers import solve_psd

    if method == "direct":
        return solve_psd(inst, opts)
    if method == "cutting-plane":
        S0 = CutSet.eigenbasis(inst.C, provenance="eigen")
        S0.extend(CutSet.standard_basis(inst.n))
        if budget is None:
            budget = 50 * inst.n
        report, _, _ = cutting_plane(inst, S0, budget=budget, batch=1, tol=tol, opts=opts)
        return report
    raise ValueError(f"unknown reference method {method!r}")


def optimal_cutset_check(inst: SdpInstance, ref: SolveReport, opts=None) -> float:
    """Gap of the relaxation seeded with the eigenbasis of the dual slack.

    At a strictly feasible optimum the dual slack C - sum y_i A_i (sign
    flipped for max-sense) is PSD and its eigenbasis S* makes L_{S*} exact;
    returns |objective(L_{S*}) - ref.objective|, which should vanish within
    the dual's numerical quality.
    """
    from .solvers import solve

    slack = inst.C.entries.copy()
    for tag, (A, _, _) in zip(inst.tags(), inst.constraints):
        y = ref.duals.get(tag, 0.0)
        slack = slack - y * A.entries
    if inst.sense == "max":
        slack = -slack
    S = CutSet.eigenbasis(SymMatrix(slack), provenance="eigen")
    model = build_LS(inst, S)
    report = solve(model, opts)
    if report.status != "optimal":
        raise RuntimeError(f"cutset check solve ended with status {report.status}")
    return abs(report.objective - ref.objective)


def trace_is_monotone(trace, sense: str = "max", tol: float = OBJ_REL_TOL) -> bool:
    """True when objectives move only in the tightening direction.

    For max-sense relaxations each added cut can only lower the optimum, so
    the trace must be non-increasing within tol (scaled by objective size).
    """
    objs = [obj for _, obj in trace]
    for a, b in zip(objs, objs[1:]):
        slack = tol * max(1.0, abs(a))
        if sense == "max":
            if b > a + slack:
                return False
        else:
            if b < a - slack:
                return False
    return True
