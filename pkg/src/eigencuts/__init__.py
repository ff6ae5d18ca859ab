"""Eigenbasis-seeded linear and SOCP relaxations of semidefinite programs.

Builds the cut relaxation L_S of an SDP (PSD-ness replaced by finitely many
constraints v'Xv >= 0), solves it with off-the-shelf LP/conic backends, and
runs the separation-oracle cutting-plane loop.  Frontends: max cut (SP/SD
pair plus Goemans-Williamson rounding), sparse PCA with deflation, and the
Lovasz theta number.
"""

__version__ = "0.1.0"

from .linalg import SymMatrix, EigenDecomposition, eig_decompose, min_eig_cut
from .relax import (
    SdpInstance,
    CutSet,
    RelaxationModel,
    SolveReport,
    build_LS,
    cutting_plane,
    reference_sdp,
    optimal_cutset_check,
)
from .solvers import SolverOptions, solve
from .maxcut import Graph, build_SP, build_SD, eigenvalue_bound, gw_round
from .spca import CovMatrix, SparseComponent, sparse_pca, explained_variance
from .theta import ThetaInstance, theta_reference, theta_experiment
from .iogen import InstanceSpec
from .report import ExperimentReport

__all__ = [
    "SymMatrix",
    "EigenDecomposition",
    "eig_decompose",
    "min_eig_cut",
    "SdpInstance",
    "CutSet",
    "RelaxationModel",
    "SolveReport",
    "SolverOptions",
    "build_LS",
    "solve",
    "cutting_plane",
    "reference_sdp",
    "optimal_cutset_check",
    "Graph",
    "build_SP",
    "build_SD",
    "eigenvalue_bound",
    "gw_round",
    "CovMatrix",
    "SparseComponent",
    "sparse_pca",
    "explained_variance",
    "ThetaInstance",
    "theta_reference",
    "theta_experiment",
    "InstanceSpec",
    "ExperimentReport",
]
