"""Discrete Bayesian network core: BIC hill-climbing structure search,
smoothed CPT estimation, and exact inference tolerant of missing evidence."""

from .cpt import BayesNet, Cpt, fit_cpts
from .graph import Dag, EncodedTable
from .inference import Posterior, enumerate_joint, infer
from .kernels import BACKEND
from .scoring import bic_score
from .search import SearchResult, StructureSearchConfig, learn_structure, learn_structure_detailed

__all__ = [
    "BACKEND",
    "BayesNet",
    "Cpt",
    "Dag",
    "EncodedTable",
    "Posterior",
    "SearchResult",
    "StructureSearchConfig",
    "bic_score",
    "enumerate_joint",
    "fit_cpts",
    "infer",
    "learn_structure",
    "learn_structure_detailed",
]
