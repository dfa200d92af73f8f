"""Interacting vertex-reinforced random walks on complete graphs.

Submodules: ``model`` (interaction tensor, kernel, field, Lyapunov function),
``flow`` (ODE integration and stability), ``equilibria`` (root finding and
closed-form oracles), ``sim`` (Monte Carlo), ``config`` and ``cli``.
"""
from .equilibria import Equilibrium, a_of_beta, build_S, check_conditions, find_all, solve_from, w_of_beta
from .flow import Stability, classify, integrate
from .model import InteractionModel, make_model, repelling, three_walk_z, two_walk_k2
from .sim import init_walks, run, run_z_walks, step

__all__ = [
    "Equilibrium",
    "InteractionModel",
    "Stability",
    "a_of_beta",
    "build_S",
    "check_conditions",
    "classify",
    "find_all",
    "init_walks",
    "integrate",
    "make_model",
    "repelling",
    "run",
    "run_z_walks",
    "solve_from",
    "step",
    "three_walk_z",
    "two_walk_k2",
    "w_of_beta",
]
