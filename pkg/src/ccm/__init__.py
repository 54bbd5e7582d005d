"""Coupled characteristic modes of wire-dipole arrays."""

from .cma import ModalSolution, ModeSet, isolated_modes, modal_excitation, modal_solve
from .coupled import (
    BlockPower,
    CoupledResult,
    CouplingMatrix,
    block_power,
    couple_n,
    couple_two,
    normalize_display,
    perturbation,
    select_coupled_pairs,
)
from .errors import *  # noqa: F401,F403
from .linalg import GepResult, SymMatrix, congruence, generalized_eig
from .mom import (
    ArrayLayout,
    BasisSet,
    BlockImpedance,
    WireDipole,
    assemble_array,
    assemble_mutual,
    assemble_self,
    mesh,
)
from .oracle import ModeMatch, full_coupled_modes, match_modes

__version__ = "0.1.0"
