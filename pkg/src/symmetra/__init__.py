"""Symmetric quantum measurement assemblages: construction, symmetry checks and
closed-form incompatibility robustness."""

from .bundle import Assemblage, OutcomeBundle, SymmetryData, is_rigid, is_uniform
from .construct import construct_assemblages, platonic_assemblage, platonic_symmetry
from .errors import SymmetraError
from .incompat import RobustnessReport, dual_certificate, robustness
from .io import export_assemblage, import_assemblage, load_group
from .mub import mub_assemblage, mub_symmetry_group
from .oracle import compatibility_oracle
from .steering import flag_beats_dichotomic

__version__ = "0.1.0"

__all__ = [
    "Assemblage", "OutcomeBundle", "SymmetryData", "SymmetraError", "RobustnessReport",
    "compatibility_oracle", "construct_assemblages", "dual_certificate", "export_assemblage",
    "flag_beats_dichotomic", "import_assemblage", "is_rigid", "is_uniform", "load_group",
    "mub_assemblage", "mub_symmetry_group", "platonic_assemblage", "platonic_symmetry", "robustness",
]
