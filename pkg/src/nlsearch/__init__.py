"""Simulation and verification of nonlinear quantum search algorithms."""

from .errors import (
    AssumptionError,
    DimensionMismatch,
    DomainError,
    NormError,
    SingularCoefficient,
    StepError,
)
from .linear_stage import TruthTable, run_linear_stage
from .nonlinear import (
    AlphaTanh,
    GatedTanh,
    InverseTanh,
    PolchinskiTanh,
    QuadraticGap,
    closed_form_evolve,
    coefficient,
    integrate,
    mobility_frequency,
)
from .qstate import DensityMatrix2, FlagOperator, StateVector

__version__ = "0.1.0"
