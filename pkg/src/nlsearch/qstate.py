"""State vectors over an n-qubit input register plus one flag qubit.

Basis index convention: k = 2*idx + b, where b is the flag bit and idx is the
input-register value with i_1 as the most significant bit.  Flag amplitudes of
one input branch are therefore adjacent, and every flag operator acts as a
2x2 kernel on the rows of ``amps.reshape(-1, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, NormError

DTYPE = np.complex128
NORM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes of |i_1...i_n>|b>.

    ``n = 0`` is allowed and denotes a bare flag qubit (two amplitudes); it is
    used by the single-qubit mobility models.
    """

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"qubit count must be >= 0, got {self.n}")
        amps = np.ascontiguousarray(self.amps, dtype=DTYPE)
        if amps.shape != (2 ** (self.n + 1),):
            raise DimensionMismatch(
                f"expected {2 ** (self.n + 1)} amplitudes for n={self.n}, got shape {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def branches(self) -> np.ndarray:
        """Read-only view of shape (2**n, 2): row idx holds (flag 0, flag 1)."""
        return self.amps.reshape(-1, 2)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.n != self.n:
            raise DimensionMismatch(f"n={self.n} vs n={other.n}")
        return complex(np.vdot(self.amps, other.amps))

    def normalized(self) -> "StateVector":
        nrm = np.sqrt(self.norm2())
        if nrm == 0.0:
            raise NormError("cannot normalize the zero vector")
        return StateVector(self.n, self.amps / nrm)

    def amplitude(self, idx: int, b: int) -> complex:
        return complex(self.amps[2 * idx + b])

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        return other.n == self.n and bool(np.allclose(self.amps, other.amps, rtol=0, atol=atol))

    @classmethod
    def basis(cls, n: int, idx: int = 0, b: int = 0) -> "StateVector":
        amps = np.zeros(2 ** (n + 1), dtype=DTYPE)
        amps[2 * idx + b] = 1.0
        return cls(n, amps)

    @classmethod
    def product(cls, inputs: np.ndarray, flag: np.ndarray) -> "StateVector":
        """|inputs> (x) |flag> for an input vector of length 2**n."""
        inputs = np.asarray(inputs, dtype=DTYPE)
        n = int(np.log2(inputs.shape[0]))
        if 2**n != inputs.shape[0]:
            raise DimensionMismatch("input register length must be a power of two")
        return cls(n, np.kron(inputs, np.asarray(flag, dtype=DTYPE)))


@dataclass(frozen=True)
class FlagOperator:
    """2x2 operator on the flag qubit in the {|0>, |1>} basis."""

    m00: complex
    m01: complex
    m10: complex
    m11: complex

    @classmethod
    def from_matrix(cls, m) -> "FlagOperator":
        m = np.asarray(m, dtype=DTYPE)
        if m.shape != (2, 2):
            raise DimensionMismatch(f"flag operator must be 2x2, got {m.shape}")
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m00, self.m01], [self.m10, self.m11]], dtype=DTYPE)

    def is_hermitian(self, atol: float = 1e-14) -> bool:
        m = self.matrix
        return bool(np.allclose(m, m.conj().T, rtol=0, atol=atol))

    def __matmul__(self, other: "FlagOperator") -> "FlagOperator":
        return FlagOperator.from_matrix(self.matrix @ other.matrix)

    def __add__(self, other: "FlagOperator") -> "FlagOperator":
        return FlagOperator.from_matrix(self.matrix + other.matrix)

    def __sub__(self, other: "FlagOperator") -> "FlagOperator":
        return FlagOperator.from_matrix(self.matrix - other.matrix)

    def __mul__(self, scalar) -> "FlagOperator":
        return FlagOperator.from_matrix(scalar * self.matrix)

    __rmul__ = __mul__


def identity() -> FlagOperator:
    return FlagOperator(1, 0, 0, 1)


def sigma3() -> FlagOperator:
    return FlagOperator(1, 0, 0, -1)


def flag_zero_projector() -> FlagOperator:
    return FlagOperator(1, 0, 0, 0)


def build_A(eta: float) -> FlagOperator:
    """eta*sigma3 + sqrt(1 - eta**2)*sigma1, a Hermitian involution."""
    eta = float(eta)
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in the open interval (0, 1), got {eta}")
    off = np.sqrt(1.0 - eta * eta)
    return FlagOperator(eta, off, off, -eta)


@dataclass(frozen=True)
class DensityMatrix2:
    r00: complex
    r01: complex
    r10: complex
    r11: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r00, self.r01], [self.r10, self.r11]], dtype=DTYPE)

    def trace(self) -> float:
        return float((self.r00 + self.r11).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def expectation(self, op: FlagOperator) -> complex:
        return complex(np.trace(self.matrix @ op.matrix))


def apply_flag_operator(state: StateVector, op: FlagOperator) -> StateVector:
    """(1 (x) op)|state>, applied branch by branch."""
    out = state.branches() @ op.matrix.T
    return StateVector(state.n, out.reshape(-1))


def apply_ground_projector(state: StateVector) -> StateVector:
    """|0...0><0...0| (x) 1: keep only the idx = 0 branch."""
    out = np.zeros_like(state.amps)
    out[:2] = state.amps[:2]
    return StateVector(state.n, out)


def apply_flag_zero_projector(state: StateVector) -> StateVector:
    """1 (x) |0><0|: zero every flag-1 slot."""
    out = state.amps.copy()
    out[1::2] = 0.0
    return StateVector(state.n, out)


def check_normalized(state: StateVector, tol: float = NORM_TOL) -> float:
    norm2 = state.norm2()
    if abs(norm2 - 1.0) > tol:
        raise NormError(f"state norm^2 = {norm2!r} deviates from 1 by more than {tol}")
    return norm2


def partial_trace_inputs(state: StateVector) -> DensityMatrix2:
    """Reduced flag state Tr_{inputs} |state><state|."""
    check_normalized(state)
    rows = state.branches()
    rho = rows.T @ rows.conj()
    return DensityMatrix2(rho[0, 0], rho[0, 1], rho[1, 0], rho[1, 1])
