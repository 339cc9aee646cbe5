"""Steps 1-4 of the first search algorithm.

U acts on each input qubit, the oracle copies f into the flag qubit, and the
inverse transform undoes U.  The amplitude of |0...0> afterwards carries the
marked-item count s, which the nonlinear stage then amplifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, DomainError
from .qstate import StateVector, check_normalized

_SQRT_HALF = 1.0 / np.sqrt(2.0)
# columns are U|0> and U|1>
U_MATRIX = _SQRT_HALF * np.array([[1.0, -1.0], [1.0, 1.0]])
U_INV_MATRIX = U_MATRIX.T.copy()


@dataclass(frozen=True, eq=False)
class TruthTable:
    """f on {0,1}^n as a boolean array; bits[idx] = f(i_1...i_n), i_1 the MSB."""

    n: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).copy()
        if self.n < 1:
            raise DomainError(f"input register needs n >= 1, got {self.n}")
        if bits.shape != (2**self.n,):
            raise DimensionMismatch(f"truth table for n={self.n} needs {2**self.n} bits")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def s(self) -> int:
        return int(np.count_nonzero(self.bits))

    def marked(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    @classmethod
    def zeros(cls, n: int) -> "TruthTable":
        return cls(n, np.zeros(2**n, dtype=bool))

    @classmethod
    def ones(cls, n: int) -> "TruthTable":
        return cls(n, np.ones(2**n, dtype=bool))

    @classmethod
    def from_marked(cls, n: int, marked) -> "TruthTable":
        bits = np.zeros(2**n, dtype=bool)
        bits[list(marked)] = True
        return cls(n, bits)

    @classmethod
    def from_bitstrings(cls, n: int, *strings: str) -> "TruthTable":
        """Mark inputs given as 'i_1...i_n' strings, e.g. '110'."""
        for s in strings:
            if len(s) != n or set(s) - {"0", "1"}:
                raise DomainError(f"{s!r} is not an {n}-bit string")
        return cls.from_marked(n, [int(s, 2) for s in strings])

    @classmethod
    def random(cls, n: int, s: int, rng: np.random.Generator) -> "TruthTable":
        """Uniformly random table with exactly s marked inputs."""
        if not 0 <= s <= 2**n:
            raise DomainError(f"s={s} outside [0, {2**n}]")
        return cls.from_marked(n, rng.choice(2**n, size=s, replace=False))

    def to_hex(self) -> str:
        """Hex string of ceil(2**n / 4) digits; bit idx of the integer is f(idx)."""
        value = int.from_bytes(np.packbits(self.bits, bitorder="little").tobytes(), "little")
        width = -(-(2**self.n) // 4)
        return format(value, f"0{width}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "TruthTable":
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        width = -(-(2**n) // 4)
        if len(text) != width:
            raise DomainError(f"n={n} needs exactly {width} hex digits, got {len(text)}")
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise DomainError(f"not a hex string: {text!r}") from exc
        if value >> (2**n):
            raise DomainError(f"hex value sets bits beyond index {2**n - 1}")
        raw = np.frombuffer(value.to_bytes(-(-(2**n) // 8), "little"), dtype=np.uint8)
        return cls(n, np.unpackbits(raw, bitorder="little")[: 2**n])


def _apply_input_qubit(amps: np.ndarray, n: int, q: int, gate: np.ndarray) -> np.ndarray:
    # q = 0 is i_1 (most significant); flag bit sits below all input bits
    view = amps.reshape(2**q, 2, 2 ** (n - q))
    return np.einsum("ij,ajb->aib", gate, view).reshape(-1)


def apply_U_all(state: StateVector, inverse: bool = False) -> StateVector:
    """U (or U^-1) on every input qubit, identity on the flag."""
    gate = U_INV_MATRIX if inverse else U_MATRIX
    amps = state.amps
    for q in range(state.n):
        amps = _apply_input_qubit(amps, state.n, q, gate)
    return StateVector(state.n, amps)


def apply_oracle(state: StateVector, f: TruthTable) -> StateVector:
    """|i>|b> -> |i>|b XOR f(i)>."""
    if f.n != state.n:
        raise DimensionMismatch(f"oracle for n={f.n} applied to state with n={state.n}")
    rows = state.branches().copy()
    rows[f.bits] = rows[f.bits][:, ::-1]
    return StateVector(state.n, rows.reshape(-1))


def post_oracle_state(f: TruthTable) -> StateVector:
    """F U^{(x)n}|0...0>|0>, the uniform superposition carrying f in the flag."""
    return apply_oracle(apply_U_all(StateVector.basis(f.n)), f)


def run_linear_stage(f: TruthTable) -> StateVector:
    """Full steps 1-4: (U^-1)^{(x)n} F U^{(x)n} |0...0>|0>."""
    return apply_U_all(post_oracle_state(f), inverse=True)


def _check_s(n: int, s: int):
    if n < 0 or not 0 <= s <= 2**n:
        raise DomainError(f"s={s} outside [0, 2**{n}]")


def p_ground_formula(n: int, s: int) -> float:
    """Probability of reading the input register as |0...0>: ((2^n-s)^2+s^2)/4^n."""
    _check_s(n, s)
    N = 2**n
    return ((N - s) ** 2 + s**2) / N**2


def p_flag_one_formula(n: int, s: int) -> float:
    _check_s(n, s)
    return s / 2**n


class Which(str, Enum):
    INPUT_GROUND = "input_ground"
    FLAG_ONE = "flag_one"


def measure_probability(state: StateVector, which) -> float:
    check_normalized(state, tol=1e-10)
    which = Which(which)
    if which is Which.INPUT_GROUND:
        return float(np.sum(np.abs(state.amps[:2]) ** 2))
    return float(np.sum(np.abs(state.amps[1::2]) ** 2))
