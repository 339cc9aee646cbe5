"""Nonlinear flag-qubit dynamics: five evolution laws, their propagators and rates.

Every law has the form  i d|Psi>/dt = c(Psi) G |Psi>  with a real, state
dependent coefficient c and a generator G that is either B = 1 (x) A or the
gated P0 B, where P0 projects the input register onto |0...0>.  Because
A**2 = 1 the propagator for constant c is cos(ct) - i G sin(ct) (on the range
of G**2), and c is a constant of motion for all five laws, so the closed form
uses c evaluated on the initial state.

Internally all kernels act on arrays of shape (..., 2**n, 2) ("rows"), so the
integrator can advance a batch of independent initial conditions at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import ClassVar

import numpy as np

from .errors import DomainError, SingularCoefficient, StepError
from .qstate import (
    DTYPE,
    FlagOperator,
    StateVector,
    build_A,
    partial_trace_inputs,
)

SINGULAR_TOL = 1e-12
TANH_SATURATION = 30.0
STEP_LIMIT = 0.1


def safe_tanh(x):
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) > TANH_SATURATION, np.sign(x), np.tanh(np.clip(x, -700, 700)))
    return out if out.ndim else float(out)


def _norm2(rows):
    return np.sum(rows.real**2 + rows.imag**2, axis=(-2, -1))


def _apply_A(rows, a):
    return rows @ a.T


def _expect(rows, op_rows):
    """Re <rows|op_rows> summed over branches and flag slots."""
    return np.sum((rows.conj() * op_rows).real, axis=(-2, -1))


def _sigma3(rows):
    p = rows.real**2 + rows.imag**2
    return np.sum(p[..., 0] - p[..., 1], axis=-1)


@dataclass(frozen=True)
class NonlinearModel:
    """Common parameters; concrete laws are the subclasses below.

    ``n`` is only needed where a closed-form frequency is requested without a
    state (it fixes 2**n in the rate formulas).
    """

    eps: float
    eta: float
    n: int | None = None

    tag: ClassVar[str] = ""
    gated: ClassVar[bool] = False

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must lie in (0, 1), got {self.eta}")
        if self.n is not None and self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n}")

    @property
    def A(self) -> FlagOperator:
        return build_A(self.eta)

    @property
    def _a(self) -> np.ndarray:
        return self.A.matrix

    def _coefficient_rows(self, rows):
        raise NotImplementedError

    def generator_rows(self, rows):
        """G|Psi> on a rows array."""
        out = _apply_A(rows, self._a)
        if self.gated:
            out[..., 1:, :] = 0.0
        return out

    def propagate_rows(self, rows, c, t):
        """exp(-i c G t) applied to rows, c possibly batched."""
        phase = np.asarray(c, dtype=float) * t
        cos = np.cos(phase)[..., None]
        sin = np.sin(phase)[..., None]
        if self.gated:
            out = rows.copy()
            g = rows[..., 0, :]
            out[..., 0, :] = cos * g - 1j * sin * (g @ self._a.T)
            return out
        return cos[..., None] * rows - 1j * sin[..., None] * _apply_A(rows, self._a)

    def with_n(self, n):
        return replace(self, n=n)


def _singular(mask, what):
    if np.any(mask):
        raise SingularCoefficient(f"{what} vanishes (|value| < {SINGULAR_TOL})")


@dataclass(frozen=True)
class QuadraticGap(NonlinearModel):
    """c = eps (<B>/<Psi|Psi> - <0|A|0>), generator B."""

    tag: ClassVar[str] = "quadratic"

    def _coefficient_rows(self, rows):
        norm = _norm2(rows)
        _singular(norm < SINGULAR_TOL, "<Psi|Psi>")
        return self.eps * (_expect(rows, _apply_A(rows, self._a)) / norm - self.eta)


@dataclass(frozen=True)
class InverseTanh(NonlinearModel):
    """c = eps tanh(<Psi|Psi>/<B> - 1/<0|A|0>), generator B."""

    tag: ClassVar[str] = "inverse-tanh"

    def _coefficient_rows(self, rows):
        norm = _norm2(rows)
        b = _expect(rows, _apply_A(rows, self._a))
        _singular(np.abs(b) < SINGULAR_TOL * np.maximum(norm, 1.0), "<Psi|B|Psi>")
        return self.eps * safe_tanh(norm / b - 1.0 / self.eta)


@dataclass(frozen=True)
class GatedTanh(NonlinearModel):
    """Nonlinearity active only on the |0...0> input branch; generator P0 B.

    The second ratio <P0 P>/<P0 P B P> is the constant 1/eta because
    P B P = eta P, so it is never evaluated as 0/0.
    """

    tag: ClassVar[str] = "gated"
    gated: ClassVar[bool] = True

    def _coefficient_rows(self, rows):
        g = rows[..., :1, :]
        n0 = _norm2(g)
        b0 = _expect(g, _apply_A(g, self._a))
        _singular(n0 < SINGULAR_TOL, "<P0>")
        _singular(np.abs(b0) < SINGULAR_TOL * np.maximum(n0, 1.0), "<P0 B>")
        return self.eps * safe_tanh(n0 / b0 - 1.0 / self.eta)


@dataclass(frozen=True)
class PolchinskiTanh(NonlinearModel):
    """Flag-local law driven by the reduced flag state; generator B."""

    tag: ClassVar[str] = "polchinski"

    def _coefficient_rows(self, rows):
        norm = _norm2(rows)
        b = _expect(rows, _apply_A(rows, self._a))
        _singular(np.abs(b) < SINGULAR_TOL * np.maximum(norm, 1.0), "<B>")
        return self.eps * safe_tanh(norm / b - 1.0 / self.eta)


@dataclass(frozen=True)
class AlphaTanh(NonlinearModel):
    """c = eps tanh(alpha <1 (x) (A - eta)>), generator B."""

    alpha: float = 1e3
    tag: ClassVar[str] = "alpha"

    def __post_init__(self):
        super().__post_init__()
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    def _coefficient_rows(self, rows):
        shifted = _apply_A(rows, self._a) - self.eta * rows
        return self.eps * safe_tanh(self.alpha * _expect(rows, shifted))


MODELS = {cls.tag: cls for cls in (QuadraticGap, InverseTanh, GatedTanh, PolchinskiTanh, AlphaTanh)}


def make_model(tag: str, eps: float, eta: float, alpha: float | None = None, n: int | None = None):
    try:
        cls = MODELS[tag]
    except KeyError:
        raise DomainError(f"unknown model {tag!r}; choose from {sorted(MODELS)}") from None
    if cls is AlphaTanh:
        return cls(eps=eps, eta=eta, n=n, alpha=1e3 if alpha is None else alpha)
    return cls(eps=eps, eta=eta, n=n)


def _rows(state: StateVector):
    return state.amps.reshape(-1, 2)


def coefficient(model: NonlinearModel, state: StateVector) -> float:
    """Signed rate c(Psi) in i dPsi/dt = c(Psi) G Psi."""
    return float(model._coefficient_rows(_rows(state)))


def closed_form_evolve(model: NonlinearModel, state0: StateVector, t: float) -> StateVector:
    if t == 0:
        return state0
    c = coefficient(model, state0)
    out = model.propagate_rows(_rows(state0), c, t)
    return StateVector(state0.n, out.reshape(-1))


def initial_single_qubit(n: int, s: int) -> StateVector:
    """((2^n - s)|0> + s|1>) normalized, as a bare flag qubit (StateVector with n=0)."""
    N = 2**n
    if n < 0 or not 0 <= s <= N:
        raise DomainError(f"s={s} outside [0, 2**{n}]")
    amps = np.array([N - s, s], dtype=float)
    return StateVector(0, amps / np.hypot(N - s, s))


def inverse_tanh_argument(n: int, s: int, eta: float) -> float:
    """Exact tanh argument of the inverse-tanh rate on the (2^n - s, s) state.

    Written as one fraction so there is no cancellation between
    ((2^n-s)^2 + s^2)/<A> and 1/eta.
    """
    N = 2**n
    r = math.sqrt(1.0 - eta * eta)
    num = 2.0 * eta * s * s - 2.0 * (N - s) * s * r
    den = eta * ((N - s) ** 2 * eta - s * s * eta + 2.0 * (N - s) * s * r)
    if abs(den) < SINGULAR_TOL * max(1.0, float(N) ** 2):
        raise SingularCoefficient("<psi0|A|psi0> vanishes for this (n, s, eta)")
    return num / den


def inverse_tanh_frequency_approx(n: int, s: int, eps: float, eta: float) -> float:
    """Large-2^n approximation eps*tanh(s / (2^(n-1) eta^2)) (magnitude)."""
    return eps * safe_tanh(s / (2 ** (n - 1) * eta * eta))


def quadratic_frequency_approx(n: int, s: int, eps: float, eta: float) -> float:
    return eps * s * math.sqrt(1.0 - eta * eta) / 2 ** (n - 1)


def mobility_frequency(model: NonlinearModel, s: int, n: int | None = None) -> float:
    """Closed-form angular rate |c| on the state produced by an oracle with s marks.

    Single-qubit and gated laws see flag amplitudes proportional to
    (2^n - s, s); the flag-local laws see the mixed flag state
    diag(2^n - s, s)/2^n.
    """
    n = model.n if n is None else n
    if n is None:
        raise DomainError("register size n is required for a closed-form frequency")
    N = 2**n
    if not 0 <= s <= N:
        raise DomainError(f"s={s} outside [0, {N}]")
    eps, eta = model.eps, model.eta
    if s == 0:
        return 0.0
    if isinstance(model, QuadraticGap):
        r = math.sqrt(1.0 - eta * eta)
        w = eps * (-2.0 * s * s * eta + 2.0 * (N - s) * s * r) / ((N - s) ** 2 + s * s)
    elif isinstance(model, (InverseTanh, GatedTanh)):
        w = eps * safe_tanh(inverse_tanh_argument(n, s, eta))
    elif isinstance(model, PolchinskiTanh):
        half = N // 2 if n >= 1 else 0.5
        if half == s:
            raise SingularCoefficient("<B> vanishes when s = 2^(n-1)")
        w = eps * safe_tanh(s / ((half - s) * eta))
    elif isinstance(model, AlphaTanh):
        w = eps * safe_tanh(model.alpha * eta * s / (N / 2))
    else:
        raise DomainError(f"unsupported model {model!r}")
    return abs(w)


def sigma3_trajectory_formula(n: int, s: int, eta: float, omega: float, t):
    """<1 (x) sigma3>(t) for the flag-local laws started from the mixed flag state.

    With s = 0 the rate of these laws is exactly zero, so ``omega`` is ignored
    and the value is 1 at all times.
    """
    r = (2 ** (n - 1) - s) / 2 ** (n - 1)
    if s == 0:
        omega = 0.0
    wt = np.asarray(omega * np.asarray(t, dtype=float))
    out = r * np.cos(2.0 * wt) + 2.0 * eta * eta * r * np.sin(wt) ** 2
    return out if out.ndim else float(out)


def expectation_flag(state: StateVector, op: FlagOperator) -> float:
    """Tr(rho op) with rho the reduced flag state."""
    value = partial_trace_inputs(state).expectation(op)
    if abs(value.imag) > 1e-12:
        raise ValueError(f"expectation has imaginary part {value.imag}; operator not Hermitian?")
    return value.real


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples recorded by the integrator, one per step including t = 0."""

    times: np.ndarray
    norm2: np.ndarray
    coefficient: np.ndarray
    sigma3: np.ndarray

    def __post_init__(self):
        k = len(self.times)
        if any(len(v) != k for v in (self.norm2, self.coefficient, self.sigma3)):
            raise ValueError("trajectory series must have equal length")
        if k > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm2 - self.norm2[0])))

    def coefficient_drift(self) -> float:
        return float(np.max(np.abs(self.coefficient - self.coefficient[0])))


def default_dt(model: NonlinearModel, state0: StateVector) -> float:
    c = abs(coefficient(model, state0))
    return min(1e-2 / c, 1e-2) if c > 0 else 1e-2


def _rk4(model, rows, dt, nsteps):
    """Classical RK4 on i y' = c(y) G y, coefficient re-evaluated at every stage.

    rows: (B, 2**n, 2); dt: (B,).  Returns final rows and (nsteps+1, B) records.
    Raises SingularCoefficient with ``partial`` = (step, records so far).
    """
    dt = np.asarray(dt, dtype=float)
    dtc = dt[:, None, None]
    rec_norm = np.empty((nsteps + 1, rows.shape[0]))
    rec_coef = np.empty_like(rec_norm)
    rec_s3 = np.empty_like(rec_norm)

    def rhs(y):
        c = model._coefficient_rows(y)
        return -1j * c[:, None, None] * model.generator_rows(y), c

    y = rows.astype(DTYPE, copy=True)
    step = 0
    try:
        for step in range(nsteps + 1):
            k1, c = rhs(y)
            rec_norm[step] = _norm2(y)
            rec_coef[step] = c
            rec_s3[step] = _sigma3(y)
            if step == nsteps:
                break
            if np.any(dt * np.abs(c) > STEP_LIMIT):
                raise StepError(
                    f"dt*|c|*||G|| = {float(np.max(dt * np.abs(c)))} exceeds {STEP_LIMIT}"
                )
            k2, _ = rhs(y + 0.5 * dtc * k1)
            k3, _ = rhs(y + 0.5 * dtc * k2)
            k4, _ = rhs(y + dtc * k3)
            y = y + (dtc / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    except SingularCoefficient as exc:
        exc.partial = (step, rec_norm[:step], rec_coef[:step], rec_s3[:step])
        raise
    return y, rec_norm, rec_coef, rec_s3


def _plan(t_final, dt):
    if not dt > 0 or not t_final > 0 or dt > t_final * (1 + 1e-12):
        raise DomainError(f"need 0 < dt <= t_final, got dt={dt}, t_final={t_final}")
    nsteps = max(1, math.ceil(t_final / dt - 1e-9))
    return nsteps, t_final / nsteps


def integrate(model: NonlinearModel, state0: StateVector, t_final: float, dt: float | None = None):
    """Fixed-step RK4 integration of the nonlinear law, no renormalization.

    The step is shrunk to t_final/ceil(t_final/dt) so the last sample lands on
    t_final.  Returns (Trajectory, final StateVector).  A singular coefficient
    mid-run re-raises with ``exc.partial`` set to the Trajectory so far.
    """
    if dt is None:
        dt = default_dt(model, state0)
    nsteps, h = _plan(t_final, dt)
    rows = _rows(state0)[None]
    try:
        y, nrm, coef, s3 = _rk4(model, rows, np.array([h]), nsteps)
    except SingularCoefficient as exc:
        step, nrm, coef, s3 = exc.partial
        exc.partial = Trajectory(h * np.arange(step), nrm[:, 0], coef[:, 0], s3[:, 0])
        raise
    traj = Trajectory(h * np.arange(nsteps + 1), nrm[:, 0], coef[:, 0], s3[:, 0])
    return traj, StateVector(state0.n, y[0].reshape(-1))


def integrate_many(model: NonlinearModel, states, t_finals, dts):
    """Integrate several initial states of equal n in one vectorized RK4 sweep.

    States sharing a step count are advanced together; results are returned in
    input order as (Trajectory, final StateVector) pairs.
    """
    states = list(states)
    t_finals = np.broadcast_to(np.asarray(t_finals, dtype=float), (len(states),))
    dts = np.broadcast_to(np.asarray(dts, dtype=float), (len(states),))
    plans = [_plan(t, d) for t, d in zip(t_finals, dts)]
    results = [None] * len(states)
    for nsteps in sorted({p[0] for p in plans}):
        idx = [i for i, p in enumerate(plans) if p[0] == nsteps]
        rows = np.stack([_rows(states[i]) for i in idx])
        h = np.array([plans[i][1] for i in idx])
        y, nrm, coef, s3 = _rk4(model, rows, h, nsteps)
        for j, i in enumerate(idx):
            traj = Trajectory(h[j] * np.arange(nsteps + 1), nrm[:, j], coef[:, j], s3[:, j])
            results[i] = (traj, StateVector(states[i].n, y[j].reshape(-1)))
    return results


def measure_frequency(times, signal, min_periods: float = 3.0) -> float:
    """Angular rate w of a signal oscillating as cos(2 w t) + const.

    Zero crossings of (signal - time mean) are located by linear
    interpolation; w comes from the span between the first and last crossing
    of the same direction, which cancels any residual offset in the mean.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(signal, dtype=float) - np.mean(signal)
    sgn = np.signbit(x)
    idx = np.flatnonzero(sgn[:-1] != sgn[1:])
    if len(idx) < 3:
        raise ValueError("fewer than three zero crossings; run longer or check the signal")
    x0, x1 = x[idx], x[idx + 1]
    tc = times[idx] + (times[idx + 1] - times[idx]) * x0 / (x0 - x1)
    rising = x1 > x0
    first_dir = rising[0]
    same = np.flatnonzero(rising == first_dir)
    periods = len(same) - 1
    if periods < 1:
        raise ValueError("need two crossings of the same direction")
    full = (tc[same[-1]] - tc[same[0]]) / periods
    if (times[-1] - times[0]) / full < min_periods * 0.999:
        raise ValueError(f"trajectory covers fewer than {min_periods} periods")
    # signal period pi/w
    return math.pi / full
