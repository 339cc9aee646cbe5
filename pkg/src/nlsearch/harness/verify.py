"""Self-check suite run by the ``verify`` verb.

Each check recomputes a closed-form claim by an independent route (state
vector simulation, RK4 integration, brute-force enumeration) and reports the
worst deviation against a fixed tolerance.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .. import algo2_discrete as discrete
from ..errors import SingularCoefficient
from ..linear_stage import (
    TruthTable,
    apply_oracle,
    apply_U_all,
    measure_probability,
    p_flag_one_formula,
    p_ground_formula,
    post_oracle_state,
    run_linear_stage,
)
from ..nonlinear import (
    AlphaTanh,
    GatedTanh,
    InverseTanh,
    PolchinskiTanh,
    QuadraticGap,
    closed_form_evolve,
    coefficient,
    initial_single_qubit,
    integrate,
    integrate_many,
    measure_frequency,
    mobility_frequency,
    quadratic_frequency_approx,
    sigma3_trajectory_formula,
)
from ..qstate import (
    StateVector,
    apply_flag_operator,
    apply_flag_zero_projector,
    build_A,
    identity,
    partial_trace_inputs,
)
from .config import ExperimentConfig


@dataclass
class Check:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    v = rng.normal(size=2 ** (n + 1)) + 1j * rng.normal(size=2 ** (n + 1))
    return StateVector(n, v / np.linalg.norm(v))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_input_unitary(state: StateVector, v: np.ndarray) -> StateVector:
    return StateVector(state.n, (v @ state.branches()).reshape(-1))


def random_valid_state(model, n, rng, min_rate=0.05, min_denominator=0.05):
    """Random normalized state whose coefficient is well defined and not tiny."""
    a = model.A.matrix
    for _ in range(1000):
        state = random_state(n, rng)
        rows = state.branches()
        if isinstance(model, GatedTanh):
            g = rows[0]
            if np.vdot(g, g).real < min_denominator or abs(np.vdot(g, a @ g).real) < min_denominator:
                continue
        elif isinstance(model, (InverseTanh, PolchinskiTanh)):
            if abs(np.vdot(rows, rows @ a.T).real) < min_denominator:
                continue
        try:
            c = coefficient(model, state)
        except SingularCoefficient:
            continue
        if abs(c) >= min_rate * model.eps:
            return state
    raise RuntimeError(f"no valid random state found for {model!r}")


def _corpus(n_values, per_n, seed):
    """Seeded random oracles plus the s = 0, 2^(n-1), 2^n corner cases."""
    rng = np.random.default_rng(seed)
    for n in n_values:
        N = 2**n
        for s in (0, N // 2, N):
            yield TruthTable.random(n, s, rng)
        for _ in range(per_n):
            yield TruthTable.random(n, int(rng.integers(0, N + 1)), rng)


def check_probability_parabola(cfg):
    worst = 0.0
    for f in _corpus(_linear_ns(cfg), 50, cfg.seed):
        p = measure_probability(run_linear_stage(f), "input_ground")
        worst = max(worst, abs(p - p_ground_formula(f.n, f.s())))
    for n in range(1, 9):
        N = 2**n
        worst = max(
            worst,
            abs(p_ground_formula(n, 0) - 1),
            abs(p_ground_formula(n, N) - 1),
            abs(p_ground_formula(n, N // 2) - 0.5),
        )
    return worst, 1e-12, "P(ground) = ((2^n-s)^2+s^2)/4^n"


def check_flag_statistics(cfg):
    worst = 0.0
    for f in _corpus(_linear_ns(cfg), 50, cfg.seed):
        p = measure_probability(run_linear_stage(f), "flag_one")
        worst = max(worst, abs(p - p_flag_one_formula(f.n, f.s())))
    return worst, 1e-12, "P_f(1) = s/2^n"


def check_reduced_state(cfg):
    worst = 0.0
    for f in _corpus(range(1, 9), 10, cfg.seed + 1):
        rho = partial_trace_inputs(run_linear_stage(f)).matrix
        N = 2**f.n
        target = np.diag([(N - f.s()) / N, f.s() / N])
        worst = max(worst, float(np.max(np.abs(rho - target))))
    return worst, 1e-13, "rho_flag = diag((2^n-s)/2^n, s/2^n)"


def _closed_form_models(eps=1.0, eta=0.3, alpha=5.0):
    return [
        QuadraticGap(eps, eta),
        InverseTanh(eps, eta),
        GatedTanh(eps, eta),
        PolchinskiTanh(eps, eta),
        AlphaTanh(eps, eta, alpha=alpha),
    ]


def check_closed_form_vs_integrator(cfg, per_case=10, n_values=(1, 2, 3, 4), periods=5):
    rng = np.random.default_rng(cfg.seed + 2)
    dist = norm = coef = 0.0
    for model in _closed_form_models():
        for n in n_values:
            states = [random_valid_state(model, n, rng) for _ in range(per_case)]
            T = np.array([2 * math.pi / abs(coefficient(model, s)) for s in states])
            results = integrate_many(model, states, periods * T, 1e-3 * T)
            for s0, t, (traj, final) in zip(states, T, results):
                exact = closed_form_evolve(model, s0, periods * t)
                dist = max(dist, float(np.linalg.norm(final.amps - exact.amps)))
                norm = max(norm, traj.norm_drift())
                coef = max(coef, traj.coefficient_drift())
    detail = f"state distance {dist:.3g} (<1e-7), norm drift {norm:.3g}, coefficient drift {coef:.3g} (<1e-9)"
    ok = dist < 1e-7 and norm < 1e-9 and coef < 1e-9
    return (dist if ok else max(dist, norm, coef)), 1e-7, detail, ok


def _measured(model, state0):
    c = abs(coefficient(model, state0))
    period = 2 * math.pi / c
    traj, _ = integrate(model, state0, 2 * period, 1e-3 * period)
    return measure_frequency(traj.times, traj.sigma3)


def check_frequency_formulas(cfg):
    n, s, eta, eps, alpha = 3, 1, 0.01, 1.0, 1e3
    f = TruthTable.from_marked(n, [1])
    psi3 = run_linear_stage(f)
    single = initial_single_qubit(n, s)
    cases = [
        (QuadraticGap(eps, eta, n), single),
        (InverseTanh(eps, eta, n), single),
        (GatedTanh(eps, eta, n), psi3),
        (PolchinskiTanh(eps, eta, n), psi3),
        (AlphaTanh(eps, eta, n, alpha), post_oracle_state(f)),
    ]
    worst = 0.0
    parts = []
    for model, state0 in cases:
        formula = mobility_frequency(model, s)
        rel = abs(_measured(model, state0) - formula) / formula
        worst = max(worst, rel)
        parts.append(f"{model.tag}={formula:.6g}")
    eta8 = 2**-3.5
    tilde = mobility_frequency(PolchinskiTanh(eps, eta8, 8), 1)
    prime = mobility_frequency(InverseTanh(eps, eta8, 8), 1)
    ordered = tilde < prime
    parts.append(f"n=8: polchinski {tilde:.4g} < inverse-tanh {prime:.4g}: {ordered}")
    return worst, 1e-5, "; ".join(parts), worst < 1e-5 and ordered


def check_sigma3_trajectory(cfg):
    n, eta, eps, alpha = 3, 0.01, 1.0, 1e3
    model = AlphaTanh(eps, eta, n, alpha)
    psi2 = post_oracle_state(TruthTable.from_marked(n, [6]))
    w = abs(coefficient(model, psi2))
    T = 2 * math.pi / w
    traj, _ = integrate(model, psi2, 3 * T, 1e-3 * T)
    dev = float(np.max(np.abs(traj.sigma3 - sigma3_trajectory_formula(n, 1, eta, w, traj.times))))
    traj0, _ = integrate(model, post_oracle_state(TruthTable.zeros(n)), 3 * 2 * math.pi, 1e-2)
    dev0 = float(np.max(np.abs(traj0.sigma3 - 1.0)))
    ok = dev < 1e-6 and dev0 < 1e-10
    return dev, 1e-6, f"s=1 max dev {dev:.3g}; s=0 max |sigma3-1| {dev0:.3g} (<1e-10)", ok


# flag tables after the oracle and after each of the three scan rounds,
# and the branch pairs compared in each round, for n=3, f(110)=1
WALKTHROUGH_TABLES = [{6}, {2, 6}, {0, 2, 4, 6}, set(range(8))]
WALKTHROUGH_PAIRS = [
    [("000", "100"), ("001", "101"), ("010", "110"), ("011", "111")],
    [("000", "010"), ("001", "011"), ("100", "110"), ("101", "111")],
    [("000", "001"), ("010", "011"), ("100", "101"), ("110", "111")],
]


def check_discrete_scan(cfg):
    bad = 0
    rng = np.random.default_rng(cfg.seed + 3)
    for n in range(1, 4):
        for bits in itertools.product((0, 1), repeat=2**n):
            t = discrete.FlagTable(n, bits)
            bad += not np.all(discrete.run_scan(t).flags == any(bits))
    for n in range(1, 11):
        for _ in range(20):
            t = discrete.FlagTable(n, rng.random(2**n) < rng.random() * 0.1)
            bad += not np.all(discrete.run_scan(t).flags == t.flags.any())
    history = discrete.scan_history(discrete.from_truth_table(TruthTable.from_bitstrings(3, "110")))
    for got, want in zip(history, WALKTHROUGH_TABLES):
        bad += set(got.marked().tolist()) != want
    for k, pairs in enumerate(WALKTHROUGH_PAIRS, start=1):
        want = [(int(a, 2), int(b, 2)) for a, b in pairs]
        bad += discrete.scan_pairs(3, k) != want
    return float(bad), 0.5, f"{bad} mismatching tables"


def check_exponential_slowness(cfg):
    n, s, eta, eps = 20, 1, 1e-3, 1.0
    model = QuadraticGap(eps, eta, n)
    approx = quadratic_frequency_approx(n, s, eps, eta)
    psi3 = run_linear_stage(TruthTable.from_marked(n, [12345]))
    ground = StateVector(0, psi3.amps[:2]).normalized()
    rates = [
        mobility_frequency(model, s),
        abs(coefficient(model, initial_single_qubit(n, s))),
        abs(coefficient(model, ground)),
    ]
    rel = max(abs(r - approx) / approx for r in rates)
    return rel, 1e-4, f"omega={rates[0]:.6g} vs eps*s*sqrt(1-eta^2)/2^(n-1)={approx:.6g}"


def check_polchinski_locality(cfg):
    rng = np.random.default_rng(cfg.seed + 4)
    model = PolchinskiTanh(1.0, 0.3)
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(5):
            v = random_unitary(2**n, rng)
            psi = random_valid_state(model, n, rng)
            t = float(rng.uniform(0.5, 5.0))
            lhs = closed_form_evolve(model, apply_input_unitary(psi, v), t)
            rhs = apply_input_unitary(closed_form_evolve(model, psi, t), v)
            worst = max(worst, float(np.linalg.norm(lhs.amps - rhs.amps)))
            _, fin_l = integrate(model, apply_input_unitary(psi, v), t, 1e-2)
            _, fin_r = integrate(model, psi, t, 1e-2)
            worst = max(worst, float(np.linalg.norm(fin_l.amps - apply_input_unitary(fin_r, v).amps)))
    return worst, 1e-10, "evolve(V Psi) = V evolve(Psi) for random input unitaries V"


def check_operator_identities(cfg):
    rng = np.random.default_rng(cfg.seed + 5)
    worst = 0.0
    for eta in rng.uniform(1e-6, 1 - 1e-6, size=50):
        a = build_A(eta)
        worst = max(worst, float(np.max(np.abs((a @ a).matrix - identity().matrix))))
    for n in (1, 2, 3):
        for _ in range(100):
            eta = float(rng.uniform(0.01, 0.99))
            v = random_state(n, rng)
            pbp = apply_flag_zero_projector(apply_flag_operator(apply_flag_zero_projector(v), build_A(eta)))
            worst = max(worst, float(np.linalg.norm(pbp.amps - eta * apply_flag_zero_projector(v).amps)))
    return worst, 1e-13, "A^2 = 1 and P B P = eta P"


def check_linear_invariants(cfg):
    rng = np.random.default_rng(cfg.seed + 6)
    n = min(cfg.n, 10)
    worst = 0.0
    for _ in range(20):
        f = TruthTable.random(n, int(rng.integers(0, 2**n + 1)), rng)
        phi, psi = random_state(n, rng), random_state(n, rng)
        worst = max(worst, abs(apply_oracle(phi, f).inner(apply_oracle(psi, f)) - phi.inner(psi)))
        worst = max(worst, float(np.max(np.abs(apply_U_all(apply_U_all(psi), inverse=True).amps - psi.amps))))
        out = run_linear_stage(f)
        worst = max(worst, abs(out.norm2() - 1.0), float(np.max(np.abs(out.amps.imag))))
        worst = max(worst, abs(measure_probability(out, "input_ground") - p_ground_formula(n, f.s())))
    return worst, 1e-12, f"oracle unitarity, U U^-1 = 1, real normalized output at n={n}"


def check_dynamics_invariants(cfg):
    """Fixed points of the s = 0 structure and exact locality of the gated law."""
    rng = np.random.default_rng(cfg.seed + 7)
    n = min(cfg.n, 6)
    eps, eta = 1.0, cfg.eta
    worst = 0.0
    inputs = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    flat = StateVector.product(inputs / np.linalg.norm(inputs), [1, 0])
    for cls in (InverseTanh, GatedTanh, PolchinskiTanh):
        model = cls(eps, eta)
        _, fin = integrate(model, flat, 1.0, 1e-2)
        worst = max(worst, float(np.linalg.norm(fin.amps - flat.amps)))
    alpha_model = AlphaTanh(eps, eta, alpha=cfg.alpha)
    _, fin = integrate(alpha_model, flat, 1.0, 1e-2)
    worst = max(worst, float(np.linalg.norm(fin.amps - flat.amps)))

    gated = GatedTanh(eps, eta)
    psi = random_valid_state(gated, n, rng)
    closed = closed_form_evolve(gated, psi, 3.7)
    exact_outside = bool(np.array_equal(closed.amps[2:], psi.amps[2:]))
    _, fin = integrate(gated, psi, 3.7, 1e-3)
    worst = max(worst, float(np.max(np.abs(fin.amps[2:] - psi.amps[2:]))))
    ok = worst < 1e-10 and exact_outside
    return worst, 1e-10, f"stationary s=0 states, gated branches idx!=0 untouched (bitwise: {exact_outside})", ok


def _linear_ns(cfg):
    ns = list(range(1, 9))
    if 8 < cfg.n <= 10:
        ns.append(cfg.n)
    return ns


CHECKS = [
    ("probability_parabola", check_probability_parabola),
    ("flag_statistics", check_flag_statistics),
    ("reduced_state", check_reduced_state),
    ("closed_form_vs_integrator", check_closed_form_vs_integrator),
    ("frequency_formulas", check_frequency_formulas),
    ("sigma3_trajectory", check_sigma3_trajectory),
    ("discrete_scan", check_discrete_scan),
    ("exponential_slowness", check_exponential_slowness),
    ("polchinski_locality", check_polchinski_locality),
    ("operator_identities", check_operator_identities),
    ("linear_invariants", check_linear_invariants),
    ("dynamics_invariants", check_dynamics_invariants),
]


def run_verify(config: ExperimentConfig | None = None, only=None) -> list[Check]:
    config = (config or ExperimentConfig()).validate()
    results = []
    for name, fn in CHECKS:
        if only is not None and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            out = fn(config)
        except Exception as exc:  # a crashing check is a failed check
            results.append(Check(name, False, math.inf, math.nan, time.perf_counter() - t0, repr(exc)))
            continue
        if len(out) == 4:
            dev, tol, detail, ok = out
        else:
            dev, tol, detail = out
            ok = dev < tol
        results.append(Check(name, bool(ok), float(dev), tol, time.perf_counter() - t0, detail))
    return results

