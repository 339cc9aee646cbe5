"""Dense-matrix oracles.  These build full 2^(n+1) operators and exist only here."""

import numpy as np
import pytest
from scipy.linalg import expm

from nlsearch.qstate import StateVector

U = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)
SIGMA3 = np.diag([1.0, -1.0])
P_FLAG0 = np.diag([1.0, 0.0])


def A_dense(eta):
    r = np.sqrt(1 - eta**2)
    return np.array([[eta, r], [r, -eta]])


def kron_all(*ops):
    out = np.eye(1)
    for op in ops:
        out = np.kron(out, op)
    return out


def flag_dense(n, op):
    return np.kron(np.eye(2**n), op)


def ground_projector_dense(n):
    g = np.zeros((2**n, 2**n))
    g[0, 0] = 1.0
    return np.kron(g, np.eye(2))


def oracle_dense(bits):
    n = int(np.log2(len(bits)))
    dim = 2 ** (n + 1)
    F = np.zeros((dim, dim))
    for idx, fb in enumerate(bits):
        for b in (0, 1):
            F[2 * idx + (b ^ int(fb)), 2 * idx + b] = 1.0
    return F


def linear_stage_dense(bits):
    n = int(np.log2(len(bits)))
    Un = kron_all(*([U] * n), np.eye(2))
    Uinv = kron_all(*([U.T] * n), np.eye(2))
    psi0 = np.zeros(2 ** (n + 1))
    psi0[0] = 1.0
    return Uinv @ oracle_dense(bits) @ Un @ psi0


def expm_evolve(generator, c, t, vec):
    return expm(-1j * c * t * generator) @ vec


def rand_state(n, rng):
    v = rng.normal(size=2 ** (n + 1)) + 1j * rng.normal(size=2 ** (n + 1))
    return StateVector(n, v / np.linalg.norm(v))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
