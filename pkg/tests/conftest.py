"""예제 네트워크 픽스처"""
import os

import numpy as np
import pytest

from models import BooleanWord, MeasurementSpec, StateVector, UnitaryOperator
from quantum.core import kron
from quantum.dynamics import hermitian_propagator

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

S3 = np.sqrt(3.0)


def words(*texts: str) -> list[BooleanWord]:
    return [BooleanWord.parse(t) for t in texts]


def save_complex(prefix, matrix) -> str:
    """prefix.re.csv / prefix.im.csv 작성 후 prefix 반환"""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    np.savetxt(f"{prefix}.re.csv", matrix.real, delimiter=",", fmt="%.17e")
    np.savetxt(f"{prefix}.im.csv", matrix.imag, delimiter=",", fmt="%.17e")
    return str(prefix)


def save_real(path, matrix) -> str:
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",", fmt="%.17e")
    return str(path)


def write_config(path, /, **values) -> str:
    lines = [f"{key} = {value}" for key, value in values.items()]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return os.fspath(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# ---- 순열: U1 = σx ⊗ σy (결정적 순열 연쇄) ----

@pytest.fixture
def u1():
    return UnitaryOperator(kron(SX, SY))


@pytest.fixture
def u1_chain():
    """00↔11, 01↔10 (행 = 출발)"""
    P = np.zeros((4, 4))
    P[0, 3] = P[3, 0] = P[1, 2] = P[2, 1] = 1.0
    return P


# ---- 둘째 큐비트 균등 분기: U2 = σx ⊗ (I + iσy)/√2 ----

@pytest.fixture
def u2():
    r = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)
    return UnitaryOperator(kron(SX, r))


# ---- 얽힘 해밀토니언: U3 = exp(−iH), H = π/3 σx⊗σx + π/6 σy⊗σy ----

@pytest.fixture
def h3():
    return np.pi / 3 * kron(SX, SX) + np.pi / 6 * kron(SY, SY)


@pytest.fixture
def u3(h3):
    return UnitaryOperator(hermitian_propagator(h3, 1.0))


@pytest.fixture
def u3_expected():
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = U[3, 3] = S3 / 2
    U[0, 3] = U[3, 0] = -0.5j
    U[1, 2] = U[2, 1] = -1j
    return U


# ---- 유니스토캐스틱: 이중 확률 행렬 W와 그 실현 U ----

@pytest.fixture
def w4():
    return np.array([
        [1 / 12, 1 / 6, 1 / 4, 1 / 2],
        [1 / 6, 1 / 12, 1 / 2, 1 / 4],
        [1 / 4, 1 / 2, 1 / 12, 1 / 6],
        [1 / 2, 1 / 4, 1 / 6, 1 / 12],
    ])


@pytest.fixture
def u4():
    s2, s6 = np.sqrt(2.0), np.sqrt(6.0)
    return UnitaryOperator(np.array([
        [1 / (2 * S3), 1 / s6, 1 / 2, s2 / 2],
        [-1j / s6, 1j / (2 * S3), -1j * s2 / 2, 1j / 2],
        [-1 / 4 - 1j * S3 / 4, -s2 / 4 - 1j * s6 / 4, 1 / (4 * S3) + 1j / 4, 1 / (2 * s6) + 1j * s2 / 4],
        [-s6 / 4 + 1j * s2 / 4, S3 / 4 - 1j / 4, s2 / 4 - 1j / (2 * s6), -1 / 4 + 1j / (4 * S3)],
    ]))


@pytest.fixture
def psi4():
    return StateVector.from_amplitudes([1 / np.sqrt(2), 1 / np.sqrt(6), 1 / (2 * S3), 1 / 2])


@pytest.fixture
def p4():
    return np.array([1 / 2, 1 / 6, 1 / 12, 1 / 4])


# ---- 국소 측정: 3큐비트, 큐비트 1, 2 측정 ----

@pytest.fixture
def u5():
    R = np.array([[S3 / 2, 1 / 2], [-1 / 2, S3 / 2]], dtype=complex)
    return UnitaryOperator(kron(SX, R, SZ))


@pytest.fixture
def psi5():
    amps = np.zeros(8, dtype=complex)
    amps[0b000] = 1 / np.sqrt(2)
    amps[0b010] = 1 / np.sqrt(6)
    amps[0b011] = 1 / (2 * S3)
    amps[0b101] = 1 / 2
    return StateVector.from_amplitudes(amps)


@pytest.fixture
def spec5():
    return MeasurementSpec(3, (1, 2))


@pytest.fixture
def path5():
    return words("10", "00", "11", "01")


@pytest.fixture
def betas5():
    return [
        np.array([0, 1 / 2]),
        np.array([0, -S3 / 2]),
        np.array([0, -1 / 2]),
        np.array([0, S3 / 2]),
    ]


def haar_unitary(rng, dim: int) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, n: int) -> StateVector:
    z = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector.from_amplitudes(z, normalize=True)
