"""데이터 모델 정의 - 큐비트 네트워크 상태, 관측량, 측정 사양, 유니터리"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# 정규화 허용 오차 (Σ|a_i|² = 1)
NORM_TOL = 1e-12
# 유니터리/에르미트 판정 허용 오차
UNITARY_TOL = 1e-10
# 이중 확률 행렬 행/열 합 허용 오차
STOCHASTIC_TOL = 1e-9

I2 = np.eye(2, dtype=complex)


class InvariantViolation(ValueError):
    """입력이 수치 불변식을 위반함 (비유니터리, 비정규화, 차원 불일치 등)"""


class InfeasibleRequest(RuntimeError):
    """형식은 올바르지만 수행하지 않는 요청 (열거 크기 초과 등)"""


def _readonly(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


def qubit_count(dim: int) -> int:
    """2^n 차원에서 n 반환. 2의 거듭제곱이 아니면 InvariantViolation"""
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise InvariantViolation(f"차원 {dim}은(는) 2의 거듭제곱이 아닙니다")
    return n


@dataclass(frozen=True)
class BooleanWord:
    """측정 결과 비트열 x와 인덱스 ⌊x⌋, 원-핫 x♯"""
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise InvariantViolation("빈 비트열은 허용되지 않습니다")
        if any(b not in (0, 1) for b in bits):
            raise InvariantViolation(f"비트는 0 또는 1이어야 합니다: {self.bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def m(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """⌊x⌋ = Σ x_i 2^{m-i} + 1 (1부터 시작)"""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value + 1

    @property
    def onehot(self) -> np.ndarray:
        vec = np.zeros(1 << self.m)
        vec[self.index - 1] = 1.0
        return vec

    @classmethod
    def from_index(cls, index: int, m: int) -> "BooleanWord":
        if m < 1 or not 1 <= index <= (1 << m):
            raise InvariantViolation(f"인덱스 {index}이(가) [1, 2^{m}] 범위를 벗어났습니다")
        value = index - 1
        return cls(tuple((value >> (m - 1 - i)) & 1 for i in range(m)))

    @classmethod
    def parse(cls, text: str) -> "BooleanWord":
        """'101' 형식 문자열 파싱"""
        text = text.strip()
        if not text or any(c not in "01" for c in text):
            raise InvariantViolation(f"비트열 형식이 올바르지 않습니다: '{text}'")
        return cls(tuple(int(c) for c in text))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, eq=False)
class StateVector:
    """n-큐비트 순수 상태 |ψ⟩ (⌊b⌋ 오름차순 계산 기저)"""
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise InvariantViolation("큐비트 수는 1 이상이어야 합니다")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != (1 << self.n):
            raise InvariantViolation(f"진폭 길이 {amps.size} ≠ 2^{self.n}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvariantViolation(f"상태가 정규화되지 않았습니다 (‖ψ‖² = {norm2:.15g})")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def dim(self) -> int:
        return 1 << self.n

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise InvariantViolation("영벡터는 정규화할 수 없습니다")
            amps = amps / norm
        return cls(qubit_count(amps.size), amps)

    @classmethod
    def basis(cls, word: BooleanWord) -> "StateVector":
        return cls(word.m, word.onehot)

    def evolve(self, unitary: "UnitaryOperator") -> "StateVector":
        """U|ψ⟩. 유니터리 허용 오차 이내의 노름 드리프트만 재정규화"""
        if unitary.dim != self.dim:
            raise InvariantViolation(f"차원 불일치: U {unitary.dim}, ψ {self.dim}")
        amps = unitary.entries @ self.amplitudes
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > UNITARY_TOL:
            raise InvariantViolation(f"전파 후 노름 {norm:.15g}")
        return StateVector(self.n, amps / norm)


@dataclass(frozen=True, eq=False)
class Observable:
    """단일 큐비트 관측량 M = λ0 |v0⟩⟨v0| + λ1 |v1⟩⟨v1|"""
    lambda0: float
    lambda1: float
    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        v0 = np.asarray(self.v0, dtype=complex).reshape(-1)
        v1 = np.asarray(self.v1, dtype=complex).reshape(-1)
        if v0.size != 2 or v1.size != 2:
            raise InvariantViolation("고유벡터는 2차원이어야 합니다")
        if self.lambda0 == self.lambda1:
            raise InvariantViolation("두 고유값이 같으면 측정 결과를 구별할 수 없습니다")
        gram = np.array([[np.vdot(v0, v0), np.vdot(v0, v1)], [np.vdot(v1, v0), np.vdot(v1, v1)]])
        if np.max(np.abs(gram - np.eye(2))) > NORM_TOL:
            raise InvariantViolation("고유벡터가 정규직교하지 않습니다")
        object.__setattr__(self, "v0", _readonly(v0))
        object.__setattr__(self, "v1", _readonly(v1))

    @property
    def u(self) -> np.ndarray:
        """기저 변환 u = |v0⟩⟨0| + |v1⟩⟨1|"""
        return np.column_stack([self.v0, self.v1])

    @property
    def matrix(self) -> np.ndarray:
        return self.lambda0 * self.projector(0) + self.lambda1 * self.projector(1)

    def projector(self, bit: int) -> np.ndarray:
        v = self.v1 if bit else self.v0
        return np.outer(v, v.conj())

    @classmethod
    def computational(cls, lambda0: float = 0.0, lambda1: float = 1.0) -> "Observable":
        return cls(lambda0, lambda1, np.array([1, 0]), np.array([0, 1]))

    @classmethod
    def from_unitary(cls, u, lambda0: float = 0.0, lambda1: float = 1.0) -> "Observable":
        u = np.asarray(u, dtype=complex)
        return cls(lambda0, lambda1, u[:, 0], u[:, 1])


@dataclass(frozen=True)
class MeasurementSpec:
    """측정 큐비트 집합 V* ⊆ {1..n} (k = n이면 전역 측정)"""
    n: int
    measured: tuple[int, ...]

    def __post_init__(self):
        measured = tuple(int(q) for q in self.measured)
        if self.n < 1:
            raise InvariantViolation("큐비트 수는 1 이상이어야 합니다")
        if not measured:
            raise InvariantViolation("측정 큐비트 집합이 비어 있습니다")
        if any(b <= a for a, b in zip(measured, measured[1:])):
            raise InvariantViolation(f"측정 큐비트는 엄격히 증가해야 합니다: {measured}")
        if measured[0] < 1 or measured[-1] > self.n:
            raise InvariantViolation(f"측정 큐비트가 [1, {self.n}] 범위를 벗어났습니다: {measured}")
        object.__setattr__(self, "measured", measured)

    @property
    def k(self) -> int:
        return len(self.measured)

    @property
    def is_global(self) -> bool:
        return self.k == self.n

    @property
    def dark(self) -> tuple[int, ...]:
        """측정되지 않는 다크 큐비트"""
        return tuple(q for q in range(1, self.n + 1) if q not in self.measured)

    @classmethod
    def global_(cls, n: int) -> "MeasurementSpec":
        return cls(n, tuple(range(1, n + 1)))

    @classmethod
    def prefix(cls, n: int, k: int) -> "MeasurementSpec":
        return cls(n, tuple(range(1, k + 1)))


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """2^n × 2^n 유니터리 행렬 (생성 시 U†U = I 검사)"""
    entries: np.ndarray
    tol: float = UNITARY_TOL

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvariantViolation(f"정방 행렬이 아닙니다: shape={mat.shape}")
        qubit_count(mat.shape[0])
        drift = unitarity_error(mat)
        if drift > self.tol:
            raise InvariantViolation(f"유니터리가 아닙니다 (‖U†U − I‖ = {drift:.3e})")
        object.__setattr__(self, "entries", _readonly(mat))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_qubits(self) -> int:
        return qubit_count(self.dim)

    @property
    def dagger(self) -> np.ndarray:
        return self.entries.conj().T

    @classmethod
    def identity(cls, n: int) -> "UnitaryOperator":
        return cls(np.eye(1 << n, dtype=complex))


def unitarity_error(mat: np.ndarray) -> float:
    mat = np.asarray(mat, dtype=complex)
    return float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))


def hermiticity_error(mat: np.ndarray) -> float:
    mat = np.asarray(mat, dtype=complex)
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """이중 확률 행렬 W (음이 아닌 성분, 행·열 합 1)"""
    entries: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvariantViolation(f"정방 행렬이 아닙니다: shape={mat.shape}")
        if mat.min() < -NORM_TOL:
            raise InvariantViolation(f"음수 성분 {mat.min():.3e}")
        row_err = np.max(np.abs(mat.sum(axis=1) - 1.0))
        col_err = np.max(np.abs(mat.sum(axis=0) - 1.0))
        if max(row_err, col_err) > STOCHASTIC_TOL:
            raise InvariantViolation(f"이중 확률 행렬이 아닙니다 (행 오차 {row_err:.3e}, 열 오차 {col_err:.3e})")
        object.__setattr__(self, "entries", _readonly(mat, dtype=float))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class FitResult:
    """유니스토캐스틱 근사 결과"""
    unitary: UnitaryOperator
    residual: float
    restarts_used: int
    converged: bool
    # 재시작별 최종 잔차 (인덱스 순)
    restart_residuals: tuple[float, ...] = ()
    best_restart: Optional[int] = None


def observables_for(obs, count: int) -> list[Observable]:
    """단일 관측량 또는 큐비트별 관측량 목록을 길이 count 목록으로 정규화"""
    if isinstance(obs, Observable):
        return [obs] * count
    if obs is None:
        return [Observable.computational()] * count
    listed: Sequence[Observable] = list(obs)
    if len(listed) != count:
        raise InvariantViolation(f"관측량 {len(listed)}개 ≠ 측정 큐비트 {count}개")
    return list(listed)
