"""유도 확률 불리언 네트워크 모듈"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from models import BooleanWord, InvariantViolation, qubit_count

# 유니터리 허용 오차(1e-10)에 맞춘 행·열 합 검사
ROW_SUM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """전이행렬 P_t. 행 = 출발 ⌊x(t)⌋, 열 = 도착 ⌊x(t+1)⌋"""
    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(self.entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvariantViolation(f"정방 행렬이 아닙니다: shape={mat.shape}")
        if mat.min() < -ROW_SUM_TOL or mat.max() > 1 + ROW_SUM_TOL:
            raise InvariantViolation("전이 확률이 [0, 1] 범위를 벗어났습니다")
        row_err = np.max(np.abs(mat.sum(axis=1) - 1.0))
        col_err = np.max(np.abs(mat.sum(axis=0) - 1.0))
        if max(row_err, col_err) > ROW_SUM_TOL:
            raise InvariantViolation(f"이중 확률이 아닙니다 (행 {row_err:.3e}, 열 {col_err:.3e})")
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return qubit_count(self.dim)

    def probability(self, source: BooleanWord, target: BooleanWord) -> float:
        return float(self.entries[source.index - 1, target.index - 1])

    def row(self, source: BooleanWord) -> np.ndarray:
        return self.entries[source.index - 1]


@dataclass(frozen=True)
class BooleanMapping:
    """f_[α1..αN]: s_i ↦ s_{α_i} (α는 1부터 시작)"""
    alpha: tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        size = len(alpha)
        if size == 0 or any(not 1 <= a <= size for a in alpha):
            raise InvariantViolation(f"α 성분은 [1, {size}] 범위여야 합니다: {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return len(self.alpha)

    @property
    def matrix(self) -> np.ndarray:
        """열 원-핫 행렬 [δ^{α1}, …, δ^{αN}]"""
        mat = np.zeros((self.dim, self.dim))
        mat[np.array(self.alpha) - 1, np.arange(self.dim)] = 1.0
        return mat

    def apply(self, word: BooleanWord) -> BooleanWord:
        return BooleanWord.from_index(self.alpha[word.index - 1], word.m)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.alpha) + "]"


@dataclass(frozen=True, eq=False)
class PathRecord:
    """국소 측정 표본 경로: 결과, β(t), 조건부 확률 𝒫(t)"""
    k: int
    outcomes: tuple[BooleanWord, ...]
    betas: tuple[np.ndarray, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.outcomes) == len(self.betas) == len(self.probs)):
            raise InvariantViolation("결과, β, 확률 시퀀스 길이가 다릅니다")
        for t, (word, beta, prob) in enumerate(zip(self.outcomes, self.betas, self.probs)):
            if word.m != self.k:
                raise InvariantViolation(f"t={t}: 결과 길이 {word.m} ≠ k={self.k}")
            if not 0 < prob <= 1 + ROW_SUM_TOL:
                raise InvariantViolation(f"t={t}: 조건부 확률 {prob}이(가) (0, 1] 밖입니다")
            if abs(float(np.vdot(beta, beta).real) - prob) > ROW_SUM_TOL:
                raise InvariantViolation(f"t={t}: ‖β‖² ≠ 𝒫")

    @property
    def steps(self) -> int:
        return len(self.outcomes) - 1

    @property
    def joint_probability(self) -> float:
        return float(np.prod(self.probs))


@dataclass(frozen=True, eq=False)
class ChainSimulation:
    """몬테카를로 추정 p̂(t)와 정확한 p(t) (행 = t, 열 = ⌊x⌋ − 1)"""
    p_hat: np.ndarray
    p_exact: np.ndarray
    runs: int

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.p_hat - self.p_exact)))


@dataclass(frozen=True, eq=False)
class QubitMarginals:
    """출발 비트열에서 한 단계 후 큐비트별 주변 전이와 결합 분포

    maps[i]는 길이 2 벡터로, 큐비트 i+1의 2×2 한 단계 전이 중 출발 비트
    start.bits[i] 행만 담는다. 다른 행은 나머지 큐비트의 출발값에 따라
    달라지므로 start 하나로는 정해지지 않는다.
    """
    start: BooleanWord
    joint: np.ndarray
    # maps[i][a] = P(x_{i+1}(1) = a | x(0) = start)
    maps: tuple[np.ndarray, ...]
    product_gap: Optional[float] = None

    def is_product_of_marginals(self, tol: float = 1e-12) -> bool:
        return (self.product_gap or 0.0) <= tol
