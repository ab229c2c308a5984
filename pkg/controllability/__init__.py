"""제어 가능성 모듈 - 리 대수 인증서와 도달 시간 경계"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

FULL_SU = "FullSu"
SYMPLECTIC = "Symplectic"
OTHER = "Other"


@dataclass(frozen=True, eq=False)
class LieBasis:
    """Re tr(X†Y)에 대해 정규직교인 반에르미트 기저"""
    N: int
    elements: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.elements)

    def gram(self) -> np.ndarray:
        vecs = np.array([np.concatenate([x.real.ravel(), x.imag.ravel()]) for x in self.elements])
        return vecs @ vecs.T if self.elements else np.zeros((0, 0))


@dataclass(frozen=True, eq=False)
class AlgebraClass:
    tag: str
    # 대각합 성분을 뺀 부분의 차원
    dim: int
    J: Optional[np.ndarray] = None
    # 대각합 방향 iI가 폐포에 들어 있는지
    trace_ray: bool = False
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "dim": self.dim,
            "trace_ray": self.trace_ray,
            "has_J": self.J is not None,
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True)
class DriftCertificate:
    """드리프트가 있는 경우의 조건 보고"""
    certified: bool
    condition_i: bool
    condition_ii_asserted: bool
    algebra: AlgebraClass
    report: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "condition_i": self.condition_i,
            "condition_ii_asserted": self.condition_ii_asserted,
            "algebra": self.algebra.to_dict(),
            "report": list(self.report),
        }


@dataclass(frozen=True, eq=False)
class HittingCurve:
    """경험적 ℙ(T_hit ≤ t), t = 0..horizon"""
    probabilities: np.ndarray
    runs: int
    # 도달하지 못한 런 수
    censored: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    @property
    def sigma(self) -> np.ndarray:
        p = self.probabilities
        return np.sqrt(p * (1.0 - p) / self.runs)
