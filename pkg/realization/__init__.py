"""양자 실현 모듈 - 이중 확률 행렬을 측정 연쇄로 실현"""
from dataclasses import dataclass

import numpy as np

from models import FitResult
from pbn import TransitionMatrix


@dataclass(frozen=True, eq=False)
class ChainRealization:
    """적합된 유니터리와 그로부터 유도된 연쇄"""
    n: int
    fit: FitResult
    transition: TransitionMatrix
    # p_exact[t] = 유도 연쇄의 p(t)
    p_exact: np.ndarray
    # ‖P(U)ᵀ − W‖_max
    max_deviation: float
    deviation_bound: float

    @property
    def within_bound(self) -> bool:
        return self.max_deviation <= self.deviation_bound
