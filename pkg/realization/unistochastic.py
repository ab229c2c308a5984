"""유니스토캐스틱 근사 - 유니터리 군 위의 리만 경사 하강

목적함수 f(U) = Σ (|U_ij|² − W_ij)².
접공간 방향 Ω(반에르미트)로 U ← U·exp(−ηΩ) 갱신, 백트래킹 선 탐색.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
import structlog
from scipy import linalg

from models import (
    NORM_TOL,
    STOCHASTIC_TOL,
    FitResult,
    InfeasibleRequest,
    InvariantViolation,
    StochasticMatrix,
    UnitaryOperator,
    qubit_count,
    unitarity_error,
)
from pbn.global_measure import propagate, transition_matrix
from quantum.dynamics import hermitian_propagator
from realization import ChainRealization

logger = structlog.get_logger()

# 정확 실현 판정 임계값
EXACT_THRESHOLD = 1e-8
# 이 이상 유니터리성이 흐트러지면 극분해로 재직교화
RETRACTION_DRIFT = 1e-12
# Armijo 충분 감소 계수
ARMIJO = 1e-4
# 영 성분이 있는 W 근처에서는 잔차가 4차로 평평해져 보폭이 크게 자라야 한다
MAX_STEP = 1e6


def check_doubly_stochastic(W, tol: float = STOCHASTIC_TOL) -> bool:
    mat = np.asarray(W, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvariantViolation(f"정방 행렬이 아닙니다: shape={mat.shape}")
    if mat.min() < -NORM_TOL:
        return False
    return bool(
        np.all(np.abs(mat.sum(axis=1) - 1.0) <= tol)
        and np.all(np.abs(mat.sum(axis=0) - 1.0) <= tol)
    )


def _entries(W) -> np.ndarray:
    return W.entries if isinstance(W, StochasticMatrix) else np.asarray(W, dtype=float)


def residual(U, W) -> float:
    """Σ (|U_ij|² − W_ij)²"""
    u = U.entries if isinstance(U, UnitaryOperator) else np.asarray(U)
    w = _entries(W)
    if u.shape != w.shape:
        raise InvariantViolation(f"차원 불일치: U {u.shape}, W {w.shape}")
    return float(np.sum((np.abs(u) ** 2 - w) ** 2))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """복소 가우시안 행렬의 QR 분해 (R 대각 위상 보정)"""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def retract(U: np.ndarray) -> np.ndarray:
    if unitarity_error(U) > RETRACTION_DRIFT:
        U, _ = linalg.polar(U)
    return U


def riemannian_gradient(U: np.ndarray, W: np.ndarray) -> np.ndarray:
    """U(N) 위의 기울기 Ω = (Z − Z†)/2, Z = 2U†E, E = 2(|U|² − W)∘U"""
    E = 2.0 * (np.abs(U) ** 2 - W) * U
    Z = 2.0 * U.conj().T @ E
    return 0.5 * (Z - Z.conj().T)


class UnistochasticFitter:
    """다중 재시작 리만 경사 하강 적합기"""

    def __init__(
        self,
        restarts: int = 50,
        iters: int = 2000,
        step: float = 0.5,
        min_step: float = 1e-12,
        max_step: float = MAX_STEP,
        target: float = 1e-20,
        workers: int = 1,
    ):
        if restarts < 1 or iters < 1:
            raise InvariantViolation("restarts와 iters는 1 이상이어야 합니다")
        if not 0 < min_step <= step <= max_step:
            raise InvariantViolation("보폭 설정은 0 < min_step ≤ step ≤ max_step 이어야 합니다")
        self.restarts = restarts
        self.iters = iters
        self.step = step
        self.min_step = min_step
        self.max_step = max_step
        self.target = target
        self.workers = max(1, workers)

    def descend(self, W: np.ndarray, U0: np.ndarray) -> tuple[np.ndarray, list[float]]:
        """한 재시작의 하강. (최종 U, 수락된 목적함수 값 이력)"""
        U = retract(U0)
        f = residual(U, W)
        history = [f]
        eta = self.step
        for _ in range(self.iters):
            if f <= self.target:
                break
            omega = riemannian_gradient(U, W)
            gnorm2 = float(np.sum(np.abs(omega) ** 2))
            if gnorm2 < 1e-30:
                break
            # exp(−ηΩ) = exp(−i(−iΩ)η)
            generator = -1j * omega
            while eta >= self.min_step:
                candidate = retract(U @ hermitian_propagator(generator, eta))
                fc = residual(candidate, W)
                if fc <= f - ARMIJO * eta * gnorm2:
                    break
                eta *= 0.5
            else:
                break
            U, f = candidate, fc
            history.append(f)
            eta = min(eta * 2.0, self.max_step)
        return U, history

    def _run_restart(self, W: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, float]:
        U, history = self.descend(W, random_unitary(rng, W.shape[0]))
        return U, history[-1]

    def fit(self, W, rng: np.random.Generator) -> FitResult:
        w = _entries(W)
        if not check_doubly_stochastic(w):
            raise InvariantViolation("W가 이중 확률 행렬이 아닙니다")

        streams = rng.spawn(self.restarts)
        results: list[tuple[np.ndarray, float]] = []
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for start in range(0, self.restarts, self.workers):
                batch = streams[start:start + self.workers]
                results.extend(pool.map(lambda s: self._run_restart(w, s), batch))
                if any(res < EXACT_THRESHOLD for _, res in results):
                    break

        # 처음 수렴한 재시작까지만 사용 (workers와 무관하게 같은 결과)
        cutoff = next((i for i, (_, res) in enumerate(results) if res < EXACT_THRESHOLD), len(results) - 1)
        considered = results[:cutoff + 1]
        best = min(range(len(considered)), key=lambda i: (considered[i][1], i))
        U, _ = considered[best]
        U = retract(U)
        fit = FitResult(
            unitary=UnitaryOperator(U),
            residual=residual(U, w),
            restarts_used=len(considered),
            converged=residual(U, w) < EXACT_THRESHOLD,
            restart_residuals=tuple(res for _, res in considered),
            best_restart=best,
        )
        if fit.converged:
            logger.info("fit.converged", residual=fit.residual, restarts_used=fit.restarts_used)
        else:
            logger.warning("fit.not_converged", residual=fit.residual, restarts_used=fit.restarts_used)
        return fit


def fit_unitary(
    W,
    restarts: int,
    iters: int,
    step: float,
    rng: np.random.Generator,
    workers: int = 1,
) -> FitResult:
    return UnistochasticFitter(restarts=restarts, iters=iters, step=step, workers=workers).fit(W, rng)


def realize_chain(
    W,
    p0,
    t_max: int,
    rng: np.random.Generator,
    fitter: Optional[UnistochasticFitter] = None,
) -> ChainRealization:
    """W를 log2 N 큐비트 측정 연쇄로 실현하고 유도 연쇄를 검증"""
    w = _entries(W)
    try:
        n = qubit_count(w.shape[0])
    except InvariantViolation as e:
        raise InfeasibleRequest(f"N={w.shape[0]}은(는) 2의 거듭제곱이 아닙니다") from e

    fit = (fitter or UnistochasticFitter()).fit(w, rng)
    transition = transition_matrix(fit.unitary)
    deviation = float(np.max(np.abs(transition.entries.T - w)))
    bound = float(np.sqrt(fit.residual)) + 1e-12
    if deviation > bound:
        raise InvariantViolation(f"유도 연쇄 편차 {deviation:.3e}가 한계 {bound:.3e}를 넘습니다")

    p_exact = propagate(transition, np.asarray(p0, dtype=float), t_max)
    logger.info("realize.done", n=n, residual=fit.residual, max_deviation=deviation)
    return ChainRealization(
        n=n,
        fit=fit,
        transition=transition,
        p_exact=p_exact,
        max_deviation=deviation,
        deviation_bound=bound,
    )
