"""도달 시간 - 하한 공식과 피드백 정책의 몬테카를로 추정"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
import structlog

from controllability import HittingCurve
from models import BooleanWord, InvariantViolation, MeasurementSpec, StateVector, UnitaryOperator
from quantum.core import basis_word
from quantum.dynamics import Policy, UnitarySchedule, run_hybrid

logger = structlog.get_logger()

CHUNK_RUNS = 512


def hitting_lower_bound(delta: float, t: int) -> float:
    """1 − (δ² − δ⁴/4)^t"""
    if not 0 < delta < np.sqrt(2):
        raise InvariantViolation(f"δ={delta}는 (0, √2) 범위여야 합니다")
    if t < 0:
        raise InvariantViolation(f"t={t}는 음수일 수 없습니다")
    return 1.0 - (delta ** 2 - delta ** 4 / 4.0) ** t


def constant_policy(U: UnitaryOperator) -> Policy:
    def policy(t, history):
        return U
    return policy


def steering_policy(target: BooleanWord, overlap: float) -> Policy:
    """사후 기저 상태 |x⟩를 √overlap |X*⟩ + √(1−overlap) |x⟩ 로 보내는 회전

    사후 상태가 이미 |X*⟩이면 항등.
    """
    if not 0 <= overlap <= 1:
        raise InvariantViolation(f"overlap={overlap}는 [0, 1] 범위여야 합니다")
    dim = 1 << target.m
    a, b = np.sqrt(1.0 - overlap), np.sqrt(overlap)
    goal = target.index - 1

    def policy(t, history):
        post = history[-1].post_state
        word = basis_word(post)
        if word is None:
            raise InvariantViolation("조향 정책은 계산 기저 사후 상태에서만 동작합니다")
        here = word.index - 1
        U = np.eye(dim, dtype=complex)
        if here != goal:
            U[here, here], U[goal, here] = a, b
            U[here, goal], U[goal, goal] = -b, a
        return UnitaryOperator(U)

    return policy


def _hit_times(
    policy: Policy,
    x0: BooleanWord,
    x_star: BooleanWord,
    runs: int,
    horizon: int,
    spec: MeasurementSpec,
    obs,
    rng: np.random.Generator,
    runner: Callable,
) -> list[Optional[int]]:
    state0 = StateVector.basis(x0)
    schedule = UnitarySchedule.feedback(policy)
    times: list[Optional[int]] = []
    for _ in range(runs):
        trajectory = runner(state0, schedule, spec, obs, horizon, rng, until=lambda word: word == x_star)
        last = trajectory[-1]
        times.append(last.t if last.outcome == x_star else None)
    return times


def estimate_hitting(
    policy: Policy,
    x0: BooleanWord,
    x_star: BooleanWord,
    runs: int,
    horizon: int,
    rng: np.random.Generator,
    spec: Optional[MeasurementSpec] = None,
    obs=None,
    runner: Callable = run_hybrid,
    workers: int = 1,
) -> HittingCurve:
    """T_hit = inf{t ≥ 0: x(t) = X*}의 경험적 누적분포"""
    if x0.m != x_star.m:
        raise InvariantViolation("X0와 X*의 길이가 다릅니다")
    if runs < 1 or horizon < 1:
        raise InvariantViolation("runs와 horizon은 1 이상이어야 합니다")
    spec = spec or MeasurementSpec.global_(x0.m)

    chunks = [min(CHUNK_RUNS, runs - start) for start in range(0, runs, CHUNK_RUNS)]
    streams = rng.spawn(len(chunks))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = pool.map(
            lambda args: _hit_times(policy, x0, x_star, args[0], horizon, spec, obs, args[1], runner),
            zip(chunks, streams),
        )
        times = [t for part in parts for t in part]

    counts = np.zeros(horizon + 1)
    for t in times:
        if t is not None:
            counts[t] += 1
    curve = HittingCurve(
        probabilities=np.cumsum(counts) / runs,
        runs=runs,
        censored=sum(t is None for t in times),
    )
    logger.info("hitting.estimated", runs=runs, horizon=horizon, censored=curve.censored)
    return curve
