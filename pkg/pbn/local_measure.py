"""국소 측정 하의 비마르코프 유도 동역학 - β 재귀와 경로 확률"""
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
import structlog

from models import (
    BooleanWord,
    InfeasibleRequest,
    InvariantViolation,
    MeasurementSpec,
    StateVector,
    UnitaryOperator,
)
from pbn import PathRecord
from quantum.core import (
    DEGENERATE_PROB,
    axis_order,
    apply_factors,
    frame_factors,
    measure,
    outcome_distribution,
    collapse,
)
from quantum.dynamics import as_schedule

logger = structlog.get_logger()

# β 재귀와 전체 상태 계산의 일치 허용 오차
CROSS_CHECK_TOL = 1e-10
# markov_gap 열거 한도 (결과 비트 총수)
MAX_GAP_BITS = 16


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """측정 좌표계 회전 + 측정 큐비트를 앞쪽으로 모으는 치환"""
    spec: MeasurementSpec
    factors: dict
    order: tuple[int, ...]

    @classmethod
    def build(cls, spec: MeasurementSpec, obs=None) -> "LocalFrame":
        return cls(spec, frame_factors(spec, obs), tuple(axis_order(spec)))

    @property
    def k(self) -> int:
        return self.spec.k

    def state(self, state: StateVector) -> np.ndarray:
        """계산 좌표계, 측정 큐비트 선두 순서의 진폭"""
        n = self.spec.n
        if state.n != n:
            raise InvariantViolation(f"상태 n={state.n} ≠ 측정 사양 n={n}")
        daggers = {q: u.conj().T for q, u in self.factors.items()}
        phi = apply_factors(state.amplitudes, n, daggers).reshape((2,) * n)
        return np.transpose(phi, self.order).reshape(-1)

    def unitary(self, U: UnitaryOperator) -> np.ndarray:
        """F† U F를 측정 큐비트 선두 순서로 재배열"""
        n = self.spec.n
        if U.dim != (1 << n):
            raise InvariantViolation(f"유니터리 차원 {U.dim} ≠ 2^{n}")
        tensor = np.asarray(U.entries).reshape((2,) * (2 * n))
        for q, u in self.factors.items():
            row, col = q - 1, n + q - 1
            tensor = np.moveaxis(np.tensordot(u.conj().T, tensor, axes=([1], [row])), 0, row)
            tensor = np.moveaxis(np.tensordot(tensor, u, axes=([col], [0])), -1, col)
        axes = list(self.order) + [n + a for a in self.order]
        return np.transpose(tensor, axes).reshape(1 << n, 1 << n)

    def restore(self, amplitudes: np.ndarray) -> np.ndarray:
        """state()의 역변환"""
        n = self.spec.n
        phi = np.transpose(np.asarray(amplitudes).reshape((2,) * n), np.argsort(self.order)).reshape(-1)
        return apply_factors(phi, n, self.factors)


def _block(word: BooleanWord, width: int) -> slice:
    start = (word.index - 1) * width
    return slice(start, start + width)


def beta_init(state0, x0: BooleanWord) -> np.ndarray:
    """β(0) = 측정 좌표계 진폭 중 x0 블록 (state0는 측정 큐비트 선두 순서)"""
    amps = state0.amplitudes if isinstance(state0, StateVector) else np.asarray(state0, dtype=complex)
    dim = amps.size
    if x0.m < 1 or (1 << x0.m) > dim:
        raise InvariantViolation(f"k={x0.m}이(가) 큐비트 수보다 큽니다")
    width = dim >> x0.m
    return np.array(amps[_block(x0, width)], dtype=complex)


def beta_step(beta: np.ndarray, U, x_now: BooleanWord, x_next: BooleanWord) -> np.ndarray:
    """β(t+1) = (x♯_next ⊗ I)ᵀ U (x♯_now ⊗ I) β(t)/‖β(t)‖"""
    if x_now.m != x_next.m:
        raise InvariantViolation("연속 결과의 길이가 다릅니다")
    matrix = U.entries if isinstance(U, UnitaryOperator) else np.asarray(U)
    width = beta.size
    if matrix.shape[0] != width << x_now.m:
        raise InvariantViolation(f"유니터리 차원 {matrix.shape[0]} ≠ β 길이 {width} × 2^{x_now.m}")
    norm = np.linalg.norm(beta)
    if norm ** 2 < DEGENERATE_PROB:
        raise InvariantViolation("‖β‖ = 0: 불가능한 경로를 확장했습니다")
    return matrix[_block(x_next, width), _block(x_now, width)] @ (beta / norm)


def _resolve(state0: StateVector, path: Sequence[BooleanWord], spec: Optional[MeasurementSpec], obs) -> LocalFrame:
    if not path:
        raise InvariantViolation("경로가 비어 있습니다")
    if spec is None:
        spec = MeasurementSpec.prefix(state0.n, path[0].m)
    if any(word.m != spec.k for word in path):
        raise InvariantViolation(f"경로 결과 길이가 k={spec.k}와 다릅니다")
    return LocalFrame.build(spec, obs)


def _frame_unitaries(frame: LocalFrame, unitaries, steps: int) -> list[np.ndarray]:
    schedule = as_schedule(unitaries)
    if schedule.is_feedback:
        raise InvariantViolation("β 재귀는 피드포워드 스케줄만 지원합니다")
    if not schedule.covers(steps):
        raise InvariantViolation(f"스케줄 길이 {len(schedule.unitaries)} < 단계 수 {steps}")
    return [frame.unitary(schedule.at(t)) for t in range(steps)]


def _beta_sequence(state0, unitaries, path, spec, obs) -> Iterator[tuple[np.ndarray, float]]:
    frame = _resolve(state0, path, spec, obs)
    frame_us = _frame_unitaries(frame, unitaries, len(path) - 1)
    beta = beta_init(frame.state(state0), path[0])
    prob = float(np.vdot(beta, beta).real)
    yield beta, prob
    for t in range(len(path) - 1):
        if prob < DEGENERATE_PROB:
            return
        beta = beta_step(beta, frame_us[t], path[t], path[t + 1])
        prob = float(np.vdot(beta, beta).real)
        yield beta, prob


def path_probabilities(
    state0: StateVector,
    unitaries,
    path: Sequence[BooleanWord],
    spec: Optional[MeasurementSpec] = None,
    obs=None,
) -> tuple[float, ...]:
    """𝒫(t) = ‖β(t)‖². 경로가 불가능해지면 0을 마지막 값으로 두고 중단"""
    probs = []
    for _, prob in _beta_sequence(state0, unitaries, path, spec, obs):
        probs.append(0.0 if prob < DEGENERATE_PROB else prob)
    return tuple(probs)


def trace_path(
    state0: StateVector,
    unitaries,
    path: Sequence[BooleanWord],
    spec: Optional[MeasurementSpec] = None,
    obs=None,
) -> PathRecord:
    """주어진 경로의 β와 조건부 확률 기록. 확률 0 경로는 InvariantViolation"""
    betas, probs = [], []
    for beta, prob in _beta_sequence(state0, unitaries, path, spec, obs):
        if prob < DEGENERATE_PROB:
            raise InvariantViolation(f"t={len(probs)}에서 경로 확률이 0입니다")
        betas.append(beta)
        probs.append(prob)
    return PathRecord(k=path[0].m, outcomes=tuple(path), betas=tuple(betas), probs=tuple(probs))


def oracle_path_probabilities(
    state0: StateVector,
    unitaries,
    path: Sequence[BooleanWord],
    spec: Optional[MeasurementSpec] = None,
    obs=None,
) -> tuple[float, ...]:
    """β 없이 전체 상태에 측정 공준을 직접 적용한 조건부 확률"""
    if not path:
        raise InvariantViolation("경로가 비어 있습니다")
    spec = spec or MeasurementSpec.prefix(state0.n, path[0].m)
    schedule = as_schedule(unitaries)
    if not schedule.covers(len(path) - 1):
        raise InvariantViolation("스케줄이 경로보다 짧습니다")

    probs = []
    state = state0
    for t, word in enumerate(path):
        if t > 0:
            state = state.evolve(schedule.at(t - 1))
        prob = float(outcome_distribution(state, spec, obs)[word.index - 1])
        if prob < DEGENERATE_PROB:
            probs.append(0.0)
            break
        probs.append(prob)
        state = collapse(state, word, spec, obs)
    return tuple(probs)


def reconstruct_post_state(frame: LocalFrame, word: BooleanWord, beta: np.ndarray) -> np.ndarray:
    """|x⟩ ⊗ β/‖β‖ 를 원래 큐비트 순서와 좌표계로 복원"""
    prefixed = np.kron(word.onehot, beta / np.linalg.norm(beta))
    return frame.restore(prefixed)


def sample_local_path(
    state0: StateVector,
    unitaries,
    steps: int,
    rng: np.random.Generator,
    spec: MeasurementSpec,
    obs=None,
) -> PathRecord:
    """전체 상태를 measure로 진화시키며 β를 따로 추적해 교차 검증"""
    if steps < 0:
        raise InvariantViolation(f"단계 수 {steps}는 음수일 수 없습니다")
    schedule = as_schedule(unitaries)
    if schedule.is_feedback or not schedule.covers(steps):
        raise InvariantViolation("경로 샘플링에는 길이가 충분한 피드포워드 스케줄이 필요합니다")
    frame = LocalFrame.build(spec, obs)

    word, prob, post = measure(state0, spec, obs, rng)
    beta = beta_init(frame.state(state0), word)
    outcomes, betas, probs = [word], [beta], [prob]
    for t in range(steps):
        U = schedule.at(t)
        pre = post.evolve(U)
        next_word, prob, post = measure(pre, spec, obs, rng)
        beta = beta_step(beta, frame.unitary(U), word, next_word)
        word = next_word
        outcomes.append(word)
        betas.append(beta)
        probs.append(prob)

    for t, (w, b, p) in enumerate(zip(outcomes, betas, probs)):
        drift = abs(float(np.vdot(b, b).real) - p)
        if drift > CROSS_CHECK_TOL:
            raise InvariantViolation(f"t={t}: ‖β‖²와 측정 확률 차이 {drift:.3e}")
    expected = reconstruct_post_state(frame, word, beta)
    if np.max(np.abs(expected - post.amplitudes)) > CROSS_CHECK_TOL:
        raise InvariantViolation("사후 상태가 |x⟩ ⊗ β/‖β‖와 일치하지 않습니다")

    # 기록에는 β 재귀 값을 그대로 둔다
    probs = [float(np.vdot(b, b).real) for b in betas]
    return PathRecord(k=spec.k, outcomes=tuple(outcomes), betas=tuple(betas), probs=tuple(probs))


def markov_gap(
    state0: StateVector,
    unitaries,
    t: int,
    spec: MeasurementSpec,
    obs=None,
) -> float:
    """max |P(x(t+1) | x(t)) − P(x(t+1) | x(t), x(t−1))| (정확한 열거)"""
    if t < 1:
        raise InvariantViolation("t ≥ 1이어야 이전 결과를 조건으로 둘 수 있습니다")
    if spec.k * (t + 2) > MAX_GAP_BITS:
        raise InfeasibleRequest(f"열거 크기 2^{spec.k * (t + 2)}이(가) 한도를 넘습니다")

    frame = LocalFrame.build(spec, obs)
    frame_us = _frame_unitaries(frame, unitaries, t + 1)
    outcomes = 1 << spec.k
    words = [BooleanWord.from_index(i + 1, spec.k) for i in range(outcomes)]
    start = frame.state(state0)
    # joint[a, b, c] = P(x(t−1)=a, x(t)=b, x(t+1)=c)
    joint = np.zeros((outcomes, outcomes, outcomes))

    def descend(step: int, word: BooleanWord, beta: np.ndarray, weight: float, history: tuple[int, ...]):
        if step == t + 1:
            joint[history[-3], history[-2], history[-1]] += weight
            return
        for nxt in words:
            child = beta_step(beta, frame_us[step], word, nxt)
            prob = float(np.vdot(child, child).real)
            if prob >= DEGENERATE_PROB:
                descend(step + 1, nxt, child, weight * prob, history + (nxt.index - 1,))

    for word in words:
        beta = beta_init(start, word)
        prob = float(np.vdot(beta, beta).real)
        if prob >= DEGENERATE_PROB:
            descend(0, word, beta, prob, (word.index - 1,))

    gap = 0.0
    for b in range(outcomes):
        pair = joint[:, b, :]
        marginal_total = pair.sum()
        if marginal_total < DEGENERATE_PROB:
            continue
        marginal = pair.sum(axis=0) / marginal_total
        for a in range(outcomes):
            history_total = pair[a].sum()
            if history_total < DEGENERATE_PROB:
                continue
            gap = max(gap, float(np.max(np.abs(pair[a] / history_total - marginal))))
    logger.debug("local.markov_gap", t=t, gap=gap)
    return gap
