"""전역 측정 하의 유도 마르코프 연쇄

측정 좌표계 유니터리 U^M, 전이행렬 P, 무작위 불리언 사상 분포,
몬테카를로/정확 연쇄 전파.
"""
import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Union

import numpy as np
import structlog

from models import (
    BooleanWord,
    InfeasibleRequest,
    InvariantViolation,
    UnitaryOperator,
    observables_for,
)
from pbn import BooleanMapping, ChainSimulation, QubitMarginals, TransitionMatrix
from quantum.core import kron

logger = structlog.get_logger()

# 사상 열거는 (2^n)^(2^n)개 항이므로 n ≤ 2로 제한
MAX_ENUMERATION_QUBITS = 2
# 런을 고정 크기 청크로 나누어 스레드 수와 무관한 결과를 보장
CHUNK_RUNS = 2048


def measurement_frame(U: UnitaryOperator, obs=None) -> UnitaryOperator:
    """U^M = (u1⊗…⊗un)† U (u1⊗…⊗un)"""
    n = U.n_qubits
    frame = kron(*[o.u for o in observables_for(obs, n)])
    if frame.shape != U.entries.shape:
        raise InvariantViolation(f"차원 불일치: U {U.dim}, 관측량 좌표계 {frame.shape[0]}")
    return UnitaryOperator(frame.conj().T @ U.entries @ frame)


def transition_matrix(Um: UnitaryOperator) -> TransitionMatrix:
    """[P]_{i,j} = |[U^M]_{j,i}|²"""
    return TransitionMatrix(np.abs(Um.entries.T) ** 2)


def mapping_probability(Um: UnitaryOperator, mapping: BooleanMapping) -> float:
    """ℙ(F = f_α) = Π_i |[U^M]_{α_i, i}|²"""
    if mapping.dim != Um.dim:
        raise InvariantViolation(f"사상 크기 {mapping.dim} ≠ 차원 {Um.dim}")
    rows = np.array(mapping.alpha) - 1
    return float(np.prod(np.abs(Um.entries[rows, np.arange(Um.dim)]) ** 2))


def _sample_targets(P: np.ndarray, sources: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """각 출발 인덱스(0부터)에 대해 P의 해당 행에서 도착 인덱스를 뽑음"""
    cumulative = np.cumsum(P[sources], axis=1)
    cumulative[:, -1] = 1.0
    draws = 1.0 - rng.random(sources.size)
    return np.minimum((cumulative < draws[:, None]).sum(axis=1), P.shape[0] - 1)


def sample_mapping(Um: UnitaryOperator, rng: np.random.Generator) -> BooleanMapping:
    """출발 상태마다 독립적으로 α_i ~ |[U^M]_{·,i}|²"""
    P = transition_matrix(Um).entries
    targets = _sample_targets(P, np.arange(Um.dim), rng)
    return BooleanMapping(tuple(int(a) + 1 for a in targets))


def enumerate_mappings(
    Um: UnitaryOperator,
    threshold: Optional[float] = 0.0,
) -> list[tuple[BooleanMapping, float]]:
    """확률 > threshold인 모든 사상. threshold=None이면 확률 0인 사상까지 전부"""
    n = Um.n_qubits
    if n > MAX_ENUMERATION_QUBITS:
        raise InfeasibleRequest(f"n={n}: 사상 열거는 n ≤ {MAX_ENUMERATION_QUBITS}에서만 지원합니다")

    weights = np.abs(Um.entries) ** 2
    size = Um.dim
    mappings = []
    for rows in itertools.product(range(size), repeat=size):
        prob = float(np.prod(weights[list(rows), np.arange(size)]))
        if threshold is None or prob > threshold:
            mappings.append((BooleanMapping(tuple(r + 1 for r in rows)), prob))
    logger.debug("mappings.enumerated", n=n, kept=len(mappings))
    return mappings


def propagate(
    transitions: Union[TransitionMatrix, Sequence[TransitionMatrix]],
    p0: np.ndarray,
    steps: int,
) -> np.ndarray:
    """p(t+1) = P_tᵀ p(t). 결과 shape (steps + 1, N)"""
    p = np.asarray(p0, dtype=float)
    if isinstance(transitions, TransitionMatrix):
        transitions = [transitions] * steps
    if len(transitions) < steps:
        raise InvariantViolation(f"전이행렬 {len(transitions)}개 < 단계 수 {steps}")

    table = np.empty((steps + 1, p.size))
    table[0] = p
    for t in range(steps):
        if transitions[t].dim != p.size:
            raise InvariantViolation(f"차원 불일치: P {transitions[t].dim}, p {p.size}")
        p = transitions[t].entries.T @ p
        table[t + 1] = p
    return table


def steady_state(
    P: TransitionMatrix,
    p0: Optional[np.ndarray] = None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> tuple[np.ndarray, int]:
    """거듭제곱 반복으로 정상 분포. (분포, 반복 횟수)"""
    p = np.full(P.dim, 1.0 / P.dim) if p0 is None else np.asarray(p0, dtype=float)
    for it in range(1, max_iter + 1):
        nxt = P.entries.T @ p
        if np.max(np.abs(nxt - p)) < tol:
            return nxt, it
        p = nxt
    logger.warning("chain.steady_state_not_converged", max_iter=max_iter)
    return p, max_iter


def _initial_distribution(initial, size: int) -> np.ndarray:
    if isinstance(initial, BooleanWord):
        if (1 << initial.m) != size:
            raise InvariantViolation(f"초기 비트열 길이 {initial.m}이(가) 차원 {size}와 맞지 않습니다")
        return initial.onehot
    p0 = np.asarray(initial, dtype=float).reshape(-1)
    if p0.size != size or p0.min() < 0 or abs(p0.sum() - 1.0) > 1e-12:
        raise InvariantViolation("p0는 길이 2^n인 확률 벡터여야 합니다")
    return p0


def _frame_transitions(unitaries, steps: int) -> list[TransitionMatrix]:
    if isinstance(unitaries, UnitaryOperator):
        return [transition_matrix(unitaries)] * steps
    unitaries = list(unitaries)
    if len(unitaries) < steps:
        raise InvariantViolation(f"스케줄 길이 {len(unitaries)} < 단계 수 {steps}")
    return [transition_matrix(U) for U in unitaries[:steps]]


def _simulate_chunk(P_list: list[np.ndarray], p0: np.ndarray, runs: int, rng: np.random.Generator) -> np.ndarray:
    size = p0.size
    counts = np.zeros((len(P_list) + 1, size), dtype=np.int64)
    states = rng.choice(size, size=runs, p=p0)
    counts[0] = np.bincount(states, minlength=size)
    for t, P in enumerate(P_list):
        states = _sample_targets(P, states, rng)
        counts[t + 1] = np.bincount(states, minlength=size)
    return counts


def simulate_chain(
    initial: Union[np.ndarray, BooleanWord],
    unitaries: Union[UnitaryOperator, Sequence[UnitaryOperator]],
    steps: int,
    runs: int,
    rng: np.random.Generator,
    workers: int = 1,
) -> ChainSimulation:
    """측정 좌표계 유니터리 U^M 스케줄로 연쇄 시뮬레이션

    런은 CHUNK_RUNS 단위로 나뉘어 각각 분리된 난수 스트림을 받으므로
    workers 값과 관계없이 같은 시드에서 같은 결과가 나온다.
    """
    if runs < 1:
        raise InvariantViolation(f"런 수 {runs}는 1 이상이어야 합니다")
    if isinstance(unitaries, UnitaryOperator):
        first = unitaries
    else:
        unitaries = list(unitaries)
        if not unitaries:
            raise InvariantViolation("유니터리 스케줄이 비어 있습니다")
        first = unitaries[0]
    transitions = _frame_transitions(unitaries, steps)
    p0 = _initial_distribution(initial, first.dim)
    p_exact = propagate(transitions, p0, steps)

    chunks = [min(CHUNK_RUNS, runs - start) for start in range(0, runs, CHUNK_RUNS)]
    streams = rng.spawn(len(chunks))
    P_list = [P.entries for P in transitions]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        counts = list(pool.map(lambda args: _simulate_chunk(P_list, p0, *args), zip(chunks, streams)))

    p_hat = np.sum(counts, axis=0) / runs
    simulation = ChainSimulation(p_hat=p_hat, p_exact=p_exact, runs=runs)
    logger.info("chain.simulated", runs=runs, steps=steps, max_deviation=simulation.max_deviation)
    return simulation


def qubit_marginals(Um: UnitaryOperator, start: BooleanWord) -> QubitMarginals:
    """한 단계 결합 분포 행과 큐비트별 주변 분포, 곱 분포와의 최대 차이"""
    n = Um.n_qubits
    if start.m != n:
        raise InvariantViolation(f"출발 비트열 길이 {start.m} ≠ n={n}")
    joint = transition_matrix(Um).row(start).copy()
    tensor = joint.reshape((2,) * n)
    maps = tuple(
        tensor.sum(axis=tuple(a for a in range(n) if a != i)) for i in range(n)
    )
    product = maps[0]
    for marginal in maps[1:]:
        product = np.kron(product, marginal)
    gap = float(np.max(np.abs(product - joint)))
    return QubitMarginals(start=start, joint=joint, maps=maps, product_gap=gap)
