"""다중 큐비트 선형대수와 사영 측정

기저 순서는 ⌊b⌋ 오름차순(첫 큐비트가 최상위 비트)이며 np.kron의 인자 순서와 같다.
"""
from functools import reduce
from typing import Optional

import numpy as np
import structlog

from models import (
    I2,
    NORM_TOL,
    UNITARY_TOL,
    BooleanWord,
    InvariantViolation,
    MeasurementSpec,
    StateVector,
    observables_for,
)

logger = structlog.get_logger()

# 이 확률 미만의 결과는 수치적 퇴화로 보고 다시 뽑는다
DEGENERATE_PROB = 1e-15
MAX_RESAMPLE = 64


def kron(*operands) -> np.ndarray:
    """크로네커 곱 a ⊗ b ⊗ … (앞 인자가 상위 비트)"""
    if not operands:
        raise InvariantViolation("kron에는 최소 하나의 인자가 필요합니다")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in operands))


def word_index(bits) -> int:
    return BooleanWord(tuple(bits)).index


def word_onehot(bits) -> np.ndarray:
    return BooleanWord(tuple(bits)).onehot


def word_from_index(index: int, m: int) -> BooleanWord:
    return BooleanWord.from_index(index, m)


def _check_spec(spec: MeasurementSpec, n: int):
    if spec.n != n:
        raise InvariantViolation(f"측정 사양 n={spec.n} ≠ 상태 n={n}")


def frame_factors(spec: MeasurementSpec, obs) -> dict[int, np.ndarray]:
    """측정 큐비트별 기저 변환 u_q (다크 큐비트는 생략 = 항등)"""
    observables = observables_for(obs, spec.k)
    return {q: o.u for q, o in zip(spec.measured, observables)}


def frame_unitary(spec: MeasurementSpec, obs) -> np.ndarray:
    """⊗ u_q (다크 큐비트 자리는 I)"""
    factors = frame_factors(spec, obs)
    return kron(*[factors.get(q, I2) for q in range(1, spec.n + 1)])


def apply_factors(amplitudes: np.ndarray, n: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    """큐비트별 2×2 연산자를 전체 행렬을 만들지 않고 적용"""
    tensor = np.asarray(amplitudes, dtype=complex).reshape((2,) * n)
    for q, mat in factors.items():
        axis = q - 1
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)


def axis_order(spec: MeasurementSpec) -> list[int]:
    return [q - 1 for q in spec.measured] + [q - 1 for q in spec.dark]


def measured_blocks(state: StateVector, spec: MeasurementSpec, obs) -> np.ndarray:
    """측정 좌표계 진폭을 (2^k, 2^{n-k}) 블록으로 재배열. 행 = 측정 결과 인덱스"""
    _check_spec(spec, state.n)
    factors = {q: u.conj().T for q, u in frame_factors(spec, obs).items()}
    phi = apply_factors(state.amplitudes, state.n, factors).reshape((2,) * state.n)
    return np.transpose(phi, axis_order(spec)).reshape(1 << spec.k, -1)


def projector_tensor(word: BooleanWord, spec: MeasurementSpec, obs) -> np.ndarray:
    """Π_x = ⊗ P_{x_q} (다크 큐비트는 I)"""
    if word.m != spec.k:
        raise InvariantViolation(f"결과 길이 {word.m} ≠ 측정 큐비트 수 {spec.k}")
    observables = dict(zip(spec.measured, observables_for(obs, spec.k)))
    bits = dict(zip(spec.measured, word.bits))
    factors = [
        observables[q].projector(bits[q]) if q in observables else I2
        for q in range(1, spec.n + 1)
    ]
    return kron(*factors)


def outcome_distribution(state: StateVector, spec: MeasurementSpec, obs=None) -> np.ndarray:
    """결과 x의 확률 ⟨ψ|Π_x|ψ⟩ (⌊x⌋ − 1 위치)"""
    blocks = measured_blocks(state, spec, obs)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise InvariantViolation(f"결과 분포 합 {total:.15g}")
    return probs


def collapse(state: StateVector, word: BooleanWord, spec: MeasurementSpec, obs=None) -> StateVector:
    """사후 상태 Π_x|ψ⟩/√p"""
    if word.m != spec.k:
        raise InvariantViolation(f"결과 길이 {word.m} ≠ 측정 큐비트 수 {spec.k}")
    blocks = measured_blocks(state, spec, obs)
    kept = np.zeros_like(blocks)
    kept[word.index - 1] = blocks[word.index - 1]
    norm = np.linalg.norm(kept)
    if norm ** 2 < DEGENERATE_PROB:
        raise InvariantViolation(f"결과 {word}의 사영이 0입니다")
    order = axis_order(spec)
    phi = np.transpose(kept.reshape((2,) * state.n), np.argsort(order)).reshape(-1)
    post = apply_factors(phi / norm, state.n, frame_factors(spec, obs))
    return StateVector(state.n, post / np.linalg.norm(post))


def measure(
    state: StateVector,
    spec: MeasurementSpec,
    obs,
    rng: np.random.Generator,
) -> tuple[BooleanWord, float, StateVector]:
    """사영 측정 1회: (결과, 확률, 사후 상태)"""
    probs = outcome_distribution(state, spec, obs)
    weights = probs / probs.sum()
    for attempt in range(MAX_RESAMPLE):
        index = int(rng.choice(weights.size, p=weights))
        if probs[index] >= DEGENERATE_PROB:
            break
        logger.warning("measure.degenerate_resample", outcome=index + 1, probability=float(probs[index]))
    else:
        raise InvariantViolation("퇴화 결과만 반복해서 샘플링되었습니다")

    word = BooleanWord.from_index(index + 1, spec.k)
    post = collapse(state, word, spec, obs)
    if abs(np.linalg.norm(post.amplitudes) - 1.0) > UNITARY_TOL:
        raise InvariantViolation("사후 상태 노름이 1이 아닙니다")
    return word, float(probs[index]), post


def frame_covariant_state(state: StateVector, spec: MeasurementSpec, obs) -> StateVector:
    """(⊗u)†|ψ⟩ - 계산 기저에서 같은 결과 분포를 주는 상태"""
    factors = {q: u.conj().T for q, u in frame_factors(spec, obs).items()}
    return StateVector(state.n, apply_factors(state.amplitudes, state.n, factors))


def basis_word(state: StateVector, m: Optional[int] = None) -> Optional[BooleanWord]:
    """상태가 계산 기저 벡터이면 해당 비트열, 아니면 None"""
    probs = np.abs(state.amplitudes) ** 2
    index = int(np.argmax(probs))
    if abs(probs[index] - 1.0) > NORM_TOL * 1e2:
        return None
    return BooleanWord.from_index(index + 1, m or state.n)
