"""하이브리드 동역학 - 쌍선형 슈뢰딩거 방정식 컴파일과 진화-측정 루프"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import structlog
from scipy import linalg

from models import (
    UNITARY_TOL,
    BooleanWord,
    InvariantViolation,
    MeasurementSpec,
    StateVector,
    UnitaryOperator,
    hermiticity_error,
    qubit_count,
)
from quantum.core import measure

logger = structlog.get_logger()

SCHEDULE_TOL = 1e-12


def hermitian_propagator(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(−iH dt) = V exp(−iΛ dt) V†"""
    w, V = linalg.eigh(H)
    return (V * np.exp(-1j * w * dt)) @ V.conj().T


@dataclass(frozen=True, eq=False)
class HamiltonianSet:
    """H(s) = H0 + Σ u_ℓ(s) H_ℓ"""
    drift: np.ndarray
    controls: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        drift = np.array(self.drift, dtype=complex)
        controls = tuple(np.array(h, dtype=complex) for h in self.controls)
        for name, mat in [("H0", drift)] + [(f"H{l + 1}", h) for l, h in enumerate(controls)]:
            if mat.ndim != 2 or mat.shape != drift.shape:
                raise InvariantViolation(f"{name} 차원 {mat.shape} ≠ {drift.shape}")
            err = hermiticity_error(mat)
            if err > UNITARY_TOL:
                raise InvariantViolation(f"{name}이(가) 에르미트가 아닙니다 (오차 {err:.3e})")
            mat.flags.writeable = False
        qubit_count(drift.shape[0])
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "controls", controls)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @property
    def p(self) -> int:
        return len(self.controls)

    def generator(self, u: Sequence[float]) -> np.ndarray:
        u = tuple(float(v) for v in u)
        if len(u) != self.p:
            raise InvariantViolation(f"제어값 {len(u)}개 ≠ 제어 해밀토니언 {self.p}개")
        H = self.drift.copy()
        for value, h in zip(u, self.controls):
            H = H + value * h
        return H

    @classmethod
    def from_skew(cls, A: np.ndarray, B: Sequence[np.ndarray] = ()) -> "HamiltonianSet":
        """A = −iH0, B_ℓ = −iH_ℓ 형식 입력"""
        return cls(1j * np.asarray(A), tuple(1j * np.asarray(b) for b in B))


@dataclass(frozen=True)
class Segment:
    duration: float
    controls: tuple[float, ...] = ()


@dataclass(frozen=True)
class ControlSchedule:
    """측정 구간별 구간 상수 제어. 구간마다 세그먼트 길이 합 = T"""
    period: float
    intervals: tuple[tuple[Segment, ...], ...]

    def __post_init__(self):
        if self.period <= 0:
            raise InvariantViolation(f"측정 주기 T={self.period}는 양수여야 합니다")
        for t, segments in enumerate(self.intervals):
            if not segments or any(s.duration <= 0 for s in segments):
                raise InvariantViolation(f"구간 {t}: 세그먼트 길이는 양수여야 합니다")
            total = sum(s.duration for s in segments)
            if abs(total - self.period) > SCHEDULE_TOL:
                raise InvariantViolation(f"구간 {t}: 세그먼트 합 {total!r} ≠ T={self.period!r}")

    def __len__(self) -> int:
        return len(self.intervals)


def segment_unitary(hams: HamiltonianSet, u: Sequence[float], dt: float) -> UnitaryOperator:
    if dt < 0:
        raise InvariantViolation(f"구간 길이 dt={dt}는 음수일 수 없습니다")
    return UnitaryOperator(hermitian_propagator(hams.generator(u), dt))


def ordered_product(segments: Sequence[Segment], hams: HamiltonianSet) -> UnitaryOperator:
    """나중 세그먼트가 왼쪽에 곱해지는 순서곱"""
    total = np.eye(hams.dim, dtype=complex)
    for segment in segments:
        total = segment_unitary(hams, segment.controls, segment.duration).entries @ total
    return UnitaryOperator(total)


def interval_unitary(schedule: ControlSchedule, hams: HamiltonianSet, t: int) -> UnitaryOperator:
    if not 0 <= t < len(schedule):
        raise InvariantViolation(f"구간 {t}이(가) 스케줄({len(schedule)}개 구간)에 없습니다")
    return ordered_product(schedule.intervals[t], hams)


@dataclass(frozen=True, eq=False)
class HybridStep:
    """한 측정 시점의 (측정 전 상태, 결과, 사후 상태)"""
    t: int
    pre_state: StateVector
    outcome: BooleanWord
    probability: float
    post_state: StateVector


# policy(t, history) -> UnitaryOperator 또는 세그먼트 목록
Policy = Callable[[int, tuple[HybridStep, ...]], Union[UnitaryOperator, Sequence[Segment]]]


@dataclass(eq=False)
class UnitarySchedule:
    """구간 전파자 U_0, U_1, … (고정 목록, 상수, 또는 피드백 정책)"""
    unitaries: tuple[UnitaryOperator, ...] = ()
    constant: Optional[UnitaryOperator] = None
    policy: Optional[Policy] = None
    hamiltonians: Optional[HamiltonianSet] = None

    @classmethod
    def fixed(cls, unitaries: Sequence[UnitaryOperator]) -> "UnitarySchedule":
        return cls(unitaries=tuple(unitaries))

    @classmethod
    def time_invariant(cls, U: UnitaryOperator) -> "UnitarySchedule":
        return cls(constant=U)

    @classmethod
    def compiled(cls, schedule: ControlSchedule, hams: HamiltonianSet) -> "UnitarySchedule":
        return cls.fixed([interval_unitary(schedule, hams, t) for t in range(len(schedule))])

    @classmethod
    def feedback(cls, policy: Policy, hams: Optional[HamiltonianSet] = None) -> "UnitarySchedule":
        return cls(policy=policy, hamiltonians=hams)

    @property
    def is_feedback(self) -> bool:
        return self.policy is not None

    def covers(self, steps: int) -> bool:
        if self.constant is not None or self.policy is not None:
            return True
        return len(self.unitaries) >= steps

    def at(self, t: int, history: tuple[HybridStep, ...] = ()) -> UnitaryOperator:
        if self.constant is not None:
            return self.constant
        if self.policy is None:
            if not 0 <= t < len(self.unitaries):
                raise InvariantViolation(f"스케줄에 구간 {t}의 유니터리가 없습니다")
            return self.unitaries[t]

        chosen = self.policy(t, history)
        if isinstance(chosen, UnitaryOperator):
            return chosen
        if self.hamiltonians is None:
            raise InvariantViolation("제어 세그먼트를 컴파일할 해밀토니언이 없습니다")
        return ordered_product(tuple(chosen), self.hamiltonians)


def as_schedule(unitaries) -> UnitarySchedule:
    """UnitaryOperator 하나, 목록, 또는 UnitarySchedule을 받아 UnitarySchedule로"""
    if isinstance(unitaries, UnitarySchedule):
        return unitaries
    if isinstance(unitaries, UnitaryOperator):
        return UnitarySchedule.time_invariant(unitaries)
    return UnitarySchedule.fixed(list(unitaries))


def run_hybrid(
    state0: StateVector,
    unitaries,
    spec: MeasurementSpec,
    obs,
    steps: int,
    rng: np.random.Generator,
    until: Optional[Callable[[BooleanWord], bool]] = None,
) -> list[HybridStep]:
    """t = 0 측정 후 steps번 진화-측정. 궤적 길이 steps + 1 (until 충족 시 조기 종료)"""
    schedule = as_schedule(unitaries)
    if steps < 1:
        raise InvariantViolation(f"단계 수 {steps}는 1 이상이어야 합니다")
    if not schedule.covers(steps):
        raise InvariantViolation(f"스케줄 길이 {len(schedule.unitaries)} < 단계 수 {steps}")

    word, prob, post = measure(state0, spec, obs, rng)
    trajectory = [HybridStep(0, state0, word, prob, post)]
    if until is not None and until(word):
        return trajectory

    for t in range(steps):
        pre = post.evolve(schedule.at(t, tuple(trajectory)))
        word, prob, post = measure(pre, spec, obs, rng)
        trajectory.append(HybridStep(t + 1, pre, word, prob, post))
        logger.debug("hybrid.step", t=t + 1, outcome=str(word), probability=prob)
        if until is not None and until(word):
            break
    return trajectory
