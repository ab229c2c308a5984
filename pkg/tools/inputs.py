"""설정에서 도메인 객체 읽기 (상태, 유니터리, 관측량, 측정 사양)"""
from typing import Optional, Sequence, Union

import numpy as np

from config import ConfigError, ExperimentConfig, get_config
from models import (
    BooleanWord,
    InvariantViolation,
    MeasurementSpec,
    Observable,
    StateVector,
    UnitaryOperator,
)
from storage import file_digest, read_matrix, read_vector

# 파일에서 읽은 분포는 이 오차 이내면 재정규화
DISTRIBUTION_TOL = 1e-9


def active_config() -> ExperimentConfig:
    config = get_config()
    if not config:
        raise ConfigError("실험 설정이 없습니다. 설정 파일 경로를 첫 번째 인자로 지정해주세요.")
    return config


def make_rng(config: ExperimentConfig) -> np.random.Generator:
    if config.seed is None:
        raise ConfigError(f"{config.mode} 모드는 seed가 필요합니다")
    return np.random.default_rng(config.seed)


def digests(config: ExperimentConfig, *names: str) -> dict[str, str]:
    """헤더에 기록할 입력 파일 요약값"""
    result = {}
    for name in names:
        value = getattr(config, name)
        paths = value if isinstance(value, tuple) else ((value,) if value else ())
        for i, path in enumerate(paths):
            if name == "p0" and "," in path:
                continue
            key = name if len(paths) == 1 else f"{name}{i + 1}"
            result[key] = file_digest(path)
    return result


def load_state(config: ExperimentConfig) -> StateVector:
    config.require("state")
    state = StateVector.from_amplitudes(read_vector(config.state))
    if config.n is not None and state.n != config.n:
        raise InvariantViolation(f"상태 큐비트 수 {state.n} ≠ n={config.n}")
    return state


def load_unitaries(config: ExperimentConfig) -> list[UnitaryOperator]:
    config.require("unitaries")
    unitaries = [UnitaryOperator(read_matrix(path)) for path in config.unitaries]
    dims = {U.dim for U in unitaries}
    if len(dims) != 1:
        raise InvariantViolation(f"유니터리 차원이 서로 다릅니다: {sorted(dims)}")
    return unitaries


def unitary_schedule(config: ExperimentConfig, steps: int) -> Union[list[UnitaryOperator], UnitaryOperator]:
    """파일 하나면 시불변, 여러 개면 구간별 목록"""
    unitaries = load_unitaries(config)
    if len(unitaries) == 1:
        return unitaries[0]
    if len(unitaries) < steps:
        raise InvariantViolation(f"유니터리 {len(unitaries)}개 < 단계 수 {steps}")
    return unitaries


def load_observable(config: ExperimentConfig) -> Optional[Observable]:
    """observable 파일은 2×2 기저 변환 u (열 = v0, v1)"""
    if not config.observable:
        return None
    return Observable.from_unitary(read_matrix(config.observable), config.lambda0, config.lambda1)


def measurement_spec(config: ExperimentConfig, n: int) -> MeasurementSpec:
    if config.measured:
        return MeasurementSpec(n, config.measured)
    return MeasurementSpec.global_(n)


def parse_words(values: Sequence[str]) -> list[BooleanWord]:
    return [BooleanWord.parse(v) for v in values]


def load_distribution(config: ExperimentConfig, size: int) -> np.ndarray:
    """p0: 쉼표로 구분한 값 또는 벡터 파일"""
    config.require("p0")
    if "," in config.p0:
        try:
            p0 = np.array([float(v) for v in config.p0.split(",")])
        except ValueError as e:
            raise ConfigError(f"p0 값이 올바르지 않습니다: {e}") from e
    else:
        p0 = read_vector(config.p0).real
    if p0.size != size:
        raise InvariantViolation(f"p0 길이 {p0.size} ≠ {size}")
    if p0.min() < 0 or abs(p0.sum() - 1.0) > DISTRIBUTION_TOL:
        raise InvariantViolation(f"p0가 확률 분포가 아닙니다 (합 {p0.sum():.15g})")
    return p0 / p0.sum()


def check_rows_normalized(table: np.ndarray, name: str, tol: float = 1e-10):
    """기록 전 확률 표의 각 행 합 검사"""
    err = float(np.max(np.abs(np.asarray(table).sum(axis=1) - 1.0)))
    if err > tol:
        raise InvariantViolation(f"{name}: 행 합 오차 {err:.3e}")


def word_labels(m: int) -> list[str]:
    return [str(BooleanWord.from_index(i + 1, m)) for i in range(1 << m)]
