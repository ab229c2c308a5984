"""hitting 모드 - 목표 비트열 도달 시간의 경험적 분포와 하한"""
from typing import Any

import numpy as np
import structlog

from config import ConfigError
from controllability.hitting import (
    constant_policy,
    estimate_hitting,
    hitting_lower_bound,
    steering_policy,
)
from models import BooleanWord, InvariantViolation
from storage import output_session
from tools import tool_handler
from tools.inputs import active_config, digests, load_observable, load_unitaries, make_rng

logger = structlog.get_logger()

# 경험적 곡선이 하한보다 이만큼의 σ 배수 이상 낮으면 위반으로 보고
SIGMA_BAND = 3.0


def _overlap(config) -> float:
    """overlap이 없으면 δ로부터 (1 − δ²/2)²"""
    if config.overlap is not None:
        return config.overlap
    if config.delta is not None:
        return (1.0 - config.delta ** 2 / 2.0) ** 2
    raise ConfigError("steering 정책에는 overlap 또는 delta가 필요합니다")


@tool_handler
def hitting() -> dict[str, Any]:
    config = active_config()
    config.require("x0", "target")
    rng = make_rng(config)
    x0 = BooleanWord.parse(config.x0)
    target = BooleanWord.parse(config.target)
    obs = load_observable(config)

    if config.policy == "steering":
        if obs is not None:
            raise ConfigError("steering 정책은 계산 기저 측정에서만 동작합니다 (observable 제거)")
        policy = steering_policy(target, _overlap(config))
        names: tuple[str, ...] = ()
    elif config.policy == "constant":
        U = load_unitaries(config)[0]
        if U.n_qubits != target.m:
            raise InvariantViolation(f"유니터리 큐비트 수 {U.n_qubits} ≠ 목표 길이 {target.m}")
        policy = constant_policy(U)
        names = ("unitaries", "observable")
    else:
        raise ConfigError(f"알 수 없는 정책: {config.policy} (steering 또는 constant)")

    curve = estimate_hitting(policy, x0, target, config.runs, config.steps, rng, obs=obs, workers=config.threads)

    columns = ["t", "empirical", "sigma"]
    table = [curve.times, curve.probabilities, curve.sigma]
    report: dict[str, Any] = {
        "runs": curve.runs,
        "horizon": config.steps,
        "censored": curve.censored,
        "final_probability": float(curve.probabilities[-1]),
    }
    if config.delta is not None:
        bound = np.array([hitting_lower_bound(config.delta, int(t)) for t in curve.times])
        columns.append("bound")
        table.append(bound)
        below = curve.probabilities < bound - SIGMA_BAND * curve.sigma
        report["bound_respected"] = not bool(np.any(below))
        report["bound_violations"] = [int(t) for t in curve.times[below]]

    with output_session(config.out, config.mode, config.seed, digests(config, *names)) as writer:
        path = writer.write_table("hitting.csv", np.column_stack(table), columns, int_columns=1)
    report["outputs"] = [path]
    logger.info("tool.hitting", policy=config.policy, runs=curve.runs, censored=curve.censored)
    return report
