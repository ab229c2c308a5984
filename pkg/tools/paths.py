"""국소 측정 모드 - simulate-local, path-prob"""
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np
import structlog

from models import MeasurementSpec
from pbn import PathRecord
from pbn.local_measure import (
    markov_gap,
    oracle_path_probabilities,
    path_probabilities,
    sample_local_path,
    trace_path,
)
from storage import output_session
from tools import tool_handler
from tools.inputs import (
    active_config,
    digests,
    load_observable,
    load_state,
    make_rng,
    measurement_spec,
    parse_words,
    unitary_schedule,
)

logger = structlog.get_logger()

# 보고서에 markov_gap을 포함하는 최대 열거 비트 수 k(t+2)
GAP_REPORT_BITS = 10


def _path_columns(k: int, width: int) -> list[str]:
    return (
        [f"x_{q + 1}" for q in range(k)]
        + ["prob"]
        + [f"re_beta_{j + 1}" for j in range(width)]
        + [f"im_beta_{j + 1}" for j in range(width)]
    )


def _path_rows(record: PathRecord) -> np.ndarray:
    rows = []
    for t, (word, beta, prob) in enumerate(zip(record.outcomes, record.betas, record.probs)):
        rows.append([t, *word.bits, prob, *beta.real, *beta.imag])
    return np.array(rows, dtype=float)


@tool_handler
def simulate_local() -> dict[str, Any]:
    """국소 측정 표본 경로 runs개와 각 시점의 β(t)"""
    config = active_config()
    config.require("measured")
    rng = make_rng(config)
    state = load_state(config)
    obs = load_observable(config)
    spec = measurement_spec(config, state.n)
    unitaries = unitary_schedule(config, config.steps)

    streams = rng.spawn(config.runs)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        records = list(pool.map(
            lambda stream: sample_local_path(state, unitaries, config.steps, stream, spec, obs),
            streams,
        ))

    width = 1 << (state.n - spec.k)
    table = np.vstack([
        np.hstack([np.full((record.steps + 1, 1), run), _path_rows(record)])
        for run, record in enumerate(records)
    ])
    columns = ["run", "t"] + _path_columns(spec.k, width)
    inputs = digests(config, "state", "unitaries", "observable")
    with output_session(config.out, config.mode, config.seed, inputs) as writer:
        path = writer.write_table("path.csv", table, columns, int_columns=2 + spec.k)

    # 마지막 시점 결과의 경험적 분포
    finals = np.bincount([r.outcomes[-1].index - 1 for r in records], minlength=1 << spec.k)
    report: dict[str, Any] = {
        "n": state.n,
        "k": spec.k,
        "measured": list(spec.measured),
        "runs": config.runs,
        "steps": config.steps,
        "final_outcome_frequencies": (finals / config.runs).tolist(),
        "outputs": [path],
    }
    if 1 <= config.steps - 1 and spec.k * (config.steps + 1) <= GAP_REPORT_BITS:
        report["markov_gap"] = markov_gap(state, unitaries, config.steps - 1, spec, obs)
    logger.info("tool.simulate_local", runs=config.runs, steps=config.steps, k=spec.k)
    return report


@tool_handler
def path_prob() -> dict[str, Any]:
    """주어진 결과 경로의 조건부 확률 (β 재귀와 전체 상태 계산 비교)"""
    config = active_config()
    config.require("path")
    state = load_state(config)
    obs = load_observable(config)
    words = parse_words(config.path)
    if config.measured:
        spec = measurement_spec(config, state.n)
    else:
        spec = MeasurementSpec.prefix(state.n, words[0].m)
    unitaries = unitary_schedule(config, max(len(words) - 1, 1))

    probs = path_probabilities(state, unitaries, words, spec, obs)
    oracle = oracle_path_probabilities(state, unitaries, words, spec, obs)
    feasible = len(probs) == len(words) and probs[-1] > 0
    width = 1 << (state.n - spec.k)

    if feasible:
        table = _path_rows(trace_path(state, unitaries, words, spec, obs))
    else:
        # 불가능한 경로는 확률 0이 나온 시점까지만, β는 NaN
        table = np.array([
            [t, *words[t].bits, probs[t], *([np.nan] * (2 * width))]
            for t in range(len(probs))
        ], dtype=float)
    oracle_column = np.full((table.shape[0], 1), np.nan)
    oracle_column[: min(len(oracle), table.shape[0]), 0] = oracle[: table.shape[0]]
    table = np.hstack([table[:, : 2 + spec.k], oracle_column, table[:, 2 + spec.k:]])
    beta_columns = _path_columns(spec.k, width)[spec.k + 1:]
    columns = ["t"] + [f"x_{q + 1}" for q in range(spec.k)] + ["prob", "oracle_prob"] + beta_columns

    inputs = digests(config, "state", "unitaries", "observable")
    with output_session(config.out, config.mode, config.seed, inputs) as writer:
        path = writer.write_table("path.csv", table, columns, int_columns=1 + spec.k)

    agreement = max(
        (abs(a - b) for a, b in zip(probs, oracle)),
        default=0.0,
    )
    return {
        "path": [str(w) for w in words],
        "feasible": feasible,
        "probabilities": list(probs),
        "oracle_probabilities": list(oracle),
        "oracle_max_difference": agreement,
        "joint_probability": float(np.prod(probs)),
        "outputs": [path],
    }
