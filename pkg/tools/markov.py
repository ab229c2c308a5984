"""전역 측정 모드 - transition, mappings, simulate-global"""
from typing import Any

import numpy as np
import structlog

from models import BooleanWord, MeasurementSpec
from pbn.global_measure import (
    enumerate_mappings,
    measurement_frame,
    simulate_chain,
    steady_state,
    transition_matrix,
)
from quantum.core import outcome_distribution
from storage import output_session
from tools import tool_handler
from tools.inputs import (
    active_config,
    check_rows_normalized,
    digests,
    load_distribution,
    load_observable,
    load_state,
    load_unitaries,
    make_rng,
    unitary_schedule,
    word_labels,
)

logger = structlog.get_logger()


@tool_handler
def transition() -> dict[str, Any]:
    """측정 좌표계 전이행렬 P (유니터리 파일마다 하나)"""
    config = active_config()
    obs = load_observable(config)
    unitaries = load_unitaries(config)
    n = unitaries[0].n_qubits
    labels = word_labels(n)

    outputs, summaries = [], []
    with output_session(config.out, config.mode, config.seed, digests(config, "unitaries", "observable")) as writer:
        for t, U in enumerate(unitaries):
            P = transition_matrix(measurement_frame(U, obs))
            check_rows_normalized(P.entries, "transition")
            name = "transition.csv" if len(unitaries) == 1 else f"transition_{t}.csv"
            outputs.append(writer.write_table(name, P.entries, [f"to_{label}" for label in labels]))
            stationary, iterations = steady_state(P)
            summaries.append({
                "t": t,
                "nonzero_transitions": int(np.count_nonzero(P.entries > 1e-15)),
                "steady_state": stationary.tolist(),
                "power_iterations": iterations,
            })

    logger.info("tool.transition", n=n, matrices=len(unitaries))
    return {"n": n, "matrices": summaries, "outputs": outputs}


@tool_handler
def mappings() -> dict[str, Any]:
    """무작위 불리언 사상 F의 분포 열거 (n ≤ 2)"""
    config = active_config()
    obs = load_observable(config)
    U = load_unitaries(config)[0]
    Um = measurement_frame(U, obs)
    entries = enumerate_mappings(Um, config.threshold)
    size = Um.dim

    rows = np.array([[*m.alpha, prob] for m, prob in entries]) if entries else np.zeros((0, size + 1))
    columns = [f"alpha_{i + 1}" for i in range(size)] + ["probability"]
    with output_session(config.out, config.mode, config.seed, digests(config, "unitaries", "observable")) as writer:
        path = writer.write_table("mappings.csv", rows, columns, int_columns=size)

    total = float(sum(prob for _, prob in entries))
    return {
        "n": Um.n_qubits,
        "count": len(entries),
        "total_probability": total,
        "mappings": [{"alpha": list(m.alpha), "probability": prob} for m, prob in entries if prob > 0][:64],
        "outputs": [path],
    }


@tool_handler
def simulate_global() -> dict[str, Any]:
    """전역 측정 연쇄 몬테카를로 p̂(t)와 정확한 p(t)"""
    config = active_config()
    rng = make_rng(config)
    obs = load_observable(config)
    schedule = unitary_schedule(config, config.steps)
    first = schedule if not isinstance(schedule, list) else schedule[0]
    n = first.n_qubits

    if isinstance(schedule, list):
        frames = [measurement_frame(U, obs) for U in schedule]
    else:
        frames = measurement_frame(schedule, obs)

    if config.state:
        initial = outcome_distribution(load_state(config), MeasurementSpec.global_(n), obs)
    elif config.p0:
        initial = load_distribution(config, 1 << n)
    else:
        config.require("x0")
        initial = BooleanWord.parse(config.x0)

    result = simulate_chain(initial, frames, config.steps, config.runs, rng, workers=config.threads)
    check_rows_normalized(result.p_hat, "p_hat")
    check_rows_normalized(result.p_exact, "p_exact")

    labels = word_labels(n)
    columns = ["t"] + [f"p_{label}" for label in labels]
    times = np.arange(config.steps + 1)[:, None]
    inputs = digests(config, "unitaries", "observable", "state", "p0")
    with output_session(config.out, config.mode, config.seed, inputs) as writer:
        outputs = [
            writer.write_table("p_hat.csv", np.hstack([times, result.p_hat]), columns, int_columns=1),
            writer.write_table("p_exact.csv", np.hstack([times, result.p_exact]), columns, int_columns=1),
        ]

    return {
        "n": n,
        "runs": config.runs,
        "steps": config.steps,
        "max_deviation": result.max_deviation,
        "final_exact": result.p_exact[-1].tolist(),
        "outputs": outputs,
    }
