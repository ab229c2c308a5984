"""realize 모드 - 이중 확률 행렬을 유니터리로 적합하고 유도 연쇄 기록"""
from typing import Any

import numpy as np
import structlog

from models import StochasticMatrix
from realization.unistochastic import UnistochasticFitter, realize_chain
from storage import output_session, read_real
from tools import tool_handler
from tools.inputs import (
    active_config,
    check_rows_normalized,
    digests,
    load_distribution,
    make_rng,
    word_labels,
)

logger = structlog.get_logger()


@tool_handler
def realize() -> dict[str, Any]:
    config = active_config()
    config.require("stochastic")
    rng = make_rng(config)
    W = StochasticMatrix(read_real(config.stochastic))
    size = W.entries.shape[0]

    if config.p0:
        p0 = load_distribution(config, size)
    else:
        p0 = np.zeros(size)
        p0[0] = 1.0

    fitter = UnistochasticFitter(
        restarts=config.restarts,
        iters=config.iters,
        step=config.step_size,
        workers=config.threads,
    )
    result = realize_chain(W, p0, config.steps, rng, fitter=fitter)
    fit = result.fit
    check_rows_normalized(result.transition.entries, "transition")
    check_rows_normalized(result.p_exact, "p_exact")

    labels = word_labels(result.n)
    fit_rows = np.array([[i, res] for i, res in enumerate(fit.restart_residuals)])
    times = np.arange(config.steps + 1)[:, None]
    inputs = digests(config, "stochastic", "p0")
    with output_session(config.out, config.mode, config.seed, inputs) as writer:
        outputs = [writer.write_table("fit.csv", fit_rows, ["restart", "residual"], int_columns=1)]
        outputs += writer.write_complex("fitted_u", fit.unitary.entries)
        outputs.append(writer.write_table("transition.csv", result.transition.entries, [f"to_{label}" for label in labels]))
        outputs.append(writer.write_table(
            "p_exact.csv",
            np.hstack([times, result.p_exact]),
            ["t"] + [f"p_{label}" for label in labels],
            int_columns=1,
        ))

    logger.info("tool.realize", n=result.n, residual=fit.residual, converged=fit.converged)
    return {
        "n": result.n,
        "residual": fit.residual,
        "converged": fit.converged,
        "restarts_used": fit.restarts_used,
        "best_restart": fit.best_restart,
        "max_deviation": result.max_deviation,
        "deviation_bound": result.deviation_bound,
        "outputs": outputs,
    }
