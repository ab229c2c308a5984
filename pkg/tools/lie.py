"""lie-check 모드 - 해밀토니언 집합의 제어 가능성 인증서"""
from typing import Any

import numpy as np
import structlog

from controllability import FULL_SU, SYMPLECTIC
from controllability.lie import classify, drift_case_certificate, lie_closure
from models import InvariantViolation, qubit_count
from quantum.dynamics import HamiltonianSet
from storage import output_session, read_matrix
from tools import tool_handler
from tools.inputs import active_config, digests

logger = structlog.get_logger()


def _hamiltonians(config) -> HamiltonianSet:
    """drift가 없으면 0 행렬을 드리프트로 둔다"""
    controls = [read_matrix(path) for path in config.controls]
    if config.drift:
        drift = read_matrix(config.drift)
    elif controls:
        drift = np.zeros_like(controls[0])
    else:
        raise InvariantViolation("lie-check에는 drift 또는 controls가 필요합니다")
    return HamiltonianSet(drift, tuple(controls))


@tool_handler
def lie_check() -> dict[str, Any]:
    """입력은 에르미트 H; 생성원은 −iH"""
    config = active_config()
    hams = _hamiltonians(config)
    n = qubit_count(hams.dim)
    if config.n is not None and config.n != n:
        raise InvariantViolation(f"해밀토니언 차원 2^{n} ≠ 2^{config.n}")
    A = -1j * hams.drift
    B = [-1j * h for h in hams.controls]

    outputs: list[str] = []
    if config.drift:
        certificate = drift_case_certificate(A, B, n, config.t_large_assumed)
        algebra = certificate.algebra
        report: dict[str, Any] = {"n": n, "drift": True, "controllable": certificate.certified, **certificate.to_dict()}
    else:
        algebra = classify(lie_closure(B, config.tol))
        report = {
            "n": n,
            "drift": False,
            "controllable": algebra.tag in (FULL_SU, SYMPLECTIC),
            "algebra": algebra.to_dict(),
        }

    if algebra.J is not None:
        with output_session(config.out, config.mode, config.seed, digests(config, "drift", "controls")) as writer:
            outputs = writer.write_complex("symplectic_form", algebra.J)
    report["outputs"] = outputs
    logger.info("tool.lie_check", n=n, tag=algebra.tag, dim=algebra.dim)
    return report
