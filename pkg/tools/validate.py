"""validate 모드 - 입력 파일의 유니터리성, 에르미트성, 정규화, 이중 확률성 검사"""
from typing import Any, Optional

import numpy as np
import structlog

from models import NORM_TOL, STOCHASTIC_TOL, UNITARY_TOL, hermiticity_error, unitarity_error
from storage import read_matrix
from tools import STATUS_INVARIANT, tool_handler
from tools.inputs import active_config

logger = structlog.get_logger()

KINDS = ("unitary", "state", "hamiltonian", "stochastic")


def _split_kind(entry: str) -> tuple[Optional[str], str]:
    """`kind:path` 접두사. 접두사가 없으면 종류는 내용으로 추정"""
    kind, sep, path = entry.partition(":")
    if sep and kind in KINDS:
        return kind, path
    return None, entry


def infer_kind(values: np.ndarray) -> str:
    if min(values.shape) == 1:
        return "state"
    if values.shape[0] == values.shape[1]:
        if not np.any(values.imag) and values.real.min() >= 0:
            return "stochastic"
        if hermiticity_error(values) <= UNITARY_TOL:
            return "hamiltonian"
    return "unitary"


def _violation(check: str, magnitude: float, tol: float) -> dict[str, Any]:
    return {"check": check, "magnitude": magnitude, "tolerance": tol}


def _power_of_two(dim: int) -> bool:
    return dim >= 2 and dim & (dim - 1) == 0


def check_values(values: np.ndarray, kind: str) -> list[dict[str, Any]]:
    """위반 목록. 정방 행렬이 아니면 수치 검사는 건너뜀"""
    if kind == "state":
        vec = values.reshape(-1)
        violations = []
        if not _power_of_two(vec.size):
            violations.append({"check": "dimension", "magnitude": float(vec.size), "structural": True})
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            violations.append(_violation("norm", norm, NORM_TOL))
        return violations

    rows, cols = values.shape
    if rows != cols:
        return [{"check": "square", "magnitude": float(abs(rows - cols)), "shape": [rows, cols], "structural": True}]

    violations = []
    if kind in ("unitary", "hamiltonian") and not _power_of_two(rows):
        violations.append({"check": "dimension", "magnitude": float(rows), "structural": True})
    if kind == "unitary":
        err = unitarity_error(values)
        if err > UNITARY_TOL:
            violations.append(_violation("unitarity", err, UNITARY_TOL))
    elif kind == "hamiltonian":
        err = hermiticity_error(values)
        if err > UNITARY_TOL:
            violations.append(_violation("hermiticity", err, UNITARY_TOL))
    elif kind == "stochastic":
        imag = float(np.max(np.abs(values.imag)))
        if imag > 0:
            violations.append(_violation("real", imag, 0.0))
        real = values.real
        if real.min() < -NORM_TOL:
            violations.append(_violation("nonnegative", float(-real.min()), NORM_TOL))
        row_err = float(np.max(np.abs(real.sum(axis=1) - 1.0)))
        col_err = float(np.max(np.abs(real.sum(axis=0) - 1.0)))
        if row_err > STOCHASTIC_TOL:
            violations.append(_violation("row_sums", row_err, STOCHASTIC_TOL))
        if col_err > STOCHASTIC_TOL:
            violations.append(_violation("column_sums", col_err, STOCHASTIC_TOL))
    return violations


@tool_handler
def validate_inputs(files: Optional[list[str]] = None) -> dict[str, Any]:
    if files is None:
        config = active_config()
        config.require("inputs")
        files = list(config.inputs)

    results = []
    for entry in files:
        kind, path = _split_kind(entry)
        values = read_matrix(path)
        inferred = kind is None
        kind = kind or infer_kind(values)
        violations = check_values(values, kind)
        for v in violations:
            logger.warning("validate.violation", path=path, kind=kind, check=v["check"], magnitude=v["magnitude"])
        result: dict[str, Any] = {"path": path, "kind": kind, "inferred": inferred, "violations": violations}
        if inferred and kind == "hamiltonian":
            # 추정된 에르미트 행렬은 유니터리성도 함께 보고
            err = float(unitarity_error(values))
            result["unitarity_error"] = err
            if err > UNITARY_TOL:
                result["note"] = "에르미트 행렬로 추정했고 유니터리가 아닙니다. 유니터리 입력이라면 unitary: 접두사를 쓰세요"
                logger.warning("validate.inferred_hamiltonian", path=path, unitarity_error=err)
        results.append(result)

    count = sum(len(r["violations"]) for r in results)
    report: dict[str, Any] = {"files": results, "violation_count": count}
    if count:
        report["success"] = False
        report["status"] = STATUS_INVARIANT
    return report
