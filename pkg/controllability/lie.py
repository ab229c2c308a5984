"""리 대수 폐포와 분류 (su(N) / 심플렉틱 / 기타)"""
from typing import Optional, Sequence

import numpy as np
import structlog
from scipy import linalg

from controllability import FULL_SU, OTHER, SYMPLECTIC, AlgebraClass, DriftCertificate, LieBasis
from models import UNITARY_TOL, InvariantViolation

logger = structlog.get_logger()

CLOSURE_TOL = 1e-8
# 채택/기각 특이값 사이에 요구하는 최소 비율
GAP_RATIO = 1e3


def _vec(X: np.ndarray) -> np.ndarray:
    """Re tr(X†Y) = _vec(X)·_vec(Y)"""
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def _mat(v: np.ndarray, N: int) -> np.ndarray:
    half = N * N
    return (v[:half] + 1j * v[half:]).reshape(N, N)


def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def skew_error(X: np.ndarray) -> float:
    return float(np.max(np.abs(X + X.conj().T))) if X.size else 0.0


def su_basis(N: int) -> list[np.ndarray]:
    """i × 일반화 겔만 행렬 / √2 (정규직교, 차원 N² − 1)"""
    basis = []
    for j in range(N):
        for k in range(j + 1, N):
            sym = np.zeros((N, N), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            anti = np.zeros((N, N), dtype=complex)
            anti[j, k], anti[k, j] = -1j, 1j
            basis.append(1j * sym / np.sqrt(2))
            basis.append(1j * anti / np.sqrt(2))
    for l in range(1, N):
        diag = np.zeros(N)
        diag[:l] = 1.0
        diag[l] = -l
        lam = np.sqrt(2.0 / (l * (l + 1))) * np.diag(diag)
        basis.append(1j * lam.astype(complex) / np.sqrt(2))
    return basis


class _Span:
    """재직교화를 포함한 그람-슈미트 누적기"""

    def __init__(self, N: int, tol: float):
        self.N = N
        self.tol = tol
        self.vectors: list[np.ndarray] = []

    def add(self, X: np.ndarray) -> bool:
        v = _vec(X)
        for _ in range(2):
            for b in self.vectors:
                v = v - (b @ v) * b
        norm = np.linalg.norm(v)
        if norm <= self.tol:
            return False
        self.vectors.append(v / norm)
        if len(self.vectors) > self.N * self.N:
            raise InvariantViolation(
                f"폐포 차원 {len(self.vectors)}이(가) N²={self.N * self.N}을 넘었습니다 (허용 오차 설정 확인)"
            )
        return True

    def matrices(self) -> list[np.ndarray]:
        return [_mat(v, self.N) for v in self.vectors]


def lie_closure(generators: Sequence[np.ndarray], tol: float = CLOSURE_TOL) -> LieBasis:
    """생성자들의 실수 스팬을 괄호에 대해 닫을 때까지 확장"""
    mats = [np.asarray(g, dtype=complex) for g in generators]
    if not mats:
        raise InvariantViolation("생성자가 없습니다")
    N = mats[0].shape[0]
    for i, X in enumerate(mats):
        if X.shape != (N, N):
            raise InvariantViolation(f"생성자 {i}의 차원 {X.shape} ≠ ({N}, {N})")
        err = skew_error(X)
        if err > UNITARY_TOL:
            raise InvariantViolation(f"생성자 {i}가 반에르미트가 아닙니다 (오차 {err:.3e})")

    span = _Span(N, tol)
    for X in mats:
        span.add(X)

    done: set[tuple[int, int]] = set()
    sweeps = 0
    while True:
        sweeps += 1
        added = False
        elements = span.matrices()
        for i in range(len(elements)):
            for j in range(i + 1, len(elements)):
                if (i, j) in done:
                    continue
                done.add((i, j))
                added |= span.add(bracket(elements[i], elements[j]))
        if not added:
            break
    logger.debug("lie.closure", N=N, dim=len(span.vectors), sweeps=sweeps)
    return LieBasis(N=N, elements=tuple(span.matrices()))


def _rank(rows: np.ndarray, tol: float, gap: float) -> tuple[int, Optional[np.ndarray], Optional[str]]:
    """(랭크, 행 공간 정규직교 기저, 간격 부족 시 진단 메시지)"""
    if rows.size == 0:
        return 0, rows, None
    _, s, vh = linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > tol))
    note = None
    if 0 < rank < s.size and s[rank] > 0 and s[rank - 1] / s[rank] < gap:
        note = f"특이값 간격 부족: σ_{rank}={s[rank - 1]:.3e}, σ_{rank + 1}={s[rank]:.3e}"
    return rank, vh[:rank], note


def _antisymmetric_units(N: int) -> list[np.ndarray]:
    units = []
    for a in range(N):
        for b in range(a + 1, N):
            E = np.zeros((N, N), dtype=complex)
            E[a, b], E[b, a] = 1.0, -1.0
            units.append(E)
    return units


def solve_symplectic_form(
    elements: Sequence[np.ndarray],
    tol: float = CLOSURE_TOL,
    gap: float = GAP_RATIO,
) -> tuple[Optional[np.ndarray], Optional[str]]:
    """모든 X에 대해 XJ + JXᵀ = 0인 반대칭 J (유일한 해가 아니면 None)"""
    N = elements[0].shape[0]
    units = _antisymmetric_units(N)
    columns = [np.concatenate([(X @ E + E @ X.T).ravel() for X in elements]) for E in units]
    A = np.column_stack(columns)
    _, s, vh = linalg.svd(A, full_matrices=False)
    smallest = s[-1]
    if smallest >= tol:
        return None, f"제약의 최소 특이값 {smallest:.3e} ≥ {tol:.0e}"
    if s.size > 1:
        runner_up = s[-2]
        if runner_up < tol:
            return None, "J 해 공간의 차원이 1보다 큽니다"
        if runner_up < gap * max(smallest, np.finfo(float).tiny):
            return None, f"J 특이값 간격 부족: {runner_up:.3e} / {smallest:.3e}"

    coeffs = vh[-1].conj()
    J = sum(c * E for c, E in zip(coeffs, units))
    J = J * np.sqrt(N) / np.linalg.norm(J)
    pivot = J.flat[np.argmax(np.abs(J))]
    J = J * (abs(pivot) / pivot)
    return J, None


def symplectic_subalgebra(J: np.ndarray) -> LieBasis:
    """{X ∈ su(N): XJ + JXᵀ = 0}의 정규직교 기저"""
    J = np.asarray(J, dtype=complex)
    N = J.shape[0]
    if np.max(np.abs(J + J.T)) > UNITARY_TOL:
        raise InvariantViolation("J가 반대칭이 아닙니다")
    basis = su_basis(N)
    M = np.column_stack([_vec(S @ J + J @ S.T) for S in basis])
    coeffs = linalg.null_space(M)
    elements = tuple(sum(c * S for c, S in zip(col, basis)) for col in coeffs.T)
    return LieBasis(N=N, elements=elements)


def classify(basis: LieBasis, tol: float = CLOSURE_TOL, gap: float = GAP_RATIO) -> AlgebraClass:
    N = basis.N
    if basis.dim == 0:
        return AlgebraClass(OTHER, 0)
    identity = np.eye(N)
    traceless = [X - (np.trace(X) / N) * identity for X in basis.elements]
    full_rank, _, _ = _rank(np.array([_vec(X) for X in basis.elements]), tol, gap)
    dim, rows, note = _rank(np.array([_vec(X) for X in traceless]), tol, gap)
    trace_ray = dim < full_rank

    if note is not None:
        logger.warning("lie.borderline_rank", N=N, dim=dim, note=note)
        return AlgebraClass(OTHER, dim, trace_ray=trace_ray, diagnostics=(note,))
    if dim == N * N - 1:
        return AlgebraClass(FULL_SU, dim, trace_ray=trace_ray)

    symplectic_dim = (N // 2) * (N + 1)
    if N % 2 == 1:
        return AlgebraClass(OTHER, dim, trace_ray=trace_ray, diagnostics=("N이 홀수이므로 심플렉틱 분기 없음",))
    if dim != symplectic_dim:
        return AlgebraClass(OTHER, dim, trace_ray=trace_ray)

    elements = [_mat(v, N) for v in rows]
    J, reason = solve_symplectic_form(elements, tol, gap)
    if J is None:
        return AlgebraClass(OTHER, dim, trace_ray=trace_ray, diagnostics=(reason,))
    violation = max(float(np.max(np.abs(X @ J + J @ X.T))) for X in elements)
    if violation > tol:
        return AlgebraClass(OTHER, dim, trace_ray=trace_ray, diagnostics=(f"‖XJ + JXᵀ‖ = {violation:.3e}",))
    return AlgebraClass(SYMPLECTIC, dim, J=J, trace_ray=trace_ray)


def _check_dimension(mats: Sequence[np.ndarray], n: int):
    for i, X in enumerate(mats):
        if np.shape(X) != (1 << n, 1 << n):
            raise InvariantViolation(f"행렬 {i}의 차원 {np.shape(X)} ≠ 2^{n}")


def drift_free_controllable(controls: Sequence[np.ndarray], n: int) -> bool:
    _check_dimension(controls, n)
    algebra = classify(lie_closure(controls))
    logger.info("lie.drift_free", n=n, tag=algebra.tag, dim=algebra.dim)
    return algebra.tag in (FULL_SU, SYMPLECTIC)


def drift_case_certificate(
    A: np.ndarray,
    controls: Sequence[np.ndarray],
    n: int,
    t_large_assumed: bool,
) -> DriftCertificate:
    """조건 (i) 리 대수 판정 + 조건 (ii) 긴 주기 T는 사용자 가정"""
    _check_dimension([A, *controls], n)
    algebra = classify(lie_closure([A, *controls]))
    condition_i = algebra.tag in (FULL_SU, SYMPLECTIC)
    report = [
        f"(i) L{{A, B}} 분류 = {algebra.tag}, 차원 {algebra.dim}" + (" (iI 포함)" if algebra.trace_ray else ""),
        "(ii) T가 충분히 크다는 조건은 계산하지 않고 가정으로만 받습니다: "
        + ("가정함" if t_large_assumed else "가정하지 않음"),
        *algebra.diagnostics,
    ]
    return DriftCertificate(
        certified=condition_i and t_large_assumed,
        condition_i=condition_i,
        condition_ii_asserted=t_large_assumed,
        algebra=algebra,
        report=tuple(report),
    )
