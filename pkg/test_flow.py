"""예제 통합 실행 스크립트 - 전이행렬 → 연쇄 시뮬레이션 → 국소 경로 확률 → 유니터리 실현 → 도달 시간

사용법:
  1. (선택) QPBN_OUT_DIR, QPBN_THREADS 환경변수 지정
  2. python test_flow.py
"""
import json
import os

import numpy as np

from cli import configure_logging
from config import DEFAULT_OUT_DIR, LOG_LEVEL, build_config, reset_config, set_config
from quantum.core import kron
from quantum.dynamics import hermitian_propagator
from storage import TableWriter, get_out_dir
from tools.hitting import hitting
from tools.markov import mappings, simulate_global, transition
from tools.paths import path_prob
from tools.realize import realize

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
S3 = np.sqrt(3.0)


def pp(data):
    print(json.dumps(data, ensure_ascii=False, indent=2, default=str))


def banner(title: str):
    print("\n" + "="*50)
    print(title)
    print("="*50)


def write_inputs(base: str) -> dict[str, str]:
    """예제 행렬을 CSV로 저장하고 이름 → 경로 반환"""
    writer = TableWriter(get_out_dir(base), "mode=inputs seed=- inputs=-")
    s2, s6 = np.sqrt(2.0), np.sqrt(6.0)
    u4 = np.array([
        [1 / (2 * S3), 1 / s6, 1 / 2, s2 / 2],
        [-1j / s6, 1j / (2 * S3), -1j * s2 / 2, 1j / 2],
        [-1 / 4 - 1j * S3 / 4, -s2 / 4 - 1j * s6 / 4, 1 / (4 * S3) + 1j / 4, 1 / (2 * s6) + 1j * s2 / 4],
        [-s6 / 4 + 1j * s2 / 4, S3 / 4 - 1j / 4, s2 / 4 - 1j / (2 * s6), -1 / 4 + 1j / (4 * S3)],
    ])
    psi4 = np.array([[1 / s2, 1 / s6, 1 / (2 * S3), 1 / 2]])
    psi5 = np.zeros((1, 8), dtype=complex)
    psi5[0, [0b000, 0b010, 0b011, 0b101]] = [1 / s2, 1 / s6, 1 / (2 * S3), 1 / 2]
    R = np.array([[S3 / 2, 1 / 2], [-1 / 2, S3 / 2]])
    h3 = np.pi / 3 * kron(SX, SX) + np.pi / 6 * kron(SY, SY)

    matrices = {
        "u1": kron(SX, SY),
        "u3": hermitian_propagator(h3, 1.0),
        "u4": u4,
        "psi4": psi4,
        "u5": kron(SX, R, SZ),
        "psi5": psi5,
    }
    paths = {}
    for name, matrix in matrices.items():
        writer.write_complex(name, matrix)
        paths[name] = os.path.join(base, name)

    w4 = np.abs(u4) ** 2
    paths["w4"] = writer.write_table("w4.csv", w4, [f"c{j + 1}" for j in range(4)])
    return paths


def run_mode(title: str, tool, **values):
    banner(title)
    config = build_config(values)
    token = set_config(config)
    try:
        result = tool()
    finally:
        reset_config(token)
    pp(result)
    if result.get("success"):
        print("\n✅ 완료")
    else:
        print(f"\n❌ 실패: {result.get('error')}")
    return result


def main():
    configure_logging(LOG_LEVEL)
    base = os.path.join(DEFAULT_OUT_DIR, "flow")
    inputs = write_inputs(os.path.join(base, "inputs"))

    banner("🔧 입력 파일")
    for name, path in inputs.items():
        print(f"  {name}: {path}")

    # === 1단계: 결정적 순열 연쇄 ===
    run_mode(
        "🔁 1단계: U1 = σx⊗σy 전이행렬과 불리언 사상",
        transition,
        mode="transition", unitaries=(inputs["u1"],), out=os.path.join(base, "step1"),
    )
    run_mode(
        "🔁 1단계: 무작위 사상 F 열거",
        mappings,
        mode="mappings", unitaries=(inputs["u1"],), out=os.path.join(base, "step1"),
    )

    # === 2단계: 얽힘 해밀토니언 ===
    run_mode(
        "🔗 2단계: exp(−iH) 전이행렬 (3/4 유지, 1/4 동시 반전)",
        transition,
        mode="transition", unitaries=(inputs["u3"],), out=os.path.join(base, "step2"),
    )

    # === 3단계: 전역 측정 연쇄 몬테카를로 ===
    result = run_mode(
        "🎲 3단계: 전역 측정 연쇄 p̂(t) vs p(t)",
        simulate_global,
        mode="simulate-global", seed=7, runs=10_000, steps=20,
        unitaries=(inputs["u4"],), state=inputs["psi4"], out=os.path.join(base, "step3"),
    )
    if result.get("success") and result["max_deviation"] > 0.02:
        print(f"\n⚠️  편차 {result['max_deviation']:.4f}가 0.02를 넘습니다")

    # === 4단계: 국소 측정 경로 확률 ===
    run_mode(
        "🧭 4단계: 큐비트 1, 2 측정 경로 (10, 00, 11, 01)",
        path_prob,
        mode="path-prob", measured=(1, 2), path=("10", "00", "11", "01"),
        unitaries=(inputs["u5"],), state=inputs["psi5"], out=os.path.join(base, "step4"),
    )

    # === 5단계: 이중 확률 행렬의 유니터리 실현 ===
    run_mode(
        "🧩 5단계: W를 실현하는 유니터리 탐색",
        realize,
        mode="realize", seed=11, steps=50, p0="0.5,0.16666666666666666,0.08333333333333333,0.25",
        stochastic=inputs["w4"], out=os.path.join(base, "step5"),
    )

    # === 6단계: 피드백 조향 도달 시간 ===
    run_mode(
        "🎯 6단계: 00 → 11 조향 정책 도달 시간",
        hitting,
        mode="hitting", seed=3, runs=5000, steps=20, x0="00", target="11", delta=1.0, overlap=9 / 16,
        out=os.path.join(base, "step6"),
    )

    banner("🎉 전체 예제 실행 완료!")


if __name__ == "__main__":
    main()
