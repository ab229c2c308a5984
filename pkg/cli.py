"""qubit-pbn 배치 실행기

실행 방법:
- python cli.py transition experiments/permutation.cfg
- python cli.py simulate-global experiments/bistochastic.cfg --seed 7 --runs 10000
- python cli.py validate unitary:data/u4 state:data/psi0.csv
"""
import argparse
import json
import logging
import sys
from typing import Any, Callable, Optional

import numpy as np
import structlog

from config import LOG_LEVEL, MODES, ConfigError, load_config, reset_config, set_config
from tools import STATUS_CONFIG, failure
from tools.hitting import hitting
from tools.lie import lie_check
from tools.markov import mappings, simulate_global, transition
from tools.paths import path_prob, simulate_local
from tools.realize import realize
from tools.validate import validate_inputs

TOOLS: dict[str, Callable[[], dict[str, Any]]] = {
    "simulate-global": simulate_global,
    "simulate-local": simulate_local,
    "transition": transition,
    "mappings": mappings,
    "path-prob": path_prob,
    "realize": realize,
    "lie-check": lie_check,
    "hitting": hitting,
    "validate": validate_inputs,
}

# 명령행 플래그 → 설정 키 (플래그가 설정 파일 값을 덮어씀)
OVERRIDE_FLAGS = ("seed", "runs", "steps", "threads", "out")


def configure_logging(level: str):
    """로그는 stderr, 보고서는 stdout"""
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper(), logging.WARNING)),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="양자 측정으로 유도된 확률적 불리언 네트워크 실험")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="debug, info, warning, error")
    sub = parser.add_subparsers(dest="mode", required=True)

    for mode in MODES:
        if mode == "validate":
            cmd = sub.add_parser(mode, help="입력 파일 검사 (kind:path 형식 가능)")
            cmd.add_argument("files", nargs="+", help="unitary:, state:, hamiltonian:, stochastic: 접두사 선택")
            continue
        cmd = sub.add_parser(mode, help=f"{mode} 실험")
        cmd.add_argument("config", help="key=value 설정 파일")
        cmd.add_argument("--seed", type=int, help="64비트 시드 (확률적 모드는 필수)")
        cmd.add_argument("--runs", type=int, help="몬테카를로 반복 수")
        cmd.add_argument("--steps", type=int, help="단계 수 또는 관찰 구간")
        cmd.add_argument("--threads", type=int, help="작업 스레드 수 상한")
        cmd.add_argument("--out", help="출력 디렉토리")
    return parser


def execute_tool(mode: str, args: argparse.Namespace) -> dict[str, Any]:
    """설정을 컨텍스트에 지정하고 모드 핸들러 실행"""
    if mode == "validate":
        return validate_inputs(files=list(args.files))

    overrides = {key: getattr(args, key) for key in OVERRIDE_FLAGS}
    try:
        config = load_config(args.config, mode, overrides)
    except ConfigError as e:
        return failure(str(e), STATUS_CONFIG)

    token = set_config(config)
    try:
        return TOOLS[mode]()
    finally:
        reset_config(token)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    result = execute_tool(args.mode, args)
    print(json.dumps(result, ensure_ascii=False, indent=2, default=_json_default))
    return int(result.get("status", 0))


if __name__ == "__main__":
    sys.exit(main())
