"""실험 설정 모듈 - key=value 설정 파일과 실행별 설정 컨텍스트"""
import os
from contextvars import ContextVar
from dataclasses import dataclass, fields
from typing import Any, Optional

LOG_LEVEL = os.environ.get("QPBN_LOG_LEVEL", "warning")
DEFAULT_THREADS = os.environ.get("QPBN_THREADS", "1")
DEFAULT_OUT_DIR = os.environ.get("QPBN_OUT_DIR", "out")

MODES = (
    "simulate-global",
    "simulate-local",
    "transition",
    "mappings",
    "path-prob",
    "realize",
    "lie-check",
    "hitting",
    "validate",
)
# 시드가 반드시 있어야 하는 모드
STOCHASTIC_MODES = ("simulate-global", "simulate-local", "realize", "hitting")


class ConfigError(ValueError):
    """설정 파일 또는 플래그가 잘못됨"""


@dataclass
class ExperimentConfig:
    """실험 한 번의 설정"""

    mode: str
    seed: Optional[int] = None

    # 네트워크
    n: Optional[int] = None
    measured: tuple[int, ...] = ()
    observable: Optional[str] = None
    lambda0: float = 0.0
    lambda1: float = 1.0

    # 입력 파일 (복소 행렬은 prefix.re.csv / prefix.im.csv)
    state: Optional[str] = None
    unitaries: tuple[str, ...] = ()
    stochastic: Optional[str] = None
    drift: Optional[str] = None
    controls: tuple[str, ...] = ()
    p0: Optional[str] = None
    x0: Optional[str] = None
    target: Optional[str] = None
    path: tuple[str, ...] = ()
    inputs: tuple[str, ...] = ()

    # 실행 규모
    runs: int = 1
    steps: int = 1
    threads: int = 1

    # 적합
    restarts: int = 50
    iters: int = 2000
    step_size: float = 0.5

    # 모드별 옵션
    threshold: Optional[float] = 0.0
    tol: float = 1e-8
    t_large_assumed: bool = False
    policy: str = "steering"
    overlap: Optional[float] = None
    delta: Optional[float] = None

    out: str = DEFAULT_OUT_DIR

    @property
    def seed_configured(self) -> bool:
        return self.seed is not None

    @property
    def network_configured(self) -> bool:
        return self.n is not None

    @property
    def local_measurement(self) -> bool:
        return bool(self.measured) and self.n is not None and len(self.measured) < self.n

    def missing(self, *names: str) -> list[str]:
        return [name for name in names if getattr(self, name) in (None, (), "")]

    def require(self, *names: str):
        missing = self.missing(*names)
        if missing:
            raise ConfigError(f"{self.mode} 모드에 필요한 설정이 없습니다: {', '.join(missing)}")

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"알 수 없는 모드: {self.mode}")
        if self.mode in STOCHASTIC_MODES and not self.seed_configured:
            raise ConfigError(f"{self.mode} 모드는 seed가 필요합니다 (--seed 또는 설정 파일)")
        for name in ("runs", "steps", "threads", "restarts", "iters"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}은(는) 1 이상이어야 합니다")
        if self.n is not None and self.n < 1:
            raise ConfigError("n은 1 이상이어야 합니다")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed는 64비트 음이 아닌 정수여야 합니다")


def _split(value: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"불리언 값이 아닙니다: {value}")


def _optional_float(value: str) -> Optional[float]:
    return None if value.strip().lower() in ("none", "all") else float(value)


_CONVERTERS = {
    "seed": int,
    "n": int,
    "measured": lambda v: tuple(int(q) for q in _split(v)),
    "lambda0": float,
    "lambda1": float,
    "unitaries": _split,
    "controls": _split,
    "path": _split,
    "inputs": _split,
    "runs": int,
    "steps": int,
    "threads": int,
    "restarts": int,
    "iters": int,
    "step_size": float,
    "threshold": _optional_float,
    "tol": float,
    "t_large_assumed": _bool,
    "overlap": float,
    "delta": float,
}
# 설정 파일 위치 기준으로 해석할 경로 키
_PATH_KEYS = ("observable", "state", "unitaries", "stochastic", "drift", "controls", "inputs")


def parse_config_text(text: str) -> dict[str, str]:
    """`key = value` 줄과 `[section]` 헤더. 섹션은 묶음일 뿐이며 키는 전역적으로 유일"""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ConfigError(f"{number}번째 줄에 '='가 없습니다: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key in values:
            raise ConfigError(f"{number}번째 줄: 키 '{key}'가 중복되었습니다")
        values[key] = value.strip()
    return values


def _resolve_path(base_dir: str, value: str) -> str:
    if not value or os.path.isabs(value):
        return value
    return os.path.join(base_dir, value)


def build_config(values: dict[str, Any], base_dir: str = ".") -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs: dict[str, Any] = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"알 수 없는 설정 키: {key}")
        if isinstance(value, str):
            try:
                value = _CONVERTERS.get(key, str)(value)
            except ValueError as e:
                raise ConfigError(f"'{key}' 값이 올바르지 않습니다: {e}") from e
        if key == "p0" and "," not in value:
            value = _resolve_path(base_dir, value)
        elif key in _PATH_KEYS:
            value = (
                tuple(_resolve_path(base_dir, v) for v in value)
                if isinstance(value, tuple)
                else _resolve_path(base_dir, value)
            )
        kwargs[key] = value

    if "mode" not in kwargs:
        raise ConfigError("mode가 지정되지 않았습니다")
    if "threads" not in kwargs:
        try:
            kwargs["threads"] = int(DEFAULT_THREADS)
        except ValueError as e:
            raise ConfigError(f"QPBN_THREADS 값이 올바르지 않습니다: '{DEFAULT_THREADS}'") from e
    config = ExperimentConfig(**kwargs)
    config.validate()
    return config


def load_config(path: Optional[str], mode: str, overrides: Optional[dict[str, Any]] = None) -> ExperimentConfig:
    """설정 파일 < 플래그 순으로 덮어쓴 ExperimentConfig (환경 변수는 기본값)"""
    values: dict[str, Any] = {}
    base_dir = "."
    if path:
        try:
            with open(path, encoding="utf-8") as f:
                values = parse_config_text(f.read())
        except OSError as e:
            raise ConfigError(f"설정 파일을 읽을 수 없습니다: {path} ({e})") from e
        base_dir = os.path.dirname(os.path.abspath(path))

    file_mode = values.get("mode")
    if file_mode and file_mode != mode:
        raise ConfigError(f"설정 파일의 mode={file_mode}가 하위 명령 {mode}와 다릅니다")
    values["mode"] = mode
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values, base_dir)


# Context Variable - 실행별 설정 격리
_config: ContextVar[Optional[ExperimentConfig]] = ContextVar("experiment_config", default=None)


def get_config() -> Optional[ExperimentConfig]:
    return _config.get()


def set_config(config):
    """설정 지정. ContextVar Token을 반환하여 reset에 사용 가능."""
    return _config.set(config)


def reset_config(token):
    _config.reset(token)
