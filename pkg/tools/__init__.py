"""실험 모드 핸들러 - 각 모드는 {"success": ..., ...} 딕셔너리를 반환"""
import functools
from typing import Any, Callable

import structlog

from config import ConfigError
from models import InfeasibleRequest, InvariantViolation
from storage import InputError

logger = structlog.get_logger()

# 종료 상태
STATUS_OK = 0
STATUS_INTERNAL = 1
STATUS_CONFIG = 2
STATUS_INVARIANT = 3
STATUS_INFEASIBLE = 4


def failure(error: str, status: int) -> dict[str, Any]:
    return {"success": False, "error": error, "status": status}


def tool_handler(func: Callable[..., dict[str, Any]]) -> Callable[..., dict[str, Any]]:
    """도메인 예외를 실패 딕셔너리와 종료 상태로 변환"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> dict[str, Any]:
        try:
            result = func(*args, **kwargs)
        except (ConfigError, InputError) as e:
            return failure(str(e), STATUS_CONFIG)
        except InvariantViolation as e:
            return failure(str(e), STATUS_INVARIANT)
        except InfeasibleRequest as e:
            return failure(str(e), STATUS_INFEASIBLE)
        except Exception as e:
            logger.exception("tool.unexpected_error", tool=func.__name__)
            return failure(f"내부 오류: {e}", STATUS_INTERNAL)
        result.setdefault("success", True)
        result.setdefault("status", STATUS_OK)
        return result

    return wrapper
