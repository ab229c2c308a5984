"""저장소 모듈 - CSV 행렬/벡터 입출력과 재현성 헤더

복소 행렬은 `<prefix>.re.csv` / `<prefix>.im.csv` 두 파일로 저장한다.
"""
import hashlib
import os
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence

import numpy as np
import structlog

logger = structlog.get_logger()

OUT_DIR = os.environ.get("QPBN_OUT_DIR", "out")

FLOAT_FMT = "%.17e"
INT_FMT = "%d"


class InputError(OSError):
    """입력 파일을 찾을 수 없거나 읽을 수 없음"""


def get_out_dir(out_dir: Optional[str] = None) -> str:
    """출력 디렉토리 반환 및 생성"""
    path = out_dir or OUT_DIR
    if path and not os.path.exists(path):
        os.makedirs(path)
    return path


def complex_pair(prefix: str) -> tuple[str, str]:
    return f"{prefix}.re.csv", f"{prefix}.im.csv"


def _strip_suffix(path: str) -> str:
    for suffix in (".re.csv", ".im.csv"):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path


def input_files(path: str) -> list[str]:
    """경로가 가리키는 실제 파일 목록 (복소 쌍이면 두 파일)"""
    prefix = _strip_suffix(path)
    re_path, im_path = complex_pair(prefix)
    if os.path.exists(re_path):
        return [re_path, im_path] if os.path.exists(im_path) else [re_path]
    if os.path.exists(path):
        return [path]
    raise InputError(f"입력 파일이 없습니다: {path}")


def file_digest(path: str) -> str:
    """입력 파일(쌍)의 sha256 앞 16자리"""
    digest = hashlib.sha256()
    for name in input_files(path):
        with open(name, "rb") as f:
            digest.update(f.read())
    return digest.hexdigest()[:16]


def _load(path: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as e:
        raise InputError(f"CSV를 읽을 수 없습니다: {path} ({e})") from e


def read_matrix(path: str) -> np.ndarray:
    """실수 CSV 또는 복소 쌍(prefix.re.csv + prefix.im.csv)을 읽음"""
    files = input_files(path)
    values = _load(files[0]).astype(complex)
    if len(files) == 2:
        imag = _load(files[1])
        if imag.shape != values.shape:
            raise InputError(f"실수부/허수부 크기가 다릅니다: {path}")
        values = values + 1j * imag
    if len(files) == 1 and files[0].endswith(".re.csv"):
        logger.warning("storage.missing_imaginary", path=files[0])
    return values


def read_real(path: str) -> np.ndarray:
    values = read_matrix(path)
    if np.any(values.imag != 0):
        raise InputError(f"실수 행렬이어야 합니다: {path}")
    return values.real


def read_vector(path: str) -> np.ndarray:
    """한 행 또는 한 열 CSV를 1차원 벡터로"""
    values = read_matrix(path)
    if min(values.shape) != 1:
        raise InputError(f"벡터 파일이 아닙니다 (shape={values.shape}): {path}")
    return values.reshape(-1)


def format_header(mode: str, seed: Optional[int], inputs: dict[str, str]) -> str:
    """`mode=… seed=… inputs=name:digest,…` (타임스탬프 없음)"""
    digests = ",".join(f"{name}:{digest}" for name, digest in sorted(inputs.items()))
    return f"mode={mode} seed={seed if seed is not None else '-'} inputs={digests or '-'}"


class TableWriter:
    """한 번의 실행에서 쓰는 CSV 표들. 모든 파일에 같은 헤더를 단다"""

    def __init__(self, out_dir: str, header: str):
        self.out_dir = out_dir
        self.header = header
        self.written: list[str] = []

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_table(
        self,
        name: str,
        rows: np.ndarray,
        columns: Sequence[str],
        int_columns: int = 0,
    ) -> str:
        """앞쪽 int_columns개 열은 정수, 나머지는 %.17e 형식"""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != len(columns):
            raise ValueError(f"{name}: 열 이름 {len(columns)}개 ≠ 데이터 열 {rows.shape[1]}개")
        fmt = [INT_FMT] * int_columns + [FLOAT_FMT] * (len(columns) - int_columns)
        path = self._path(name)
        np.savetxt(
            path,
            rows,
            fmt=fmt,
            delimiter=",",
            header=f"{self.header}\n{','.join(columns)}",
            comments="# ",
        )
        self.written.append(path)
        logger.debug("storage.written", path=path, rows=rows.shape[0])
        return path

    def write_complex(self, prefix: str, matrix: np.ndarray) -> list[str]:
        matrix = np.asarray(matrix, dtype=complex)
        columns = [f"c{j + 1}" for j in range(matrix.shape[1])]
        re_name, im_name = complex_pair(prefix)
        return [
            self.write_table(re_name, matrix.real, columns),
            self.write_table(im_name, matrix.imag, columns),
        ]


@contextmanager
def output_session(out_dir: Optional[str], mode: str, seed: Optional[int], inputs: dict[str, str]) -> Iterator[TableWriter]:
    """출력 디렉토리를 준비하고 TableWriter를 넘김"""
    writer = TableWriter(get_out_dir(out_dir), format_header(mode, seed, inputs))
    try:
        yield writer
    finally:
        logger.info("storage.session_closed", mode=mode, files=len(writer.written))
