"""
IDX(MNIST) 파일 어댑터

파일 구조 (big-endian):
    이미지: magic 0x00000803, 개수, 행, 열, 이후 개수×행×열 바이트
    레이블: magic 0x00000801, 개수, 이후 개수 바이트
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import BinaryIO, Tuple

import numpy as np

from core.domain.errors import DatasetFormatError, InvalidInputError
from core.domain.models import Dataset
from core.ports.data_ports import IdxReaderPort

logger = logging.getLogger("asysvrg")

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049
MNIST_CLASSES = 10


def _open(path: Path) -> BinaryIO:
    if path.suffix == ".gz":
        return gzip.open(path, "rb")  # type: ignore[return-value]
    return open(path, "rb")


def _read_exact(handle: BinaryIO, size: int, path: Path, what: str) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise DatasetFormatError(f"{path.name}: {what} 이 잘림 ({len(data)}/{size} 바이트)")
    return data


class IdxDatasetAdapter(IdxReaderPort):
    """
    IDX 이미지/레이블 파일 쌍 → Dataset (픽셀 /255, num_classes=10)

    .gz 로 끝나는 경로는 gzip 으로 읽는다.
    """

    def _read_images_header(self, handle: BinaryIO, path: Path) -> Tuple[int, int, int]:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(handle, 16, path, "헤더"))
        if magic != IMAGES_MAGIC:
            raise DatasetFormatError(
                f"{path.name}: 이미지 magic 불일치 0x{magic:08x} (기대 0x{IMAGES_MAGIC:08x})"
            )
        return count, rows, cols

    def _read_labels_header(self, handle: BinaryIO, path: Path) -> int:
        magic, count = struct.unpack(">II", _read_exact(handle, 8, path, "헤더"))
        if magic != LABELS_MAGIC:
            raise DatasetFormatError(
                f"{path.name}: 레이블 magic 불일치 0x{magic:08x} (기대 0x{LABELS_MAGIC:08x})"
            )
        return count

    def load_idx(self, images_path: str, labels_path: str, limit: int) -> Dataset:
        if limit < 0:
            raise InvalidInputError(f"limit 는 0 이상이어야 함: {limit}")

        img_path, lbl_path = Path(images_path), Path(labels_path)
        for path in (img_path, lbl_path):
            if not path.exists():
                raise FileNotFoundError(f"IDX 파일 없음: {path}")

        with _open(img_path) as images, _open(lbl_path) as labels:
            count, rows, cols = self._read_images_header(images, img_path)
            label_count = self._read_labels_header(labels, lbl_path)
            if count != label_count:
                raise DatasetFormatError(
                    f"이미지 {count}개 / 레이블 {label_count}개 - 개수 불일치"
                )

            take = min(count, limit)
            pixels = rows * cols
            raw_images = _read_exact(images, take * pixels, img_path, "이미지 데이터")
            raw_labels = _read_exact(labels, take, lbl_path, "레이블 데이터")

        features = (
            np.frombuffer(raw_images, dtype=np.uint8).reshape(take, pixels).astype(np.float64) / 255.0
        )
        targets = np.frombuffer(raw_labels, dtype=np.uint8).astype(np.int64)
        if targets.size and targets.max() >= MNIST_CLASSES:
            raise DatasetFormatError(f"{lbl_path.name}: 레이블 값 {int(targets.max())} 이 0..9 범위 밖")

        logger.info(f"IDX 적재: {take}개 표본, {pixels} 픽셀 ({img_path.name})")
        return Dataset(features=features, labels=targets, num_classes=MNIST_CLASSES)
