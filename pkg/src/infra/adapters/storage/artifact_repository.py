"""
파일 기반 실험 산출물 저장소
"""

import os
from pathlib import Path
from typing import Callable

import pandas as pd

from core.domain.errors import InvalidInputError
from core.domain.experiment_models import ExperimentSummary
from core.domain.models import TRACE_COLUMNS, Trace, TraceRecord
from core.ports.repository_ports import ArtifactRepositoryPort

_INT_COLUMNS = ("epoch", "iter", "wall_ns")


class FileArtifactRepository(ArtifactRepositoryPort):
    """
    출력 디렉터리에 CSV / JSON / 텍스트를 기록

    모든 파일은 임시 파일에 쓴 뒤 os.replace 로 교체한다.
    부동소수는 repr 정밀도로 쓰고 round_trip 으로 읽어 값이 보존된다.
    """

    # ------------------------------------------------------------------ #
    #  Write                                                               #
    # ------------------------------------------------------------------ #

    def _write(self, path: Path, writer: Callable[[Path], None]) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp_path = path.with_name(path.name + ".tmp")
        try:
            writer(tmp_path)
            os.replace(tmp_path, path)
        except Exception:
            if tmp_path.exists():
                tmp_path.unlink()
            raise
        return path

    def save_trace(self, directory: Path, trace: Trace, name: str = "trace.csv") -> Path:
        df = pd.DataFrame([r.as_row() for r in trace.records], columns=TRACE_COLUMNS)
        return self._write(
            directory / name, lambda p: df.to_csv(p, index=False, lineterminator="\n")
        )

    def save_summary(self, directory: Path, summary: ExperimentSummary) -> Path:
        text = summary.model_dump_json(indent=2) + "\n"
        return self.save_text(directory, "summary.json", text)

    def save_text(self, directory: Path, name: str, text: str) -> Path:
        return self._write(directory / name, lambda p: p.write_text(text, encoding="utf-8"))

    def save_table(self, directory: Path, name: str, table: pd.DataFrame) -> Path:
        return self._write(
            directory / name, lambda p: table.to_csv(p, index=False, lineterminator="\n")
        )

    # ------------------------------------------------------------------ #
    #  Read                                                                #
    # ------------------------------------------------------------------ #

    def load_trace(self, path: Path) -> Trace:
        """
        Trace CSV 읽기 (final_x 는 복원되지 않음)

        Raises:
            InvalidInputError: 헤더가 Trace 스키마와 다름
        """
        if not path.exists():
            raise FileNotFoundError(f"Trace 파일 없음: {path}")
        df = pd.read_csv(path, float_precision="round_trip")
        if list(df.columns) != TRACE_COLUMNS:
            raise InvalidInputError(f"{path.name}: Trace 헤더 불일치 {list(df.columns)}")

        trace = Trace()
        for row in df.itertuples(index=False):
            values = row._asdict()
            trace.append(
                TraceRecord(
                    **{
                        column: int(values[column]) if column in _INT_COLUMNS else float(values[column])
                        for column in TRACE_COLUMNS
                    }
                )
            )
        return trace
