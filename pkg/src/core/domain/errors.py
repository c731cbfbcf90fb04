"""
도메인 예외 계층

발산(divergence)은 예외가 아니다 - 실행기는 Trace.diverged 로 보고한다.
"""


class AsySvrgError(Exception):
    """툴킷 전체의 기본 예외"""


class InvalidInputError(AsySvrgError, ValueError):
    """차원 불일치, 범위를 벗어난 인덱스, 정렬되지 않은 배치 등 거부된 입력"""


class DatasetFormatError(AsySvrgError):
    """IDX 매직 넘버 불일치, 잘린 파일, 이미지/레이블 개수 불일치"""


class ScheduleError(AsySvrgError):
    """J(t)가 미래·이전 epoch·Δ보다 오래된 반복을 참조하거나 텍스트 형식이 잘못됨"""


class ProtocolError(AsySvrgError):
    """서버 상태(phase)와 맞지 않는 메시지"""


class InfeasibleParametersError(AsySvrgError):
    """이론 점화식의 분모가 양수가 아니거나 γ가 양수가 아님"""


class ConfigError(AsySvrgError):
    """
    실행 설정 오류

    Attributes:
        diagnostics: "line 3: eta: ..." 형태의 진단 메시지 목록
    """

    def __init__(self, message: str, diagnostics: list[str] | None = None) -> None:
        self.diagnostics = diagnostics or []
        detail = "; ".join(self.diagnostics)
        super().__init__(f"{message}: {detail}" if detail else message)
