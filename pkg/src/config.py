from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Base Paths
    BASE_DIR: Path = Path(__file__).resolve().parent.parent
    OUTPUT_DIR: Path = BASE_DIR / "output"
    DATA_DIR: Path = BASE_DIR / "data"

    # MNIST (IDX) 원본 파일
    MNIST_TRAIN_IMAGES: str = "data/train-images-idx3-ubyte"
    MNIST_TRAIN_LABELS: str = "data/train-labels-idx1-ubyte"
    MNIST_TEST_IMAGES: str = "data/t10k-images-idx3-ubyte"
    MNIST_TEST_LABELS: str = "data/t10k-labels-idx1-ubyte"

    # Optimization
    DIVERGENCE_THRESHOLD: float = 1e12  # 손실이 이 값을 넘거나 유한하지 않으면 발산

    # Logging
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


# 전역 설정 객체
config = Settings()
