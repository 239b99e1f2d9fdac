from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parent.parent.parent

LOGS_DIR = ROOT_DIR / "logs"
ENV_FILE = ROOT_DIR / ".env"


def ensure_dirs(*dirs: Path) -> None:
    """Creates output folders on demand."""
    for d in dirs:
        Path(d).mkdir(parents=True, exist_ok=True)
