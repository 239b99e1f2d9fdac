import os
from pathlib import Path
from typing import Dict, Any

from dotenv import load_dotenv

from src.utils.errors import UsageError
from src.utils.paths import ENV_FILE, LOGS_DIR

# --- CONFIGURATION SECTION ---
DEFAULTS = {
    "log_level": "INFO",
    "log_dir": str(LOGS_DIR),
    "workers": 1,
    "fdr_alpha": 0.05,
}


def load_settings(env_path: Path = ENV_FILE) -> Dict[str, Any]:
    """
    Reads optional overrides from the project's .env file.
    Missing keys fall back to DEFAULTS; a missing file is fine.
    """
    load_dotenv(dotenv_path=env_path)
    try:
        return {
            "log_level": os.getenv("TLT_LOG_LEVEL", DEFAULTS["log_level"]).upper(),
            "log_dir": Path(os.getenv("TLT_LOG_DIR", DEFAULTS["log_dir"])),
            "workers": int(os.getenv("TLT_WORKERS", DEFAULTS["workers"])),
            "fdr_alpha": float(os.getenv("TLT_FDR_ALPHA", DEFAULTS["fdr_alpha"])),
        }
    except ValueError as e:
        raise UsageError(f"Bad value in environment settings ({env_path.name}): {e}") from e
