import sys

from loguru import logger

from src.core.cli import main


if __name__ == "__main__":
    try:
        sys.exit(main(sys.argv[1:]))
    except Exception as e:
        logger.critical(f"Crash: {e}")
        sys.exit(1)
