import hashlib
import logging
import os
import tempfile
from pathlib import Path
from typing import Union

import coloredlogs

ALLOWED_EXTENSIONS = {'csv'}

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def allowed_file(filename):
    return '.' in str(filename) and str(filename).rsplit('.', 1)[1].lower() in ALLOWED_EXTENSIONS


def configure_logging(level: str = "INFO"):
    """Coloured console logging for CLI runs."""
    coloredlogs.install(level=level.upper(), fmt=LOG_FORMAT, logger=logging.getLogger())


def ensure_directory(path: Union[str, Path]) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path


def check_writable(path: Union[str, Path]) -> Path:
    """Create `path` if needed and write a scratch file there, so a bad output location fails early."""
    path = ensure_directory(path)
    with tempfile.TemporaryFile(dir=path) as handle:
        handle.write(b"ok")
    return path


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


# Process exit codes shared by the commands
EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_FIT_FAILURE = 3
