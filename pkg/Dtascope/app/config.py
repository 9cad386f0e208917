import os
from dotenv import load_dotenv

load_dotenv()


def _optional_int(name):
    value = os.environ.get(name)
    return int(value) if value not in (None, "") else None


class Config:
    DTA_THREADS = _optional_int("DTA_THREADS")  # None = all logical cores
    DTA_SEED = int(os.environ.get("DTA_SEED", 2020))
    DTA_OUTPUT_DIR = os.environ.get("DTA_OUTPUT_DIR", "dtascope_output")
    DTA_LOG_LEVEL = os.environ.get("DTA_LOG_LEVEL", "INFO")
