import csv
import logging
from pathlib import Path
from typing import Sequence, Union

from .model_types import PARAM_NAMES, PosteriorChain

logger = logging.getLogger(__name__)

CHAIN_CSV_COLUMNS = ("param", "draw_index", "chain", "value")


def export_chain_csv(chains: Sequence[PosteriorChain], path: Union[str, Path]) -> Path:
    """Long-format dump of the xi draws: one row per (param, draw, chain)."""
    path = Path(path)
    chains = sorted(chains, key=lambda c: c.chain_index)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CHAIN_CSV_COLUMNS)
        for column, name in enumerate(PARAM_NAMES):
            for chain in chains:
                for k, value in enumerate(chain.xi[:, column]):
                    writer.writerow((name, k, chain.chain_index, repr(float(value))))
    logger.info("Wrote %d chains to %s", len(chains), path)
    return path
