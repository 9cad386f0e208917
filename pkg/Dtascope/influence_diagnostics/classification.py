from typing import Dict, List, Tuple

from .records import FLAG_NAMES, InfluenceRecord, Thresholds

SYNTHETIC_PVALUES = ("p_sd", "p_ad", "p_dor")


def classify(record: InfluenceRecord, thresholds: Thresholds) -> Tuple[Dict[str, bool], List[str]]:
    """
    Flags per criterion. Comparisons are strict except |delta_auc|, which is
    flagged at the threshold itself. A missing statistic leaves its flag unset
    and adds a note.
    """
    flags = {name: False for name in FLAG_NAMES}
    notes = []

    def check(flag, value, crosses):
        if value is None:
            notes.append(f"{flag} flag unset: statistic missing")
        else:
            flags[flag] = bool(crosses(value))

    check("srd", record.srd, lambda v: v > thresholds.srd)
    check("ssr", record.ssr, lambda v: v > thresholds.ssr)
    check("rd_dor", record.rd_dor, lambda v: v > thresholds.rd_dor)
    check("dauc", record.delta_auc, lambda v: abs(v) >= thresholds.delta_auc)

    # needs all three synthetic p-values
    synthetic = [getattr(record, name) for name in SYNTHETIC_PVALUES]
    check("pvalue", None if None in synthetic else min(synthetic), lambda v: v < thresholds.p_value)
    return flags, notes
