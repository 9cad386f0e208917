# Analysis Report Validator
# Schema for analysis.json (AnalysisResult.to_dict).
# Missing statistics are written as null, never as NaN.

_nullable_number = {"type": ["number", "null"]}
_probability = {"type": ["number", "null"], "minimum": 0, "maximum": 1}
_non_negative = {"type": ["number", "null"], "minimum": 0}

_estimate = {
    "type": "object",
    "required": ["value", "lower", "upper"],
    "properties": {
        "value": {"type": "number"},
        "lower": {"type": "number"},
        "upper": {"type": "number"}
    }
}

_pooled = {
    "type": "object",
    "required": ["eta_a", "eta_b", "dor", "lr_pos", "lr_neg", "mu_a_mean", "mu_b_mean"],
    "properties": {
        "eta_a": _estimate,
        "eta_b": _estimate,
        "dor": _estimate,
        "lr_pos": _estimate,
        "lr_neg": _estimate,
        "mu_a_mean": {"type": "number"},
        "mu_b_mean": {"type": "number"}
    }
}

_flag_names = ["srd", "ssr", "pvalue", "rd_dor", "dauc"]

analysis_report_validator = {
    "type": "object",
    "required": ["schema", "dataset", "study_ids", "metadata", "summary", "pooled", "sroc",
                 "records", "loo_pooled", "loo_auc", "failures", "refits", "n_comparisons"],
    "properties": {
        "schema": {
            "const": 1,
            "description": "Report format version"
        },
        "dataset": {"type": "string"},
        "study_ids": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 3
        },
        "metadata": {
            "type": "object",
            "required": ["mcmc", "prior", "thresholds", "pvalues", "seeds"]
        },
        "summary": {
            "type": "object",
            "required": ["n_chains", "n_draws", "parameters", "warnings"],
            "properties": {
                "parameters": {
                    "type": "object",
                    "required": ["mu_a", "mu_b", "sigma_a", "sigma_b", "rho"]
                }
            }
        },
        "pooled": _pooled,
        "sroc": {
            "type": "object",
            "required": ["intercept", "slope", "auc", "fpr_range", "grid_size"],
            "properties": {
                "auc": {"type": "number", "minimum": 0, "maximum": 1},
                "fpr_range": {"type": "array", "minItems": 2, "maxItems": 2}
            }
        },
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["study_id", "flags", "notes"],
                "properties": {
                    "study_id": {"type": "integer", "minimum": 1},
                    "rd_a": _non_negative,
                    "rd_b": _non_negative,
                    "srd": _non_negative,
                    "ard": _non_negative,
                    "rd_dor": _non_negative,
                    "sr_a": _nullable_number,
                    "sr_b": _nullable_number,
                    "ssr": _non_negative,
                    "asr": _non_negative,
                    "sr_dor": _nullable_number,
                    "p_a": _probability,
                    "p_b": _probability,
                    "p_sd": _probability,
                    "p_ad": _probability,
                    "p_dor": _probability,
                    "delta_auc": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
                    "flags": {
                        "type": "object",
                        "required": _flag_names,
                        "additionalProperties": {"type": "boolean"}
                    },
                    "notes": {"type": "array", "items": {"type": "string"}}
                }
            }
        },
        "loo_pooled": {"type": "object", "additionalProperties": _pooled},
        "loo_auc": {"type": "object", "additionalProperties": {"type": "number"}},
        "failures": {"type": "object", "additionalProperties": {"type": "string"}},
        "refits": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["method", "removed_ids", "n_studies", "pooled", "auc"],
                "properties": {
                    "removed_ids": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "pooled": _pooled,
                    "auc": _estimate
                }
            }
        },
        "n_comparisons": {"type": "integer", "minimum": 0}
    }
}
