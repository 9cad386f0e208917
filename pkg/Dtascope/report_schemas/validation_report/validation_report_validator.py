# Validation Report Validator
# Schema for validation.json (SamplerValidationReport.to_dict).

_suite = {
    "type": "object",
    "required": ["passed", "checks"],
    "properties": {
        "passed": {"type": "boolean"},
        "checks": {"type": "array", "items": {"type": "object", "required": ["passed"]}}
    }
}

validation_report_validator = {
    "type": "object",
    "required": ["schema", "seed", "reps", "passed", "analytic", "sbc"],
    "properties": {
        "schema": {"const": 1},
        "seed": {"type": "integer", "minimum": 0},
        "reps": {
            "type": "integer",
            "minimum": 20,
            "description": "Simulation-based calibration replications"
        },
        "passed": {"type": "boolean"},
        "analytic": _suite,
        "sbc": _suite
    }
}
