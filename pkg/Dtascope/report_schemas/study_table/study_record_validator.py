# Study Table Row Validator
# Schema for one row of the ingestion CSV after integer parsing.
# Header must be exactly: id,label,tp,fp,fn,tn

STUDY_CSV_COLUMNS = ("id", "label", "tp", "fp", "fn", "tn")

study_record_validator = {
    "type": "object",
    "required": list(STUDY_CSV_COLUMNS),
    "additionalProperties": False,  # Strict mode: rejects unknown columns
    "properties": {
        "id": {
            "type": "integer",
            "minimum": 1,
            "description": "Stable 1-based study identifier, unique within the file"
        },
        "label": {
            "type": "string",
            "description": "Study label, e.g. first author and year"
        },
        "tp": {
            "type": "integer",
            "minimum": 0,
            "description": "True positives"
        },
        "fp": {
            "type": "integer",
            "minimum": 0,
            "description": "False positives"
        },
        "fn": {
            "type": "integer",
            "minimum": 0,
            "description": "False negatives"
        },
        "tn": {
            "type": "integer",
            "minimum": 0,
            "description": "True negatives"
        }
    }
}
