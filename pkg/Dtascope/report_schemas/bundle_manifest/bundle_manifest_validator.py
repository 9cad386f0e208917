# Bundle Manifest Validator
# Schema for manifest.json: relative file path -> SHA-256 hex digest.

bundle_manifest_validator = {
    "type": "object",
    "required": ["schema", "files"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": 1},
        "files": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "string",
                "pattern": "^[0-9a-f]{64}$"
            }
        }
    }
}
