import logging
from typing import Any, Dict, List, Optional, Tuple

from jsonschema import Draft202012Validator

logger = logging.getLogger(__name__)

_validators: Dict[int, Draft202012Validator] = {}


def _validator_for(schema: Dict[str, Any]) -> Draft202012Validator:
    key = id(schema)
    if key not in _validators:
        Draft202012Validator.check_schema(schema)
        _validators[key] = Draft202012Validator(schema)
    return _validators[key]


def schema_errors(document: Any, schema: Dict[str, Any]) -> List[Tuple[str, str]]:
    """All violations as (field path, message), ordered by path."""
    errors = sorted(_validator_for(schema).iter_errors(document), key=lambda e: list(map(str, e.absolute_path)))
    found = []
    for error in errors:
        path = ".".join(str(part) for part in error.absolute_path)
        if not path and error.validator == "required":
            # message reads "'tp' is a required property"
            path = error.message.split("'")[1] if "'" in error.message else ""
        found.append((path, error.message))
    return found


def first_schema_error(document: Any, schema: Dict[str, Any]) -> Optional[Tuple[str, str]]:
    errors = schema_errors(document, schema)
    return errors[0] if errors else None


def check_document(document: Any, schema: Dict[str, Any], name: str) -> None:
    """Raise ValueError listing every violation of `schema` in `document`."""
    errors = schema_errors(document, schema)
    if errors:
        details = "; ".join(f"{path or '<root>'}: {message}" for path, message in errors[:10])
        logger.error("%s failed schema validation: %s", name, details)
        raise ValueError(f"{name} does not match its schema: {details}")
