"""Per-type entry schemas, validation and the canonical text flattening used by metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import SchemaError
from .model import DocumentationType, StructuredDoc

STRING = "string"
STRING_LIST = "string_list"
MEMBERS = "members"
CATEGORY = "category"

PROJECT_CATEGORIES = ("setup", "usage", "contribution", "environment", "update", "other")


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str
    required: bool = True


MEMBER_FIELDS = (
    FieldSpec("name", STRING),
    FieldSpec("kind", STRING),
    FieldSpec("description", STRING, required=False),
)

ENTRY_SCHEMAS: dict[DocumentationType, tuple[FieldSpec, ...]] = {
    DocumentationType.API: (
        FieldSpec("name", STRING),
        FieldSpec("description", STRING),
        FieldSpec("members", MEMBERS),
        FieldSpec("source_refs", STRING_LIST),
    ),
    DocumentationType.ERROR_BUG: (
        FieldSpec("summary", STRING),
        FieldSpec("cause", STRING, required=False),
        FieldSpec("resolution", STRING, required=False),
        FieldSpec("status", STRING, required=False),
        FieldSpec("source_refs", STRING_LIST),
    ),
    DocumentationType.FILE: (
        FieldSpec("path", STRING),
        FieldSpec("change", STRING),
        FieldSpec("description", STRING),
        FieldSpec("dependencies", STRING_LIST, required=False),
        FieldSpec("source_refs", STRING_LIST),
    ),
    DocumentationType.LICENSE: (
        FieldSpec("license_name", STRING),
        FieldSpec("permissions", STRING_LIST, required=False),
        FieldSpec("scope", STRING, required=False),
        FieldSpec("source_refs", STRING_LIST),
    ),
    DocumentationType.PROJECT: (
        FieldSpec("category", CATEGORY),
        FieldSpec("description", STRING),
        FieldSpec("source_refs", STRING_LIST),
    ),
}


@dataclass(frozen=True)
class Violation:
    entry: int
    field: str
    message: str

    def __str__(self) -> str:
        return f"entry {self.entry}, field {self.field!r}: {self.message}"


class ValidationResult(list):
    """List of violations; truthiness is inverted through :attr:`ok`."""

    @property
    def ok(self) -> bool:
        return not self


def _check_field(spec: FieldSpec, value: Any, index: int, path: str) -> list[Violation]:
    if spec.kind == STRING:
        if not isinstance(value, str):
            return [Violation(index, path, "expected a string")]
    elif spec.kind == CATEGORY:
        if not isinstance(value, str):
            return [Violation(index, path, "expected a string")]
        if value not in PROJECT_CATEGORIES:
            return [Violation(index, path, f"expected one of {', '.join(PROJECT_CATEGORIES)}")]
    elif spec.kind == STRING_LIST:
        if not isinstance(value, list):
            return [Violation(index, path, "expected a list of strings")]
        return [
            Violation(index, f"{path}[{i}]", "expected a string")
            for i, item in enumerate(value)
            if not isinstance(item, str)
        ]
    elif spec.kind == MEMBERS:
        if not isinstance(value, list):
            return [Violation(index, path, "expected a list of member objects")]
        out = []
        for i, member in enumerate(value):
            out.extend(_check_object(MEMBER_FIELDS, member, index, f"{path}[{i}]."))
        return out
    return []


def _check_object(fields, obj: Any, index: int, prefix: str = "") -> list[Violation]:
    if not isinstance(obj, dict):
        return [Violation(index, prefix.rstrip(".") or "*", "expected an object")]
    out = []
    for spec in fields:
        path = prefix + spec.name
        if spec.name not in obj:
            if spec.required:
                out.append(Violation(index, path, "required field missing"))
            continue
        out.extend(_check_field(spec, obj[spec.name], index, path))
    return out


def validate_schema(doc: StructuredDoc) -> ValidationResult:
    """Check every entry of ``doc`` against its type's schema.

    Unknown extra fields are tolerated. An empty entry list is valid.
    """
    fields = ENTRY_SCHEMAS[doc.doc_type]
    result = ValidationResult()
    for i, entry in enumerate(doc.entries):
        result.extend(_check_object(fields, entry, i))
    return result


def _fold(value: str) -> str:
    # continuation lines are indented so a value can never forge a "key: " line
    return value.replace("\n", "\n  ")


def canonical_text(doc: StructuredDoc) -> str:
    violations = validate_schema(doc)
    if violations:
        raise SchemaError(violations)
    lines: list[str] = []
    for entry in doc.entries:
        for spec in ENTRY_SCHEMAS[doc.doc_type]:
            if spec.name not in entry:
                continue
            value = entry[spec.name]
            if spec.kind in (STRING, CATEGORY):
                lines.append(f"{spec.name}: {_fold(value)}\n")
            elif spec.kind == STRING_LIST:
                lines.extend(f"{spec.name}: {_fold(item)}\n" for item in value)
            else:
                for member in value:
                    for sub in MEMBER_FIELDS:
                        if sub.name in member:
                            lines.append(f"{spec.name}.{sub.name}: {_fold(member[sub.name])}\n")
    return "".join(lines)
