"""Assessment rubrics and grades.

A rubric is an ordered list of dimensions, each with contiguous achievement
levels starting at 0. The engine ships a four-dimension critical-thinking
rubric (issue, evidence, position, conclusion; levels 0..2) as the default,
and accepts user-supplied rubric files so other assessments can reuse the
same pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml


class RubricSchemaError(ValueError):
    """The rubric document violates the file schema."""


class DuplicateDimensionError(RubricSchemaError):
    """Two dimensions share the same key."""


class NonContiguousLevelsError(RubricSchemaError):
    """Levels of a dimension are not 0, 1, 2, ... in order."""


@dataclass(frozen=True)
class LevelDescriptor:
    level: int
    description: str

    def __post_init__(self) -> None:
        if self.level < 0:
            raise RubricSchemaError(f"level must be >= 0, got {self.level}")
        if not self.description.strip():
            raise RubricSchemaError(f"level {self.level}: description must be nonempty")


@dataclass(frozen=True)
class RubricDimension:
    key: str
    display_name: str
    levels: tuple[LevelDescriptor, ...]

    def __post_init__(self) -> None:
        if not self.key.strip():
            raise RubricSchemaError("dimension key must be nonempty")
        expected = list(range(len(self.levels)))
        actual = [d.level for d in self.levels]
        if actual != expected:
            raise NonContiguousLevelsError(
                f"dimension {self.key!r}: levels must be contiguous from 0, got {actual}"
            )

    def valid_levels(self) -> range:
        return range(len(self.levels))

    def describe(self, level: int) -> str:
        return self.levels[level].description


@dataclass(frozen=True)
class Grade:
    dimension_key: str
    level: int


def validate_grade(grade: Grade, rubric: list[RubricDimension] | tuple[RubricDimension, ...]) -> None:
    dim = find_dimension(rubric, grade.dimension_key)
    if grade.level not in dim.valid_levels():
        raise ValueError(
            f"level {grade.level} is not valid for dimension {grade.dimension_key!r}"
        )


def find_dimension(
    rubric: list[RubricDimension] | tuple[RubricDimension, ...], key: str
) -> RubricDimension:
    for dim in rubric:
        if dim.key == key:
            return dim
    raise KeyError(f"unknown rubric dimension {key!r}")


def default_rubric() -> list[RubricDimension]:
    """The built-in critical-thinking rubric: four dimensions, three levels each."""
    return [
        RubricDimension(
            key="issue",
            display_name="Issue",
            levels=(
                LevelDescriptor(
                    0,
                    "The issue is mentioned without sufficient clarification or "
                    "detail. There is a lack of identification of issues or problems.",
                ),
                LevelDescriptor(
                    1,
                    "The issue is identified but lacks clarity, with undefined terms, "
                    "unexplored ambiguities, and insufficient background.",
                ),
                LevelDescriptor(
                    2,
                    "The issue is articulated with clarity and depth, providing "
                    "comprehensive information necessary for a thorough understanding.",
                ),
            ),
        ),
        RubricDimension(
            key="evidence",
            display_name="Evidence",
            levels=(
                LevelDescriptor(
                    0,
                    "Information is sourced without interpretation or evaluation, "
                    "drawing from a single source or example.",
                ),
                LevelDescriptor(
                    1,
                    "Information is derived from sources with some level of "
                    "interpretation or evaluation, involving two or more sources/examples.",
                ),
                LevelDescriptor(
                    2,
                    "Information is gathered from multiple sources with substantial "
                    "interpretation and evaluation, resulting in a thorough analysis "
                    "or synthesis.",
                ),
            ),
        ),
        RubricDimension(
            key="position",
            display_name="Position",
            levels=(
                LevelDescriptor(
                    0,
                    "The position (perspective, thesis/hypothesis) is unclear or undefined.",
                ),
                LevelDescriptor(
                    1,
                    "A specific position is identifiable but lacks complexity and depth.",
                ),
                LevelDescriptor(
                    2,
                    "The position is nuanced, recognizing the issue's complexities "
                    "and its limitations.",
                ),
            ),
        ),
        RubricDimension(
            key="conclusion",
            display_name="Conclusion",
            levels=(
                LevelDescriptor(
                    0,
                    "Conclusions are inconsistently aligned with the information discussed.",
                ),
                LevelDescriptor(
                    1,
                    "Conclusions are consistent with the information but are based on "
                    "a simplistic reasoning process.",
                ),
                LevelDescriptor(
                    2,
                    "Conclusions are logically, reflect well-informed evaluation and "
                    "integrat evidence and arguments.",
                ),
            ),
        ),
    ]


def parse_rubric(document: str) -> list[RubricDimension]:
    """Parse a rubric file (YAML or JSON key/value tree, UTF-8).

    Schema: a top-level mapping with a ``dimensions`` list; each dimension has
    ``key``, ``display_name`` and a ``levels`` list of ``{level, description}``.
    """
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise RubricSchemaError(f"invalid rubric document: {exc}") from exc
    if not isinstance(data, dict) or "dimensions" not in data:
        raise RubricSchemaError("rubric document must be a mapping with a 'dimensions' list")
    raw_dims = data["dimensions"]
    if not isinstance(raw_dims, list) or not raw_dims:
        raise RubricSchemaError("'dimensions' must be a nonempty list")

    dimensions: list[RubricDimension] = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_dims):
        where = f"dimensions[{i}]"
        if not isinstance(raw, dict):
            raise RubricSchemaError(f"{where}: expected a mapping")
        for field in ("key", "display_name", "levels"):
            if field not in raw:
                raise RubricSchemaError(f"{where}: missing field {field!r}")
        key = raw["key"]
        if not isinstance(key, str):
            raise RubricSchemaError(f"{where}.key: expected a string")
        if key in seen:
            raise DuplicateDimensionError(f"{where}: duplicate dimension key {key!r}")
        seen.add(key)
        raw_levels = raw["levels"]
        if not isinstance(raw_levels, list) or not raw_levels:
            raise RubricSchemaError(f"{where}.levels: expected a nonempty list")
        levels = []
        for j, raw_level in enumerate(raw_levels):
            lwhere = f"{where}.levels[{j}]"
            if not isinstance(raw_level, dict):
                raise RubricSchemaError(f"{lwhere}: expected a mapping")
            if "level" not in raw_level or "description" not in raw_level:
                raise RubricSchemaError(f"{lwhere}: needs 'level' and 'description'")
            if not isinstance(raw_level["level"], int) or isinstance(raw_level["level"], bool):
                raise RubricSchemaError(f"{lwhere}.level: expected an integer")
            if not isinstance(raw_level["description"], str) or not raw_level["description"].strip():
                raise RubricSchemaError(f"{lwhere}.description: expected nonempty text")
            levels.append(LevelDescriptor(raw_level["level"], raw_level["description"]))
        actual = [d.level for d in levels]
        if actual != list(range(len(levels))):
            raise NonContiguousLevelsError(
                f"{where}.levels: levels must be contiguous from 0, got {actual}"
            )
        dimensions.append(RubricDimension(key, str(raw["display_name"]), tuple(levels)))
    return dimensions


def serialize_rubric(rubric: list[RubricDimension] | tuple[RubricDimension, ...]) -> str:
    """Render a rubric back to its YAML file form (parse/serialize round-trips)."""
    doc = {
        "dimensions": [
            {
                "key": dim.key,
                "display_name": dim.display_name,
                "levels": [
                    {"level": d.level, "description": d.description} for d in dim.levels
                ],
            }
            for dim in rubric
        ]
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)
