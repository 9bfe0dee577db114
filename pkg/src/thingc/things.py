"""Thing values.

A thing is an immutable tagged value: ``int``, ``bool``, ``str`` (text),
:class:`Symbol`, ``tuple`` (list of things) or :class:`Record`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, order=True)
class Symbol:
    name: str

    def __str__(self) -> str:
        return f"#{self.name}"


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, "Thing"], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, "Thing"]) -> "Record":
        return cls(tuple(mapping.items()))

    def __getitem__(self, key: str) -> "Thing":
        for name, value in self.fields:
            if name == key:
                return value
        raise KeyError(key)

    def keys(self) -> Iterator[str]:
        return (name for name, _ in self.fields)


Thing = Union[bool, int, str, Symbol, tuple, Record]


def type_name(value: Thing) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, str):
        return "text"
    if isinstance(value, Symbol):
        return "symbol"
    if isinstance(value, tuple):
        return "list"
    if isinstance(value, Record):
        return "record"
    raise TypeError(f"not a thing: {value!r}")


def is_thing(value: object) -> bool:
    if isinstance(value, (bool, int, str, Symbol)):
        return True
    if isinstance(value, tuple):
        return all(is_thing(v) for v in value)
    if isinstance(value, Record):
        return all(isinstance(k, str) and is_thing(v) for k, v in value.fields)
    return False


def same(a: Thing, b: Thing) -> bool:
    """Equality that never conflates booleans with integers."""
    if type_name(a) != type_name(b):
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, Record):
        return [k for k, _ in a.fields] == [k for k, _ in b.fields] and all(
            same(x, y) for (_, x), (_, y) in zip(a.fields, b.fields)
        )
    return a == b


def render(value: Thing) -> str:
    """Literal text for a thing, in the syntax the `.tm` parser reads back."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, Symbol):
        return str(value)
    if isinstance(value, tuple):
        return "[" + ", ".join(render(v) for v in value) + "]"
    if isinstance(value, Record):
        return "{" + ", ".join(f"{k}: {render(v)}" for k, v in value.fields) + "}"
    raise TypeError(f"not a thing: {value!r}")
