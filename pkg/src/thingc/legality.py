"""The flow-legality relation between stage kinds.

A flow is legal when its ``(from kind, to kind, same machine)`` triple is
in :data:`LEGAL_FLOWS`.  Storage endpoints use the pseudo-kind
``"storage"``; a storage counts as "same machine" when it is owned by the
stage's machine or by one of its ancestors.
"""

from __future__ import annotations

from enum import Enum


class StageKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"

    def __str__(self) -> str:
        return self.value


STORAGE = "storage"

_C, _P, _L, _T, _R = (StageKind.CREATE, StageKind.PROCESS, StageKind.RELEASE,
                      StageKind.TRANSFER, StageKind.RECEIVE)

LEGAL_FLOWS: frozenset[tuple[str, str, bool]] = frozenset({
    (_T, _R, True),
    (_R, _P, True),
    (_R, _L, True),
    (_P, _L, True),
    (_C, _P, True),
    (_C, _L, True),
    (_L, _T, True),
    (_C, STORAGE, True),
    (_P, STORAGE, True),
    (STORAGE, _P, True),
    (STORAGE, _L, True),
    (_T, _T, False),
})

TRIGGER_TARGETS = frozenset({StageKind.CREATE, StageKind.PROCESS})


def is_legal(source_kind: str, target_kind: str, same_machine: bool) -> bool:
    return (source_kind, target_kind, same_machine) in LEGAL_FLOWS


def explain(source_kind: str, target_kind: str, same_machine: bool) -> tuple[str, str]:
    """Name the rule an illegal triple violates, plus a message."""
    src, dst = str(source_kind), str(target_kind)
    if STORAGE in (source_kind, target_kind):
        if (source_kind, target_kind, True) in LEGAL_FLOWS:
            return ("StorageScope",
                    f"{src} -> {dst} must stay within the storage's machine or its descendants")
        return "IllegalStorageFlow", f"{src} -> {dst} is not a storage edge"
    if same_machine:
        if (source_kind, target_kind, False) in LEGAL_FLOWS:
            return "InterMachineOnly", f"{src} -> {dst} only connects different machines"
        return "IllegalFlow", f"{src} -> {dst} is not a legal flow inside a machine"
    return "IntraMachineOnly" if (source_kind, target_kind, True) in LEGAL_FLOWS else "IllegalFlow", (
        f"{src} -> {dst} cannot cross machines; only transfer -> transfer can")
