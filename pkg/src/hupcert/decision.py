"""Tri-state verdicts with certificate payloads."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .measures import AtomicMeasure


class Verdict(str, enum.Enum):
    HUP = "HUP"
    NOT_HUP = "NOT_HUP"
    UNDECIDED = "UNDECIDED"


@dataclass
class Decision:
    verdict: Verdict
    rule: str
    certificate: Optional[AtomicMeasure] = None
    notes: list[str] = field(default_factory=list)
    maxden: Optional[int] = None

    def __post_init__(self):
        if self.verdict is Verdict.NOT_HUP and self.certificate is None:
            raise ValueError("NOT_HUP requires a certificate")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "rule": self.rule,
            "notes": list(self.notes),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "maxden": self.maxden,
        }
