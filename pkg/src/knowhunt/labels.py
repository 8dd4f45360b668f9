"""Enumerations shared across pipeline stages."""

from enum import Enum


class Decision(str, Enum):
    AGENT = "agent"
    PATIENT = "patient"
    ALT1 = "alt1"
    ALT2 = "alt2"
    ABSTAIN = "abstain"

    def __str__(self) -> str:
        return self.value


class Relation(str, Enum):
    CAUSE = "cause"
    RESULT = "result"

    def __str__(self) -> str:
        return self.value


class QueryMode(str, Enum):
    AGQ = "AGQ"
    AGQS = "AGQS"
    AGQSF = "AGQSF"
    MGQ = "MGQ"

    def __str__(self) -> str:
        return self.value


class Ordering(str, Enum):
    ANY = "any"
    C_BEFORE_Q = "c_before_q"
    Q_BEFORE_C = "q_before_c"

    def __str__(self) -> str:
        return self.value


class EvidenceLabel(str, Enum):
    EA = "EA"
    EP = "EP"
    INSUFFICIENT = "Insufficient"

    def __str__(self) -> str:
        return self.value
