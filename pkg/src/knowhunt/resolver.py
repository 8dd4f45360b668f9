"""Turn labeled evidence into a decision."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from typing import Iterable

from .evidence import EvidenceSentence
from .labels import Decision, EvidenceLabel


@dataclass(frozen=True)
class Resolution:
    """Outcome for one instance.

    For COPA the two strength fields hold the alt1 and alt2 totals.
    """

    instance_id: str
    decision: Decision
    agent_strength: int = 0
    patient_strength: int = 0
    evidence_count: int = 0
    task: str = "wsc"
    guessed: bool = False

    def __post_init__(self):
        if self.agent_strength < 0 or self.patient_strength < 0:
            raise ValueError("strengths are non-negative")
        if not self.guessed:
            first, second = (
                (Decision.AGENT, Decision.PATIENT) if self.task == "wsc" else (Decision.ALT1, Decision.ALT2)
            )
            if self.decision == first and not self.agent_strength > self.patient_strength:
                raise ValueError(f"{first} requires the larger strength")
            if self.decision == second and not self.patient_strength > self.agent_strength:
                raise ValueError(f"{second} requires the larger strength")

    @property
    def answered(self) -> bool:
        return self.decision != Decision.ABSTAIN

    @property
    def strengths(self) -> dict[str, int]:
        if self.task == "wsc":
            return {"agent": self.agent_strength, "patient": self.patient_strength}
        return {"alt1": self.agent_strength, "alt2": self.patient_strength}

    def to_record(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "decision": str(self.decision),
            "strengths": self.strengths,
            "evidence_count": self.evidence_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False)


def _compare(a: int, b: int, first: Decision, second: Decision) -> Decision:
    if a > b:
        return first
    if b > a:
        return second
    return Decision.ABSTAIN


def decide_wsc(evidence: Iterable[EvidenceSentence], instance_id: str = "") -> Resolution:
    evidence = list(evidence)
    agent = sum(e.strength for e in evidence if e.label == EvidenceLabel.EA)
    patient = sum(e.strength for e in evidence if e.label == EvidenceLabel.EP)
    decision = _compare(agent, patient, Decision.AGENT, Decision.PATIENT)
    return Resolution(instance_id, decision, agent, patient, len(evidence))


def decide_copa(
    evidence_alt1: Iterable[EvidenceSentence],
    evidence_alt2: Iterable[EvidenceSentence],
    instance_id: str = "",
) -> Resolution:
    """Larger strength total wins.

    The relation is applied upstream, as an ordering constraint on retrieval.
    """
    ev1, ev2 = list(evidence_alt1), list(evidence_alt2)
    a1 = sum(e.strength for e in ev1)
    a2 = sum(e.strength for e in ev2)
    decision = _compare(a1, a2, Decision.ALT1, Decision.ALT2)
    return Resolution(instance_id, decision, a1, a2, len(ev1) + len(ev2), task="copa")


def backoff_random(resolution: Resolution, seed: int) -> Resolution:
    """Replace an abstention with a seeded coin flip.

    The generator is keyed on both the seed and the instance id, so the
    guess for one instance does not depend on which others were run.
    """
    if resolution.answered:
        return resolution
    rng = random.Random(f"{seed}:{resolution.instance_id}")
    choices = (Decision.AGENT, Decision.PATIENT) if resolution.task == "wsc" else (Decision.ALT1, Decision.ALT2)
    return replace(resolution, decision=rng.choice(choices), guessed=True)
