"""Knowledge hunting for Winograd schemas and COPA.

The pipeline decomposes an instance into context and query predicates,
turns those into paired search terms, pulls co-occurrence snippets from a
corpus, labels each snippet as agent or patient evidence and sums the
evidence strengths into a decision.
"""

from .estimator import CopaHunter, KnowledgeHunter
from .labels import Decision, EvidenceLabel, Ordering, QueryMode, Relation

__all__ = ["CopaHunter", "Decision", "EvidenceLabel", "KnowledgeHunter", "Ordering", "QueryMode", "Relation"]
__version__ = "0.1.0"
