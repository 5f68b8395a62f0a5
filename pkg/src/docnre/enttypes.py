"""Entity type vocabulary shared across modules."""
from __future__ import annotations

from enum import Enum


class EntityType(str, Enum):
    DRUG = "drug"
    GENE = "gene"
    MUTATION = "mutation"
