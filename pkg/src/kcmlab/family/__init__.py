"""Update families: stable directions, difficulties, classification, quasi-stable sets."""
from .difficulty import (FamilyReport, HelpingSetSpec, SearchParams, analyze_family, classify,
                         difficulty, family_difficulty, find_helping_set, refined_class)
from .directions import Direction, LineFrame
from .family import StableSet, UpdateFamily, classify_kind, parse_family, stable_set, zoo
from .quasistable import QuasiStableSet, quasi_stable_set
