"""Exact lattice geometry of annuli and snails, their good events, and the token game."""
from .annulus import AnnulusSpec, build_annulus
from .bisection import bisect_snail, bisection_identities, is_type_i, type_i_violations
from .events import (EventChecker, EventReport, check_events, make_checker, sample_supergood,
                     spans, verify_supergood_spans)
from .halfplane import HalfPlane, lattice_points
from .snail import BOTH, LEFT, RIGHT, SnailRegions, SnailSpec, build_snail
from .strip import HelpingSets, WConsecutive, verify_strip_lemma
from .tokens import east_min_tokens
