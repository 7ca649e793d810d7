"""Deterministic sub-seed derivation from one base seed.

A batch run owns a single user-facing seed; every instance, restart stream,
and rounding pass derives its own child seed from (base, counters...) so
subsets of a batch can be recomputed independently with identical results.
"""

from __future__ import annotations

import numpy as np


def derive_seed(base: int, *counters: int) -> int:
    """Child seed for a (base, counter...) path, stable across runs.

    Feeds the integers into ``numpy.random.SeedSequence`` as an entropy
    list and returns the first generated 32-bit word.
    """
    seq = np.random.SeedSequence([int(base), *(int(c) for c in counters)])
    return int(seq.generate_state(1)[0])
