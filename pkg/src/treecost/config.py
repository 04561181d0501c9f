"""Numerical tolerances and size caps shared across the library.

Values are module-level constants so call sites can override per call where a
function exposes the knob; the total-dimension cap can also be overridden via
the TREECOST_DIM_CAP environment variable.
"""

import os

# Relative singular-value cutoff deciding Schmidt ranks.
RANK_TOL = 1e-9

# Pure-state norm / trace checks.
NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

# Measurement-set completeness deviation allowed at any vertex.
COMPLETENESS_TOL = 1e-10

# Branches below this probability are pruned (or rejected in forced mode).
BRANCH_PRUNE_TOL = 1e-12

# Minimum acceptable branch fidelity for a successful construction.
FIDELITY_TOL = 1e-9

# Eigenvalues closer than this (relative) are merged into one spectrum entry.
SPECTRUM_MERGE_RTOL = 1e-12

# Eigenvalues below this fraction of the largest are treated as zero.
SPECTRUM_DROP_RTOL = 1e-12

# Exact spectrum-entropy evaluation refuses more type classes than this.
TYPE_CLASS_CAP = 2_000_000

# Total amplitude count allowed for any state, including n-copy states.
DEFAULT_DIM_CAP = 2 ** 22


def dim_cap() -> int:
    """Amplitude cap, honoring the TREECOST_DIM_CAP environment override."""
    raw = os.environ.get("TREECOST_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    return int(raw)
