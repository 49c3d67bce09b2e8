"""
System-wide constants for the PE-GNN toolkit.
"""


# ─── Geometry ────────────────────────────────────────────────────────
EARTH_RADIUS_KM = 6371.0
LON_RANGE = (-180.0, 180.0)
LAT_RANGE = (-90.0, 90.0)
MIN_EDGE_DISTANCE_KM = 1e-3     # floor for inverse-distance edge weights


# ─── Edge Weighting ──────────────────────────────────────────────────
class EdgeWeighting:
    BINARY = "binary"
    INVERSE_DISTANCE = "inverse_distance"


# ─── Backbones ───────────────────────────────────────────────────────
class Backbone:
    GCN = "gcn"
    SAGE = "sage"


# ─── Loss Modes ──────────────────────────────────────────────────────
class LossMode:
    FIXED = "fixed"
    LEARNED = "learned"


# ─── Activations ─────────────────────────────────────────────────────
class Activation:
    RELU = "relu"
    SIGMOID = "sigmoid"


# ─── Numerical Tolerances ────────────────────────────────────────────
MORAN_DEGENERATE_TOL = 1e-12
GRADCHECK_DENOM_FLOOR = 1e-12


# ─── Serialization ───────────────────────────────────────────────────
CHECKPOINT_FORMAT_VERSION = 1
REPORT_COLUMNS = ["step", "main_loss", "aux_loss", "total_loss", "sigma_main", "sigma_aux"]


# ─── CLI Exit Codes ──────────────────────────────────────────────────
class ExitCode:
    OK = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3
