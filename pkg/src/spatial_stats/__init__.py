# Spatial autocorrelation statistics
from .moran import MoranResult, batch_moran_target, local_moran
