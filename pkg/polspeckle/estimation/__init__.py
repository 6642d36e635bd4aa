from polspeckle.estimation.estimators import (
    ALL_ESTIMATORS,
    EstimationResult,
    EstimatorKind,
    estimate_a2sq_correlated_pair,
    estimate_a2sq_four_image,
    estimate_all,
    estimate_diagonal,
    estimate_p2,
    mean_pixel_osci,
)
from polspeckle.estimation.maps import EstimateMap, OsciMap, estimate_map, osci_map
