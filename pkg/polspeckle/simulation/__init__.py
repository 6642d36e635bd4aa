from polspeckle.simulation.scene import ImagePair, Region, SceneSpec, region_labels, render_scene
from polspeckle.simulation.speckle import (
    IntensityRecord,
    IntensityRecords,
    JonesEnsemble,
    cholesky_factor,
    empirical_coherency,
    pseudo_covariance,
    sample_jones,
    to_intensity_records,
)
from polspeckle.simulation.streams import SamplerConfig, derive_stream_id
