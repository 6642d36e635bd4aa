from polspeckle.core.errors import (
    ConfigError,
    ContractViolation,
    DomainError,
    PolarimetryError,
    ReportError,
)
from polspeckle.core.polcore import (
    CoherencyMatrix,
    InverseCoefficients,
    degree_of_polarization,
    degree_of_polarization_squared,
    eigenvalues,
    invert,
    osci_bias,
    osci_correction,
    osci_population,
    reference_matrices,
    theoretical_intensity_correlation,
)
