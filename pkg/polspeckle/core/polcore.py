"""
Polarimetric Core - Coherency Matrix Mathematics
=================================================
Closed-form mathematics of a 2x2 Jones coherency matrix:

    Gamma = [[a1,  a2 ],        Gamma^-1 = [[c1,  c2 ],
             [a2*, a4 ]]                    [c2*, c4 ]]

- squared degree of polarization P^2 = 1 - 4 det(Gamma) / tr(Gamma)^2
- eigenvalues of the Hermitian matrix
- the (a) <-> (c) parameterizations
- intensity correlations of circular Gaussian light:
      <I1 I2> = a1 a4 + |a2|^2,   <I1 I2> - <I1><I2> = |a2|^2
- the OSCI correction P^2 = eta^2 + 4 |a2|^2 / (<I1> + <I2>)^2

All values are immutable and safe to share between worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from polspeckle.core.errors import DomainError


# Relative tolerance (w.r.t. trace^2) for a slightly negative determinant
# to be accepted as a rank-1 boundary and clamped to zero.
PSD_TOLERANCE = 1e-12

# Relative tolerance (w.r.t. trace^2) below which a determinant is singular.
SINGULAR_TOLERANCE = 1e-14

# Largest floating-point overshoot clamped away in P^2 and eigenvalues.
EPSILON_CLAMP = 1e-12

# Agreement required between the c-form of <I1 I2> and the moment identity,
# before scaling by the eigenvalue ratio.
MOMENT_IDENTITY_RTOL = 1e-10


def _as_complex(value: complex, name: str) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


def _as_real(value: float, name: str) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class CoherencyMatrix:
    """
    Hermitian positive semidefinite coherency matrix of a Jones vector.

    Only a2 is stored; the lower-left entry is its conjugate.
    """
    a1: float
    a4: float
    a2: complex = 0j

    def __post_init__(self) -> None:
        a1 = _as_real(self.a1, "a1")
        a4 = _as_real(self.a4, "a4")
        a2 = _as_complex(self.a2, "a2")
        if a1 < 0 or a4 < 0:
            raise DomainError(
                f"coherency matrix is not positive semidefinite: "
                f"diagonal entries must be >= 0 (a1={a1}, a4={a4})"
            )
        raw_det = a1 * a4 - abs(a2) ** 2
        if raw_det < -PSD_TOLERANCE * (a1 + a4) ** 2:
            raise DomainError(
                f"coherency matrix is not positive semidefinite: "
                f"det = {raw_det:.6g} < 0 (a1={a1}, a2={a2}, a4={a4})"
            )
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a4", a4)
        object.__setattr__(self, "a2", a2)

    @classmethod
    def from_tuple(cls, values: Tuple[float, float, float, float]) -> "CoherencyMatrix":
        """Build from the serialized 4-tuple (a1, a2.re, a2.im, a4)."""
        a1, a2_re, a2_im, a4 = values
        return cls(a1=a1, a4=a4, a2=complex(a2_re, a2_im))

    @classmethod
    def from_inverse(cls, coeffs: "InverseCoefficients") -> "CoherencyMatrix":
        """Gamma = (c4, -c2, c1) / (c1 c4 - |c2|^2)."""
        d = coeffs.c1 * coeffs.c4 - abs(coeffs.c2) ** 2
        return cls(a1=coeffs.c4 / d, a4=coeffs.c1 / d, a2=-coeffs.c2 / d)

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "CoherencyMatrix":
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(a1=m[0, 0].real, a4=m[1, 1].real, a2=complex(m[0, 1]))

    @property
    def trace(self) -> float:
        return self.a1 + self.a4

    @property
    def det(self) -> float:
        """Determinant, clamped to 0 inside the PSD tolerance band."""
        return max(self.a1 * self.a4 - abs(self.a2) ** 2, 0.0)

    @property
    def a2_sq(self) -> float:
        return abs(self.a2) ** 2

    @property
    def is_diagonal(self) -> bool:
        return self.a2 == 0

    def as_array(self) -> np.ndarray:
        return np.array(
            [[self.a1, self.a2], [self.a2.conjugate(), self.a4]], dtype=complex
        )

    def scaled(self, k: float) -> "CoherencyMatrix":
        return CoherencyMatrix(a1=k * self.a1, a4=k * self.a4, a2=k * self.a2)

    def to_tuple(self) -> Tuple[float, float, float, float]:
        return (self.a1, self.a2.real, self.a2.imag, self.a4)


@dataclass(frozen=True)
class InverseCoefficients:
    """Entries (c1, c2, c4) of the inverse of a strictly positive definite Gamma."""
    c1: float
    c4: float
    c2: complex = 0j

    def __post_init__(self) -> None:
        c1 = _as_real(self.c1, "c1")
        c4 = _as_real(self.c4, "c4")
        c2 = _as_complex(self.c2, "c2")
        if c1 <= 0 or c4 <= 0 or c1 * c4 - abs(c2) ** 2 <= 0:
            raise DomainError(
                f"inverse coefficients are not positive definite (c1={c1}, c2={c2}, c4={c4})"
            )
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c4", c4)
        object.__setattr__(self, "c2", c2)


# ============================================================================
# DEGREE OF POLARIZATION
# ============================================================================

def _require_trace(gamma: CoherencyMatrix) -> float:
    tr = gamma.trace
    if tr <= 0:
        raise DomainError(f"degenerate coherency matrix: trace = {tr}")
    return tr


def degree_of_polarization_squared(gamma: CoherencyMatrix) -> float:
    """P^2 = 1 - 4 (a1 a4 - |a2|^2) / (a1 + a4)^2, in [0, 1]."""
    tr = _require_trace(gamma)
    p2 = 1.0 - 4.0 * gamma.det / (tr * tr)
    if -EPSILON_CLAMP < p2 < 0.0:
        return 0.0
    if 1.0 < p2 < 1.0 + EPSILON_CLAMP:
        return 1.0
    return p2


def degree_of_polarization(gamma: CoherencyMatrix) -> float:
    return math.sqrt(degree_of_polarization_squared(gamma))


def eigenvalues(gamma: CoherencyMatrix) -> Tuple[float, float]:
    """Eigenvalues (mu1, mu2) of Gamma with mu1 >= mu2 >= 0."""
    half_tr = 0.5 * gamma.trace
    # tr^2/4 - det = ((a1 - a4)/2)^2 + |a2|^2, no cancellation
    radius = math.hypot(0.5 * (gamma.a1 - gamma.a4), abs(gamma.a2))
    mu1 = half_tr + radius
    mu2 = half_tr - radius
    if mu2 < 0.0:
        if mu2 < -EPSILON_CLAMP * gamma.trace:
            raise DomainError(f"negative eigenvalue {mu2} for a PSD matrix")
        mu2 = 0.0
    return mu1, mu2


# ============================================================================
# PARAMETERIZATIONS
# ============================================================================

def invert(gamma: CoherencyMatrix) -> InverseCoefficients:
    """(c1, c2, c4) = (a4, -a2, a1) / det(Gamma)."""
    d = gamma.a1 * gamma.a4 - gamma.a2_sq
    if d <= SINGULAR_TOLERANCE * gamma.trace ** 2:
        raise DomainError(f"singular coherency matrix: det = {d:.6g}")
    return InverseCoefficients(c1=gamma.a4 / d, c4=gamma.a1 / d, c2=-gamma.a2 / d)


# ============================================================================
# INTENSITY CORRELATIONS (fully developed speckle)
# ============================================================================

def intensity_moment_c_form(gamma: CoherencyMatrix) -> float:
    """
    <I1 I2> from the inverse coefficients:

        delta12 = (1 + r) / ((1 - r)^3 det(Gamma) c1^2 c4^2),  r = |c2|^2 / (c1 c4)
    """
    coeffs = invert(gamma)
    d = gamma.a1 * gamma.a4 - gamma.a2_sq
    r = abs(coeffs.c2) ** 2 / (coeffs.c1 * coeffs.c4)
    return (1.0 + r) / ((1.0 - r) ** 3 * d * coeffs.c1 ** 2 * coeffs.c4 ** 2)


def theoretical_intensity_correlation(gamma: CoherencyMatrix) -> Tuple[float, float]:
    """
    Return (delta12, Delta12) = (<I1 I2>, <I1 I2> - <I1><I2>).

    delta12 is evaluated both from the c-parameterization and from the
    Gaussian moment identity a1 a4 + |a2|^2; the two must agree.
    """
    c_form = intensity_moment_c_form(gamma)
    moment = gamma.a1 * gamma.a4 + gamma.a2_sq

    # rounding in (1 - r)^3 grows with the eigenvalue spread
    mu1, mu2 = eigenvalues(gamma)
    rtol = MOMENT_IDENTITY_RTOL * max(1.0, mu1 / mu2)
    if abs(c_form - moment) > rtol * abs(moment):
        raise DomainError(
            f"intensity moment mismatch: c-form {c_form!r} vs a1*a4 + |a2|^2 {moment!r}"
        )
    return moment, moment - gamma.a1 * gamma.a4


def osci_correction(eta_squared: float, Delta12: float, mean_I1: float, mean_I2: float) -> float:
    """P^2 = eta^2 + 4 Delta12 / (<I1> + <I2>)^2."""
    total = mean_I1 + mean_I2
    if total <= 0:
        raise DomainError(f"zero total intensity: <I1> + <I2> = {total}")
    return eta_squared + 4.0 * Delta12 / (total * total)


def osci_population(gamma: CoherencyMatrix) -> float:
    """Region-level OSCI value ((a1 - a4)/(a1 + a4))^2 for a known Gamma."""
    tr = _require_trace(gamma)
    return ((gamma.a1 - gamma.a4) / tr) ** 2


def osci_bias(gamma: CoherencyMatrix) -> float:
    """Expected OSCI error -4 |a2|^2 / (a1 + a4)^2 (zero for pure depolarizers)."""
    tr = _require_trace(gamma)
    return -4.0 * gamma.a2_sq / (tr * tr)


# ============================================================================
# REFERENCE MATRICES
# ============================================================================

def reference_matrices() -> Dict[str, CoherencyMatrix]:
    """The six benchmark matrices G1..G6, P^2 ~ {0.2, 0.4, 0.5, 0.6, 0.8, 1}."""
    return {
        "G1": CoherencyMatrix(a1=15.0, a4=6.0, a2=complex(0.2, 0.5)),
        "G2": CoherencyMatrix(a1=16.0, a4=3.6, a2=0j),
        "G3": CoherencyMatrix(a1=82.0, a4=17.0, a2=complex(0.0, 13.0)),
        "G4": CoherencyMatrix(a1=18.0, a4=11.0, a2=complex(7.0, 8.0)),
        "G5": CoherencyMatrix(a1=30.0, a4=14.0, a2=complex(16.0, -8.0)),
        "G6": CoherencyMatrix(a1=1.25, a4=26.0, a2=complex(0.0, 5.5)),
    }
