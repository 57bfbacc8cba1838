"""Quantum-dot array geometry, material constants and single-particle form factors.

The model dot is a hard-wall quantum well of width d along the array (z) axis
combined with an isotropic 2D harmonic confinement in the transverse plane.
The qubit is the two lowest orbital levels, split by the transverse quantum
E = hbar*omega.  The in-plane Gaussian parameter is

    a0 = m* omega / (2 hbar) = E / (4 * (hbar^2 / 2 m*))        [nm^-2]

and q0 = 2 pi / d is the well's characteristic wavevector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .units import HBAR, KB, OPTICAL_PHONON_MEV


class DeviceError(ValueError):
    """Raised when device or material parameters violate a hard constraint."""


@dataclass(frozen=True)
class MaterialParams:
    """Crystal constants in internal units (meV, nm, ps).

    ``reference_mass_energy`` is hbar^2/(2 m*) for the unscaled conduction-band
    mass; ``effective_mass_multiplier`` scales m* (so it divides that energy).
    """

    effective_mass_multiplier: float = 1.0
    sound_velocity: float = 5.11            # nm / ps
    mass_density: float = 33080.0           # meV ps^2 / nm^5  (GaAs, 5300 kg/m^3)
    deformation_constant: float = 7000.0    # meV
    reference_mass_energy: float = 569.0    # meV nm^2 (GaAs, m* = 0.067 m_e)

    def __post_init__(self):
        for name in ("effective_mass_multiplier", "sound_velocity", "mass_density",
                     "deformation_constant", "reference_mass_energy"):
            if not getattr(self, name) > 0:
                raise DeviceError(f"material parameter {name} must be positive")

    @property
    def hbar2_over_2mstar(self) -> float:
        """hbar^2/(2 m*) for the (possibly rescaled) effective mass, meV nm^2."""
        return self.reference_mass_energy / self.effective_mass_multiplier

    def with_multiplier(self, multiplier: float) -> "MaterialParams":
        return replace(self, effective_mass_multiplier=multiplier)


#: Default material table; overridable through the run config.
MATERIALS = {
    "GaAs": MaterialParams(),
}


def gaas(multiplier: float = 1.0) -> MaterialParams:
    return MATERIALS["GaAs"].with_multiplier(multiplier)


@dataclass(frozen=True)
class DeviceParams:
    """Geometry and operating point of the dot array."""

    num_dots: int
    level_splitting: float    # E, meV
    well_width: float         # d, nm
    dot_spacing: float        # a, nm
    temperature: float        # T, K

    def __post_init__(self):
        if int(self.num_dots) != self.num_dots or self.num_dots < 1:
            raise DeviceError("num_dots must be a positive integer")
        if not self.level_splitting > 0:
            raise DeviceError("level_splitting must be positive")
        if self.level_splitting >= OPTICAL_PHONON_MEV:
            raise DeviceError(
                f"level_splitting {self.level_splitting} meV is not below the "
                f"optical-phonon threshold ({OPTICAL_PHONON_MEV} meV)")
        if not self.well_width > 0:
            raise DeviceError("well_width must be positive")
        if self.dot_spacing < self.well_width:
            raise DeviceError(
                f"dot_spacing {self.dot_spacing} nm < well_width {self.well_width} nm: "
                "wavefunctions of distinct dots would overlap")
        if self.temperature < 0:
            raise DeviceError("temperature must be >= 0")

    def a0(self, mat: MaterialParams) -> float:
        """Transverse Gaussian parameter a0 = E / (4 hbar^2/2m*), nm^-2."""
        return self.level_splitting / (4.0 * mat.hbar2_over_2mstar)

    @property
    def q0(self) -> float:
        """Well wavevector 2 pi / d, nm^-1."""
        return 2.0 * np.pi / self.well_width

    def perp_length(self, mat: MaterialParams) -> float:
        """Transverse confinement length a0^{-1/2}, nm."""
        return 1.0 / np.sqrt(self.a0(mat))

    def resonant_wavevector(self, mat: MaterialParams) -> float:
        """On-shell acoustic wavevector Q = E / (hbar c), nm^-1."""
        return self.level_splitting / (HBAR * mat.sound_velocity)

    def dot_positions(self) -> np.ndarray:
        """z_i = i * a for i = 0 .. N-1, nm."""
        return self.dot_spacing * np.arange(self.num_dots, dtype=float)


@dataclass(frozen=True)
class FormFactors:
    """Single-dot overlap integrals of exp(i q.r) between the qubit orbitals."""

    gx: complex
    gy: complex
    gz: complex


def well_form_factor(x):
    """Hard-wall ground-state overlap, as a function of x = q_z / q0.

    Equals sin(pi x) / (pi x (1 - x^2)); the removable points x = 0, +-1 are
    evaluated through equivalent smooth rewritings (value 1 at 0, 1/2 at +-1).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near_pole = np.abs(np.abs(x) - 1.0) < 0.5
    mid = ~near_pole
    xm = x[mid]
    out[mid] = np.sinc(xm) / (1.0 - xm * xm)
    xn = x[near_pole]
    s = np.sign(xn)
    out[near_pole] = np.sinc(xn - s) / (xn * (xn + s))
    return out if out.ndim else float(out)


def form_factors(q_vec, dot_index: int, device: DeviceParams,
                 mat: MaterialParams) -> FormFactors:
    """Evaluate (gx, gy, gz) at wavevector q_vec = (qx, qy, qz) for one dot.

    gx is the diagonal transverse overlap, gy the inter-level one (odd and
    purely imaginary in qy), and gz the well overlap carrying the positional
    phase exp(i qz z_i) with z_i = dot_index * a.
    """
    qx, qy, qz = (float(c) for c in q_vec)
    a0 = device.a0(mat)
    gx = np.exp(-qx * qx / (8.0 * a0))
    gy = 1j * qy / (2.0 * np.sqrt(a0)) * np.exp(-qy * qy / (8.0 * a0))
    z_i = dot_index * device.dot_spacing
    gz = well_form_factor(qz / device.q0) * np.exp(1j * qz * z_i)
    return FormFactors(gx=complex(gx), gy=complex(gy), gz=complex(gz))


def qubit_energies(device: DeviceParams, mat: MaterialParams,
                   levels=((0, 0, 1), (0, 1, 1))):
    """Single-particle energies for (n_x, n_y, nu) levels, meV.

    eps = (n_x + n_y + 1) E  +  pi^2 (hbar^2/2m*) nu^2 / d^2.
    The default levels are the two qubit states; their difference is E exactly.
    """
    se = mat.hbar2_over_2mstar
    d = device.well_width
    out = []
    for (nx, ny, nu) in levels:
        if nx < 0 or ny < 0 or nu < 1:
            raise DeviceError(f"invalid level ({nx},{ny},{nu})")
        out.append((nx + ny + 1) * device.level_splitting
                   + np.pi ** 2 * se * nu ** 2 / d ** 2)
    return out


def validate(device: DeviceParams, mat: MaterialParams) -> list:
    """Soft checks; returns human-readable warnings (hard errors raise earlier).

    Warns when the gap to the leakage levels is not >> k_B T, and when the
    transverse-to-longitudinal scale ratio Q/sqrt(a0) is too small for the
    single-effective-mode (cosine) regime.
    """
    warnings = []
    if device.temperature > 0:
        ratio = device.level_splitting / (KB * device.temperature)
        if ratio < 5.0:
            warnings.append(
                f"leakage regime: E = {ratio:.2f} k_B T (want E >> k_B T)")
    qratio = device.resonant_wavevector(mat) * device.perp_length(mat)
    if qratio < 10.0:
        warnings.append(
            f"cosine approximation degraded: Q/sqrt(a0) = {qratio:.2f} < 10")
    return warnings
