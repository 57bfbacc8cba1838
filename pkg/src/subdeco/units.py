"""Internal unit system and physical constants.

Everything inside the package runs in meV / nm / ps / K.  In these units all
scattering and decoherence rates come out directly in ps^-1 and all Lamb-shift
energies in meV, which is the natural scale of few-nm GaAs dot arrays.
"""

HBAR = 0.6582119        # meV ps
KB = 0.0861733          # meV / K

# GaAs LO-phonon energy; the acoustic-only model is valid for splittings below it.
OPTICAL_PHONON_MEV = 36.0

# SI -> internal conversion factors.
# mass density: 1 kg/m^3 = 1 J s^2 / m^5 -> meV ps^2 / nm^5
KG_PER_M3 = 6.241509074
# velocity: 1 m/s -> nm/ps
M_PER_S = 1.0e-3


def mass_density_from_si(rho_kg_m3: float) -> float:
    """Convert a mass density in kg/m^3 to internal meV ps^2 / nm^5."""
    return rho_kg_m3 * KG_PER_M3


def mass_density_to_si(rho_internal: float) -> float:
    return rho_internal / KG_PER_M3


def velocity_from_si(v_m_s: float) -> float:
    """Convert a velocity in m/s to internal nm/ps."""
    return v_m_s * M_PER_S


def velocity_to_si(v_internal: float) -> float:
    return v_internal / M_PER_S
