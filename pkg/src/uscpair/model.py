"""Hamiltonian assembly and drive pulses.

Internal units: hbar = 1 and omega_c = 1, so every rate and frequency is
quoted as a fraction of the cavity frequency and times are in 1/omega_c.
The static Hamiltonian is

    H = eps |e><e| - eps' |u><u| + omega_c a'a + lam * C_eg

with the g-e coupling C_eg either the full form (a + a')(|e><g| + |g><e|)
or its corotating part a'|g><e| + a|e><g|.  A possible spurious
("stray") corotating coupling of the cavity to the u-g transition,

    H_ug = lam' (|u><g| a' + |g><u| a),

is assembled separately so protocols can switch it on and off
independently of the g-e channel.

Sign convention for the ancilla level: the Lambda configuration uses
eps' > 0 (u sits 4*eps below g for the preset parameters), the Vee
configuration uses eps' < 0, which puts u above the first excited
doublet.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .hilbert import SpaceDef, atom_matrix, compose, mode_annihilation

CONFIG_LAMBDA = "lambda"
CONFIG_VEE = "vee"
CONFIGURATIONS = (CONFIG_LAMBDA, CONFIG_VEE)

COUPLING_FULL = "full"
COUPLING_COROTATING = "corotating_only"


@dataclass(frozen=True)
class SystemParams:
    """Static system parameters, all in units of omega_c."""

    epsilon: float = 1.0
    epsilon_prime: float = 4.0
    lam: float = 0.5
    lam_prime: float = 0.0
    eg_coupling_form: str = COUPLING_FULL
    n_max: int = 20
    omega_c: float = 1.0

    def __post_init__(self) -> None:
        if self.omega_c <= 0:
            raise ValueError(f"omega_c = {self.omega_c} must be positive")
        if self.eg_coupling_form not in (COUPLING_FULL, COUPLING_COROTATING):
            raise ValueError(
                f"eg_coupling_form = {self.eg_coupling_form!r}, expected "
                f"{COUPLING_FULL!r} or {COUPLING_COROTATING!r}"
            )
        SpaceDef(self.n_max)  # validates the truncation

    def space(self) -> SpaceDef:
        return SpaceDef(self.n_max)

    def without_stray(self) -> "SystemParams":
        return replace(self, lam_prime=0.0)


def assemble_static(params: SystemParams) -> np.ndarray:
    """Static Hamiltonian without the stray u-g channel.

    Always exactly Hermitian: built from manifestly Hermitian pieces.
    """
    space = params.space()
    a = mode_annihilation(space)
    ident = np.eye(space.n_max)
    h = params.epsilon * compose(atom_matrix("e", "e"), ident)
    h -= params.epsilon_prime * compose(atom_matrix("u", "u"), ident)
    h += params.omega_c * compose(np.eye(3), a.conj().T @ a)
    sig_eg = atom_matrix("g", "e")  # |e><g|
    sig_ge = atom_matrix("e", "g")
    if params.eg_coupling_form == COUPLING_FULL:
        h += params.lam * compose(sig_eg + sig_ge, a + a.conj().T)
    else:
        h += params.lam * (compose(sig_ge, a.conj().T) + compose(sig_eg, a))
    return h


def assemble_stray(params: SystemParams) -> np.ndarray:
    """Stray corotating u-g coupling lam' (|u><g| a' + |g><u| a)."""
    space = params.space()
    a = mode_annihilation(space)
    sig_ug = atom_matrix("g", "u")  # |u><g|
    sig_gu = atom_matrix("u", "g")
    return params.lam_prime * (compose(sig_ug, a.conj().T) + compose(sig_gu, a))


def assemble_total_static(params: SystemParams) -> np.ndarray:
    h = assemble_static(params)
    if params.lam_prime != 0.0:
        h = h + assemble_stray(params)
    return h


@dataclass(frozen=True)
class PulseSpec:
    """Two-tone STIRAP drive in the lab frame.

    W(t) = W_s exp(-((t + tau)/T)^2) cos(omega_s t)
         + W_p exp(-((t - tau)/T)^2) cos(omega_p t)

    so the Stokes pulse peaks at t = -tau, the pump at t = +tau
    (counterintuitive ordering).  Carriers may be None until derived
    from the spectrum; amplitudes and times are in omega_c units.
    """

    w_s_peak: float
    w_p_peak: float
    T: float
    tau: float
    configuration: str = CONFIG_LAMBDA
    omega_s: float | None = None
    omega_p: float | None = None

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError(f"pulse width T = {self.T} must be positive")
        if self.tau <= 0:
            raise ValueError(f"pulse delay tau = {self.tau} must be positive")
        if self.w_s_peak < 0 or self.w_p_peak < 0:
            raise ValueError("pulse peak amplitudes must be non-negative")
        if self.configuration not in CONFIGURATIONS:
            raise ValueError(
                f"configuration = {self.configuration!r}, expected one of {CONFIGURATIONS}"
            )

    @property
    def carriers_set(self) -> bool:
        return self.omega_s is not None and self.omega_p is not None

    def with_carriers(self, omega_p: float, omega_s: float) -> "PulseSpec":
        return replace(self, omega_p=omega_p, omega_s=omega_s)


def envelope(pulses: PulseSpec, t, which: str):
    """Gaussian envelope of one tone ('stokes' or 'pump'), vectorized in t."""
    t = np.asarray(t, dtype=float)
    if which == "stokes":
        return pulses.w_s_peak * np.exp(-(((t + pulses.tau) / pulses.T) ** 2))
    if which == "pump":
        return pulses.w_p_peak * np.exp(-(((t - pulses.tau) / pulses.T) ** 2))
    raise ValueError(f"unknown tone {which!r}, expected 'stokes' or 'pump'")


def drive_amplitude(pulses: PulseSpec, t):
    """Total scalar drive W(t), both tones with their cos carriers."""
    if not pulses.carriers_set:
        raise ValueError("drive carriers are not set; derive them first")
    t = np.asarray(t, dtype=float)
    return envelope(pulses, t, "stokes") * np.cos(pulses.omega_s * t) + envelope(
        pulses, t, "pump"
    ) * np.cos(pulses.omega_p * t)


def drive_operator(space: SpaceDef, configuration: str) -> np.ndarray:
    """Atomic operator the drive couples to: u-g flips (Lambda) or u-e (Vee)."""
    ident = np.eye(space.n_max)
    if configuration == CONFIG_LAMBDA:
        return compose(atom_matrix("g", "u") + atom_matrix("u", "g"), ident)
    if configuration == CONFIG_VEE:
        return compose(atom_matrix("e", "u") + atom_matrix("u", "e"), ident)
    raise ValueError(f"configuration = {configuration!r}, expected one of {CONFIGURATIONS}")


def control_hamiltonian(space: SpaceDef, pulses: PulseSpec, t: float) -> np.ndarray:
    """H_C(t) = W(t) times the configuration's flip operator."""
    return drive_amplitude(pulses, t) * drive_operator(space, pulses.configuration)
