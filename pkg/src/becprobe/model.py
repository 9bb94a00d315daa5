"""Hamiltonian construction and physical-parameter helpers.

Natural units with hbar = 1 everywhere; chi = 1 fixes the time unit in the
default configurations.  Physical-unit conversion enters only through
``coupling_from_geometry``.

Qubit convention: sigma_z|e> = +|e>, so the (sigma_z - 1) coupling factor
vanishes on |e> and puts the -2*chi frequency shift on the |g> branch.  Only
the relative phase 2*chi*t between branches is observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import fock
from .errors import NonPositiveInput, OnResonance
from .fock import FockCutoff, Operator

HAMILTONIAN_HERM_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Qubit-oscillator model parameters, plus optional raw two-component inputs."""

    omega0: float = 0.0       # qubit splitting
    omega: float = 0.0        # oscillator frequency
    kappa: float = 0.0        # nonlinearity (n^2 term)
    chi: float = 1.0          # qubit-oscillator coupling
    n_atoms: int | None = None
    # raw two-component parameters (all or none)
    omega1: float | None = None
    omega2: float | None = None
    kappa1: float | None = None
    kappa2: float | None = None
    kappa12: float | None = None
    kappa1e: float | None = None
    kappa2e: float | None = None

    def __post_init__(self):
        for name in ("omega0", "omega", "kappa", "chi"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real, got {v}")
        if self.n_atoms is not None and self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")

    @property
    def has_two_component(self) -> bool:
        return self.kappa1e is not None and self.kappa2e is not None

    @property
    def omega_tilde(self) -> float:
        if self.omega1 is not None and self.omega2 is not None:
            return (self.omega1 - self.omega2) / 2.0
        return self.omega

    @property
    def kappa_tilde(self) -> float:
        if self.kappa1 is not None and self.kappa2 is not None \
                and self.kappa12 is not None:
            return self.kappa1 + self.kappa2 - self.kappa12
        return self.kappa

    @property
    def chi_eff(self) -> float:
        if self.has_two_component:
            return self.kappa1e - self.kappa2e
        return self.chi


@dataclass(frozen=True)
class FeshbachParams:
    a_bg: float   # off-resonant scattering length
    B0: float     # resonant field
    Delta: float  # resonance width

    def __post_init__(self):
        if self.Delta == 0:
            raise ValueError("Feshbach width Delta must be nonzero")
        if self.a_bg == 0:
            raise ValueError("off-resonant length a_bg must be nonzero")


@dataclass(frozen=True)
class HPReduction:
    """Oscillator-picture parameters obtained from the collective-spin model."""

    params: ModelParams
    degenerate: bool       # chi_eff == 0: coupling vanishes, protocol unusable
    n_atoms: int

    def validity_ratio(self, mean_excitation: float) -> float:
        """Excitation fraction <c'c>/N; the mapping is trusted only when << 1."""
        return mean_excitation / self.n_atoms


def build_hamiltonian(params: ModelParams, cutoff: FockCutoff) -> Operator:
    """H = omega0 sigma_z + omega n + kappa n^2 + chi (sigma_z - 1) n on qubit (x) oscillator.

    Diagonal in the product number basis; commutes with sigma_z exactly.
    """
    n = np.arange(cutoff.dim, dtype=float)
    osc = params.omega * n + params.kappa * n ** 2
    branch_e = params.omega0 + osc                      # sigma_z = +1
    branch_g = -params.omega0 + osc - 2.0 * params.chi * n  # sigma_z = -1
    h = np.diag(np.concatenate([branch_e, branch_g]))
    op = Operator((2, cutoff.dim), h)
    _require_hermitian(op)
    return op


def build_two_mode_hamiltonian(params: ModelParams) -> Operator:
    """Exact fixed-N collective-spin Hamiltonian on qubit (x) spin-J, J = N/2.

    H = omega_tilde Jz + kappa_tilde Jz^2 + chi_eff (sigma_z - 1) Jz, with the
    constant proportional to total atom number dropped.
    """
    if params.n_atoms is None:
        raise ValueError("build_two_mode_hamiltonian needs n_atoms")
    n_atoms = params.n_atoms
    j = n_atoms / 2.0
    m = np.arange(-j, j + 1)
    spin = params.omega_tilde * m + params.kappa_tilde * m ** 2
    chi = params.chi_eff
    branch_e = spin                 # (sigma_z - 1) = 0 on |e>
    branch_g = spin - 2.0 * chi * m
    h = np.diag(np.concatenate([branch_e, branch_g]))
    op = Operator((2, n_atoms + 1), h)
    _require_hermitian(op)
    return op


def hp_reduce(params: ModelParams) -> HPReduction:
    """Map the collective-spin model to the oscillator picture.

    Jz = c'c - N/2 turns omega_tilde Jz + kappa_tilde Jz^2 into
    (omega_tilde - N kappa_tilde) n + kappa_tilde n^2 up to a constant, and the
    coupling becomes chi_eff (sigma_z - 1) c'c.  Validity requires the
    excitation fraction <c'c>/N to stay small.
    """
    if params.n_atoms is None:
        raise ValueError("hp_reduce needs n_atoms")
    chi_eff = params.chi_eff
    reduced = replace(
        params,
        omega=params.omega_tilde - params.n_atoms * params.kappa_tilde,
        kappa=params.kappa_tilde,
        chi=chi_eff,
    )
    return HPReduction(params=reduced, degenerate=(chi_eff == 0.0),
                       n_atoms=params.n_atoms)


def feshbach_length(B: float, p: FeshbachParams, guard: float = 1e-9) -> float:
    """Scattering length a_bg (1 + Delta / (B0 - B)) near a Feshbach resonance."""
    if abs(B - p.B0) < guard:
        raise OnResonance(f"|B - B0| = {abs(B - p.B0):.3e} below guard {guard:.1e}")
    return p.a_bg * (1.0 + p.Delta / (p.B0 - B))


def coupling_from_geometry(a_scatt: float, mass: float, volume: float) -> float:
    """Collisional coupling 2 pi a / (m V) for overlapping trap modes (hbar = 1)."""
    if a_scatt <= 0 or mass <= 0 or volume <= 0:
        raise NonPositiveInput(
            f"a_scatt, mass, volume must all be positive, got "
            f"({a_scatt}, {mass}, {volume})")
    return 2.0 * math.pi * a_scatt / (mass * volume)


def _require_hermitian(op: Operator) -> None:
    if not op.is_hermitian(HAMILTONIAN_HERM_TOL):
        raise ValueError("constructed Hamiltonian is not Hermitian")


def hp_validity_run(n_atoms: int, excitation: float, params: ModelParams | None = None,
                    n_times: int = 50) -> dict:
    """Compare exact collective-spin and reduced-oscillator closed dynamics.

    The exact side starts from a rotated collective state with mean excitation
    ``excitation``; the reduced side starts from the coherent state with
    amplitude <J->/sqrt(N), the image of that state under the lowering-operator
    mapping.  Both sides evolve their qubit (x) mode state over one protocol
    period and the excitation trajectories <Jz>+N/2 and <c'c> are compared.
    """
    from .liouville import Liouvillian, evolve  # deferred: avoids import cycle

    if params is None:
        params = ModelParams(omega=1.0, kappa=0.0, chi=1.0, n_atoms=n_atoms)
    else:
        params = replace(params, n_atoms=n_atoms)
    theta = 2.0 * math.asin(math.sqrt(excitation / n_atoms))
    alpha = math.sqrt(n_atoms) * math.sin(theta / 2.0) * math.cos(theta / 2.0)

    t_final = math.pi / params.chi_eff
    times = np.linspace(0.0, t_final, n_times + 1)[1:]

    qubit = equal_superposition_qubit()
    spin0 = fock.spin_coherent_state(n_atoms, theta)
    exact0 = fock.tensor(qubit, spin0)
    h_exact = build_two_mode_hamiltonian(params)
    jz_full = fock.tensor(fock.identity_op(2), fock.spin_jz(n_atoms))

    reduced = hp_reduce(params)
    cutoff = fock.coherent_cutoff(alpha)
    osc0 = fock.coherent_state(alpha, cutoff)
    red0 = fock.tensor(qubit, osc0)
    h_red = build_hamiltonian(reduced.params, cutoff)
    n_full = fock.tensor(fock.identity_op(2), fock.number_op(cutoff))

    l_exact = Liouvillian(h_exact, [])
    l_red = Liouvillian(h_red, [])

    exc_exact, exc_red = [], []
    s_e, s_r = exact0, red0
    prev_t = 0.0
    for t in times:
        s_e = evolve(s_e, l_exact, t - prev_t, method="exact")
        s_r = evolve(s_r, l_red, t - prev_t, method="exact")
        prev_t = t
        exc_exact.append(float(np.real(s_e.expectation(jz_full))) + n_atoms / 2.0)
        exc_red.append(float(np.real(s_r.expectation(n_full))))
    exc_exact = np.array(exc_exact)
    exc_red = np.array(exc_red)
    rel_dev = float(np.max(np.abs(exc_exact - exc_red) / np.abs(exc_exact)))
    return {
        "times": times,
        "excitation_exact": exc_exact,
        "excitation_reduced": exc_red,
        "max_rel_deviation": rel_dev,
        "bound": 5.0 * excitation / n_atoms,
        "validity_ratio": reduced.validity_ratio(excitation),
    }


def equal_superposition_qubit():
    """(|e> + |g>)/sqrt(2) in the (e, g) basis."""
    return fock.State.from_vector((2,), np.array([1.0, 1.0]) / math.sqrt(2.0))
