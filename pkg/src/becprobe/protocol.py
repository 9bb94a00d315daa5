"""The decoherence-probe cycle.

Prepare the qubit in an equatorial superposition at azimuth delta, product
with the oscillator; evolve under the coupled (possibly dissipative) dynamics
for t' = pi/chi, at which point the two oscillator branches have completed a
full relative phase-space rotation and the qubit disentangles; rotate the
qubit into the measurement basis and record P_e(delta).  The fringe contrast
of P_e over delta is the visibility, and -ln(visibility) is the accumulated
decoherence exponent the closed-form references predict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dissipation import ChannelKind, make_channel
from .errors import BadDims, NonUniformGrid, ZeroChi
from .fock import (FockCutoff, OscState, State, fidelity,
                   partial_trace_oscillator, partial_trace_qubit, tensor)
from .liouville import (Liouvillian, analytic_gamma_bar,
                        analytic_thermal_visibility, evolve, evolve_trajectory)
from .model import ModelParams, build_hamiltonian

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_GRID_TOL = 1e-9
_MIN_DELTAS = 8


@dataclass(frozen=True)
class ProbeConfig:
    """One probe run: physics, initial oscillator, channels, and numerics.

    ``channels`` holds (kind, rate) pairs; the jump operators are built on
    the working cutoff at run time.  Rates are in units of chi.
    """

    params: ModelParams
    osc: OscState
    channels: tuple = ()
    n_delta: int = 16
    method: str = "auto"
    cutoff: FockCutoff | None = None
    dt: float | None = None
    invariant_samples: int = 0

    def __post_init__(self):
        if self.n_delta < _MIN_DELTAS:
            raise NonUniformGrid(
                f"need at least {_MIN_DELTAS} delta points, got {self.n_delta}")
        object.__setattr__(self, "channels", tuple(
            (ChannelKind(k) if isinstance(k, str) else k, float(r))
            for k, r in self.channels))


@dataclass(frozen=True)
class ProbeResult:
    deltas: np.ndarray
    pe: np.ndarray
    visibility: float
    phase_offset: float
    gamma_bar_measured: float
    gamma_bar_analytic: float
    disentanglement_fidelity: float
    t_probe: float
    metadata: dict = field(default_factory=dict)

    @property
    def pe_samples(self) -> list[tuple[float, float]]:
        return list(zip(self.deltas.tolist(), self.pe.tolist()))


def uniform_delta_grid(n: int) -> np.ndarray:
    return np.arange(n) * (2.0 * math.pi / n)


def prepare_initial(delta: float, osc: OscState, cutoff: FockCutoff) -> State:
    """(|g> + e^{i delta}|e>)/sqrt(2), product with the realized oscillator."""
    qubit = State.from_vector((2,), np.array(
        [np.exp(1j * delta), 1.0]) / math.sqrt(2.0))
    return tensor(qubit, osc.realize(cutoff))


def excited_probability(rho_qubit: State) -> float:
    if rho_qubit.dims != (2,):
        raise BadDims(f"expected a bare qubit, got dims {rho_qubit.dims}")
    return float(np.real(rho_qubit.rho[0, 0]))


def hadamard_readout(rho_qubit: State) -> State:
    """Rotate the qubit into the basis where the fringe shows up in P_e."""
    if rho_qubit.dims != (2,):
        raise BadDims(f"expected a bare qubit, got dims {rho_qubit.dims}")
    return State.from_density((2,), _HADAMARD @ rho_qubit.rho @ _HADAMARD)


def extract_visibility(deltas, pe) -> tuple[float, float]:
    """Fringe contrast and phase of P(delta) = (1 + V cos(delta + phi))/2.

    Discrete Fourier projection onto the first harmonic; requires a uniform
    grid covering one full period so higher harmonics stay orthogonal.
    """
    deltas = np.asarray(deltas, dtype=float)
    pe = np.asarray(pe, dtype=float)
    n = deltas.size
    if n < _MIN_DELTAS or pe.size != n:
        raise NonUniformGrid(f"need >= {_MIN_DELTAS} matched samples, got {n}")
    step = 2.0 * math.pi / n
    if np.any(np.abs(np.diff(deltas) - step) > _GRID_TOL):
        raise NonUniformGrid("delta grid must be uniform over one period")
    c1 = (2.0 / n) * np.sum(pe * np.exp(-1j * deltas))
    visibility = 2.0 * abs(c1)
    # c1 = (V/2) e^{-i phi} for P = (1 + V cos(delta - phi))/2, so the fringe
    # maximum sits at -arg(c1)
    phase = float(-np.angle(c1) % (2.0 * math.pi))
    if 2.0 * math.pi - phase < 1e-9:
        phase = 0.0
    return float(visibility), phase


def distance_D(alpha: complex, chi: float, t: float) -> float:
    """Phase-space separation 2|alpha||sin(chi t)| of the two branches."""
    return 2.0 * abs(alpha) * abs(math.sin(chi * t))


def equivalent_one_body_rate(channels, n_mean: float) -> float:
    """Map every channel to the one-body rate driving the same dephasing.

    Three-body loss uses the large-occupation equivalence 3<n>^2 gamma3 / 2;
    pure dephasing never separates the branches and contributes nothing.
    """
    total = 0.0
    for kind, rate in channels:
        if kind is ChannelKind.ONE_BODY:
            total += rate
        elif kind is ChannelKind.THREE_BODY:
            total += 1.5 * n_mean ** 2 * rate
    return total


def analytic_visibility(osc: OscState, channels, chi: float) -> float:
    """Closed-form fringe visibility for the configured initial state."""
    if osc.kind == "coherent":
        a2 = abs(osc.alpha) ** 2
        return math.exp(-analytic_gamma_bar(
            a2, equivalent_one_body_rate(channels, a2), chi))
    if osc.kind == "thermal":
        return analytic_thermal_visibility(
            osc.nbar, equivalent_one_body_rate(channels, osc.nbar), chi)
    total = 0.0
    for w, a in osc.components:
        a2 = abs(a) ** 2
        total += w * math.exp(-analytic_gamma_bar(
            a2, equivalent_one_body_rate(channels, a2), chi))
    return total


def run_probe(cfg: ProbeConfig) -> ProbeResult:
    chi = cfg.params.chi
    if chi <= 0:
        raise ZeroChi(f"probe needs chi > 0, got {chi}")
    cutoff = cfg.cutoff if cfg.cutoff is not None else cfg.osc.default_cutoff()
    hamiltonian = build_hamiltonian(cfg.params, cutoff)
    channels = [make_channel(kind, rate, cutoff).lifted()
                for kind, rate in cfg.channels]
    liouvillian = Liouvillian(hamiltonian, channels)
    method = liouvillian.resolve_method(cfg.method)
    dt = cfg.dt
    if dt is None and method == "rk4":
        dt = min(1e-3 / chi, liouvillian.default_dt())
    t_probe = math.pi / chi

    deltas = uniform_delta_grid(cfg.n_delta)
    initial = [prepare_initial(d, cfg.osc, cutoff) for d in deltas]
    if method == "rk4":
        # one batched integration over the whole delta grid
        stack = liouvillian.propagate_matrix(
            np.stack([s.rho for s in initial]), t_probe, method="rk4", dt=dt)
        finals = [State.from_density(s.dims, rho)
                  for s, rho in zip(initial, stack)]
        for f in finals:
            f.check(trace_tol=1e-8, herm_tol=1e-10, pos_tol=-1e-8)
    else:
        finals = [evolve(s, liouvillian, t_probe, method=method, dt=dt)
                  for s in initial]

    pe = np.array([excited_probability(
        hadamard_readout(partial_trace_oscillator(f))) for f in finals])
    visibility, phase = extract_visibility(deltas, pe)
    gamma_bar_measured = -math.log(max(visibility, 1e-300)) + 0.0
    v_analytic = analytic_visibility(cfg.osc, cfg.channels, chi)
    gamma_bar_analytic = -math.log(v_analytic) + 0.0

    # closed-system reference for the disentanglement check (delta = 0)
    reference = evolve(initial[0], Liouvillian(hamiltonian, []), t_probe)
    disentanglement_fidelity = fidelity(partial_trace_qubit(finals[0]),
                                        partial_trace_qubit(reference))

    metadata = {
        "cutoff": cutoff.n_max,
        "method": method,
        "dt": dt,
        "qubit_purity": partial_trace_oscillator(finals[0]).purity(),
        "analytic_visibility": v_analytic,
    }
    if cfg.invariant_samples > 0:
        times = np.linspace(t_probe / cfg.invariant_samples, t_probe,
                            cfg.invariant_samples)
        # evolve() validates trace/Hermiticity/positivity at every sample
        evolve_trajectory(initial[0], liouvillian, times, method=method, dt=dt)
        metadata["invariant_samples"] = cfg.invariant_samples

    return ProbeResult(deltas=deltas, pe=pe, visibility=visibility,
                       phase_offset=phase,
                       gamma_bar_measured=gamma_bar_measured,
                       gamma_bar_analytic=gamma_bar_analytic,
                       disentanglement_fidelity=disentanglement_fidelity,
                       t_probe=t_probe, metadata=metadata)


def mixture_probe(cfg: ProbeConfig) -> ProbeResult:
    """Probe a coherent mixture two ways and compare.

    The direct route evolves the mixed density matrix; the component route
    runs each coherent component separately on the same cutoff and combines
    the P_e curves by the weights.  Linearity of the dynamics and the
    measurement makes the two agree to integrator accuracy; the comparison
    is stored in the result metadata.
    """
    if cfg.osc.kind != "mixture":
        raise ValueError(f"mixture_probe needs a mixture, got {cfg.osc.kind}")
    cutoff = cfg.cutoff if cfg.cutoff is not None else cfg.osc.default_cutoff()
    cfg = replace(cfg, cutoff=cutoff)
    direct = run_probe(cfg)

    pe_combined = np.zeros(cfg.n_delta)
    for w, a in cfg.osc.components:
        part = run_probe(replace(cfg, osc=OscState.coherent(a)))
        pe_combined += w * part.pe
    vis_combined, _ = extract_visibility(direct.deltas, pe_combined)

    metadata = dict(direct.metadata)
    metadata["combined_visibility"] = vis_combined
    metadata["path_max_pe_diff"] = float(np.abs(direct.pe - pe_combined).max())
    return replace(direct, metadata=metadata)


def thermal_quadrature_mixture(nbar: float, n_nodes: int = 16,
                               weight_floor: float = 1e-8) -> OscState:
    """Gauss-Laguerre realization of a thermal state as a coherent mixture.

    The thermal distribution over |alpha|^2 is exponential with mean nbar
    and the decoherence exponent depends on alpha only through |alpha|^2,
    so the phase integral collapses and a 1-D Laguerre rule in
    u = |alpha|^2 / nbar suffices.
    """
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    nodes, weights = np.polynomial.laguerre.laggauss(n_nodes)
    keep = weights >= weight_floor
    nodes, weights = nodes[keep], weights[keep]
    weights = weights / weights.sum()
    return OscState.mixture([(w, math.sqrt(x * nbar))
                             for w, x in zip(weights, nodes)])
