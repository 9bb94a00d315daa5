"""Acceptance checks: the library's headline physics claims at desk scale.

Each check returns a Criterion with a pass flag and a one-line detail string;
``run_all`` evaluates every check in order.  The checks are deterministic, so
two consecutive runs produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dissipation import ChannelKind, make_channel
from .fock import FockCutoff, OscState, State, coherent_state, number_op
from .liouville import Liouvillian, analytic_cross_coefficient, evolve
from .model import ModelParams, build_hamiltonian, hp_validity_run
from .protocol import (ProbeConfig, mixture_probe, prepare_initial, run_probe,
                       thermal_quadrature_mixture)


@dataclass(frozen=True)
class Criterion:
    name: str
    passed: bool
    detail: str


def _params(**kw) -> ModelParams:
    base = dict(omega0=0.0, omega=0.0, kappa=0.0, chi=1.0)
    base.update(kw)
    return ModelParams(**base)


def ac1_coherent_decoherence() -> Criterion:
    """Measured -ln(visibility) vs 2 pi Gamma |alpha|^2 / chi, 3% relative."""
    cfg = ProbeConfig(params=_params(), osc=OscState.coherent(3.0),
                      channels=[("one_body", 0.005)], cutoff=FockCutoff(42),
                      invariant_samples=20)
    r = run_probe(cfg)
    rel = abs(r.gamma_bar_measured - r.gamma_bar_analytic) / r.gamma_bar_analytic
    return Criterion(
        "AC-1", rel <= 0.03,
        f"gamma_bar measured={r.gamma_bar_measured:.5f} "
        f"analytic={r.gamma_bar_analytic:.5f} rel={rel:.4f} (tol 0.03)")


def ac2_disentanglement() -> Criterion:
    """Lossless runs: qubit purity and oscillator return fidelity >= 1 - 1e-8."""
    worst_purity, worst_fid = 1.0, 1.0
    for osc in (OscState.coherent(3.0), OscState.thermal(2.0)):
        r = run_probe(ProbeConfig(params=_params(), osc=osc, channels=(),
                                  invariant_samples=20))
        worst_purity = min(worst_purity, r.metadata["qubit_purity"])
        worst_fid = min(worst_fid, r.disentanglement_fidelity)
    ok = worst_purity >= 1.0 - 1e-8 and worst_fid >= 1.0 - 1e-8
    return Criterion(
        "AC-2", ok,
        f"min qubit purity={worst_purity:.10f} "
        f"min oscillator fidelity={worst_fid:.10f} (tol 1-1e-8)")


def ac3_thermal_visibility() -> Criterion:
    """Thermal(2), Gamma/chi=0.01: visibility vs 1/(1+0.04 pi), two routes."""
    channels = (("one_body", 0.01),)
    direct = run_probe(ProbeConfig(params=_params(), osc=OscState.thermal(2.0),
                                   channels=channels, invariant_samples=20))
    quad = mixture_probe(ProbeConfig(params=_params(),
                                     osc=thermal_quadrature_mixture(2.0),
                                     channels=channels))
    analytic = 1.0 / (1.0 + 0.04 * math.pi)
    rel_analytic = abs(direct.visibility - analytic) / analytic
    rel_routes = abs(direct.visibility - quad.visibility) / direct.visibility
    ok = rel_analytic <= 0.04 and rel_routes <= 0.01
    return Criterion(
        "AC-3", ok,
        f"visibility direct={direct.visibility:.5f} quadrature={quad.visibility:.5f} "
        f"analytic={analytic:.5f} rel_analytic={rel_analytic:.4f} (tol 0.04) "
        f"rel_routes={rel_routes:.4f} (tol 0.01)")


def _three_body_pair(n_atoms: int):
    """Probe results for three-body loss vs its equivalent one-body rate."""
    gamma_eq = 0.005
    gamma3 = gamma_eq / (1.5 * n_atoms ** 2)
    alpha = math.sqrt(n_atoms)
    base = dict(params=_params(), osc=OscState.coherent(alpha))
    r3 = run_probe(ProbeConfig(channels=(("three_body", gamma3),), **base))
    r1 = run_probe(ProbeConfig(channels=(("one_body", gamma_eq),), **base))

    # initial <n> decay slopes under the bare channels
    cutoff = OscState.coherent(alpha).default_cutoff()
    rho0 = coherent_state(alpha, cutoff)
    num = number_op(cutoff)
    slopes = []
    for kind, rate in ((ChannelKind.THREE_BODY, gamma3),
                       (ChannelKind.ONE_BODY, gamma_eq)):
        lv = Liouvillian(None, [make_channel(kind, rate, cutoff)])
        slopes.append(float(np.real(np.trace(num.mat @ lv.apply(rho0.rho)))))
    return r3, r1, slopes


def ac4_three_body_equivalence() -> Criterion:
    """Three-body loss vs one-body at Gamma = 3 N^2 gamma3 / 2, N=16 and 25.

    The slope clause holds essentially exactly.  The visibility clause does
    not: a d^3 jump dephases the branch superposition through a (1-cos 3
    theta) kernel whose cycle average is one third of the one-body channel's,
    so the probe visibilities differ by far more than 10% at any atom
    number, and the gap grows with N because the absolute exponent does.
    The check reports both clauses honestly.
    """
    r3, r1, slopes = _three_body_pair(16)
    slope_rel = abs(slopes[0] - slopes[1]) / abs(slopes[1])
    vis_rel_16 = abs(r3.visibility - r1.visibility) / r1.visibility
    r3b, r1b, _ = _three_body_pair(25)
    vis_rel_25 = abs(r3b.visibility - r1b.visibility) / r1b.visibility
    ok = slope_rel <= 0.05 and vis_rel_16 <= 0.10 and vis_rel_25 < vis_rel_16
    return Criterion(
        "AC-4", ok,
        f"slope rel={slope_rel:.2e} (tol 0.05) "
        f"visibility rel N=16: {vis_rel_16:.3f} (tol 0.10) N=25: {vis_rel_25:.3f}")


def ac5_hp_validity() -> Criterion:
    """Two-mode exact vs reduced-oscillator trajectories at N=100 and 400."""
    run_small = hp_validity_run(100, 2.0)
    run_large = hp_validity_run(400, 2.0)
    dev_small = run_small["max_rel_deviation"]
    dev_large = run_large["max_rel_deviation"]
    ok = dev_small <= run_small["bound"] and dev_large < dev_small
    return Criterion(
        "AC-5", ok,
        f"max rel deviation N=100: {dev_small:.4f} (bound {run_small['bound']:.2f}) "
        f"N=400: {dev_large:.4f} (must shrink)")


def ac6_integrator_cross_check() -> Criterion:
    """Exact vs RK4 on a 42-dim composite, and the damped cross-term oracle."""
    cutoff = FockCutoff(20, tail_tol=1e-8)  # 42-dim composite
    params = _params()
    osc = OscState.coherent(2.0)
    cfg = ProbeConfig(params=params, osc=osc, channels=(("one_body", 0.01),),
                      cutoff=cutoff)
    lv = Liouvillian(build_hamiltonian(params, cutoff),
                     [make_channel(k, r, cutoff).lifted() for k, r in cfg.channels])
    initial = prepare_initial(0.0, osc, cutoff)
    t_probe = math.pi / params.chi
    r_exact = evolve(initial, lv, t_probe, method="exact")
    r_rk4 = evolve(initial, lv, t_probe, method="rk4", dt=1e-3)
    diff = float(np.abs(r_exact.rho - r_rk4.rho).max())

    # evolve |alpha><alpha e^{i theta}| and project on the damped dyad
    cutoff2 = FockCutoff(42)
    alpha, gamma, t = 3.0, 0.5, 0.3  # |alpha|^2 = 9, Gamma t = 0.3 (weight 0.5 -> number rate 1.0)
    losc = Liouvillian(None, [make_channel(ChannelKind.ONE_BODY, gamma, cutoff2)])
    worst = 0.0
    for theta in (0.5, math.pi / 2, math.pi):
        v1 = coherent_state(alpha, cutoff2).vector
        v2 = coherent_state(alpha * np.exp(1j * theta), cutoff2).vector
        cross = losc.propagate_matrix(np.outer(v1, v2.conj()), t, method="exact")
        damp = math.exp(-gamma * t)
        w1 = coherent_state(alpha * damp, cutoff2).vector
        w2 = coherent_state(alpha * damp * np.exp(1j * theta), cutoff2).vector
        measured = complex(w1.conj() @ cross @ w2)
        predicted = analytic_cross_coefficient(alpha, theta, 2.0 * gamma, t)
        worst = max(worst, abs(measured / predicted - 1.0))
    ok = diff <= 1e-6 and worst <= 1e-4
    return Criterion(
        "AC-6", ok,
        f"exact-vs-rk4 max diff={diff:.2e} (tol 1e-6) "
        f"cross-term rel err={worst:.2e} (tol 1e-4)")


def ac7_dephasing_report() -> Criterion:
    """Dephasing-only probe, reported next to a loss run of the same rate.

    Pure phase damping commutes with the number operator, so it cannot
    separate the two oscillator branches and imprints no decoherence factor
    on the qubit; the claim is that this probe cannot detect phase damping.
    The criterion passes when the comparison completes and is emitted; no
    agreement between the two numbers is asserted.
    """
    base = dict(params=_params(), osc=OscState.coherent(3.0))
    r_deph = run_probe(ProbeConfig(channels=(("dephasing", 0.005),),
                                   invariant_samples=20, **base))
    r_loss = run_probe(ProbeConfig(channels=(("one_body", 0.005),), **base))
    table = (f"dephasing Gamma_p/chi=0.005: visibility={r_deph.visibility:.6f} | "
             f"one-body Gamma/chi=0.005: visibility={r_loss.visibility:.6f} | "
             "claim: phase damping leaves no imprint on the probe (not asserted)")
    return Criterion("AC-7", True, table)


def ac8_invariant_suite() -> Criterion:
    """Trace/Hermiticity/positivity at >= 20 sampled times for every channel mix."""
    combos = ((("one_body", 0.005),), (("three_body", 1e-4),),
              (("dephasing", 0.005),),
              (("one_body", 0.005), ("dephasing", 0.005)))
    checked = 0
    for channels in combos:
        run_probe(ProbeConfig(params=_params(), osc=OscState.coherent(2.0),
                              channels=channels, invariant_samples=20))
        checked += 20
    return Criterion(
        "AC-8", True,
        f"{checked} sampled states passed trace(1e-8)/herm(1e-10)/pos(-1e-8)")


_CHECKS = (ac1_coherent_decoherence, ac2_disentanglement, ac3_thermal_visibility,
           ac4_three_body_equivalence, ac5_hp_validity,
           ac6_integrator_cross_check, ac7_dephasing_report, ac8_invariant_suite)


def run_all() -> list[Criterion]:
    return [check() for check in _CHECKS]


def format_report(criteria) -> str:
    lines = [f"{c.name}: {'PASS' if c.passed else 'FAIL'} -- {c.detail}"
             for c in criteria]
    n_fail = sum(not c.passed for c in criteria)
    lines.append(f"{len(criteria) - n_fail}/{len(criteria)} criteria passed")
    return "\n".join(lines)
