"""Lindblad channels for the three condensate noise mechanisms.

Each channel contributes  weight * (2 L rho L' - L'L rho - rho L'L)  to the
master equation.  Conventions:

  one-body   L = d,   weight = Gamma      (so <n> decays as exp(-2 Gamma t))
  three-body L = d^3, weight = gamma3 / 2
  dephasing  L = d'd, weight = Gamma_p    (populations exactly conserved)

The three-body weight is gamma3/2, not gamma3/6: only with this normalization
does the effective one-body rate Gamma = 3 N^2 gamma3 / 2 reproduce the
three-body <n> decay slope of an initial coherent state with <n> = N, which
the large-atom-number equivalence requires.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import fock
from .errors import NegativeRate, NonPositiveVolume
from .fock import FockCutoff, Operator


class ChannelKind(Enum):
    ONE_BODY = "one_body"
    THREE_BODY = "three_body"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class LindbladChannel:
    kind: ChannelKind
    rate: float
    jump: Operator
    weight: float  # prefactor of [2 L rho L' - L'L rho - rho L'L]

    def lifted(self, qubit_dim: int = 2) -> "LindbladChannel":
        """Same channel acting on the oscillator factor of qubit (x) oscillator."""
        jump = fock.tensor(fock.identity_op(qubit_dim), self.jump)
        return LindbladChannel(self.kind, self.rate, jump, self.weight)


@dataclass(frozen=True)
class LossRateCatalog:
    """Loss coefficients and the resulting rate estimates for a trapped cloud."""

    K1: float = 0.0
    K2: float = 0.0
    K3: float = 0.0
    n_atoms: int = 1
    volume: float = 1.0

    def __post_init__(self):
        if min(self.K1, self.K2, self.K3) < 0:
            raise NegativeRate("loss coefficients must be nonnegative")


def make_channel(kind: ChannelKind | str, rate: float, cutoff: FockCutoff) -> LindbladChannel:
    """Build an oscillator-space channel with the conventions documented above."""
    if isinstance(kind, str):
        kind = ChannelKind(kind)
    if rate < 0:
        raise NegativeRate(f"rate must be >= 0, got {rate}")
    a = fock.annihilator(cutoff)
    if kind is ChannelKind.ONE_BODY:
        return LindbladChannel(kind, rate, a, rate)
    if kind is ChannelKind.THREE_BODY:
        return LindbladChannel(kind, rate, a @ a @ a, rate / 2.0)
    if kind is ChannelKind.DEPHASING:
        return LindbladChannel(kind, rate, fock.number_op(cutoff), rate)
    raise ValueError(f"unknown channel kind {kind!r}")


def gamma_eff_three_body(n_atoms: int, gamma3: float) -> float:
    """Effective one-body rate 3 N^2 gamma3 / 2 for three-body loss at large N."""
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if gamma3 < 0:
        raise NegativeRate(f"gamma3 must be >= 0, got {gamma3}")
    return 1.5 * n_atoms ** 2 * gamma3


def loss_rates(cat: LossRateCatalog) -> dict[str, float]:
    """Rate estimates K1 N, K2 N^2 / V, K3 N^3 / V^2 for configuration reports."""
    if cat.volume <= 0:
        raise NonPositiveVolume(f"volume must be positive, got {cat.volume}")
    n, v = cat.n_atoms, cat.volume
    return {
        "one_body": cat.K1 * n,
        "two_body": cat.K2 * n ** 2 / v,
        "three_body": cat.K3 * n ** 3 / v ** 2,
    }


def dissipator_apply(channel: LindbladChannel, rho: np.ndarray) -> np.ndarray:
    """weight * (2 L rho L' - L'L rho - rho L'L) as a dense matrix."""
    jump = channel.jump.mat
    ll = jump.conj().T @ jump
    return channel.weight * (2.0 * jump @ rho @ jump.conj().T - ll @ rho - rho @ ll)
