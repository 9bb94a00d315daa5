"""Liouvillian construction, time evolution, and closed-form references.

Two evolution routes are provided and kept independent so they can
cross-check each other:

* ``exact`` exponentiates the generator.  For closed systems this is the
  unitary propagator.  For open systems whose Hamiltonian is diagonal in the
  stored basis and whose jump operators live on a single matrix diagonal
  (true for every Hamiltonian and channel built in this package), the
  generator never mixes different diagonals of the density matrix, so it is
  exponentiated sector by sector: the k-th diagonal of rho evolves under its
  own (D-|k|)-dimensional matrix.  This keeps exact propagation cheap at
  dimensions where a dense superoperator would be hopeless.  A dense
  vectorized expm fallback covers small unstructured generators.

* ``rk4`` is a generic fixed-step integrator applying the master-equation
  right-hand side as plain matrix products, with no knowledge of structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dissipation import LindbladChannel
from .errors import DimMismatch, StepTooLarge, ZeroChi
from .fock import Operator, State, check_density

_DENSE_EXACT_MAX_DIM = 64
_SECTOR_SKIP = 1e-14  # relative Frobenius threshold below which a diagonal is ignored
_EVOLVE_TRACE_TOL = 1e-8
_EVOLVE_HERM_TOL = 1e-10
_EVOLVE_POS_TOL = -1e-8


class Liouvillian:
    """Generator of the master equation d rho/dt = -i[H, rho] + dissipators."""

    def __init__(self, hamiltonian: Operator | None, channels):
        channels = list(channels)
        if hamiltonian is None and not channels:
            raise ValueError("need a Hamiltonian or at least one channel")
        dims = hamiltonian.dims if hamiltonian is not None else channels[0].jump.dims
        for ch in channels:
            if ch.jump.dims != dims:
                raise DimMismatch(
                    f"channel dims {ch.jump.dims} != Liouvillian dims {dims}")
        self.dims = dims
        self.dim = int(np.prod(dims))
        self.hamiltonian = hamiltonian
        self.channels = tuple(channels)
        self._ll = [ch.jump.mat.conj().T @ ch.jump.mat for ch in channels]
        self._matrix = None
        self._structure = self._detect_structure()
        self._prop_cache: dict[float, dict[int, np.ndarray]] = {}

    # -- generic dense application -----------------------------------------

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side of the master equation for a dense rho (or a stack)."""
        out = np.zeros_like(rho, dtype=complex)
        if self.hamiltonian is not None:
            h = self.hamiltonian.mat
            out += -1j * (h @ rho - rho @ h)
        for ch, ll in zip(self.channels, self._ll):
            jump = ch.jump.mat
            out += ch.weight * (2.0 * jump @ rho @ jump.conj().T
                                - ll @ rho - rho @ ll)
        return out

    def matrix(self) -> np.ndarray:
        """Dense generator on row-major vectorized density matrices."""
        if self._matrix is None:
            d = self.dim
            eye = np.eye(d)
            gen = np.zeros((d * d, d * d), dtype=complex)
            if self.hamiltonian is not None:
                h = self.hamiltonian.mat
                gen += -1j * (np.kron(h, eye) - np.kron(eye, h.T))
            for ch, ll in zip(self.channels, self._ll):
                jump = ch.jump.mat
                gen += ch.weight * (2.0 * np.kron(jump, jump.conj())
                                    - np.kron(ll, eye) - np.kron(eye, ll.T))
            self._matrix = gen
        return self._matrix

    # -- diagonal-sector structure ------------------------------------------

    def _detect_structure(self):
        """(h_diag, [(weight, offset, amp)]) when the generator is diagonal-sectored."""
        d = self.dim
        if self.hamiltonian is not None:
            h = self.hamiltonian.mat
            hd = np.diagonal(h).copy()
            if np.count_nonzero(h - np.diag(hd)):
                return None
        else:
            hd = np.zeros(d)
        jumps = []
        for ch in self.channels:
            jump = ch.jump.mat
            rows, cols = np.nonzero(jump)
            if rows.size == 0:
                continue
            offsets = np.unique(cols - rows)
            if offsets.size != 1 or offsets[0] < 0:
                return None
            s = int(offsets[0])
            amp = np.zeros(d, dtype=complex)  # amp[p] = <p-s| L |p>
            amp[s:] = np.diagonal(jump, offset=s)
            jumps.append((ch.weight, s, amp))
        return hd, jumps

    @property
    def is_diagonal_sectored(self) -> bool:
        return self._structure is not None

    def _sector_generator(self, k: int) -> np.ndarray:
        hd, jumps = self._structure
        d = self.dim
        size = d - abs(k)
        rows = np.arange(size) + max(0, -k)
        cols = rows + k
        gen = np.zeros((size, size), dtype=complex)
        diag = -1j * (hd[rows] - hd[cols])
        for weight, s, amp in jumps:
            lc2 = np.abs(amp) ** 2
            diag = diag - weight * (lc2[rows] + lc2[cols])
            if s < size:
                idx = np.arange(size - s)
                gen[idx, idx + s] += (2.0 * weight * amp[rows[idx] + s]
                                      * np.conj(amp[cols[idx] + s]))
        gen[np.arange(size), np.arange(size)] += diag
        return gen

    def _sector_propagator(self, k: int, t: float) -> np.ndarray:
        cache = self._prop_cache.setdefault(t, {})
        if k not in cache:
            cache[k] = expm(self._sector_generator(k) * t)
            if len(self._prop_cache) > 4 and len(cache) == 1:
                # keep the cache bounded: drop the oldest other time key
                for key in list(self._prop_cache):
                    if key != t:
                        del self._prop_cache[key]
                        break
        return cache[k]

    def _exact_sectored(self, mat: np.ndarray, t: float) -> np.ndarray:
        d = self.dim
        out = np.zeros_like(mat, dtype=complex)
        total = np.linalg.norm(mat)
        for k in range(-(d - 1), d):
            v = np.diagonal(mat, offset=k)
            if np.linalg.norm(v) <= _SECTOR_SKIP * total:
                continue
            w = self._sector_propagator(k, t) @ v
            rows = np.arange(d - abs(k)) + max(0, -k)
            out[rows, rows + k] = w
        return out

    # -- propagation ---------------------------------------------------------

    def propagate_matrix(self, mat: np.ndarray, t: float,
                         method: str = "auto", dt: float | None = None) -> np.ndarray:
        """Evolve an arbitrary (possibly non-Hermitian) operator.

        This is the relaxed pathway used by the analytic cross-term checks;
        no density-matrix invariants are enforced.
        """
        mat = np.asarray(mat, dtype=complex)
        if mat.shape[-2:] != (self.dim, self.dim):
            raise DimMismatch(f"matrix shape {mat.shape} vs dim {self.dim}")
        if t == 0:
            return mat.copy()
        method = self.resolve_method(method)
        if method == "exact":
            if not self.channels:
                u = self._unitary(t)
                return u @ mat @ u.conj().T
            if self.is_diagonal_sectored and mat.ndim == 2:
                return self._exact_sectored(mat, t)
            if self.dim <= _DENSE_EXACT_MAX_DIM and mat.ndim == 2:
                prop = expm(self.matrix() * t)
                return (prop @ mat.reshape(-1)).reshape(mat.shape)
            raise ValueError(
                f"exact method unavailable: dimension {self.dim} too large for a "
                "dense superoperator and the generator is not diagonal-sectored; "
                "use method='rk4'")
        return self._rk4(mat, t, dt)

    def resolve_method(self, method: str) -> str:
        if method in (None, "auto"):
            if not self.channels or self.is_diagonal_sectored \
                    or self.dim <= _DENSE_EXACT_MAX_DIM:
                return "exact"
            return "rk4"
        if method not in ("exact", "rk4"):
            raise ValueError(f"unknown method {method!r}")
        return method

    def _unitary(self, t: float) -> np.ndarray:
        h = self.hamiltonian.mat
        hd = np.diagonal(h)
        if np.count_nonzero(h - np.diag(hd)) == 0:
            return np.diag(np.exp(-1j * hd * t))
        return expm(-1j * h * t)

    def default_dt(self) -> float:
        """min(1e-3, 0.1 / inf-norm estimate of the generator)."""
        bound = 0.0
        if self.hamiltonian is not None:
            bound += 2.0 * float(np.linalg.norm(self.hamiltonian.mat, np.inf))
        for ch, ll in zip(self.channels, self._ll):
            bound += 4.0 * ch.weight * float(np.linalg.norm(ll, np.inf))
        return min(1e-3, 0.1 / bound) if bound > 0 else 1e-3

    def _rk4(self, mat: np.ndarray, t: float, dt: float | None) -> np.ndarray:
        if dt is None:
            dt = self.default_dt()
        n_steps = max(1, int(math.ceil(t / dt)))
        h = t / n_steps
        rho = mat.astype(complex, copy=True)
        for _ in range(n_steps):
            k1 = self.apply(rho)
            k2 = self.apply(rho + 0.5 * h * k1)
            k3 = self.apply(rho + 0.5 * h * k2)
            k4 = self.apply(rho + h * k3)
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return rho


def build_liouvillian(hamiltonian: Operator | None,
                      channels: list[LindbladChannel]) -> Liouvillian:
    return Liouvillian(hamiltonian, channels)


def evolve(state: State, liouvillian: Liouvillian, t: float,
           method: str = "auto", dt: float | None = None,
           check: bool = True) -> State:
    """Evolve a density matrix for time t and validate the result."""
    if state.dims != liouvillian.dims:
        raise DimMismatch(f"state dims {state.dims} != {liouvillian.dims}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return state
    resolved = liouvillian.resolve_method(method)
    if resolved == "exact" and not liouvillian.channels and state.is_pure:
        vec = liouvillian._unitary(t) @ state.vector
        out = State.from_vector(state.dims, vec)
    else:
        rho = liouvillian.propagate_matrix(state.rho, t, method=resolved, dt=dt)
        if resolved == "rk4" and abs(np.trace(rho) - 1.0) > _EVOLVE_TRACE_TOL:
            raise StepTooLarge(
                f"trace drifted by {abs(np.trace(rho) - 1.0):.3e}; reduce dt")
        out = State.from_density(state.dims, rho)
    if check:
        check_density(out.rho, _EVOLVE_TRACE_TOL, _EVOLVE_HERM_TOL, _EVOLVE_POS_TOL)
    return out


def evolve_trajectory(state: State, liouvillian: Liouvillian, times,
                      method: str = "auto", dt: float | None = None,
                      check: bool = True) -> list[State]:
    """States at the given increasing times (t > 0), sharing one propagation."""
    out = []
    current = state
    prev = 0.0
    for t in times:
        if t < prev:
            raise ValueError("times must be nondecreasing")
        current = evolve(current, liouvillian, t - prev, method=method, dt=dt,
                         check=check)
        out.append(current)
        prev = t
    return out


# ---------------------------------------------------------------------------
# closed-form references

@dataclass(frozen=True)
class AnalyticCrossTerm:
    """Damped cross term between coherent states differing by a phase-space rotation.

    ``decay_rate`` is the occupation decay rate of the mode: a one-body
    channel of weight Gamma damps <n> as exp(-2 Gamma t), so its cross term
    is described by decay_rate = 2 Gamma.  The coefficient below multiplies
    |alpha e^(-decay_rate t/2)><alpha e^(i theta - decay_rate t/2)| in the
    evolution of |alpha><alpha e^(i theta)|.
    """

    alpha: complex
    theta: float
    decay_rate: float
    t: float

    @property
    def coefficient(self) -> complex:
        return analytic_cross_coefficient(self.alpha, self.theta,
                                          self.decay_rate, self.t)


def analytic_cross_coefficient(alpha: complex, theta: float,
                               decay_rate: float, t: float) -> complex:
    """exp(-|alpha|^2 (1 - e^(-i theta)) (1 - e^(-decay_rate t)))."""
    if decay_rate < 0 or t < 0:
        raise ValueError("decay_rate and t must be >= 0")
    a2 = abs(alpha) ** 2
    return complex(np.exp(-a2 * (1.0 - np.exp(-1j * theta))
                          * (1.0 - math.exp(-decay_rate * t))))


def analytic_gamma_bar(alpha_sq: float, gamma: float, chi: float) -> float:
    """Accumulated decoherence exponent 2 pi Gamma |alpha|^2 / chi over one cycle."""
    if chi <= 0:
        raise ZeroChi(f"chi must be positive, got {chi}")
    return 2.0 * math.pi * gamma * alpha_sq / chi


def analytic_thermal_visibility(nbar: float, gamma: float, chi: float) -> float:
    """Fringe visibility 1 / (1 + 2 pi Gamma nbar / chi) for a thermal start.

    Gaussian integral of exp(-2 pi Gamma |alpha|^2 / chi) over the thermal
    coherent-state distribution with mean occupation nbar.
    """
    if chi <= 0:
        raise ZeroChi(f"chi must be positive, got {chi}")
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    return 1.0 / (1.0 + 2.0 * math.pi * gamma * nbar / chi)
