"""Truncated Fock spaces and composite-space linear algebra.

States and operators are dense complex arrays tagged with an ordered tuple
of subsystem dimensions.  Everything here is immutable after construction;
arrays are marked read-only so values can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import sqrtm

from .errors import BadDims, CutoffTooSmall, DimMismatch

TRACE_TOL = 1e-10
HERM_TOL = 1e-12
POS_TOL = -1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FockCutoff:
    """Fock truncation: highest retained level n_max and admissible tail mass."""

    n_max: int
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.n_max < 1:
            raise BadDims(f"n_max must be >= 1, got {self.n_max}")
        if not (0.0 < self.tail_tol < 1.0):
            raise BadDims(f"tail_tol must lie in (0, 1), got {self.tail_tol}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class Operator:
    dims: tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self):
        mat = _freeze(self.mat)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        d = int(np.prod(self.dims))
        if mat.shape != (d, d):
            raise BadDims(f"matrix shape {mat.shape} != product of dims {self.dims}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.dims, self.mat.conj().T)

    def is_hermitian(self, tol: float = HERM_TOL) -> bool:
        scale = np.linalg.norm(self.mat) or 1.0
        return np.linalg.norm(self.mat - self.mat.conj().T) <= tol * scale

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise DimMismatch(f"{self.dims} vs {other.dims}")
        return Operator(self.dims, self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise DimMismatch(f"{self.dims} vs {other.dims}")
        return Operator(self.dims, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise DimMismatch(f"{self.dims} vs {other.dims}")
        return Operator(self.dims, self.mat - other.mat)

    def __mul__(self, c) -> "Operator":
        return Operator(self.dims, c * self.mat)

    __rmul__ = __mul__


@dataclass(frozen=True)
class State:
    """Density matrix on a composite space; pure states also carry a vector."""

    dims: tuple[int, ...]
    rho: np.ndarray
    vector: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "rho", _freeze(self.rho))
        if self.vector is not None:
            object.__setattr__(self, "vector", _freeze(self.vector))
        d = int(np.prod(self.dims))
        if self.rho.shape != (d, d):
            raise BadDims(f"rho shape {self.rho.shape} != product of dims {self.dims}")

    @classmethod
    def from_vector(cls, dims, vec) -> "State":
        vec = np.asarray(vec, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        return cls(tuple(dims), np.outer(vec, vec.conj()), vec)

    @classmethod
    def from_density(cls, dims, rho) -> "State":
        return cls(tuple(dims), np.asarray(rho, dtype=complex))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def trace(self) -> complex:
        return np.trace(self.rho)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def expectation(self, op: Operator) -> complex:
        if op.dims != self.dims:
            raise DimMismatch(f"{op.dims} vs {self.dims}")
        if self.vector is not None:
            return complex(self.vector.conj() @ (op.mat @ self.vector))
        return complex(np.trace(op.mat @ self.rho))

    def check(self, trace_tol: float = TRACE_TOL, herm_tol: float = HERM_TOL,
              pos_tol: float = POS_TOL) -> None:
        """Raise if trace, Hermiticity or positivity tolerances are violated."""
        check_density(self.rho, trace_tol, herm_tol, pos_tol)


def check_density(rho: np.ndarray, trace_tol: float = TRACE_TOL,
                  herm_tol: float = HERM_TOL, pos_tol: float = POS_TOL) -> None:
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    herm = np.linalg.norm(rho - rho.conj().T)
    if herm > herm_tol * max(1.0, np.linalg.norm(rho)):
        raise ValueError(f"Hermiticity violated by {herm:.3e}")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() < pos_tol:
        raise ValueError(f"negative eigenvalue {w.min():.3e}")


# ---------------------------------------------------------------------------
# elementary operators

def annihilator(cutoff: FockCutoff) -> Operator:
    """Lowering operator: sqrt(n) on the first superdiagonal."""
    d = cutoff.dim
    return Operator((d,), np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1))


def creator(cutoff: FockCutoff) -> Operator:
    return annihilator(cutoff).dagger()


def number_op(cutoff: FockCutoff) -> Operator:
    d = cutoff.dim
    return Operator((d,), np.diag(np.arange(d, dtype=float)))


def identity_op(dim: int) -> Operator:
    return Operator((dim,), np.eye(dim))


# Qubit convention: basis order (|e>, |g>), sigma_z|e> = +|e>.
def sigma_z() -> Operator:
    return Operator((2,), np.diag([1.0, -1.0]))


def sigma_plus() -> Operator:
    # |e><g|
    return Operator((2,), np.array([[0.0, 1.0], [0.0, 0.0]]))


def sigma_minus() -> Operator:
    return sigma_plus().dagger()


def sigma_x() -> Operator:
    return Operator((2,), np.array([[0.0, 1.0], [1.0, 0.0]]))


def sigma_y() -> Operator:
    return Operator((2,), np.array([[0.0, -1.0j], [1.0j, 0.0]]))


# Collective spin J = N/2 on the (N+1)-dimensional ladder.  Basis is ordered
# by m = -J .. +J, so index n corresponds to excitation number n = m + J.
def spin_jz(n_atoms: int) -> Operator:
    j = n_atoms / 2.0
    return Operator((n_atoms + 1,), np.diag(np.arange(-j, j + 1)))


def spin_jp(n_atoms: int) -> Operator:
    j = n_atoms / 2.0
    m = np.arange(-j, j)  # source projections for J+
    amp = np.sqrt(j * (j + 1) - m * (m + 1))
    return Operator((n_atoms + 1,), np.diag(amp, k=-1))


def spin_jm(n_atoms: int) -> Operator:
    return spin_jp(n_atoms).dagger()


def spin_jx(n_atoms: int) -> Operator:
    return 0.5 * (spin_jp(n_atoms) + spin_jm(n_atoms))


def spin_jy(n_atoms: int) -> Operator:
    return (-0.5j) * (spin_jp(n_atoms) - spin_jm(n_atoms))


def spin_coherent_state(n_atoms: int, theta: float, phi: float = 0.0) -> State:
    """Rotated collective state with binomial excitation statistics.

    Amplitude on excitation level n is binom(N,n)^(1/2) s^n c^(N-n) e^(-i n phi)
    with s = sin(theta/2), c = cos(theta/2).
    """
    s, c = math.sin(theta / 2.0), math.cos(theta / 2.0)
    n = np.arange(n_atoms + 1)
    log_binom = (
        [0.0] + list(np.cumsum(np.log(np.arange(n_atoms, 0, -1))
                               - np.log(np.arange(1, n_atoms + 1))))
    )
    log_amp = 0.5 * np.array(log_binom)
    with np.errstate(divide="ignore"):
        log_amp = log_amp + n * (np.log(s) if s > 0 else -np.inf) \
            + (n_atoms - n) * (np.log(c) if c > 0 else -np.inf)
    amp = np.exp(log_amp) * np.exp(-1j * n * phi)
    amp[np.isnan(amp)] = 0.0
    return State.from_vector((n_atoms + 1,), amp)


# ---------------------------------------------------------------------------
# coherent / thermal states

def _coherent_amplitudes(alpha: complex, n_max: int) -> tuple[np.ndarray, float]:
    """Truncated coherent amplitudes and the untruncated tail mass beyond n_max."""
    n = np.arange(n_max + 1)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n_max + 1)))))
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - log_fact / 2) \
        if alpha != 0 else np.where(n == 0, 1.0, 0.0)
    phase = np.exp(1j * n * np.angle(alpha)) if alpha != 0 else np.ones(n_max + 1)
    amp = mag * phase
    tail = max(0.0, 1.0 - float(np.sum(mag ** 2)))
    return amp, tail


def coherent_state(alpha: complex, cutoff: FockCutoff) -> State:
    """Truncated coherent state |alpha>, renormalized after truncation."""
    amp, tail = _coherent_amplitudes(complex(alpha), cutoff.n_max)
    if tail > cutoff.tail_tol:
        raise CutoffTooSmall(
            f"coherent tail {tail:.3e} beyond n_max={cutoff.n_max} exceeds "
            f"tail_tol={cutoff.tail_tol:.1e}")
    return State.from_vector((cutoff.dim,), amp)


def thermal_state(nbar: float, cutoff: FockCutoff) -> State:
    """Bose-Einstein diagonal state, renormalized after truncation."""
    if nbar < 0 or not math.isfinite(nbar):
        raise ValueError(f"nbar must be finite and >= 0, got {nbar}")
    if nbar == 0:
        vec = np.zeros(cutoff.dim)
        vec[0] = 1.0
        return State.from_vector((cutoff.dim,), vec)
    r = nbar / (1.0 + nbar)
    tail = r ** (cutoff.n_max + 1)
    if tail > cutoff.tail_tol:
        raise CutoffTooSmall(
            f"thermal tail {tail:.3e} beyond n_max={cutoff.n_max} exceeds "
            f"tail_tol={cutoff.tail_tol:.1e}")
    p = r ** np.arange(cutoff.dim) / (1.0 + nbar)
    p /= p.sum()
    return State.from_density((cutoff.dim,), np.diag(p))


def fock_state(n: int, cutoff: FockCutoff) -> State:
    vec = np.zeros(cutoff.dim)
    vec[n] = 1.0
    return State.from_vector((cutoff.dim,), vec)


def coherent_cutoff(alpha: complex, tail_tol: float = 1e-12) -> FockCutoff:
    """Default truncation rule for a coherent input.

    Starts from n_max = ceil(|alpha|^2 + 6 sqrt(|alpha|^2 + 1)) + 10 and
    grows it if the actual Poisson tail still exceeds tail_tol (the Poisson
    right tail is slightly heavier than the Gaussian heuristic at large
    |alpha|^2).
    """
    a2 = abs(alpha) ** 2
    n_max = int(math.ceil(a2 + 6.0 * math.sqrt(a2 + 1.0))) + 10
    while _coherent_amplitudes(complex(alpha), n_max)[1] > tail_tol:
        n_max += 5
    return FockCutoff(n_max, tail_tol)


def thermal_cutoff(nbar: float, tail_tol: float = 1e-12) -> FockCutoff:
    """Smallest n_max whose geometric tail mass is within tail_tol."""
    if nbar <= 0:
        return FockCutoff(1, tail_tol)
    r = nbar / (1.0 + nbar)
    n_max = max(1, int(math.ceil(math.log(tail_tol) / math.log(r))) - 1)
    while r ** (n_max + 1) > tail_tol:
        n_max += 1
    return FockCutoff(n_max, tail_tol)


# ---------------------------------------------------------------------------
# oscillator initial-state specification

@dataclass(frozen=True)
class OscState:
    """Oscillator preparation: coherent(alpha), thermal(nbar) or a coherent mixture."""

    kind: str
    alpha: complex = 0.0
    nbar: float = 0.0
    components: tuple[tuple[float, complex], ...] = ()

    @classmethod
    def coherent(cls, alpha: complex) -> "OscState":
        return cls("coherent", alpha=complex(alpha))

    @classmethod
    def thermal(cls, nbar: float) -> "OscState":
        if not math.isfinite(nbar) or nbar < 0:
            raise ValueError(f"nbar must be finite and >= 0, got {nbar}")
        return cls("thermal", nbar=float(nbar))

    @classmethod
    def mixture(cls, components) -> "OscState":
        comps = tuple((float(w), complex(a)) for w, a in components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("mixture weights must be nonnegative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        return cls("mixture", components=comps)

    def mean_occupation(self) -> float:
        if self.kind == "coherent":
            return abs(self.alpha) ** 2
        if self.kind == "thermal":
            return self.nbar
        return sum(w * abs(a) ** 2 for w, a in self.components)

    def default_cutoff(self, tail_tol: float = 1e-12) -> FockCutoff:
        if self.kind == "coherent":
            return coherent_cutoff(self.alpha, tail_tol)
        if self.kind == "thermal":
            return thermal_cutoff(self.nbar, tail_tol)
        n_max = max(coherent_cutoff(a, tail_tol).n_max for _, a in self.components)
        return FockCutoff(n_max, tail_tol)

    def realize(self, cutoff: FockCutoff) -> State:
        if self.kind == "coherent":
            self._require_headroom(self.alpha, cutoff)
            return coherent_state(self.alpha, cutoff)
        if self.kind == "thermal":
            return thermal_state(self.nbar, cutoff)
        rho = np.zeros((cutoff.dim, cutoff.dim), dtype=complex)
        for w, a in self.components:
            self._require_headroom(a, cutoff)
            c = coherent_state(a, cutoff)
            rho += w * c.rho
        return State.from_density((cutoff.dim,), rho)

    @staticmethod
    def _require_headroom(alpha: complex, cutoff: FockCutoff) -> None:
        a2 = abs(alpha) ** 2
        if a2 + 6.0 * math.sqrt(a2 + 1.0) > cutoff.n_max:
            raise CutoffTooSmall(
                f"|alpha|^2={a2:.3g} needs n_max >= "
                f"{a2 + 6.0 * math.sqrt(a2 + 1.0):.1f}, got {cutoff.n_max}")


# ---------------------------------------------------------------------------
# composite-space operations

def tensor(a, b):
    """Kronecker product of two Operators or two States; dims concatenate."""
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(a.dims + b.dims, np.kron(a.mat, b.mat))
    if isinstance(a, State) and isinstance(b, State):
        if a.is_pure and b.is_pure:
            return State.from_vector(a.dims + b.dims, np.kron(a.vector, b.vector))
        return State.from_density(a.dims + b.dims, np.kron(a.rho, b.rho))
    raise TypeError("tensor expects two Operators or two States")


def partial_trace_oscillator(s: State) -> State:
    """Trace out the oscillator of a qubit (x) oscillator state."""
    if len(s.dims) != 2 or s.dims[0] != 2:
        raise BadDims(f"expected dims (2, m), got {s.dims}")
    m = s.dims[1]
    r = s.rho.reshape(2, m, 2, m)
    return State.from_density((2,), np.trace(r, axis1=1, axis2=3))


def partial_trace_qubit(s: State) -> State:
    """Trace out the qubit, returning the oscillator marginal."""
    if len(s.dims) != 2 or s.dims[0] != 2:
        raise BadDims(f"expected dims (2, m), got {s.dims}")
    m = s.dims[1]
    r = s.rho.reshape(2, m, 2, m)
    return State.from_density((m,), np.trace(r, axis1=0, axis2=2))


def fidelity(s1: State, s2: State) -> float:
    """Uhlmann fidelity F = tr sqrt(sqrt(rho) sigma sqrt(rho)); |<psi|phi>| for pure states."""
    if s1.dims != s2.dims:
        raise BadDims(f"{s1.dims} vs {s2.dims}")
    if s1.is_pure and s2.is_pure:
        return min(1.0, float(abs(s1.vector.conj() @ s2.vector)))
    if s1.is_pure:
        return min(1.0, float(math.sqrt(max(0.0, np.real(
            s1.vector.conj() @ (s2.rho @ s1.vector))))))
    if s2.is_pure:
        return fidelity(s2, s1)
    root = sqrtm(s1.rho)
    w = np.linalg.eigvalsh(root @ s2.rho @ root)
    return min(1.0, float(np.sum(np.sqrt(np.clip(np.real(w), 0.0, None)))))
