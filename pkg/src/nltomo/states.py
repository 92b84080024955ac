"""Construction of bosonic states in a truncated Fock basis.

All states live in the finite basis {|0>, ..., |dim-1>}.  Amplitude
patterns involving factorials are evaluated in log space through
``scipy.special.gammaln``, so field strengths up to |alpha|^2 ~ 40 at
dimensions of a few hundred stay well inside double-precision range.
After truncation every vector is renormalized; the discarded tail can be
inspected with :func:`tail_mass`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import NumericalInvariantError, ValidationError

__all__ = [
    "StateKind",
    "FockVector",
    "DensityMatrix",
    "InitialStateSpec",
    "LadderExpectations",
    "coherent_coefficients",
    "photon_added_coefficients",
    "even_coherent_coefficients",
    "build_state",
    "density_from_pure",
    "ladder_expectations",
    "tail_mass",
    "laguerre_value",
]

_NORM_TOL = 1e-12
_HERM_TOL = 1e-12
_TRACE_TOL = 1e-10


class StateKind(enum.Enum):
    """Supported initial-state families."""

    COHERENT = "coherent"
    PHOTON_ADDED = "photon_added"
    EVEN_COHERENT = "even_coherent"


def _as_locked_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Normalized pure state |psi> = sum_n C_n |n> in a truncated basis."""

    dim: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.dim,):
            raise ValidationError(
                f"amplitudes shape {amps.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes contain non-finite entries")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > _NORM_TOL:
            raise NumericalInvariantError(
                f"state norm deviates from 1 by {abs(norm - 1.0):.3e}"
            )
        object.__setattr__(self, "amplitudes", _as_locked_array(amps, np.complex128))

    def probabilities(self) -> np.ndarray:
        """Photon-number distribution |C_n|^2."""
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace density matrix in the truncated Fock basis.

    Element ``elements[n, m]`` is <n|rho|m>.  Hermiticity and trace are
    enforced at construction so that downstream consumers never need to
    re-check them.
    """

    dim: int
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        mat = np.asarray(self.elements, dtype=np.complex128)
        if mat.shape != (self.dim, self.dim):
            raise ValidationError(
                f"elements shape {mat.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(mat)):
            raise ValidationError("density matrix contains non-finite entries")
        herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_dev > _HERM_TOL:
            raise NumericalInvariantError(
                f"hermiticity violated by {herm_dev:.3e} (tol {_HERM_TOL:.0e})"
            )
        trace_dev = abs(complex(np.trace(mat)) - 1.0)
        if trace_dev > _TRACE_TOL:
            raise NumericalInvariantError(
                f"trace deviates from 1 by {trace_dev:.3e} (tol {_TRACE_TOL:.0e})"
            )
        object.__setattr__(self, "elements", _as_locked_array(mat, np.complex128))

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def purity(self) -> float:
        """Tr rho^2, computed without forming the matrix product."""
        return float(np.sum(np.abs(self.elements) ** 2))

    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.elements)).copy()


@dataclass(frozen=True)
class InitialStateSpec:
    """Parameters selecting one member of the supported state families.

    ``p`` is the number of added photons and only meaningful for
    ``StateKind.PHOTON_ADDED`` (where it must be >= 1).
    """

    kind: StateKind
    alpha: complex
    p: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, StateKind):
            raise ValidationError(f"kind must be a StateKind, got {self.kind!r}")
        alpha = complex(self.alpha)
        if not (np.isfinite(alpha.real) and np.isfinite(alpha.imag)):
            raise ValidationError("alpha must be finite")
        object.__setattr__(self, "alpha", alpha)
        if self.kind is StateKind.PHOTON_ADDED:
            if not isinstance(self.p, (int, np.integer)) or self.p < 1:
                raise ValidationError(
                    f"photon-added states need integer p >= 1, got {self.p!r}"
                )
            object.__setattr__(self, "p", int(self.p))
        else:
            if self.p not in (0, None):
                raise ValidationError(
                    f"p is only meaningful for photon-added states, got p={self.p!r}"
                )
            object.__setattr__(self, "p", 0)

    def build(self, dim: int) -> FockVector:
        return build_state(self, dim)


class LadderExpectations(NamedTuple):
    """First few ladder-operator moments of a state: <a>, <a^2>, <N>."""

    a: complex
    a_squared: complex
    n: float


def _normalized_vector(log_weights: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Exponentiate relative log magnitudes and normalize.

    Subtracting the running maximum keeps everything in range even when
    the absolute normalization constant would overflow.
    """
    shifted = log_weights - np.max(log_weights[np.isfinite(log_weights)])
    mags = np.exp(shifted)
    amps = mags * phases
    return amps / np.linalg.norm(amps)


def coherent_coefficients(alpha: complex, dim: int) -> FockVector:
    """Coherent state C_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), renormalized."""
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return FockVector(dim, amps)
    r = abs(alpha)
    phase = np.exp(1j * np.angle(alpha) * n)
    log_mag = n * np.log(r) - 0.5 * gammaln(n + 1.0)
    return FockVector(dim, _normalized_vector(log_mag, phase))


def photon_added_coefficients(alpha: complex, p: int, dim: int) -> FockVector:
    """p-photon-added coherent state, a^dagger^p |alpha> normalized.

    For n >= p the amplitude is proportional to
    alpha^{n-p} sqrt(n!) / (n-p)!; amplitudes below n = p vanish.  The
    exact normalization constant is p! L_p(-|alpha|^2) with L_p the
    Laguerre polynomial, but only relative weights are needed here since
    the truncated vector is renormalized numerically.
    """
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise ValidationError(f"p must be an integer >= 1, got {p!r}")
    if p >= dim:
        raise ValidationError(f"p={p} needs dim > p, got dim={dim}")
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[p] = 1.0  # adding p photons to vacuum gives the Fock state |p>
        return FockVector(dim, amps)
    r = abs(alpha)
    k = n - p
    log_mag = np.full(dim, -np.inf)
    valid = n >= p
    log_mag[valid] = (
        k[valid] * np.log(r) + 0.5 * gammaln(n[valid] + 1.0) - gammaln(k[valid] + 1.0)
    )
    phases = np.where(valid, np.exp(1j * np.angle(alpha) * np.where(valid, k, 0)), 0.0)
    return FockVector(dim, _normalized_vector(log_mag, phases))


def even_coherent_coefficients(alpha: complex, dim: int) -> FockVector:
    """Even coherent state, (|alpha> + |-alpha>) normalized.

    Odd Fock amplitudes are exactly zero; even ones follow the coherent
    pattern with normalization N_+ = [2(1 + e^{-2|alpha|^2})]^{-1/2}.
    """
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return FockVector(dim, amps)
    r = abs(alpha)
    log_mag = np.where(n % 2 == 0, n * np.log(r) - 0.5 * gammaln(n + 1.0), -np.inf)
    phases = np.where(n % 2 == 0, np.exp(1j * np.angle(alpha) * n), 0.0)
    return FockVector(dim, _normalized_vector(log_mag, phases))


def build_state(spec: InitialStateSpec, dim: int) -> FockVector:
    """Build the truncated, renormalized state selected by ``spec``."""
    if spec.kind is StateKind.COHERENT:
        return coherent_coefficients(spec.alpha, dim)
    if spec.kind is StateKind.PHOTON_ADDED:
        return photon_added_coefficients(spec.alpha, spec.p, dim)
    if spec.kind is StateKind.EVEN_COHERENT:
        return even_coherent_coefficients(spec.alpha, dim)
    raise ValidationError(f"unknown state kind {spec.kind!r}")


def density_from_pure(state: FockVector) -> DensityMatrix:
    """Rank-one density matrix |psi><psi|."""
    amps = state.amplitudes
    return DensityMatrix(state.dim, np.outer(amps, amps.conj()))


def ladder_expectations(rho: DensityMatrix) -> LadderExpectations:
    """<a>, <a^2> and <N> directly from the density-matrix diagonals.

    <a>   = sum_n sqrt(n+1) rho_{n+1, n}
    <a^2> = sum_n sqrt((n+1)(n+2)) rho_{n+2, n}
    <N>   = sum_n n rho_{n, n}
    """
    mat = rho.elements
    dim = rho.dim
    n = np.arange(dim)
    exp_n = float(np.real(np.sum(n * np.diagonal(mat))))
    if dim >= 2:
        sub1 = np.diagonal(mat, offset=-1)  # rho_{n+1, n}
        exp_a = complex(np.sum(np.sqrt(n[: dim - 1] + 1.0) * sub1))
    else:
        exp_a = 0.0 + 0.0j
    if dim >= 3:
        sub2 = np.diagonal(mat, offset=-2)  # rho_{n+2, n}
        nn = n[: dim - 2]
        exp_a2 = complex(np.sum(np.sqrt((nn + 1.0) * (nn + 2.0)) * sub2))
    else:
        exp_a2 = 0.0 + 0.0j
    return LadderExpectations(a=exp_a, a_squared=exp_a2, n=exp_n)


def tail_mass(obj: FockVector | DensityMatrix, start: int) -> float:
    """Probability carried by Fock levels n >= start.

    Used to judge whether a truncation dimension is adequate: a healthy
    simulation keeps the mass in the top few levels negligible.
    """
    if start < 0:
        raise ValidationError(f"start must be >= 0, got {start}")
    if isinstance(obj, FockVector):
        probs = obj.probabilities()
    elif isinstance(obj, DensityMatrix):
        probs = obj.populations()
    else:
        raise ValidationError(f"expected FockVector or DensityMatrix, got {type(obj)!r}")
    if start >= len(probs):
        return 0.0
    return float(np.sum(probs[start:]))


def laguerre_value(p: int, x: float) -> float:
    """Laguerre polynomial L_p(x) by the stable three-term recurrence.

    (k+1) L_{k+1}(x) = (2k+1-x) L_k(x) - k L_{k-1}(x)

    Needed for closed-form photon-added normalization checks, e.g.
    <N> = (p+1) L_{p+1}(-|alpha|^2) / L_p(-|alpha|^2) - 1.
    """
    if not isinstance(p, (int, np.integer)) or p < 0:
        raise ValidationError(f"p must be an integer >= 0, got {p!r}")
    if p == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return float(cur)
