"""Finite-dimensional system side: states, observables, weak values.

Tensor products use the Kronecker convention with the first factor as the
slower (major) index, so ``tensor_product(sigma_z, I)`` is
``diag(1, 1, -1, -1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigendecompositionFailure, NearOrthogonalPostSelection, ValidationError

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
OVERLAP_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian ``dim x dim`` complex matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"observable must be a non-empty square matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("observable not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SystemState:
    """Unit-norm complex vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError(f"state must be a non-empty vector, got shape {v.shape}")
        if abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
            raise ValidationError("state not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "SystemState":
        v = np.asarray(amplitudes, dtype=complex)
        return cls(v / np.linalg.norm(v))


@dataclass(frozen=True)
class WeakValueReport:
    """Single and joint weak values entering the second-order pointer shifts.

    ``sym_ab_half_w`` is the weak value of (AB + BA)/2 and ``diff_sq_half_w``
    that of (A^2 - B^2)/2; the latter is always (a2_w - b2_w)/2.
    """

    a_w: complex
    b_w: complex
    a2_w: complex
    b2_w: complex
    sym_ab_half_w: complex
    overlap: complex = 1.0
    diff_sq_half_w: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "diff_sq_half_w", (complex(self.a2_w) - complex(self.b2_w)) / 2)

    def as_dict(self) -> dict:
        names = ("a_w", "b_w", "a2_w", "b2_w", "sym_ab_half_w", "diff_sq_half_w", "overlap")
        return {k: complex(getattr(self, k)) for k in names}


PAULI = {
    "I": np.eye(2, dtype=complex),
    "sigma_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(name: str) -> Observable:
    return Observable(PAULI[name])


def identity(dim: int) -> Observable:
    return Observable(np.eye(dim, dtype=complex))


def tensor_product(o1: Observable, o2: Observable) -> Observable:
    """Kronecker product, first factor major."""
    return Observable(np.kron(o1.entries, o2.entries))


def basis_state(index: int, dim: int) -> SystemState:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return SystemState(v)


def weak_value(pre: SystemState, post: SystemState, obs: Observable | np.ndarray) -> complex:
    """Return <post|obs|pre> / <post|pre>.

    ``obs`` may also be a plain (not necessarily Hermitian) matrix, which is
    how products such as AB are evaluated.

    Raises
    ------
    NearOrthogonalPostSelection
        If ``|<post|pre>| <= OVERLAP_FLOOR``.
    """
    m = obs.entries if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if not (pre.dim == post.dim == m.shape[0]):
        raise ValidationError(f"dimension mismatch: pre {pre.dim}, post {post.dim}, obs {m.shape[0]}")
    overlap = np.vdot(post.amplitudes, pre.amplitudes)
    if abs(overlap) <= OVERLAP_FLOOR:
        raise NearOrthogonalPostSelection(f"|<post|pre>| = {abs(overlap):.3e} is below {OVERLAP_FLOOR:g}")
    return complex(np.vdot(post.amplitudes, m @ pre.amplitudes) / overlap)


def joint_weak_value_report(pre: SystemState, post: SystemState, a: Observable, b: Observable) -> WeakValueReport:
    if a.dim != b.dim:
        raise ValidationError(f"observables differ in dimension: {a.dim} vs {b.dim}")
    am, bm = a.entries, b.entries
    return WeakValueReport(
        a_w=weak_value(pre, post, am),
        b_w=weak_value(pre, post, bm),
        a2_w=weak_value(pre, post, am @ am),
        b2_w=weak_value(pre, post, bm @ bm),
        sym_ab_half_w=weak_value(pre, post, (am @ bm + bm @ am) / 2),
        overlap=complex(np.vdot(post.amplitudes, pre.amplitudes)),
    )


def unitary_exp(h, scale: float = 1.0) -> np.ndarray:
    """Return exp(-i * scale * h) through the eigendecomposition of ``h``.

    ``h`` may be an :class:`Observable` or an array of Hermitian matrices with
    shape ``(..., d, d)``; stacks are exponentiated independently.
    """
    m = h.entries if isinstance(h, Observable) else np.asarray(h, dtype=complex)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionFailure(str(exc)) from exc
    phases = np.exp(-1j * scale * w)
    return (v * phases[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)
