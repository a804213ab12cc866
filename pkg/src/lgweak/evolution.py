"""Exact impulsive von Neumann coupling followed by post-selection.

The coupling exp(-i g (A (x) Px + B (x) Py) / hbar) is diagonal in the probe
momentum, so at every momentum grid point it reduces to a small unitary on
the system.  Contracting that unitary between the post- and pre-selected
states gives the scalar that multiplies the probe amplitude there.  Nothing
is expanded in powers of g.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import PostSelectionVanished, ValidationError
from .probe_field import MAX_ABS_L, DisplacementSet, GridSpec, ProbeField, Rep, displacement_set, lg_mode, quad, transform
from .quantum_core import Observable, SystemState, unitary_exp

PROB_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    a: Observable
    b: Observable
    pre: SystemState
    post: SystemState
    g: float
    l: int
    sigma: float = 1.0
    hbar: float = 1.0
    grid: GridSpec | None = None

    def __post_init__(self):
        dims = {self.a.dim, self.b.dim, self.pre.dim, self.post.dim}
        if len(dims) != 1:
            raise ValidationError(
                f"dimension mismatch: a {self.a.dim}, b {self.b.dim}, pre {self.pre.dim}, post {self.post.dim}"
            )
        if not self.g >= 0:
            raise ValidationError(f"g must be >= 0, got {self.g}")
        if not self.hbar > 0:
            raise ValidationError(f"hbar must be > 0, got {self.hbar}")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "l", int(self.l))
        if abs(self.l) > MAX_ABS_L:
            raise ValidationError(f"|l| must be <= {MAX_ABS_L}, got {self.l}")
        if self.grid is None:
            object.__setattr__(self, "grid", GridSpec.for_mode(self.l, self.sigma))

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class PostSelectedProbe:
    field: ProbeField
    prob: float


def _kick_unitaries(sc: ScenarioConfig, k: np.ndarray, rows: np.ndarray) -> np.ndarray:
    kx = k[rows][:, None, None, None]
    ky = k[None, :, None, None]
    # g * (hbar k) / hbar: hbar cancels on the wavenumber grid
    return unitary_exp(sc.g * (kx * sc.a.entries + ky * sc.b.entries))


def _kick_rows(sc: ScenarioConfig, k: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """<post| exp(-i g (px A + py B) / hbar) |pre> for px = hbar k[rows], all py."""
    u = _kick_unitaries(sc, k, rows)
    # system index innermost
    return np.einsum("i,...ij,j->...", sc.post.amplitudes.conj(), u, sc.pre.amplitudes)


def _kick_norm_rows(sc: ScenarioConfig, k: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """||exp(-i g (px A + py B) / hbar) |pre>||^2 per momentum point."""
    u_pre = _kick_unitaries(sc, k, rows) @ sc.pre.amplitudes
    return np.sum(np.abs(u_pre) ** 2, axis=-1)


def _map_rows(fn, sc: ScenarioConfig, k: np.ndarray, workers: int) -> np.ndarray:
    chunks = np.array_split(np.arange(k.size), max(1, workers))
    if workers <= 1:
        return np.concatenate([fn(sc, k, c) for c in chunks])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(lambda c: fn(sc, k, c), chunks)))


def kick_factors(sc: ScenarioConfig, workers: int = 1) -> np.ndarray:
    """Per-momentum-point post-selection amplitude, shape ``(n, n)``.

    Every point is independent, so the result does not depend on ``workers``.
    """
    return _map_rows(_kick_rows, sc, sc.grid.wavenumbers(), workers)


def apply_coupling(sc: ScenarioConfig, initial: ProbeField, workers: int = 1) -> PostSelectedProbe:
    """Couple ``initial`` to the system, post-select, and renormalize."""
    if initial.grid != sc.grid:
        raise ValidationError("initial field grid differs from scenario grid")
    p = transform(initial, Rep.MOMENTUM)
    amp = p.amplitudes * kick_factors(sc, workers)
    prob = quad(np.abs(amp) ** 2, sc.grid.cell_area(Rep.MOMENTUM)).real / p.norm()
    if prob <= PROB_FLOOR:
        raise PostSelectionVanished(f"post-selection probability {prob:.3e} <= {PROB_FLOOR:g}")
    out = replace(p, amplitudes=amp).normalize()
    return PostSelectedProbe(transform(out, Rep.POSITION), float(prob))


def initial_probe(sc: ScenarioConfig) -> ProbeField:
    return lg_mode(sc.l, sc.sigma, sc.grid, hbar=sc.hbar)


def couple_and_postselect(sc: ScenarioConfig, workers: int = 1) -> PostSelectedProbe:
    """Final normalized probe and post-selection probability for ``sc``.

    Raises
    ------
    PostSelectionVanished
        If the post-selection probability is at or below ``PROB_FLOOR``.
    """
    return apply_coupling(sc, initial_probe(sc), workers)


def coupled_norm(sc: ScenarioConfig, workers: int = 1) -> float:
    """Norm of the joint state after the kick, before post-selection (should be 1)."""
    p = transform(initial_probe(sc), Rep.MOMENTUM)
    weights = _map_rows(_kick_norm_rows, sc, sc.grid.wavenumbers(), workers)
    return quad(weights * np.abs(p.amplitudes) ** 2, sc.grid.cell_area(Rep.MOMENTUM)).real


def simulate_displacements(sc: ScenarioConfig, workers: int = 1) -> tuple[DisplacementSet, float]:
    """Pointer shifts of the exactly simulated probe, plus post-selection probability."""
    phi_i = initial_probe(sc)
    out = apply_coupling(sc, phi_i, workers)
    return displacement_set(phi_i, out.field), out.prob
