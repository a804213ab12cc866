"""Recover single and joint weak values from measured pointer shifts.

Three procedures are provided:

``TwoProbeGeneral``
    probes with l = +L and l = -L (L >= 1); singles from the first-order
    shifts, then joints from the second-order shifts after removing the
    single-value products.
``TwoProbeL2``
    probes with l = +2 and l = -2; joints straight from the second-order
    shifts, whose single-value terms vanish at |l| = 2.
``SingleProbeEqualSquares``
    one |l| = 2 probe, valid when A^2 = B^2.

Joint estimates are reported unhalved: ``sym_ab_w`` estimates <AB + BA>_w
and ``diff_sq_w`` estimates <A^2 - B^2>_w.  :class:`DisplacementSet` stores
the shift of (X^2 - Y^2)/2, so the measured <X^2 - Y^2> is ``2 * dx2y2h``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateL, SingularSystem, ValidationError
from .perturbative import second_order_coefficients
from .probe_field import DisplacementSet
from .quantum_core import Observable


class Method(enum.Enum):
    TWO_PROBE_GENERAL = "TwoProbeGeneral"
    TWO_PROBE_L2 = "TwoProbeL2"
    SINGLE_PROBE_EQUAL_SQUARES = "SingleProbeEqualSquares"


@dataclass(frozen=True)
class WeakValueEstimate:
    """Extracted weak values; ``None`` marks a quantity the method cannot recover."""

    method: Method
    sym_ab_w: complex
    diff_sq_w: complex | None = None
    a_w: complex | None = None
    b_w: complex | None = None
    # smallest singular value of the linear solve(s), if any
    conditioning: float | None = None

    def __post_init__(self):
        if self.method is Method.SINGLE_PROBE_EQUAL_SQUARES and (
            self.a_w is not None or self.b_w is not None or self.diff_sq_w is not None
        ):
            raise ValidationError("single-probe estimate cannot carry a_w, b_w or diff_sq_w")


def _check_g(g: float) -> None:
    if not g > 0:
        raise ValidationError(f"g must be > 0 for extraction, got {g}")


def _solve(m: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    smin = float(np.linalg.svd(m, compute_uv=False)[-1])
    if smin <= 1e-12 * float(np.abs(m).max()):
        raise SingularSystem(f"coefficient matrix is rank deficient (smallest singular value {smin:.3e})")
    return np.linalg.solve(m, rhs), smin


def _singles_matrix(l_mag: int) -> np.ndarray:
    # unknowns (Re a, Im a, Re b, Im b); rows dx+, dx-, dy+, dy- divided by g
    L = l_mag
    return np.array(
        [
            [1, 0, 0, L],
            [1, 0, 0, -L],
            [0, -L, 1, 0],
            [0, L, 1, 0],
        ],
        dtype=float,
    )


def extract_singles_two_probe(
    dplus: DisplacementSet, dminus: DisplacementSet, l_mag: int, g: float, *, return_conditioning: bool = False
):
    """Return ``(a_w, b_w)`` from the first-order shifts at l = +l_mag and -l_mag.

    Solves dx = g (Re a + l Im b), dy = g (Re b - l Im a) at both signs of l.
    """
    _check_g(g)
    if l_mag == 0:
        raise DegenerateL("l_mag = 0 leaves the imaginary parts unrecoverable")
    if l_mag < 0:
        raise ValidationError(f"l_mag must be positive, got {l_mag}")
    rhs = np.array([dplus.dx, dminus.dx, dplus.dy, dminus.dy]) / g
    (ra, ia, rb, ib), smin = _solve(_singles_matrix(l_mag), rhs)
    out = (complex(ra, ia), complex(rb, ib))
    return (out, smin) if return_conditioning else out


def _joints_matrix(l_mag: int) -> np.ndarray:
    # unknowns (Re S, Im S, Re D, Im D) with S = <(AB+BA)/2>_w, D = <(A^2-B^2)/2>_w;
    # rows dxy+, dxy-, dx2y2h+, dx2y2h- after removing single-value products, over g^2
    _, c = second_order_coefficients(l_mag)
    L = l_mag
    return np.array(
        [
            [c, 0, 0, -L],
            [c, 0, 0, L],
            [0, L, c, 0],
            [0, -L, c, 0],
        ],
        dtype=float,
    )


def extract_joints_two_probe(
    dplus: DisplacementSet,
    dminus: DisplacementSet,
    singles: tuple[complex, complex],
    l_mag: int,
    g: float,
    *,
    return_conditioning: bool = False,
):
    """Return ``(sym_ab_w, diff_sq_w)`` from the second-order shifts at l = +-l_mag."""
    _check_g(g)
    if l_mag < 1:
        raise DegenerateL(f"l_mag must be >= 1, got {l_mag}")
    a, b = (complex(v) for v in singles)
    if not all(np.isfinite([a.real, a.imag, b.real, b.imag])):
        raise ValidationError("singles must be finite")
    c_single, _ = second_order_coefficients(l_mag)
    prod = c_single * (a * b.conjugate()).real
    mags = c_single / 2 * (abs(a) ** 2 - abs(b) ** 2)
    rhs = np.array(
        [dplus.dxy / g**2 - prod, dminus.dxy / g**2 - prod, dplus.dx2y2h / g**2 - mags, dminus.dx2y2h / g**2 - mags]
    )
    (rs, is_, rd, id_), smin = _solve(_joints_matrix(l_mag), rhs)
    out = (2 * complex(rs, is_), 2 * complex(rd, id_))
    return (out, smin) if return_conditioning else out


def extract_l2_sum_difference(dplus: DisplacementSet, dminus: DisplacementSet, g: float) -> tuple[complex, complex]:
    """Joint weak values from |l| = 2 second-order shifts alone.

    ``<X^2 - Y^2>`` of the l = +-2 runs is ``2 * dx2y2h``.
    """
    _check_g(g)
    g2 = g * g
    xx_plus, xx_minus = 2 * dplus.dx2y2h, 2 * dminus.dx2y2h
    sym = complex((dplus.dxy + dminus.dxy) / g2, (xx_plus - xx_minus) / (4 * g2))
    diff = complex((xx_plus + xx_minus) / (2 * g2), -(dplus.dxy - dminus.dxy) / (2 * g2))
    return sym, diff


def extract_single_probe_equal_squares(d: DisplacementSet, sign_l: int, g: float) -> complex:
    """<AB + BA>_w from one |l| = 2 probe, assuming A^2 = B^2."""
    _check_g(g)
    if sign_l not in (1, -1):
        raise ValidationError(f"sign_l must be +1 or -1, got {sign_l}")
    g2 = g * g
    return complex(2 * d.dxy / g2, sign_l * (2 * d.dx2y2h) / (2 * g2))


def equal_squares_check(a: Observable, b: Observable, tol: float = 1e-12) -> bool:
    if a.dim != b.dim:
        raise ValidationError(f"observables differ in dimension: {a.dim} vs {b.dim}")
    am, bm = a.entries, b.entries
    return bool(np.max(np.abs(am @ am - bm @ bm)) <= tol)


def estimate_two_probe(dplus: DisplacementSet, dminus: DisplacementSet, l_mag: int, g: float) -> WeakValueEstimate:
    """Two-step general pipeline: singles first, then joints from the same data."""
    singles, s1 = extract_singles_two_probe(dplus, dminus, l_mag, g, return_conditioning=True)
    (sym, diff), s2 = extract_joints_two_probe(dplus, dminus, singles, l_mag, g, return_conditioning=True)
    return WeakValueEstimate(
        Method.TWO_PROBE_GENERAL, sym_ab_w=sym, diff_sq_w=diff, a_w=singles[0], b_w=singles[1], conditioning=min(s1, s2)
    )


def estimate_l2(dplus: DisplacementSet, dminus: DisplacementSet, g: float) -> WeakValueEstimate:
    sym, diff = extract_l2_sum_difference(dplus, dminus, g)
    return WeakValueEstimate(Method.TWO_PROBE_L2, sym_ab_w=sym, diff_sq_w=diff)


def estimate_single_probe(d: DisplacementSet, sign_l: int, g: float) -> WeakValueEstimate:
    return WeakValueEstimate(Method.SINGLE_PROBE_EQUAL_SQUARES, sym_ab_w=extract_single_probe_equal_squares(d, sign_l, g))
