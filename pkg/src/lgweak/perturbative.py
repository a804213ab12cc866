"""Second-order pointer-shift predictions.

Two independent routes:

* :func:`predict_displacement` evaluates the generic second-order expansion

      <M>_fi ~ (2g/hbar) Im<M H1>_i + (g/hbar)^2 (<H1^dag M H1>_i - Re<M H2>_i),
      H1 = Px <A>_w + Py <B>_w,
      H2 = Px^2 <A^2>_w + Py^2 <B^2>_w + Px Py <AB + BA>_w,

  with every probe expectation computed on the grid.  The expansion drops
  the renormalization of the final probe, so it is only meaningful for words
  with <M>_i = 0 on probes with <Px>_i = <Py>_i = 0, which covers the four
  canonical shifts on any p = 0 Laguerre-Gauss probe.
* :func:`analytic_first_order` / :func:`analytic_second_order` are the closed
  forms for a p = 0 Laguerre-Gauss probe of azimuthal index ``l``.
"""
from __future__ import annotations

import weakref
from typing import Sequence

from .probe_field import (
    X2Y2_HALF_WORDS,
    XY_WORDS,
    DisplacementSet,
    OperatorWord,
    ProbeField,
    expectation,
)
from .quantum_core import WeakValueReport

X_WORDS = (OperatorWord(("X",)),)
Y_WORDS = (OperatorWord(("Y",)),)
CANONICAL_WORDS = {"dx": X_WORDS, "dy": Y_WORDS, "dxy": XY_WORDS, "dx2y2h": X2Y2_HALF_WORDS}

_moment_cache: "weakref.WeakKeyDictionary[ProbeField, dict]" = weakref.WeakKeyDictionary()


def _moment(probe: ProbeField, factors: tuple[str, ...]) -> complex:
    table = _moment_cache.setdefault(probe, {})
    if factors not in table:
        table[factors] = expectation(probe, OperatorWord(factors))
    return table[factors]


def _expect(probe: ProbeField, words: Sequence[OperatorWord]) -> complex:
    return sum((w.coeff * _moment(probe, w.factors) for w in words), 0j)


def _products(left: Sequence[OperatorWord], right: Sequence[OperatorWord]) -> list[OperatorWord]:
    return [a * b for a in left for b in right]


def h1_words(report: WeakValueReport) -> list[OperatorWord]:
    return [OperatorWord(("Px",), report.a_w), OperatorWord(("Py",), report.b_w)]


def h2_words(report: WeakValueReport) -> list[OperatorWord]:
    return [
        OperatorWord(("Px", "Px"), report.a2_w),
        OperatorWord(("Py", "Py"), report.b2_w),
        OperatorWord(("Px", "Py"), 2 * report.sym_ab_half_w),
    ]


def predict_displacement(
    word: OperatorWord | Sequence[OperatorWord],
    report: WeakValueReport,
    probe: ProbeField,
    g: float,
    hbar: float = 1.0,
) -> float:
    """Second-order shift of the observable ``word`` (a sum of words) on ``probe``."""
    m = [word] if isinstance(word, OperatorWord) else list(word)
    h1 = h1_words(report)
    h1_dag = [OperatorWord(w.factors, complex(w.coeff).conjugate()) for w in h1]
    first = _expect(probe, _products(m, h1)).imag
    sandwich = _expect(probe, _products(_products(h1_dag, m), h1))
    second = sandwich.real - _expect(probe, _products(m, h2_words(report))).real
    return 2 * g / hbar * first + (g / hbar) ** 2 * second


def predict_set(report: WeakValueReport, probe: ProbeField, g: float, hbar: float = 1.0) -> DisplacementSet:
    """The four canonical shifts through :func:`predict_displacement`."""
    return DisplacementSet(**{k: predict_displacement(w, report, probe, g, hbar) for k, w in CANONICAL_WORDS.items()})


def analytic_first_order(report: WeakValueReport, l: int, g: float) -> tuple[float, float]:
    a, b = complex(report.a_w), complex(report.b_w)
    return g * (a.real + l * b.imag), g * (b.real - l * a.imag)


def second_order_coefficients(l: int) -> tuple[float, float]:
    """Return ``(c_single, c_joint) = (-(l^2-|l|-2)/4, (l^2-|l|+2)/4)``."""
    return -(l * l - abs(l) - 2) / 4, (l * l - abs(l) + 2) / 4


def analytic_second_order(report: WeakValueReport, l: int, g: float) -> tuple[float, float]:
    a, b = complex(report.a_w), complex(report.b_w)
    s, d = complex(report.sym_ab_half_w), complex(report.diff_sq_half_w)
    c_single, c_joint = second_order_coefficients(l)
    dxy = c_single * (a * b.conjugate()).real + c_joint * s.real - l * d.imag
    dx2y2h = c_single / 2 * (abs(a) ** 2 - abs(b) ** 2) + c_joint * d.real + l * s.imag
    return g * g * dxy, g * g * dx2y2h


def analytic_set(report: WeakValueReport, l: int, g: float) -> DisplacementSet:
    return DisplacementSet(*analytic_first_order(report, l, g), *analytic_second_order(report, l, g))
