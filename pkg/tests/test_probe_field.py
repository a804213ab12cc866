import numpy as np
import pytest
from scipy.integrate import quad

from lgweak.errors import GridMismatch, GridTooSmall, ValidationError
from lgweak.probe_field import (
    X2Y2_HALF_WORDS,
    XY_WORDS,
    GridSpec,
    OperatorWord,
    ProbeField,
    Rep,
    displacement_set,
    dumps_field,
    expectation,
    expectations,
    intensity_csv,
    lg_mode,
    loads_field,
    position_moments,
    reflect_diagonal,
    transform,
    translate,
)


def radial_second_moment(l, sigma):
    """<x^2 + y^2> for |amp|^2 = r^(2|l|) exp(-r^2 / (2 sigma^2)), by 1D quadrature."""
    w = lambda r, k: r ** (2 * abs(l) + 1 + k) * np.exp(-(r**2) / (2 * sigma**2))
    num = quad(w, 0, np.inf, args=(2,), epsabs=0, epsrel=1e-13)[0]
    den = quad(w, 0, np.inf, args=(0,), epsabs=0, epsrel=1e-13)[0]
    return num / den


def test_grid_validation():
    for bad in (15, 8, 0):
        with pytest.raises(ValidationError):
            GridSpec(bad, 10.0)
    with pytest.raises(ValidationError):
        GridSpec(64, -1.0)


def test_grid_is_cell_centred_and_symmetric():
    g = GridSpec(32, 8.0)
    x = g.positions()
    assert np.allclose(x, -x[::-1], atol=0)
    assert x.min() == pytest.approx(-4 + 0.125)
    assert np.min(np.abs(x)) == pytest.approx(0.125)


def test_gaussian_moments_match_gaussian_integral():
    sigma = 1.3
    f = lg_mode(0, sigma, GridSpec.for_mode(0, sigma))
    # int x^2 exp(-x^2 / (2 s^2)) / int exp(-x^2 / (2 s^2)) = s^2
    assert expectation(f, OperatorWord(("X", "X"))).real == pytest.approx(sigma**2, rel=1e-10)
    assert abs(expectations(f, XY_WORDS)) < 1e-12


@pytest.mark.parametrize("l", range(-4, 5))
def test_lg_moments_against_radial_quadrature(l):
    f = lg_mode(l, 1.0, GridSpec.for_mode(l))
    r2 = radial_second_moment(l, 1.0)
    assert r2 == pytest.approx(2 * (abs(l) + 1), rel=1e-12)
    mx, my, mxy, mdiff = position_moments(f)
    assert expectation(f, OperatorWord(("X", "X"))).real == pytest.approx(r2 / 2, rel=1e-6)
    assert expectation(f, OperatorWord(("Y", "Y"))).real == pytest.approx(r2 / 2, rel=1e-6)
    assert max(abs(mx), abs(my), abs(mxy), abs(mdiff)) < 1e-10


def test_l2_total_radial_moment():
    f = lg_mode(2, 1.0, GridSpec.for_mode(2))
    total = expectation(f, OperatorWord(("X", "X"))) + expectation(f, OperatorWord(("Y", "Y")))
    assert total.real == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("l", [1, 2, 3, 5])
def test_conjugation_symmetry(l):
    g = GridSpec.for_mode(l)
    plus, minus = lg_mode(l, 1.0, g), lg_mode(-l, 1.0, g)
    assert np.max(np.abs(minus.amplitudes - plus.amplitudes.conj())) <= 1e-14


@pytest.mark.parametrize("l", [0, 1, 3])
def test_norm_is_one(l):
    f = lg_mode(l, 0.7, GridSpec.for_mode(l, 0.7, n=128))
    assert f.norm() == pytest.approx(1, abs=1e-10)


def test_lg_centre_is_a_zero_of_order_l():
    # sampled value at the cell nearest the origin follows r^|l| and shrinks under refinement
    ratios = []
    for n in (128, 256, 512):
        g = GridSpec.for_mode(2, n=n)
        f = lg_mode(2, 1.0, g)
        c = n // 2
        r = np.hypot(*g.positions()[[c, c]])
        peak = np.max(np.abs(f.amplitudes))
        ratios.append(abs(f.amplitudes[c, c]) / peak)
        # continuum ratio: r^2 e^{-r^2/4} / (4 e^{-1}) with the peak at r^2 = 4
        assert ratios[-1] == pytest.approx(r**2 * np.exp(-(r**2) / 4) / (4 * np.exp(-1)), rel=1e-3)
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[1] / ratios[2] == pytest.approx(4, rel=2e-3)


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_default_grid_boundary_below_1e8(l):
    f = lg_mode(l, 1.0, GridSpec.for_mode(l))
    a = np.abs(f.amplitudes)
    edge = max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max())
    assert edge < 1e-8 * a.max()


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        lg_mode(3, 1.0, GridSpec(256, 15.9))
    lg_mode(3, 1.0, GridSpec(256, 16.0))


def test_l_envelope():
    with pytest.raises(ValueError):
        lg_mode(7, 1.0, GridSpec.for_mode(7))


def test_transform_round_trip_and_parseval():
    f = lg_mode(3, 1.0, GridSpec.for_mode(3))
    p = transform(f, Rep.MOMENTUM)
    back = transform(p, Rep.POSITION)
    assert np.max(np.abs(back.amplitudes - f.amplitudes)) < 1e-12
    assert abs(p.norm() - f.norm()) < 1e-12


def test_gaussian_momentum_width():
    for hbar, sigma in ((1.0, 1.0), (0.5, 2.0)):
        f = lg_mode(0, sigma, GridSpec.for_mode(0, sigma), hbar=hbar)
        # |phi~(p)|^2 is Gaussian with variance hbar^2 / (4 sigma^2)
        assert expectation(f, OperatorWord(("Px", "Px"))).real == pytest.approx(hbar**2 / (4 * sigma**2), rel=1e-10)


def test_momentum_grid_against_direct_dft():
    g = GridSpec(16, 6.0)
    rng = np.random.default_rng(3)
    amp = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    p = transform(ProbeField(g, Rep.POSITION, amp), Rep.MOMENTUM).amplitudes
    x, k = g.positions(), g.wavenumbers()
    kernel = np.exp(-1j * np.outer(k, x)) * g.spacing / np.sqrt(2 * np.pi)
    assert np.allclose(p, kernel @ amp @ kernel.T, atol=1e-12)


def test_x_expectation_vanishes_on_lg():
    for l in (-2, 1, 4):
        assert abs(expectation(lg_mode(l, 1.0, GridSpec.for_mode(l)), OperatorWord(("X",)))) < 1e-10


def test_canonical_commutator():
    for hbar in (1.0, 0.3):
        f = lg_mode(1, 1.0, GridSpec.for_mode(1), hbar=hbar)
        c = expectation(f, OperatorWord(("X", "Px"))) - expectation(f, OperatorWord(("Px", "X")))
        assert abs(c - 1j * hbar) < 1e-8
        c = expectation(f, OperatorWord(("X", "Py"))) - expectation(f, OperatorWord(("Py", "X")))
        assert abs(c) < 1e-8


def test_xy_vanishes_on_l1():
    assert abs(expectations(lg_mode(1, 1.0, GridSpec.for_mode(1)), XY_WORDS)) < 1e-10


def test_gaussian_x_px_is_half_i():
    f = lg_mode(0, 1.0, GridSpec.for_mode(0))
    assert expectation(f, OperatorWord(("X", "Px"))) == pytest.approx(0.5j, abs=1e-10)


@pytest.mark.parametrize("word", [("X", "Px", "X"), ("Px", "Y", "Y", "Px"), ("Px", "Py")])
def test_palindromic_words_are_real(word):
    f = lg_mode(2, 1.0, GridSpec.for_mode(2))
    assert abs(expectation(f, OperatorWord(word)).imag) < 1e-10


def test_symmetrized_word_real():
    f = lg_mode(3, 1.0, GridSpec.for_mode(3))
    w = [OperatorWord(("X", "Px"), 0.5), OperatorWord(("Px", "X"), 0.5)]
    assert abs(expectations(f, w).imag) < 1e-10


def test_word_validation():
    with pytest.raises(ValidationError):
        OperatorWord(("Z",))
    with pytest.raises(ValidationError):
        OperatorWord(("X",) * 5)


def test_displacement_identical_fields_zero():
    f = lg_mode(2, 1.0, GridSpec.for_mode(2))
    assert displacement_set(f, f).as_tuple() == (0, 0, 0, 0)


def test_displacement_translation():
    f = lg_mode(1, 1.0, GridSpec.for_mode(1))
    d = displacement_set(f, translate(f, 0.37, 0.0))
    assert d.dx == pytest.approx(0.37, abs=1e-8)
    assert abs(d.dy) < 1e-8


def test_translation_matches_shifted_analytic_mode():
    g = GridSpec.for_mode(2)
    f = lg_mode(2, 1.0, g)
    x = g.positions()
    xx, yy = x[:, None] - 0.25, x[None, :] + 0.1
    raw = (xx + 1j * yy) ** 2 * np.exp(-(xx**2 + yy**2) / 4)
    expected = raw / np.sqrt(np.sum(np.abs(raw) ** 2) * g.spacing**2)
    assert np.max(np.abs(translate(f, 0.25, -0.1).amplitudes - expected)) < 1e-10


def test_rotation_flips_x2y2():
    g = GridSpec.for_mode(0)
    x = g.positions()
    amp = np.exp(-(x[:, None] ** 2) / 4 / 1.5**2 - x[None, :] ** 2 / 4 / 0.8**2)
    base = ProbeField(g, Rep.POSITION, np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / 4)).normalize()
    ell = ProbeField(g, Rep.POSITION, amp).normalize()
    rot = ProbeField(g, Rep.POSITION, np.rot90(amp)).normalize()
    d1, d2 = displacement_set(base, ell), displacement_set(base, rot)
    assert d1.dx2y2h > 0.5
    assert d2.dx2y2h == pytest.approx(-d1.dx2y2h, rel=1e-12)


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        displacement_set(lg_mode(0, 1, GridSpec(64, 16.0)), lg_mode(0, 1, GridSpec(64, 20.0)))


def test_reflection_maps_l_to_minus_l_up_to_phase():
    g = GridSpec.for_mode(2)
    refl = reflect_diagonal(lg_mode(2, 1.0, g)).amplitudes
    # (y + i x)^2 = -(x - i y)^2
    assert np.max(np.abs(refl + lg_mode(-2, 1.0, g).amplitudes)) < 1e-14


def test_field_text_round_trip(tmp_path):
    f = transform(lg_mode(-1, 0.9, GridSpec(16, 12.0), hbar=0.5), Rep.MOMENTUM)
    text = dumps_field(f)
    assert text.splitlines()[0] == "16 12 momentum -1 0.90000000000000002 0.5"
    g = loads_field(text)
    assert g.rep is Rep.MOMENTUM and g.l == -1 and g.sigma == 0.9 and g.hbar == 0.5 and g.grid == f.grid
    assert np.array_equal(g.amplitudes, f.amplitudes)


def test_field_text_header_default_hbar():
    text = dumps_field(lg_mode(0, 1.0, GridSpec(16, 8.0)))
    assert text.splitlines()[0] == "16 8 position 0 1"
    assert len(text.splitlines()) == 1 + 256


def test_field_text_rejects_bad_body():
    with pytest.raises(ValidationError):
        loads_field("16 8 position 0 1\n1 2\n")


def test_intensity_csv():
    f = lg_mode(1, 1.0, GridSpec(16, 12.0))
    lines = intensity_csv(f).splitlines()
    assert lines[0] == "x,y,intensity"
    assert len(lines) == 257
    total = sum(float(r.split(",")[2]) for r in lines[1:]) * f.grid.spacing**2
    assert total == pytest.approx(1, abs=1e-12)


def test_x2y2_words_on_symmetric_mode():
    f = lg_mode(3, 1.0, GridSpec.for_mode(3))
    assert abs(expectations(f, X2Y2_HALF_WORDS)) < 1e-10
