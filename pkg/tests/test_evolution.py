import numpy as np
import pytest

from conftest import identity_scenario, random_state
from lgweak.errors import PostSelectionVanished, ValidationError
from lgweak.evolution import (
    ScenarioConfig,
    apply_coupling,
    couple_and_postselect,
    coupled_norm,
    initial_probe,
    kick_factors,
    simulate_displacements,
)
from lgweak.probe_field import GridSpec, displacement_set, lg_mode, reflect_diagonal, translate
from lgweak.quantum_core import Observable, SystemState, basis_state, pauli


def test_zero_coupling_is_identity(pauli_zz):
    sc = pauli_zz.with_(g=0.0)
    out = couple_and_postselect(sc)
    phi = initial_probe(sc)
    assert np.max(np.abs(out.field.amplitudes - phi.amplitudes)) < 1e-12
    assert out.prob == pytest.approx(abs(np.vdot(sc.post.amplitudes, sc.pre.amplitudes)) ** 2, abs=1e-12)
    d, _ = simulate_displacements(sc)
    assert max(map(abs, d.as_tuple())) < 1e-10


@pytest.mark.parametrize("l", [0, 1, -3])
def test_identity_observables_translate(l):
    g = 0.3
    sc = identity_scenario(g=g, l=l)
    out = couple_and_postselect(sc)
    phi = initial_probe(sc)
    shifted = translate(phi, g, g)
    assert np.max(np.abs(out.field.amplitudes - shifted.amplitudes)) < 1e-10
    assert out.prob == pytest.approx(0.5, abs=1e-12)
    d = displacement_set(phi, out.field)
    assert d.dx == pytest.approx(g, abs=1e-8) and d.dy == pytest.approx(g, abs=1e-8)


@pytest.mark.parametrize("l", [0, 2, -1])
def test_eigenstate_input_shifts_deterministically(l):
    sz = pauli("sigma_z")
    up = basis_state(0, 2)
    sc = ScenarioConfig(sz, sz, up, up, g=0.2, l=l)
    out = couple_and_postselect(sc)
    assert out.prob == pytest.approx(1, abs=1e-12)
    assert np.max(np.abs(out.field.amplitudes - translate(initial_probe(sc), 0.2, 0.2).amplitudes)) < 1e-10


def test_orthogonal_postselection_vanishes():
    sz = pauli("sigma_z")
    sc = ScenarioConfig(sz, sz, basis_state(0, 2), basis_state(1, 2), g=0.1, l=1)
    with pytest.raises(PostSelectionVanished):
        couple_and_postselect(sc)


def test_scenario_validation(zz_ops):
    a, b = zz_ops
    s4 = SystemState.normalized([1, 0, 0, 0])
    with pytest.raises(ValidationError):
        ScenarioConfig(a, b, basis_state(0, 2), s4, g=0.1, l=1)
    with pytest.raises(ValidationError):
        ScenarioConfig(a, b, s4, s4, g=-0.1, l=1)
    with pytest.raises(ValidationError):
        ScenarioConfig(a, b, s4, s4, g=0.1, l=1, hbar=0)


@pytest.mark.parametrize("g", [0.05, 0.5])
def test_coupled_norm_conserved(pauli_zz, g):
    assert coupled_norm(pauli_zz.with_(g=g)) == pytest.approx(1, abs=1e-10)


def test_coupled_norm_noncommuting(rng):
    sc = ScenarioConfig(pauli("sigma_x"), pauli("sigma_y"), random_state(rng, 2), random_state(rng, 2), g=0.4, l=2)
    assert coupled_norm(sc) == pytest.approx(1, abs=1e-10)


def test_prob_stable_under_refinement(pauli_zz):
    coarse = pauli_zz.with_(g=0.1, grid=GridSpec(128, pauli_zz.grid.extent))
    fine = pauli_zz.with_(g=0.1)
    assert couple_and_postselect(coarse).prob == pytest.approx(couple_and_postselect(fine).prob, abs=1e-6)


def test_commuting_case_matches_mixture_of_translated_modes(rng):
    # shared eigenbasis: final probe = sum_k <post|k><k|pre> phi_i(x - g a_k, y - g b_k)
    a_eigs = np.array([1.0, -0.5, 0.3, 2.0])
    b_eigs = np.array([-1.0, 0.7, 1.5, -0.2])
    pre, post = random_state(rng, 4), random_state(rng, 4)
    g, l = 0.4, 2
    grid = GridSpec.for_mode(l)
    sc = ScenarioConfig(Observable(np.diag(a_eigs)), Observable(np.diag(b_eigs)), pre, post, g=g, l=l, grid=grid)
    out = couple_and_postselect(sc)

    x = grid.positions()
    total = 0
    for k in range(4):
        xx, yy = x[:, None] - g * a_eigs[k], x[None, :] - g * b_eigs[k]
        mode = (xx + 1j * yy) ** 2 * np.exp(-(xx**2 + yy**2) / 4)
        total = total + np.conj(post.amplitudes[k]) * pre.amplitudes[k] * mode
    total = total / np.sqrt(np.sum(np.abs(total) ** 2) * grid.spacing**2)
    assert np.max(np.abs(out.field.amplitudes - total)) < 1e-9


def test_swap_and_reflect_invariance(rng):
    a = Observable(np.array([[0.5, 0.2 - 0.1j], [0.2 + 0.1j, -0.3]]))
    b = pauli("sigma_x")
    pre, post = random_state(rng, 2), random_state(rng, 2)
    sc = ScenarioConfig(a, b, pre, post, g=0.15, l=2)
    swapped = sc.with_(a=b, b=a)
    phi = initial_probe(sc)
    d1 = displacement_set(phi, apply_coupling(sc, phi).field)
    phi_r = reflect_diagonal(phi)
    d2 = displacement_set(phi_r, apply_coupling(swapped, phi_r).field)
    assert d2.dx == pytest.approx(d1.dy, abs=1e-12)
    assert d2.dy == pytest.approx(d1.dx, abs=1e-12)
    assert d2.dxy == pytest.approx(d1.dxy, abs=1e-12)
    assert d2.dx2y2h == pytest.approx(-d1.dx2y2h, abs=1e-12)


def test_workers_do_not_change_result(pauli_zz):
    sc = pauli_zz.with_(g=0.07)
    assert np.array_equal(kick_factors(sc, 1), kick_factors(sc, 3))


def test_initial_field_grid_must_match(pauli_zz):
    with pytest.raises(ValidationError):
        apply_coupling(pauli_zz, lg_mode(2, 1.0, GridSpec(128, pauli_zz.grid.extent)))


def test_identity_second_order_shift_is_g_squared():
    for l in (0, 1, 2, -3):
        g = 0.02
        d, _ = simulate_displacements(identity_scenario(g=g, l=l))
        assert d.dxy == pytest.approx(g * g, abs=1e-10)
        assert abs(d.dx2y2h) < 1e-10
