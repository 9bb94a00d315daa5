import math

import numpy as np
import pytest

from becprobe.errors import BadDims, CutoffTooSmall
from becprobe.fock import (FockCutoff, Operator, OscState, State, annihilator,
                           check_density, coherent_cutoff, coherent_state,
                           creator, fidelity, fock_state, identity_op,
                           number_op, partial_trace_oscillator,
                           partial_trace_qubit, tensor, thermal_state)


def test_annihilator_two_level():
    a = annihilator(FockCutoff(1))
    assert np.array_equal(a.mat, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_number_operator_on_fock_states():
    cut = FockCutoff(12)
    a = annihilator(cut)
    num = a.dagger() @ a
    for n in range(12):
        vec = fock_state(n, cut).vector
        assert np.allclose(num.mat @ vec, n * vec)


def test_ladder_commutator_is_identity_below_cutoff():
    cut = FockCutoff(9)
    a, ad = annihilator(cut), creator(cut)
    comm = a.mat @ ad.mat - ad.mat @ a.mat
    # deviation from the identity is confined to the top Fock level
    assert np.allclose(comm[:-1, :-1], np.eye(9))
    assert comm[-1, -1] == pytest.approx(-9.0)


def test_coherent_vacuum():
    s = coherent_state(0.0, FockCutoff(4))
    assert s.vector[0] == pytest.approx(1.0)
    assert np.allclose(s.vector[1:], 0.0)


def test_coherent_mean_occupation():
    cut = FockCutoff(40)
    s = coherent_state(2.0, cut)
    assert s.expectation(number_op(cut)).real == pytest.approx(4.0, abs=1e-6)


def test_coherent_number_variance_poissonian():
    cut = FockCutoff(40)
    s = coherent_state(2.0, cut)
    num = number_op(cut)
    n2 = Operator(num.dims, num.mat @ num.mat)
    var = s.expectation(n2).real - s.expectation(num).real ** 2
    assert var == pytest.approx(4.0, abs=1e-6)


def test_coherent_overlap_against_closed_form():
    # |<alpha | alpha e^{i theta}>| = exp(-|alpha|^2 (1 - cos theta))
    cut = FockCutoff(40)
    for alpha, theta in [(2.0, math.pi), (1.0, math.pi / 2), (1.5, 0.7)]:
        v1 = coherent_state(alpha, cut).vector
        v2 = coherent_state(alpha * np.exp(1j * theta), cut).vector
        expected = math.exp(-alpha ** 2 * (1.0 - math.cos(theta)))
        assert abs(v1.conj() @ v2) == pytest.approx(expected, abs=1e-8)


def test_coherent_cutoff_too_small():
    with pytest.raises(CutoffTooSmall):
        coherent_state(3.0, FockCutoff(10))


def test_thermal_zero_temperature():
    s = thermal_state(0.0, FockCutoff(5))
    assert s.rho[0, 0] == pytest.approx(1.0)


def test_thermal_purity_and_mean():
    cut = FockCutoff(60)
    s = thermal_state(1.0, cut)
    assert s.purity() == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert s.expectation(number_op(cut)).real == pytest.approx(1.0, abs=1e-6)


def test_thermal_cutoff_too_small():
    with pytest.raises(CutoffTooSmall):
        thermal_state(2.0, FockCutoff(3))


def test_tensor_identities():
    t = tensor(identity_op(2), identity_op(3))
    assert t.dims == (2, 3)
    assert np.array_equal(t.mat, np.eye(6))


def test_tensor_trace_multiplicative():
    rng = np.random.default_rng(7)
    for _ in range(3):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        a, b = a + a.conj().T, b + b.conj().T
        prod = np.kron(a, b)
        assert np.trace(prod) == pytest.approx(np.trace(a) * np.trace(b))


def test_tensor_pure_states_stay_pure():
    q = State.from_vector((2,), np.array([1.0, 1.0]) / math.sqrt(2))
    o = coherent_state(1.0, FockCutoff(20))
    s = tensor(q, o)
    assert s.is_pure
    assert s.purity() == pytest.approx(1.0, abs=1e-10)


def test_partial_trace_round_trip():
    q = State.from_vector((2,), np.array([1.0, 1j]) / math.sqrt(2))
    o = thermal_state(1.0, FockCutoff(45))
    s = tensor(State.from_density((2,), q.rho), o)
    back = partial_trace_oscillator(s)
    assert np.allclose(back.rho, q.rho, atol=1e-12)
    osc = partial_trace_qubit(s)
    assert np.allclose(osc.rho, o.rho, atol=1e-12)


def test_partial_trace_maximally_entangled():
    vec = np.zeros(4)
    vec[0] = vec[3] = 1.0 / math.sqrt(2)
    s = State.from_vector((2, 2), vec)
    marg = partial_trace_oscillator(s)
    assert np.allclose(marg.rho, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_bad_dims():
    with pytest.raises(BadDims):
        partial_trace_oscillator(State.from_density((5, 4), np.eye(20) / 20))


def test_fidelity_trivials():
    cut = FockCutoff(20)
    s = coherent_state(1.0, cut)
    assert fidelity(s, s) == pytest.approx(1.0)
    assert fidelity(fock_state(0, cut), fock_state(1, cut)) == pytest.approx(0.0)


def test_fidelity_coherent_pair():
    cut = FockCutoff(25)
    s1 = coherent_state(1.0, cut)
    s2 = coherent_state(1.0j, cut)  # theta = pi/2
    assert fidelity(s1, s2) == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_fidelity_mixed_pair():
    cut = FockCutoff(40)
    a = thermal_state(0.5, cut)
    b = thermal_state(0.5, cut)
    assert fidelity(a, b) == pytest.approx(1.0, abs=1e-8)


def test_check_density_rejects_bad_trace():
    with pytest.raises(Exception):
        check_density(np.eye(2), 1e-10, 1e-12, -1e-8)


def test_oscstate_mixture_weights_validated():
    with pytest.raises(ValueError):
        OscState.mixture([(0.6, 1.0), (0.6, 2.0)])
    with pytest.raises(ValueError):
        OscState.mixture([(-0.5, 1.0), (1.5, 2.0)])


def test_oscstate_realize_matches_direct_construction():
    cut = FockCutoff(40)
    direct = coherent_state(2.0, cut)
    via = OscState.coherent(2.0).realize(cut)
    assert np.allclose(direct.rho, via.rho)
    mix = OscState.mixture([(0.5, 2.0), (0.5, -2.0)]).realize(cut)
    assert mix.trace().real == pytest.approx(1.0, abs=1e-10)
    mix.check()


def test_oscstate_headroom_enforced():
    with pytest.raises(CutoffTooSmall):
        OscState.coherent(4.0).realize(FockCutoff(17))


def test_default_cutoff_always_realizable():
    for alpha in (0.0, 1.0, 3.0, 6.5, 9.0):
        osc = OscState.coherent(alpha)
        osc.realize(osc.default_cutoff())  # must not raise
    cut = coherent_cutoff(6.5)
    assert cut.n_max >= 6.5 ** 2
