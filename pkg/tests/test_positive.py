import numpy as np

from conftest import HADAMARD, interval
from gbfpos import positive as pos
from gbfpos.amplitude import amplitude_as_observable, check_T5b_and_solve_anomaly
from gbfpos.krein import GradedKreinSpace
from gbfpos.library import (FermionicToyConfig, IntervalTheoryConfig, build_fermionic_toy,
                            build_interval_theory, disjoint_union, haar_unitary, random_config)
from gbfpos.spacetime import Hypersurface, SpacetimeSystem
from gbfpos.suite import run_suite
from gbfpos.theory import ObservableMap, Theory


def test_one_dimensional_boundary_modulus_squared():
    U = np.diag([np.exp(0.4j), np.exp(-1.3j)])
    t = interval(U)
    a = t.amplitude("C1").coeffs[0]
    assert abs(pos.probability_map(t, "C1")([1.0]) - abs(a) ** 2) < 1e-14


def test_identity_evolution_full_trace(qubit_identity):
    D = qubit_identity.doubled("dI1")
    A = pos.probability_map(qubit_identity, "I1")
    assert abs(A(D.tensor_from_op(np.eye(4))) - 2) < 1e-14


def test_probability_map_dagger_symmetry(krein_toy, rng):
    D = krein_toy.doubled("dI1")
    A = pos.probability_map(krein_toy, "I1")
    for _ in range(20):
        S = pos.random_element(D, rng, 0)
        assert abs(A(D.dagger(S)) - np.conj(A(S))) < 1e-12


def test_expectation_of_amplitude_is_probability_map(krein_toy):
    e = pos.expectation_map(krein_toy, amplitude_as_observable(krein_toy, "I1"))
    np.testing.assert_array_equal(e.coeffs, pos.probability_map(krein_toy, "I1").coeffs)


def test_boundary_observable_direct_sum(rng):
    t = interval(haar_unitary(2, rng))
    rho = t.amplitude("I1").coeffs
    Q = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    obs = ObservableMap("Q", "I1", rho @ Q, None)
    V = np.linalg.qr(rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)))[0]
    P = V @ V.conj().T
    D = t.doubled("dI1")
    got = pos.expectation_map(t, obs)(D.tensor_from_op(P))
    want = sum(np.conj(rho[n]) * (rho @ Q @ P[:, n]) for n in range(4))
    assert abs(got - want) < 1e-12


def test_odd_observable_vanishes_on_superselected_projector(fermionic_toy, rng):
    t = fermionic_toy
    D = t.doubled("dI1")
    sp = t.hspace("dI1")
    even = np.flatnonzero(sp.fdeg_array == 0)
    V = np.zeros((sp.dim, 2), dtype=complex)
    V[even] = np.linalg.qr(rng.normal(size=(len(even), 2)) + 0j)[0]
    P = V @ V.conj().T
    for o in t.observables_on("I1"):
        if o.fdeg == 1:
            assert abs(pos.expectation_map(t, o)(D.tensor_from_op(P))) < 1e-14


def test_operator_sum_agrees_with_tensor_form(krein_toy, rng):
    D = krein_toy.doubled("dI1")
    A = pos.probability_map(krein_toy, "I1")
    for _ in range(20):
        S = pos.random_element(D, rng)
        assert abs(pos.operator_sum(krein_toy, "I1", S) - A(S)) < 1e-10


# slice, union, self-gluing -------------------------------------------------

def test_P3x_canonical(qubit_hadamard, krein_toy):
    assert pos.check_P3x(qubit_hadamard, "Slice:pt").max_deviation <= 1e-12
    r = pos.check_P3x(krein_toy, "Slice:pt")
    assert r.passed and r.details["variant"] == "general"


def test_P3x_perturbed(qubit_hadamard):
    c = qubit_hadamard.amplitude("Slice:pt").coeffs.copy()
    c[0] *= 1.001
    assert not pos.check_P3x(qubit_hadamard.with_amplitude("Slice:pt", c), "Slice:pt").passed


def test_P5a_product(rng):
    t = disjoint_union(interval(haar_unitary(2, rng)), build_fermionic_toy(FermionicToyConfig()))
    r = pos.check_P5a(t, "union:I1+b.I1")
    assert r.passed and r.max_deviation <= 1e-12


def test_P5a_zero_element(rng):
    t = disjoint_union(interval(haar_unitary(2, rng)), interval(haar_unitary(2, rng)))
    D2 = t.doubled("b.dI1")
    s = pos.tau_star(t, [np.zeros(16), pos.random_element(D2, rng)], ("dI1", "b.dI1"), "dI1+b.I1")
    assert pos.probability_map(t, "I1+b.I1")(s) == 0


def test_tau_star_preserves_positivity(rng):
    t = disjoint_union(build_fermionic_toy(FermionicToyConfig(sig=(0, 1))),
                       build_fermionic_toy(FermionicToyConfig(seed=9)))
    D1, D2, Dw = t.doubled("dI1"), t.doubled("b.dI1"), t.doubled("dI1+b.I1")
    for _ in range(20):
        s = pos.tau_star(t, [pos.random_positive(D1, rng), pos.random_positive(D2, rng)],
                         ("dI1", "b.dI1"), "dI1+b.I1")
        M = Dw.op_from_tensor(s)
        assert np.linalg.eigvalsh((M + M.conj().T) / 2).min() >= -1e-10


def test_P5b_qubit_circle_trace_squared(rng):
    U = haar_unitary(2, rng)
    t = interval(U)
    D = t.doubled("dI1")
    K = pos._positive_gluing_kernel(t, "circle1")
    glued = pos._contract_gluing(t, "circle1", pos.probability_map(t, "I1").coeffs, K)
    assert abs(glued[0] - abs(np.trace(U)) ** 2) < 1e-12
    assert abs(pos.probability_map(t, "C1")([1.0]) - abs(np.trace(U)) ** 2) < 1e-12
    assert D.dim == 16


def test_P5b_abs_c_squared_consistent():
    t = build_interval_theory(IntervalTheoryConfig(2, [np.diag([1, 1j])], circle_anomaly=0.5 + 1j))
    r = pos.check_P5b(t, "circle1")
    _, c, _ = check_T5b_and_solve_anomaly(t, "circle1")
    assert r.passed
    assert abs(r.details["abs_c_squared_positive_level"] - abs(c) ** 2) <= 1e-10


def test_P5b_needs_signature_factor():
    t = build_fermionic_toy(FermionicToyConfig(sig=(0, 1)))
    assert pos.check_P5b(t, "circle1").passed
    assert not pos.check_P5b(t, "circle1", signature=False).passed


def test_P1_P2_on_library_theories(rng):
    for fermionic in (False, True):
        t = build_interval_theory(random_config(rng, n=2, fermionic=fermionic))
        res = [r for r in run_suite(t, ("P",)) if r.check in ("P1", "P1b", "P2")]
        assert res and all(r.passed for r in res)


def test_P1_single_negative_direction():
    t = build_interval_theory(IntervalTheoryConfig(3, [np.eye(3)], sig=(0, 0, 1)))
    assert pos.check_P1(t, "pt").passed


def test_P_suite_vacuous_without_decompositions():
    sp = GradedKreinSpace.create(dim=2)
    t = Theory(SpacetimeSystem().with_hypersurface(Hypersurface("x", ("a",))), {"a": sp})
    res = run_suite(t, ("P",))
    assert all(r.check in ("P1", "P1b") for r in res)
    assert all(r.passed for r in res)


# expectation maps ----------------------------------------------------------

def test_E2a_with_amplitudes_reduces_to_P5a():
    t = disjoint_union(build_fermionic_toy(FermionicToyConfig(seed=1)),
                       build_fermionic_toy(FermionicToyConfig(seed=2)))
    r = pos.check_E2a(t, "union:I1+b.I1")
    assert r.passed and r.details["odd_odd_pairs"] > 0
    assert pos.check_P5a(t, "union:I1+b.I1").passed


def test_E2b_signature_needed_for_krein_toy(krein_toy):
    assert pos.check_E2b(krein_toy, "circle1").passed
    assert not pos.check_E2b(krein_toy, "circle1", signature=False).passed


def test_expectation_orientation_relation(krein_toy):
    r = pos.check_expmor(krein_toy, "I1~")
    assert r.passed and r.details["observables"] >= 3


def test_E1(qubit_hadamard):
    assert pos.check_E1(qubit_hadamard, "I1").max_deviation == 0


# invariants ----------------------------------------------------------------

def test_phase_erasure(krein_toy, rng):
    D = krein_toy.doubled("dI1")
    A = pos.probability_map(krein_toy, "I1")
    t2 = krein_toy.with_amplitude("I1", np.exp(2.1j) * krein_toy.amplitude("I1").coeffs)
    B = pos.probability_map(t2, "I1")
    np.testing.assert_allclose(A.coeffs, B.coeffs, atol=1e-12)
    S = pos.random_element(D, rng)
    assert abs(A(S) - B(S)) < 1e-12


def test_positive_and_real_on_many_samples(rng):
    for t in (interval(HADAMARD), build_fermionic_toy(FermionicToyConfig(d=3, fdeg=(0, 1, 1),
                                                                         sig=(1, 0, 1)))):
        D = t.doubled("dI1")
        A = pos.probability_map(t, "I1")
        for _ in range(300):
            assert A(pos.random_positive(D, rng, "even")).real >= -1e-10
            assert abs(A(pos.random_self_adjoint(D, rng, "even")).imag) <= 1e-10


def test_full_suite_passes_on_toys(fermionic_toy, krein_toy):
    for t in (fermionic_toy, krein_toy):
        bad = [r for r in run_suite(t) if not r.passed]
        assert bad == []
