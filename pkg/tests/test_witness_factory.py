"""
Tests for witness_factory: the three witness forms, traces, thresholds,
certificates and detection.
"""
from fractions import Fraction

import numpy as np
import pytest

from errors import DomainError, RepresentationError, ResolutionError
from state_engine import (
    GraphSpec,
    SystemSpec,
    add_white_noise,
    build_he_state,
    random_density,
    stabilizer_basis,
)
from witness_factory import (
    DiagonalWitness,
    build_dense,
    build_diagonal,
    certify_witness,
    closed_form_trace,
    detect_hyperentanglement,
    expansion,
    expectation,
    expectation_diagonal,
    make_witness,
    noise_sweep,
    noise_threshold,
    noisy_expectation,
    parse_witness,
    table_threshold_printed,
    threshold_discrepancy,
    trace,
    trace_report,
)

NORMALIZED = ("wtilde", "w1", "w2", "w3")


def he_witnesses(n):
    system = SystemSpec.he(n)
    ids = list(NORMALIZED) + [f"wj:{j}" for j in range(1, n + 1)] + [f"wjalt:{j}" for j in range(1, n + 1)]
    return [parse_witness(i, system) for i in ids]


class TestWitnessSpec:
    def test_parse(self, he2):
        assert parse_witness("wj:2", he2).j == 2
        assert parse_witness("W3", he2).kind == "w3"
        assert parse_witness("qudit", he2).identifier == "qudit"

    def test_unknown_identifier(self, he2):
        with pytest.raises(ResolutionError):
            parse_witness("w9", he2)
        with pytest.raises(ResolutionError):
            parse_witness("wj", he2)

    def test_kind_system_mismatch(self, he2):
        with pytest.raises(RepresentationError):
            parse_witness("wj:3", he2)
        with pytest.raises(RepresentationError):
            make_witness("wj", SystemSpec.of_graph(GraphSpec.path(4)), j=1)
        with pytest.raises(RepresentationError):
            make_witness("qudit", SystemSpec.of_graph(GraphSpec.path(4)))


class TestNormalization:
    """<Xi|W|Xi> = -1 for every normalized kind."""

    def test_diagonal(self):
        for n in range(1, 7):
            for spec in he_witnesses(n):
                assert build_diagonal(spec).value(0) == -1

    def test_dense(self):
        for n in range(1, 5):
            xi = build_he_state(n)
            for spec in he_witnesses(n):
                assert abs(expectation(spec, xi) + 1) < 1e-12

    def test_qudit_exempt(self, he2, xi2):
        spec = parse_witness("qudit", he2)
        assert abs(expectation(spec, xi2) - (0.25 - 1)) < 1e-12
        assert build_diagonal(spec).value(0) == Fraction(-3, 4)


class TestDiagonal:
    def test_w3_lowest_eigenvalues(self):
        for n in (1, 2, 3):
            diag = build_diagonal(parse_witness("w3", SystemSpec.he(n)))
            assert diag.value(0) == -1
            for k in range(2 * n):
                assert diag.value(1 << k) == 1

    def test_wtilde_is_one_off_zero(self):
        diag = build_diagonal(parse_witness("wtilde", SystemSpec.he(3)))
        assert np.all(diag.values()[1:] == 1)

    def test_matches_dense_in_stabilizer_basis(self, he2, xi2):
        basis = stabilizer_basis(he2.stabilizers(), xi2)
        for spec in he_witnesses(2) + [parse_witness("qudit", he2)]:
            rotated = basis.conj().T @ build_dense(spec) @ basis
            assert np.allclose(rotated, np.diag(build_diagonal(spec).values()), atol=1e-10)

    def test_matches_dense_on_graphs(self):
        for g in (GraphSpec.path(4), GraphSpec.star(4), GraphSpec.ring(5)):
            system = SystemSpec.of_graph(g)
            basis = stabilizer_basis(system.stabilizers(), system.reference_state())
            for kind in NORMALIZED:
                spec = parse_witness(kind, system)
                rotated = basis.conj().T @ build_dense(spec) @ basis
                assert np.allclose(rotated, np.diag(build_diagonal(spec).values()), atol=1e-10)

    def test_expansion_resums_to_closed_form(self):
        systems = [SystemSpec.he(2), SystemSpec.he(3), SystemSpec.of_graph(GraphSpec.path(5))]
        for system in systems:
            for kind in NORMALIZED:
                spec = parse_witness(kind, system)
                resummed = DiagonalWitness.from_expansion(expansion(spec), spec.n_qubits, "resummed")
                assert np.allclose(resummed.values(), build_diagonal(spec).values(), atol=1e-12)

    def test_bit_string_out_of_range(self, he2):
        with pytest.raises(DomainError):
            build_diagonal(parse_witness("w1", he2)).value(16)


class TestTrace:
    def test_known_values(self, he2):
        assert trace(parse_witness("wtilde", he2)) == 14
        assert trace(parse_witness("w3", he2)) == Fraction(80, 3)
        assert trace(parse_witness("w1", he2)) == 48
        assert trace(parse_witness("w2", he2)) == 32

    def test_three_routes_agree(self):
        systems = [SystemSpec.he(n) for n in range(1, 5)]
        systems += [SystemSpec.of_graph(GraphSpec.path(n)) for n in (3, 5, 7)]
        for system in systems:
            for kind in NORMALIZED:
                result = trace_report(parse_witness(kind, system))
                assert result.bitstring_sum == result.closed_form
                assert result.dense is not None

    def test_large_n_bit_string_sums(self):
        for n in (9, 10, 11, 12):
            system = SystemSpec.he(n // 2) if n % 2 == 0 else SystemSpec.of_graph(GraphSpec.path(n))
            for kind in NORMALIZED:
                result = trace_report(parse_witness(kind, system))
                assert result.bitstring_sum == result.closed_form
                assert result.dense is None

    def test_trace_is_dimension_times_identity_coefficient(self):
        for kind in NORMALIZED:
            spec = parse_witness(kind, SystemSpec.he(3))
            assert closed_form_trace(spec) == spec.dim * expansion(spec)[0]


class TestThreshold:
    def test_known_values(self, he2):
        assert noise_threshold(parse_witness("w1", he2)) == Fraction(1, 4)
        assert noise_threshold(parse_witness("w3", he2)) == Fraction(3, 8)
        assert noise_threshold(parse_witness("wtilde", he2)) == Fraction(8, 15)
        assert noise_threshold(parse_witness("w2", he2)) == Fraction(1, 3)

    def test_w1_is_one_over_n(self):
        for n in range(1, 6):
            assert noise_threshold(parse_witness("w1", SystemSpec.he(n))) == Fraction(1, 2 * n)

    def test_printed_cells(self):
        for n in (2, 3, 4, 5):
            for system in (SystemSpec.he(n), SystemSpec.of_graph(GraphSpec.path(2 * n + 1))):
                for kind in NORMALIZED:
                    spec = parse_witness(kind, system)
                    if kind == "w2" and system.n_qubits % 2:
                        continue
                    assert table_threshold_printed(spec) == noise_threshold(spec)

    def test_odd_w2_discrepancy(self):
        spec = parse_witness("w2", SystemSpec.of_graph(GraphSpec.path(5)))
        assert noise_threshold(spec) == Fraction(4, 13)
        assert table_threshold_printed(spec) == Fraction(8, 29)
        assert "4/13" in threshold_discrepancy(spec)

    def test_sign_change_at_threshold(self):
        for n in (2, 3):
            for spec in he_witnesses(n):
                p_max = noise_threshold(spec)
                assert noisy_expectation(spec, p_max) == 0
                assert noisy_expectation(spec, p_max - Fraction(1, 100)) < 0
                assert noisy_expectation(spec, p_max + Fraction(1, 100)) > 0


class TestExpectation:
    def test_two_dof_example_values(self, he2, example_states):
        psi1, psi2, rho = example_states
        w1, w2 = parse_witness("wj:1", he2), parse_witness("wj:2", he2)
        assert abs(expectation(w2, psi1) + 1) < 1e-12
        assert abs(expectation(w1, psi2) + 1) < 1e-12
        assert abs(expectation(w1, psi1)) < 1e-12
        assert abs(expectation(w2, psi2)) < 1e-12
        assert abs(expectation(w1, rho) + 0.5) < 1e-12
        assert abs(expectation(w2, rho) + 0.5) < 1e-12
        assert abs(expectation(parse_witness("wtilde", he2), rho)) < 1e-12

    def test_noisy_closed_form(self, he2, xi2):
        spec = parse_witness("wtilde", he2)
        assert noisy_expectation(spec, 0.4) == Fraction(-1, 4)
        assert abs(expectation(spec, add_white_noise(xi2, 0.4)) + 0.25) < 1e-12
        w1 = parse_witness("w1", he2)
        assert noisy_expectation(w1, 0.25) == 0

    def test_closed_form_matches_dense(self):
        for n in (1, 2, 3):
            xi = build_he_state(n)
            for spec in he_witnesses(n):
                for p in (0.1, 0.5, 0.9):
                    dense = expectation(spec, add_white_noise(xi, p))
                    assert abs(float(noisy_expectation(spec, p)) - dense) < 1e-12

    def test_diagonal_form_agrees_with_dense(self, he2):
        for seed in range(3):
            rho = random_density(4, 3, seed=seed)
            for spec in he_witnesses(2):
                assert abs(expectation_diagonal(spec, rho) - expectation(spec, rho)) < 1e-10

    def test_noise_sweep(self, he2):
        points = noise_sweep(parse_witness("w1", he2), ["0", "0.25", "1"], dense=True)
        assert [p.exact for p in points] == ["-1", "0", "3"]
        assert all(abs(p.dense - p.value) < 1e-12 for p in points)


class TestCertify:
    def test_w3_reproduces_lowest_eigenvalues(self):
        for n in range(1, 7):
            cert = certify_witness(parse_witness("w3", SystemSpec.he(n)), 1)
            assert cert.valid
            assert cert.min_value == "0"
            assert cert.value_at_zero == "0"
            assert cert.min_single_bit == "0"
            assert cert.argmin == "0" * 2 * n

    def test_c0_and_alpha_parameters(self):
        cert = certify_witness(make_witness("w3", SystemSpec.he(2), c0=3), Fraction(3, 2))
        # lambda_1 = c0 - 3 + alpha, lambda_2 = c0 - 1 - alpha
        assert cert.value_at_zero == "3/2"
        assert cert.min_single_bit == "1/2"

    def test_he_witnesses_pass(self):
        for n in range(1, 7):
            for kind in ("w1", "w2", "w3"):
                assert certify_witness(parse_witness(kind, SystemSpec.he(n))).valid

    def test_graph_witnesses_pass(self, graph_systems):
        for system in graph_systems:
            for kind in ("w1", "w2", "w3"):
                assert certify_witness(parse_witness(kind, system)).valid, (kind, system.label())

    def test_wtilde_against_itself(self):
        cert = certify_witness(parse_witness("wtilde", SystemSpec.he(3)))
        assert cert.min_value == "0" and cert.valid

    def test_per_dof_witness_fails(self, he2):
        assert not certify_witness(parse_witness("wj:1", he2)).valid

    def test_explicit_diagonal_form(self, he2):
        spec = parse_witness("w1", he2)
        diag = DiagonalWitness.from_expansion(expansion(spec), 4, "W1 expansion")
        assert certify_witness(diag, 1, system=he2).min_value == certify_witness(spec, 1).min_value

    def test_representation_mismatch(self, he2):
        diag = build_diagonal(parse_witness("w1", SystemSpec.of_graph(GraphSpec.path(3))))
        with pytest.raises(RepresentationError):
            certify_witness(diag, 1, system=he2)

    def test_alpha_must_be_positive(self, he2):
        with pytest.raises(DomainError):
            certify_witness(parse_witness("w1", he2), 0)


class TestDetection:
    def test_he_state_detected(self, he2, xi2):
        report = detect_hyperentanglement(xi2, parse_witness("wtilde", he2))
        assert report.detected
        assert np.allclose(report.per_dof, [-1, -1])

    def test_rho_prime_not_detected(self, he2, example_states):
        _, _, rho = example_states
        report = detect_hyperentanglement(rho, parse_witness("wtilde", he2))
        assert not report.detected
        assert report.verdict == "not detected"
        assert np.allclose(report.per_dof, [-0.5, -0.5])

    def test_example_vectors_not_detected(self, he2, example_states):
        psi1, psi2, _ = example_states
        for psi in (psi1, psi2):
            assert not detect_hyperentanglement(psi, parse_witness("wtilde", he2)).detected

    def test_noisy_state_detected(self, he2, xi2):
        report = detect_hyperentanglement(add_white_noise(xi2, 0.4), parse_witness("wtilde", he2))
        assert report.detected
        assert abs(report.main_value + 0.25) < 1e-12

    def test_graph_system_rejected(self):
        system = SystemSpec.of_graph(GraphSpec.path(4))
        with pytest.raises(RepresentationError):
            detect_hyperentanglement(system.reference_state(), parse_witness("w1", system))
