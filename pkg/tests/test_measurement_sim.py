"""
Tests for measurement_sim: setting decompositions, sampling and the plug-in
estimator.
"""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from errors import CoverageError, DomainError
from measurement_sim import (
    MeasurementSetting,
    SampleRecord,
    decompose,
    estimate,
    estimate_exact,
    read_records,
    sample,
    sample_all,
)
from state_engine import GraphSpec, SystemSpec, add_white_noise, build_he_state, dephase, random_density
from witness_factory import DiagonalWitness, build_diagonal, expectation, noise_threshold, parse_witness


class TestDecompose:
    def test_w1_two_settings(self, he2):
        dec = decompose(parse_witness("w1", he2))
        assert [s.bases for s in dec.settings] == ["XXXX", "ZZZZ"]

    def test_setting_counts(self):
        for n in range(1, 7):
            system = SystemSpec.he(n)
            assert decompose(parse_witness("w1", system)).emitted_count == 2
            assert decompose(parse_witness("w2", system)).emitted_count == 2
            assert decompose(parse_witness("w3", system)).emitted_count == 2 ** n
            for j in range(1, n + 1):
                assert decompose(parse_witness(f"wj:{j}", system)).emitted_count == 2

    def test_wtilde_counts(self):
        for n in range(1, 7):
            dec = decompose(parse_witness("wtilde", SystemSpec.he(n)))
            assert dec.naive_count == 3 ** n
            assert dec.xz_count == 2 ** n
            assert dec.emitted_count <= 3 ** n

    def test_per_dof_witness_uses_all_x_and_all_z(self):
        dec = decompose(parse_witness("wj:2", SystemSpec.he(3)))
        assert sorted(s.bases for s in dec.settings) == ["XXXXXX", "ZZZZZZ"]

    def test_all_z_setting_holds_even_generator_products(self):
        dec = decompose(parse_witness("w2", SystemSpec.he(3)))
        z_group = next(g for g in dec.groups if g.setting.bases == "ZZZZZZ")
        even = (0b000010, 0b001000, 0b100000)
        expected = {a | b | c for a in (0, even[0]) for b in (0, even[1]) for c in (0, even[2])} - {0}
        assert {t.mask for t in z_group.terms} == expected

    def test_terms_fit_their_setting(self):
        for system in (SystemSpec.he(2), SystemSpec.of_graph(GraphSpec.path(4))):
            for kind in ("wtilde", "w1", "w2", "w3"):
                for group in decompose(parse_witness(kind, system)).groups:
                    assert all(group.setting.accepts(t.operator()) for t in group.terms)

    def test_resummed_terms_reproduce_eigenvalues(self):
        systems = [SystemSpec.he(2), SystemSpec.he(3), SystemSpec.of_graph(GraphSpec.ring(5))]
        for system in systems:
            for kind in ("wtilde", "w1", "w2", "w3"):
                spec = parse_witness(kind, system)
                dec = decompose(spec)
                masks = [t.mask for g in dec.groups for t in g.terms]
                assert len(masks) == len(set(masks))
                resummed = DiagonalWitness.from_expansion(dec.expansion(), spec.n_qubits, "resummed")
                assert np.allclose(resummed.values(), build_diagonal(spec).values(), atol=1e-12)

    def test_graph_w1_two_colorable(self):
        dec = decompose(parse_witness("w1", SystemSpec.of_graph(GraphSpec.path(4))))
        assert dec.emitted_count == 2


class TestSample:
    def test_z_outcomes_correlated(self, xi2):
        record = sample(xi2, MeasurementSetting(bases="ZZZZ"), 2000, seed=3)
        assert record.shots == 2000
        assert all(o[0] == o[1] and o[2] == o[3] for o in record.counts)

    def test_x_outcomes_even_per_pair(self, xi2):
        record = sample(xi2, MeasurementSetting(bases="XXXX"), 2000, seed=4)
        assert all(o[0] == o[1] and o[2] == o[3] for o in record.counts)

    def test_maximally_mixed_is_uniform(self, xi2):
        rho = add_white_noise(xi2, 1.0)
        record = sample(rho, MeasurementSetting(bases="XZYZ"), 100000, seed=1)
        observed = [record.counts.get(format(b, "04b"), 0) for b in range(16)]
        assert chisquare(observed).pvalue > 0.001

    def test_deterministic_in_seed(self, xi2):
        setting = MeasurementSetting(bases="XZXZ")
        assert sample(xi2, setting, 500, seed=9) == sample(xi2, setting, 500, seed=9)

    def test_zero_shots(self, xi2):
        with pytest.raises(DomainError):
            sample(xi2, MeasurementSetting(bases="ZZZZ"), 0, seed=1)


class TestSampleRecord:
    def test_json_line_round_trip(self, xi2):
        record = sample(xi2, MeasurementSetting(bases="ZZZZ"), 100, seed=2)
        assert SampleRecord.from_json_line(record.to_json_line()) == record
        assert read_records([record.to_json_line(), ""]) == [record]

    def test_counts_must_sum_to_shots(self):
        with pytest.raises(ValidationError):
            SampleRecord(setting="XX", shots=3, counts={"00": 1})

    def test_outcome_length(self):
        with pytest.raises(ValidationError):
            SampleRecord(setting="XX", shots=1, counts={"000": 1})

    def test_bad_setting_letter(self):
        with pytest.raises(ValidationError):
            MeasurementSetting(bases="XQ")


class TestEstimate:
    def test_exact_probabilities_reproduce_expectation(self, he2, example_states):
        _, _, rho_prime = example_states
        states = [rho_prime, add_white_noise(build_he_state(2), 0.3), random_density(4, 2, seed=8)]
        for rho in states:
            for ident in ("wtilde", "w1", "w2", "w3", "wj:1", "wjalt:2", "qudit"):
                spec = parse_witness(ident, he2)
                assert abs(estimate_exact(spec, rho).value - expectation(spec, rho)) < 1e-12

    def test_exact_on_graph_and_larger_he(self):
        system = SystemSpec.of_graph(GraphSpec.path(3))
        rho = random_density(3, 2, seed=4)
        for kind in ("wtilde", "w1", "w2", "w3"):
            spec = parse_witness(kind, system)
            assert abs(estimate_exact(spec, rho).value - expectation(spec, rho)) < 1e-12
        for n in range(1, 4):
            xi = build_he_state(n)
            for kind in ("wtilde", "w1", "w2", "w3"):
                spec = parse_witness(kind, SystemSpec.he(n))
                assert abs(estimate_exact(spec, xi).value + 1) < 1e-12

    def test_w1_on_he_state(self, he2, xi2):
        spec = parse_witness("w1", he2)
        est = estimate(spec, sample_all(xi2, decompose(spec), 100000, seed=42))
        assert abs(est.value + 1) <= 5 * est.stderr + 1e-12

    def test_wtilde_on_rho_prime(self, he2, example_states):
        _, _, rho = example_states
        spec = parse_witness("wtilde", he2)
        est = estimate(spec, sample_all(rho, decompose(spec), 100000, seed=42))
        assert est.stderr > 0
        assert abs(est.value) <= 5 * est.stderr

    def test_missing_setting(self, he2, xi2):
        spec = parse_witness("w1", he2)
        records = sample_all(xi2, decompose(spec), 100, seed=1)
        with pytest.raises(CoverageError):
            estimate(spec, records[:1])

    def test_stderr_shrinks_with_shots(self, he2, xi2):
        spec = parse_witness("w1", he2)
        rho = add_white_noise(xi2, 0.5)
        dec = decompose(spec)
        small = np.mean([estimate(spec, sample_all(rho, dec, 1000, seed=s)).stderr for s in range(30)])
        large = np.mean([estimate(spec, sample_all(rho, dec, 16000, seed=s)).stderr for s in range(30)])
        assert 3.2 < small / large < 4.8

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("kind", ["wtilde", "w1", "w2", "w3"])
    def test_sign_around_threshold(self, kind, n):
        system = SystemSpec.he(n)
        spec = parse_witness(kind, system)
        p_max = float(noise_threshold(spec))
        dec = decompose(spec)
        xi = build_he_state(n)
        below = add_white_noise(xi, max(p_max - 0.1, 0.0))
        above = add_white_noise(xi, min(p_max + 0.1, 1.0))
        below_hits = sum(estimate(spec, sample_all(below, dec, 100000, seed=s)).value < 0 for s in range(100))
        above_hits = sum(estimate(spec, sample_all(above, dec, 100000, seed=s)).value > 0 for s in range(100))
        assert below_hits >= 95
        assert above_hits >= 95

    def test_unbiased_on_stabilizer_diagonal_state(self, he2, xi2):
        rho = dephase(random_density(4, 3, seed=8), he2.stabilizers(), xi2)
        spec = parse_witness("wtilde", he2)
        dec = decompose(spec)
        exact = expectation(spec, rho)
        runs = [estimate(spec, sample_all(rho, dec, 2000, seed=s)) for s in range(200)]
        mean = np.mean([r.value for r in runs])
        combined = np.sqrt(np.sum([r.stderr ** 2 for r in runs])) / len(runs)
        assert abs(mean - exact) <= 3 * combined
