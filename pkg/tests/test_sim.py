"""Density simulation, noise channels, sampling, and counts expectations."""

import numpy as np
import pytest

from chaincut.circuit import Circuit, GateOp, build_linear_cluster
from chaincut.counts import (
    CountsTable,
    Distribution,
    QuasiDistribution,
    expectation_from_counts,
)
from chaincut.qstate import PauliString, assert_density_operator, expectation, fidelity_to_pure
from chaincut.sim import (
    NoiseModel,
    apply_readout_to_distribution,
    measure_distribution,
    rng_for,
    run_exact,
    sample_counts,
)

import oracles


def chain_stabilizers(n):
    out = []
    for i in range(1, n + 1):
        letters = ["I"] * n
        letters[i - 1] = "X"
        if i > 1:
            letters[i - 2] = "Z"
        if i < n:
            letters[i] = "Z"
        out.append(PauliString("".join(letters)))
    return out


class TestRunExact:
    def test_cluster_state_stabilizers(self):
        rho = run_exact(build_linear_cluster(3), None)
        assert_density_operator(rho)
        for s in chain_stabilizers(3):
            assert expectation(rho, s) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_noiseless_stabilizers_up_to_five(self, n):
        rho = run_exact(build_linear_cluster(n), None)
        for s in chain_stabilizers(n):
            assert expectation(rho, s) == pytest.approx(1.0, abs=1e-12)

    def test_full_depolarization_gives_maximally_mixed(self):
        c = Circuit(1, (GateOp("H", (0,)),), "Z")
        rho = run_exact(c, NoiseModel(p1=1.0, p2=0.0, readout=None))
        np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-14)

    def test_noisy_cluster_matches_kraus_composition_oracle(self):
        c = build_linear_cluster(4)
        p1, p2 = 0.0007, 0.015
        rho = run_exact(c, NoiseModel(p1=p1, p2=p2, readout=None))
        ref = oracles.noisy_density(c, p1, p2)
        np.testing.assert_allclose(rho, ref, atol=1e-12)
        psi = oracles.statevector(c)
        assert fidelity_to_pure(rho, psi) == pytest.approx(
            fidelity_to_pure(ref, psi), abs=1e-12
        )

    def test_zero_noise_is_bit_identical_to_noiseless(self):
        c = build_linear_cluster(3)
        silent = NoiseModel(p1=0.0, p2=0.0, readout=None)
        assert np.array_equal(run_exact(c, silent), run_exact(c, None))

    def test_register_cap(self):
        with pytest.raises(ValueError, match="exceeds"):
            run_exact(build_linear_cluster(9), None)

    def test_noisy_block_with_prep_matches_oracle(self):
        from chaincut.circuit import build_block_subcircuit

        c = build_block_subcircuit("4q", "Ym", "XZXY")
        rho = run_exact(c, NoiseModel(p1=0.002, p2=0.03, readout=None))
        np.testing.assert_allclose(rho, oracles.noisy_density(c, 0.002, 0.03), atol=1e-12)


class TestMeasureDistribution:
    def test_ground_state(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        np.testing.assert_allclose(measure_distribution(rho, "Z").p, [1.0, 0.0])

    def test_lc2_xz_matches_oracle(self):
        c = build_linear_cluster(2)
        rho = run_exact(c, None)
        got = measure_distribution(rho, "XZ").p
        ref = oracles.measured_distribution(oracles.statevector(c), "XZ")
        np.testing.assert_allclose(got, ref, atol=1e-13)

    def test_lc4_xzxz_matches_oracle(self):
        c = build_linear_cluster(4)
        rho = run_exact(c, None)
        got = measure_distribution(rho, "XZXZ").p
        ref = oracles.measured_distribution(oracles.statevector(c), "XZXZ")
        np.testing.assert_allclose(got, ref, atol=1e-13)

    def test_normalized_and_nonnegative_under_noise(self):
        rho = run_exact(build_linear_cluster(4), NoiseModel(p1=0.01, p2=0.05, readout=None))
        for meas in ("XZXZ", "ZXZX", "YYYY"):
            p = measure_distribution(rho, meas).p
            assert abs(p.sum() - 1.0) < 1e-12
            assert np.all(p >= 0.0)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            measure_distribution(np.eye(2) / 2, "ZZ")


class TestSampleCounts:
    def test_deterministic_outcome(self):
        d = Distribution(1, np.array([1.0, 0.0]))
        t = sample_counts(d, 1000, 5)
        assert t.counts == {"0": 1000}

    def test_binomial_within_five_sigma(self):
        d = Distribution(1, np.array([0.5, 0.5]))
        t = sample_counts(d, 1_000_000, 42)
        sigma = np.sqrt(1_000_000 * 0.25)
        assert abs(t.counts["0"] - 500_000) < 5 * sigma

    def test_readout_flip_rate_within_five_sigma(self):
        d = Distribution(1, np.array([1.0, 0.0]))
        t = sample_counts(d, 1_000_000, 9, readout=((0.95, 0.9),))
        sigma = np.sqrt(1_000_000 * 0.05 * 0.95)
        assert abs(t.counts.get("1", 0) - 50_000) < 5 * sigma

    def test_reproducible_for_fixed_seed(self):
        d = Distribution(2, np.array([0.4, 0.3, 0.2, 0.1]))
        kwargs = dict(shots=10_000, readout=((0.95, 0.9), (0.97, 0.92)))
        a = sample_counts(d, seed_or_rng=77, **kwargs)
        b = sample_counts(d, seed_or_rng=77, **kwargs)
        assert a == b

    def test_shots_validated(self):
        d = Distribution(1, np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            sample_counts(d, 0, 1)

    def test_readout_matches_exact_distribution_action(self):
        rng = np.random.default_rng(13)
        p = rng.random(8)
        p /= p.sum()
        readout = ((0.95, 0.9), (0.93, 0.91), (0.96, 0.9))
        flipped = apply_readout_to_distribution(p, readout)
        t = sample_counts(Distribution(3, p), 2_000_000, 3, readout=readout)
        np.testing.assert_allclose(t.frequencies(), flipped, atol=2e-3)


class TestExpectationFromCounts:
    def test_identity_is_normalization(self):
        t = CountsTable(2, "XZ", {"00": 3, "11": 5}, 8)
        assert expectation_from_counts(t, "II") == pytest.approx(1.0)

    def test_lc4_stabilizer_from_exact_distribution(self):
        rho = run_exact(build_linear_cluster(4), None)
        d = measure_distribution(rho, "XZXZ")
        assert expectation_from_counts(d, "XZII", "XZXZ") == pytest.approx(1.0, abs=1e-12)
        assert expectation_from_counts(d, "XIXZ", "XZXZ") == pytest.approx(1.0, abs=1e-12)

    def test_quasi_distribution_identity_preserved(self):
        q = QuasiDistribution(1, np.array([1.2, -0.2]))
        assert expectation_from_counts(q, "II"[:1], "Z") == pytest.approx(1.0)

    def test_basis_incompatibility_rejected(self):
        t = CountsTable(2, "XZ", {"00": 1}, 1)
        with pytest.raises(ValueError, match="incompatible"):
            expectation_from_counts(t, "ZI")

    def test_parity_value(self):
        t = CountsTable(2, "ZZ", {"01": 1, "10": 1}, 2)
        assert expectation_from_counts(t, "ZZ") == pytest.approx(-1.0)


class TestRng:
    def test_stream_separation(self):
        a = rng_for(1, 0, 0).integers(0, 1 << 30, 4)
        b = rng_for(1, 0, 1).integers(0, 1 << 30, 4)
        c = rng_for(1, 0, 0).integers(0, 1 << 30, 4)
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, c)

    def test_noise_model_readout_slicing(self):
        nm = NoiseModel()
        assert nm.readout_for(4) == nm.readout
        assert nm.readout_for(3) == nm.readout[1:]
        assert len(nm.readout_for(12)) == 12
        assert nm.readout_for(12)[4] == nm.readout[0]
