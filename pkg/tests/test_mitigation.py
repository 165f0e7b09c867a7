"""Readout mitigation, transition matrices, and simplex projection."""

import numpy as np
import pytest

from chaincut.counts import CountsTable, Distribution, QuasiDistribution, counts_from_vector
from chaincut.mitigation import (
    MitigationPipeline,
    NumericalError,
    apply_tmem,
    build_transition_matrix,
    mle_project,
    pipeline_for_rep,
    project_to_simplex,
    tmem_product_inverse,
    transition_matrix_to_dict,
)
from chaincut.runner import calibration_counts
from chaincut.sim import apply_readout_to_distribution, sample_counts

import oracles

TABLE_RATES = ((0.950, 0.909), (0.943, 0.910), (0.969, 0.901), (0.922, 0.887))


class TestTransitionMatrix:
    def test_perfect_readout_is_identity(self):
        t = build_transition_matrix(2, "tensor", readout=((1.0, 1.0), (1.0, 1.0)))
        np.testing.assert_array_equal(t.matrix, np.eye(4))

    def test_single_qubit_definition(self):
        t = build_transition_matrix(1, "tensor", readout=((0.95, 0.90),))
        np.testing.assert_allclose(t.matrix, [[0.95, 0.10], [0.05, 0.90]])

    def test_two_qubit_kronecker_vs_entrywise_oracle(self):
        rates = TABLE_RATES[:2]
        t = build_transition_matrix(2, "tensor", readout=rates)
        singles = [
            np.array([[f00, 1 - f11], [1 - f00, f11]]) for f00, f11 in rates
        ]
        for obs in range(4):
            for true in range(4):
                o, t_ = format(obs, "02b"), format(true, "02b")
                want = 1.0
                for q in range(2):
                    want *= singles[q][int(o[q]), int(t_[q])]
                assert t.matrix[obs, true] == pytest.approx(want, abs=1e-15)

    def test_columns_stochastic(self):
        t = build_transition_matrix(4, "tensor", readout=TABLE_RATES)
        np.testing.assert_allclose(t.matrix.sum(axis=0), np.ones(16), atol=1e-12)
        assert t.cond < 10

    def test_full_calibration_estimates_columns(self):
        rng = np.random.default_rng(17)
        calib = calibration_counts(2, TABLE_RATES[:2], 200_000, rng)
        t = build_transition_matrix(2, "full", calib=calib)
        ref = build_transition_matrix(2, "tensor", readout=TABLE_RATES[:2])
        assert np.max(np.abs(t.matrix - ref.matrix)) < 5e-3

    def test_full_calibration_missing_state(self):
        rng = np.random.default_rng(18)
        calib = calibration_counts(2, TABLE_RATES[:2], 1000, rng)
        del calib["11"]
        with pytest.raises(ValueError, match="missing"):
            build_transition_matrix(2, "full", calib=calib)

    def test_singular_matrix_is_hard_error(self):
        with pytest.raises(NumericalError, match="condition number"):
            build_transition_matrix(1, "tensor", readout=((0.5, 0.5),))

    def test_export_shape(self):
        t = build_transition_matrix(1, "tensor", readout=((0.95, 0.9),))
        d = transition_matrix_to_dict(t)
        assert d["n"] == 1 and d["mode"] == "tensor"
        np.testing.assert_allclose(d["matrix"], [[0.95, 0.10], [0.05, 0.90]], atol=1e-15)
        assert d["cond"] == pytest.approx(t.cond)


class TestApplyTmem:
    def test_identity_matrix_returns_normalized_counts(self):
        t = build_transition_matrix(1, "tensor", readout=((1.0, 1.0),))
        counts = CountsTable(1, "Z", {"0": 3, "1": 1}, 4)
        q = apply_tmem(counts, t)
        np.testing.assert_allclose(q.w, [0.75, 0.25])

    def test_exact_pushthrough_recovers_input(self):
        rng = np.random.default_rng(23)
        p = rng.random(16)
        p /= p.sum()
        t = build_transition_matrix(4, "tensor", readout=TABLE_RATES)
        observed = t.matrix @ p
        q = apply_tmem(observed, t)
        assert np.max(np.abs(q.w - p)) <= 1e-12

    def test_monte_carlo_recovery_within_tv_bound(self):
        rng = np.random.default_rng(24)
        p = rng.random(16)
        p /= p.sum()
        t = build_transition_matrix(4, "tensor", readout=TABLE_RATES)
        flipped = apply_readout_to_distribution(p, TABLE_RATES)
        counts = sample_counts(Distribution(4, flipped), 1_000_000, 77)
        rec = mle_project(apply_tmem(counts, t))
        tv = 0.5 * np.sum(np.abs(rec.p - p))
        assert tv <= 5e-3

    def test_weight_sum_preserved(self):
        rng = np.random.default_rng(25)
        t = build_transition_matrix(3, "tensor", readout=TABLE_RATES[:3])
        for _ in range(20):
            vec = rng.multinomial(10_000, np.full(8, 1 / 8))
            counts = counts_from_vector(vec, "ZZZ", 10_000)
            q = apply_tmem(counts, t)
            assert abs(q.w.sum() - 1.0) <= 1e-9

    def test_size_mismatch(self):
        t = build_transition_matrix(2, "tensor", readout=TABLE_RATES[:2])
        with pytest.raises(ValueError):
            apply_tmem(np.ones(8) / 8, t)

    def test_product_inverse_matches_dense(self):
        rng = np.random.default_rng(26)
        p = rng.random(16)
        p /= p.sum()
        t = build_transition_matrix(4, "tensor", readout=TABLE_RATES)
        dense = apply_tmem(p, t).w
        fast = tmem_product_inverse(p, TABLE_RATES)
        np.testing.assert_allclose(fast, dense, atol=1e-12)


class TestMleProject:
    def test_physical_input_is_fixed_point(self):
        q = QuasiDistribution(2, np.array([0.4, 0.3, 0.2, 0.1]))
        np.testing.assert_allclose(mle_project(q).p, q.w, atol=1e-15)

    def test_two_point_closed_form(self):
        q = QuasiDistribution(1, np.array([1.2, -0.2]))
        np.testing.assert_allclose(mle_project(q).p, [1.0, 0.0], atol=1e-15)

    def test_matches_qp_oracle_on_random_inputs(self):
        rng = np.random.default_rng(31)
        worst = 0.0
        for _ in range(200):
            w = rng.normal(0.125, 0.5, size=8)
            w += (1.0 - w.sum()) / 8
            got = mle_project(QuasiDistribution(3, w)).p
            ref = oracles.project_simplex_qp(w)
            worst = max(worst, float(np.max(np.abs(got - ref))))
        assert worst <= 1e-9

    def test_output_in_simplex(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            w = rng.normal(1 / 16, 1.0, size=16)
            w += (1.0 - w.sum()) / 16
            p = mle_project(QuasiDistribution(4, w)).p
            assert np.all(p >= 0.0)
            assert abs(p.sum() - 1.0) < 1e-12

    def test_projection_is_nonexpansive(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            a = rng.normal(0.25, 0.7, size=4)
            b = rng.normal(0.25, 0.7, size=4)
            a += (1.0 - a.sum()) / 4
            b += (1.0 - b.sum()) / 4
            pa, pb = project_to_simplex(a), project_to_simplex(b)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12

    def test_badly_unnormalized_rejected(self):
        # the container itself enforces normalization on construction
        with pytest.raises(ValueError, match="sum"):
            QuasiDistribution(1, np.array([0.9, 0.2]))


class TestPipeline:
    def test_identity_pipeline_on_physical_counts(self):
        pipe = MitigationPipeline({})
        counts = CountsTable(1, "Z", {"0": 9000, "1": 1000}, 10_000)
        np.testing.assert_allclose(pipe.physical(counts).p, [0.9, 0.1], atol=1e-15)

    def test_exact_payload_passthrough(self):
        pipe = MitigationPipeline({})
        d = Distribution(1, np.array([0.7, 0.3]))
        np.testing.assert_allclose(pipe.physical(d).p, d.p, atol=1e-15)

    def test_auto_mode_prefers_full_calibration(self, tmp_path, default_noise):
        from chaincut.runner import write_calibration
        from chaincut.sim import RunConfig

        write_calibration(tmp_path, 0, RunConfig("sampled", shots=50_000, seed=4), default_noise)
        rep = tmp_path / "reps" / "r00"
        pipe = pipeline_for_rep(rep, default_noise.readout, mode="auto")
        assert pipe.matrices[4].mode == "full"
        assert pipe.matrices[3].mode == "full"

    def test_auto_mode_falls_back_to_tensor(self, tmp_path, default_noise):
        pipe = pipeline_for_rep(tmp_path, default_noise.readout, mode="auto")
        assert pipe.matrices[4].mode == "tensor"

    def test_none_mode(self, tmp_path, default_noise):
        pipe = pipeline_for_rep(tmp_path, default_noise.readout, mode="none")
        assert pipe.matrices == {}
