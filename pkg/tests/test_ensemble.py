"""Ensemble specs, member configuration, presets, and generation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from topicuq.corpus import build_matrix
from topicuq.ensemble import Ensemble, EnsembleSpec, TopicRef, generate, preset
from topicuq.lda import LdaConfig


BASE = LdaConfig(k=4, iterations=10, seed=0)


class TestEnsembleSpec:
    def test_sampling_seeds_increment(self):
        spec = EnsembleSpec(mode="sampling", base_config=BASE, members=3, base_seed=7)
        assert [spec.member_config(i).seed for i in range(3)] == [7, 8, 9]
        assert all(spec.member_config(i).k == 4 for i in range(3))

    def test_pin_seed_holds_seed_constant(self):
        spec = EnsembleSpec(
            mode="vary_beta", base_config=BASE, members=3,
            parameter_values=(0.01, 0.1, 0.2), base_seed=5, pin_seed=True,
        )
        assert [spec.member_config(i).seed for i in range(3)] == [5, 5, 5]

    def test_vary_alpha_substitutes_values(self):
        spec = EnsembleSpec(
            mode="vary_alpha", base_config=BASE, members=3,
            parameter_values=(0.1, 0.5, 2.0),
        )
        assert [spec.member_config(i).alpha for i in range(3)] == [0.1, 0.5, 2.0]
        assert all(spec.member_config(i).beta == BASE.beta for i in range(3))

    def test_vary_k_keeps_alpha_multiple(self):
        # base alpha = 5/k, so every member keeps alpha * k = 5.
        spec = EnsembleSpec(
            mode="vary_k", base_config=LdaConfig(k=20, iterations=10),
            members=3, parameter_values=(10, 20, 40),
        )
        for i, k in enumerate((10, 20, 40)):
            config = spec.member_config(i)
            assert config.k == k
            assert config.alpha * k == pytest.approx(5.0)

    def test_sampling_rejects_parameter_values(self):
        with pytest.raises(ValueError):
            EnsembleSpec(mode="sampling", base_config=BASE, members=2,
                         parameter_values=(0.1, 0.2))

    def test_vary_requires_strictly_increasing_values(self):
        with pytest.raises(ValueError):
            EnsembleSpec(mode="vary_beta", base_config=BASE, members=3,
                         parameter_values=(0.1, 0.1, 0.2))
        with pytest.raises(ValueError):
            EnsembleSpec(mode="vary_beta", base_config=BASE, members=2,
                         parameter_values=(0.1,))

    def test_rejects_unknown_mode_and_small_ensembles(self):
        with pytest.raises(ValueError):
            EnsembleSpec(mode="bootstrap", base_config=BASE, members=2)
        with pytest.raises(ValueError):
            EnsembleSpec(mode="sampling", base_config=BASE, members=1)


class TestPresets:
    def test_e1_is_sampling(self):
        spec = preset("E1", k=20, members=10, iterations=50)
        assert spec.mode == "sampling"
        assert spec.members == 10
        assert spec.base_config.alpha == pytest.approx(0.25)
        assert spec.base_config.beta == 0.01

    def test_e2_is_import_only(self):
        with pytest.raises(ValueError, match="import"):
            preset("E2")

    def test_e3_alpha_range(self):
        spec = preset("E3", k=20, members=10, iterations=50)
        assert spec.mode == "vary_alpha"
        values = spec.parameter_values
        assert values[0] == pytest.approx(0.5 / 20)
        assert values[-1] == pytest.approx(20 / 20)
        ratios = [b / a for a, b in zip(values, values[1:])]
        assert_allclose(ratios, ratios[0], rtol=1e-9)

    def test_e4_beta_range(self):
        spec = preset("E4", members=10, iterations=50)
        assert spec.mode == "vary_beta"
        assert spec.parameter_values[0] == pytest.approx(0.01)
        assert spec.parameter_values[-1] == pytest.approx(0.23)
        diffs = np.diff(spec.parameter_values)
        assert_allclose(diffs, diffs[0], rtol=1e-9)

    def test_e5_topic_counts(self):
        spec = preset("E5", members=10, iterations=50)
        assert spec.mode == "vary_k"
        assert list(spec.parameter_values) == [20, 23, 27, 30, 33, 37, 40, 43, 47, 50]
        assert sum(spec.parameter_values) == 350

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            preset("E9")


class TestGenerate:
    def test_generate_shapes_and_doc_ids(self, tiny_documents):
        vocabulary, matrix = build_matrix(tiny_documents)
        spec = EnsembleSpec(mode="sampling", base_config=LdaConfig(k=2, iterations=20),
                            members=3)
        ensemble = generate(matrix, spec, vocabulary)
        assert len(ensemble.members) == 3
        assert ensemble.total_topics == 6
        assert ensemble.doc_ids == [d.id for d in tiny_documents]
        assert ensemble.has_theta
        assert [m.model_id for m in ensemble.members] == [0, 1, 2]

    def test_generate_is_deterministic_and_parallel_identical(self, tiny_documents):
        vocabulary, matrix = build_matrix(tiny_documents)
        spec = EnsembleSpec(mode="sampling", base_config=LdaConfig(k=2, iterations=20),
                            members=3, base_seed=2)
        serial = generate(matrix, spec, vocabulary, n_jobs=1)
        parallel = generate(matrix, spec, vocabulary, n_jobs=3)
        for a, b in zip(serial.members, parallel.members):
            assert np.array_equal(a.phi, b.phi)
            assert np.array_equal(a.theta, b.theta)

    def test_vary_k_produces_different_topic_counts(self, tiny_documents):
        vocabulary, matrix = build_matrix(tiny_documents)
        spec = EnsembleSpec(
            mode="vary_k", base_config=LdaConfig(k=4, iterations=10),
            members=3, parameter_values=(2, 3, 5),
        )
        ensemble = generate(matrix, spec, vocabulary)
        assert ensemble.model_sizes() == [2, 3, 5]
        assert ensemble.total_topics == 10

    def test_topic_refs_enumeration(self, toy_ensemble):
        refs = list(toy_ensemble.topic_refs())
        assert refs[0] == TopicRef(0, 0)
        assert refs[-1] == TopicRef(2, 1)
        assert len(refs) == toy_ensemble.total_topics == 6
        assert toy_ensemble.contains(TopicRef(2, 1))
        assert not toy_ensemble.contains(TopicRef(3, 0))
        assert not toy_ensemble.contains(TopicRef(0, 2))

    def test_phi_of_unknown_ref_raises(self, toy_ensemble):
        with pytest.raises(KeyError):
            toy_ensemble.phi_of(TopicRef(0, 9))

    def test_vocabulary_size_must_match(self, toy_ensemble):
        from topicuq.corpus import Vocabulary

        with pytest.raises(ValueError):
            Ensemble(members=toy_ensemble.members, spec=None,
                     vocabulary=Vocabulary(["a", "b"]))
