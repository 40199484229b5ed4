"""Grouping, stability classes, filters, hulls, and summary statistics."""

import numpy as np
import pytest
import scipy.stats

from topicuq.analysis import (
    DEFAULT_THRESHOLDS,
    FilterSpec,
    StabilityClass,
    TopicGroup,
    apply_filter,
    classify_stability,
    completeness,
    convex_hull,
    correlation,
    ensemble_summary,
    group_to_json_dict,
    make_group,
)
from topicuq.corpus import Vocabulary
from topicuq.embedding import EmbeddingConfig, embed_similarity
from topicuq.ensemble import Ensemble, TopicRef
from topicuq.lda import TopicModel
from topicuq.metrics import UncertaintyRecord, compute_all, similarity_matrix

SQUARE_WITH_CENTER = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]


def wide_ensemble(n_members: int, k: int = 2) -> Ensemble:
    """Many-member ensemble with interchangeable one-hot topics."""
    vocabulary = Vocabulary([f"t{i}" for i in range(k)])
    phi = np.eye(k)
    members = [TopicModel(phi=phi.copy(), model_id=i) for i in range(n_members)]
    return Ensemble(members=members, spec=None, vocabulary=vocabulary)


def records_with(values, measure="u_exist"):
    other = 0.0
    out = []
    for i, v in enumerate(values):
        kwargs = {"u_match": other, "u_exist": other}
        kwargs[measure] = v
        out.append(UncertaintyRecord(TopicRef(0, i), **kwargs))
    return out


class TestCompleteness:
    def test_full_coverage(self):
        ensemble = wide_ensemble(10)
        refs = [TopicRef(m, 0) for m in range(10)]
        assert completeness(refs, ensemble) == 1.0

    def test_eight_of_ten_members(self):
        ensemble = wide_ensemble(10)
        refs = [TopicRef(m, 0) for m in range(8)]
        assert completeness(refs, ensemble) == 0.8

    def test_three_topics_one_member(self):
        ensemble = wide_ensemble(10, k=3)
        refs = [TopicRef(4, t) for t in range(3)]
        assert completeness(refs, ensemble) == pytest.approx(0.1)

    def test_invariant_under_duplicate_member_topics(self):
        ensemble = wide_ensemble(5)
        base = [TopicRef(0, 0), TopicRef(1, 0)]
        extended = base + [TopicRef(1, 1)]
        assert completeness(base, ensemble) == completeness(extended, ensemble)

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            completeness([], wide_ensemble(3))


class TestClassifyStability:
    def test_threshold_classes(self):
        records = records_with([0.07, 0.55, 0.4])
        classes = classify_stability(records, "u_exist")
        assert classes == [
            StabilityClass.STABLE,
            StabilityClass.UNSTABLE,
            StabilityClass.GREY,
        ]

    def test_boundaries_fall_in_grey(self):
        records = records_with([0.3, 0.5])
        classes = classify_stability(records, "u_exist")
        assert classes == [StabilityClass.GREY, StabilityClass.GREY]

    def test_partition_property(self):
        rng = np.random.default_rng(0)
        records = records_with(rng.random(50))
        classes = classify_stability(records, "u_exist")
        assert len(classes) == 50
        assert all(isinstance(c, StabilityClass) for c in classes)

    def test_respects_measure_argument(self):
        records = records_with([0.9], measure="u_match")
        assert classify_stability(records, "u_match") == [StabilityClass.UNSTABLE]
        assert classify_stability(records, "u_exist") == [StabilityClass.STABLE]

    def test_unknown_measure_rejected(self):
        with pytest.raises(ValueError):
            classify_stability([], "u_bogus")

    def test_unordered_thresholds_rejected(self):
        with pytest.raises(ValueError):
            classify_stability(records_with([0.1]), "u_exist", thresholds=(0.6, 0.2))


def terms_oracle(ensemble, terms, top_n):
    """Independent nested-loop scan for the term criterion."""
    keep = set()
    for ref in ensemble.topic_refs():
        row = ensemble.phi_of(ref)
        order = sorted(range(len(row)), key=lambda i: (-row[i], i))[:top_n]
        names = {ensemble.vocabulary.term_of(i) for i in order}
        if all(t in names for t in terms):
            keep.add(ref)
    return keep


class TestApplyFilter:
    def test_u_exist_max_is_exactly_the_stable_set(self, synth_project):
        records = synth_project.records
        ensemble = synth_project.ensemble
        spec = FilterSpec(u_measure="u_exist", u_max=DEFAULT_THRESHOLDS[0])
        result = apply_filter(spec, ensemble, records)
        classes = classify_stability(records, "u_exist")
        stable = {
            r.ref for r, c in zip(records, classes) if c is StabilityClass.STABLE
        }
        assert result == stable

    def test_u_min_is_exactly_the_unstable_set(self, synth_project):
        records = synth_project.records
        spec = FilterSpec(u_measure="u_exist", u_min=DEFAULT_THRESHOLDS[1])
        result = apply_filter(spec, synth_project.ensemble, records)
        classes = classify_stability(records, "u_exist")
        unstable = {
            r.ref for r, c in zip(records, classes) if c is StabilityClass.UNSTABLE
        }
        assert result == unstable

    def test_bounds_are_strict(self, toy_ensemble):
        records = [
            UncertaintyRecord(ref, u_match=0.3, u_exist=0.3)
            for ref in toy_ensemble.topic_refs()
        ]
        spec = FilterSpec(u_measure="u_match", u_max=0.3)
        assert apply_filter(spec, toy_ensemble, records) == set()

    def test_per_model_best_cardinality(self, toy_ensemble):
        sim = similarity_matrix(toy_ensemble)
        records = [
            UncertaintyRecord(ref, u_match=0.0, u_exist=0.0)
            for ref in toy_ensemble.topic_refs()
        ]
        spec = FilterSpec(similar_to=TopicRef(0, 0), per_model_best=True)
        result = apply_filter(spec, toy_ensemble, records, sim)
        assert len(result) == len(toy_ensemble.members) - 1
        assert {ref.model_index for ref in result} == {1, 2}
        # The anchor's first topic is concentrated on the same terms as each
        # other member's first topic.
        assert result == {TopicRef(1, 0), TopicRef(2, 0)}

    def test_similarity_threshold_matches_row_scan(self, toy_ensemble):
        sim = similarity_matrix(toy_ensemble)
        records = [
            UncertaintyRecord(ref, u_match=0.0, u_exist=0.0)
            for ref in toy_ensemble.topic_refs()
        ]
        spec = FilterSpec(similar_to=TopicRef(0, 0), similarity_threshold=0.5)
        result = apply_filter(spec, toy_ensemble, records, sim)
        row = sim.values[sim.index_of(TopicRef(0, 0))]
        expected = {ref for i, ref in enumerate(sim.refs) if row[i] >= 0.5}
        assert result == expected

    def test_terms_criterion_matches_brute_force(self):
        rng = np.random.default_rng(21)
        vocabulary = Vocabulary([f"w{i:02d}" for i in range(15)])
        members = [
            TopicModel(phi=rng.dirichlet(np.ones(15), size=3), model_id=i)
            for i in range(3)
        ]
        ensemble = Ensemble(members=members, spec=None, vocabulary=vocabulary)
        records = [
            UncertaintyRecord(ref, u_match=0.0, u_exist=0.0)
            for ref in ensemble.topic_refs()
        ]
        for terms in (("w03",), ("w03", "w07"), ("w00", "w01", "w02")):
            for top_n in (3, 10):
                spec = FilterSpec(terms=terms, top_n=top_n)
                assert apply_filter(spec, ensemble, records) == terms_oracle(
                    ensemble, terms, top_n
                )

    def test_unknown_term_warns_and_returns_empty(self, toy_ensemble):
        records = [
            UncertaintyRecord(ref, u_match=0.0, u_exist=0.0)
            for ref in toy_ensemble.topic_refs()
        ]
        spec = FilterSpec(terms=("nonexistent-term",))
        with pytest.warns(UserWarning, match="nonexistent-term"):
            assert apply_filter(spec, toy_ensemble, records) == set()

    def test_selected_refs_narrow(self, toy_ensemble):
        records = [
            UncertaintyRecord(ref, u_match=0.0, u_exist=0.0)
            for ref in toy_ensemble.topic_refs()
        ]
        chosen = frozenset({TopicRef(0, 0), TopicRef(2, 1)})
        spec = FilterSpec(selected_refs=chosen)
        assert apply_filter(spec, toy_ensemble, records) == set(chosen)

    def test_conjunction_is_intersection(self, synth_project):
        ensemble = synth_project.ensemble
        records = synth_project.records
        sim = synth_project.similarity
        u_only = apply_filter(
            FilterSpec(u_measure="u_exist", u_max=0.9), ensemble, records, sim
        )
        anchor = TopicRef(0, 0)
        sim_only = apply_filter(
            FilterSpec(similar_to=anchor, similarity_threshold=0.2),
            ensemble, records, sim,
        )
        both = apply_filter(
            FilterSpec(u_measure="u_exist", u_max=0.9,
                       similar_to=anchor, similarity_threshold=0.2),
            ensemble, records, sim,
        )
        assert both == (u_only & sim_only)

    def test_adding_criteria_never_enlarges(self, synth_project):
        ensemble = synth_project.ensemble
        records = synth_project.records
        sim = synth_project.similarity
        rng = np.random.default_rng(17)
        refs = list(ensemble.topic_refs())
        for _ in range(25):
            u_max = float(rng.uniform(0.1, 1.0))
            base = FilterSpec(u_measure="u_exist", u_max=u_max)
            current = apply_filter(base, ensemble, records, sim)
            with_refs = FilterSpec(
                u_measure="u_exist", u_max=u_max,
                selected_refs=frozenset(
                    refs[i] for i in rng.choice(len(refs), size=8, replace=False)
                ),
            )
            narrowed = apply_filter(with_refs, ensemble, records, sim)
            assert narrowed <= current
            anchor = refs[int(rng.integers(len(refs)))]
            with_sim = FilterSpec(
                u_measure="u_exist", u_max=u_max,
                selected_refs=with_refs.selected_refs,
                similar_to=anchor,
                similarity_threshold=float(rng.uniform(0.0, 1.0)),
            )
            assert apply_filter(with_sim, ensemble, records, sim) <= narrowed

    def test_missing_record_rejected(self, toy_ensemble):
        records = [UncertaintyRecord(TopicRef(0, 0), u_match=0.1, u_exist=0.1)]
        spec = FilterSpec(u_measure="u_match", u_max=0.5)
        with pytest.raises(ValueError, match="no uncertainty record"):
            apply_filter(spec, toy_ensemble, records)

    def test_similarity_filter_needs_matrix(self, toy_ensemble):
        spec = FilterSpec(similar_to=TopicRef(0, 0), similarity_threshold=0.5)
        with pytest.raises(ValueError, match="similarity matrix"):
            apply_filter(spec, toy_ensemble, [], sim=None)

    def test_threshold_required_without_per_model_best(self, toy_ensemble):
        sim = similarity_matrix(toy_ensemble)
        spec = FilterSpec(similar_to=TopicRef(0, 0))
        with pytest.raises(ValueError, match="threshold"):
            apply_filter(spec, toy_ensemble, [], sim)

    def test_spec_validation(self):
        with pytest.raises(ValueError, match="criterion"):
            FilterSpec()
        with pytest.raises(ValueError, match="measure"):
            FilterSpec(u_measure="bogus", u_max=0.5)
        with pytest.raises(ValueError, match="outside"):
            FilterSpec(u_measure="u_match", u_max=1.5)
        with pytest.raises(ValueError, match="top_n"):
            FilterSpec(terms=("a",), top_n=0)


class TestConvexHull:
    def test_square_with_interior_point(self):
        hull = convex_hull(SQUARE_WITH_CENTER)
        assert hull == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]

    def test_collinear_points_become_segment(self):
        hull = convex_hull([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])
        assert hull == [(0.0, 0.0), (2.0, 2.0)]

    def test_single_point(self):
        assert convex_hull([(3.0, 4.0), (3.0, 4.0)]) == [(3.0, 4.0)]

    def test_two_points(self):
        assert convex_hull([(1.0, 2.0), (0.0, 0.0)]) == [(0.0, 0.0), (1.0, 2.0)]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            convex_hull([])

    def test_random_points_contained(self):
        rng = np.random.default_rng(3)
        points = [tuple(p) for p in rng.standard_normal((100, 2))]
        hull = convex_hull(points)
        assert len(hull) >= 3
        # Counter-clockwise edges keep every input point on their left.
        for px, py in points:
            for (ax, ay), (bx, by) in zip(hull, hull[1:] + hull[:1]):
                cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                assert cross >= -1e-9

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        points = [tuple(p) for p in rng.standard_normal((40, 2))]
        reference = convex_hull(points)
        for _ in range(5):
            rng.shuffle(points)
            assert convex_hull(points) == reference

    def test_counter_clockwise_orientation(self):
        hull = convex_hull(SQUARE_WITH_CENTER)
        area2 = sum(
            ax * by - bx * ay
            for (ax, ay), (bx, by) in zip(hull, hull[1:] + hull[:1])
        )
        assert area2 > 0


class TestGroups:
    def test_make_group_derives_completeness_and_hull(self, synth_project):
        ensemble = synth_project.ensemble
        embedding = synth_project.embedding
        members = [TopicRef(m, 0) for m in range(len(ensemble.members))]
        group = make_group("g1", "first topics", members, ensemble, embedding)
        assert group.completeness == 1.0
        index = {ref: i for i, ref in enumerate(embedding.refs)}
        for ref in members:
            px, py = embedding.coords[index[ref]]
            for (ax, ay), (bx, by) in zip(group.hull,
                                          group.hull[1:] + group.hull[:1]):
                cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                assert cross >= -1e-9

    def test_group_without_embedding_has_empty_hull(self, toy_ensemble):
        group = make_group("g2", "pair", [TopicRef(0, 0)], toy_ensemble)
        assert group.hull == ()
        assert group.completeness == pytest.approx(1 / 3)

    def test_unknown_member_rejected(self, toy_ensemble):
        with pytest.raises(ValueError):
            make_group("g3", "bad", [TopicRef(9, 0)], toy_ensemble)

    def test_json_shape(self, toy_ensemble):
        group = make_group("g4", "label",
                           [TopicRef(1, 1), TopicRef(0, 0)], toy_ensemble)
        doc = group_to_json_dict(group)
        assert doc["id"] == "g4"
        assert doc["label"] == "label"
        assert doc["members"] == [{"model": 0, "topic": 0},
                                  {"model": 1, "topic": 1}]
        assert doc["completeness"] == pytest.approx(2 / 3)
        assert doc["hull"] == []

    def test_group_validation(self):
        with pytest.raises(ValueError):
            TopicGroup(id="x", label="", members=frozenset(),
                       completeness=1.0, hull=())
        with pytest.raises(ValueError):
            TopicGroup(id="x", label="", members=frozenset({TopicRef(0, 0)}),
                       completeness=1.5, hull=())


class TestCorrelation:
    def test_identical_measures(self):
        rng = np.random.default_rng(5)
        values = rng.random(10)
        records = [
            UncertaintyRecord(TopicRef(0, i), u_match=v, u_exist=v)
            for i, v in enumerate(values)
        ]
        pearson, spearman = correlation(records)
        assert pearson == pytest.approx(1.0, abs=1e-12)
        assert spearman == pytest.approx(1.0, abs=1e-12)

    def test_reversed_measures(self):
        rng = np.random.default_rng(6)
        values = rng.random(10)
        records = [
            UncertaintyRecord(TopicRef(0, i), u_match=v, u_exist=1.0 - v)
            for i, v in enumerate(values)
        ]
        pearson, spearman = correlation(records)
        assert pearson == pytest.approx(-1.0, abs=1e-12)
        assert spearman == pytest.approx(-1.0, abs=1e-12)

    def test_fixture_matches_independent_statistics(self):
        # Ties included on both sides to exercise average ranks.
        u_match = [0.10, 0.25, 0.25, 0.40, 0.55, 0.55, 0.55, 0.70, 0.85, 0.90]
        u_exist = [0.20, 0.10, 0.40, 0.40, 0.30, 0.80, 0.65, 0.90, 0.75, 0.75]
        records = [
            UncertaintyRecord(TopicRef(0, i), u_match=m, u_exist=e)
            for i, (m, e) in enumerate(zip(u_match, u_exist))
        ]
        pearson, spearman = correlation(records)
        assert pearson == pytest.approx(
            scipy.stats.pearsonr(u_match, u_exist).statistic, abs=1e-12
        )
        assert spearman == pytest.approx(
            scipy.stats.spearmanr(u_match, u_exist).statistic, abs=1e-12
        )

    def test_trained_records_match_scipy(self, synth_project):
        records = synth_project.records
        pearson, spearman = correlation(records)
        u_match = [r.u_match for r in records]
        u_exist = [r.u_exist for r in records]
        assert pearson == pytest.approx(
            scipy.stats.pearsonr(u_match, u_exist).statistic, abs=1e-12
        )
        assert spearman == pytest.approx(
            scipy.stats.spearmanr(u_match, u_exist).statistic, abs=1e-12
        )

    def test_too_few_records_rejected(self):
        records = records_with([0.1, 0.2])
        with pytest.raises(ValueError):
            correlation(records)

    def test_zero_variance_rejected(self):
        records = [
            UncertaintyRecord(TopicRef(0, i), u_match=0.5, u_exist=0.1 * i)
            for i in range(5)
        ]
        with pytest.raises(ValueError, match="variance"):
            correlation(records)


class TestEnsembleSummary:
    def test_mean_and_median(self):
        records = records_with([0.2, 0.4, 0.6])
        summary = ensemble_summary(records)
        assert summary["u_exist"].mean == pytest.approx(0.4)
        assert summary["u_exist"].median == pytest.approx(0.4)

    def test_even_count_median_is_midpoint(self):
        records = records_with([0.2, 0.4])
        assert ensemble_summary(records)["u_exist"].median == pytest.approx(0.3)

    def test_class_counts(self):
        records = records_with([0.1, 0.2, 0.7])
        summary = ensemble_summary(records)["u_exist"]
        assert (summary.stable, summary.grey, summary.unstable) == (2, 0, 1)

    def test_counts_match_reclassification(self, synth_project):
        records = synth_project.records
        summary = ensemble_summary(records)
        for measure in ("u_match", "u_exist"):
            stable = grey = unstable = 0
            for record in records:
                u = getattr(record, measure)
                if u < 0.3:
                    stable += 1
                elif u > 0.5:
                    unstable += 1
                else:
                    grey += 1
            assert summary[measure].stable == stable
            assert summary[measure].grey == grey
            assert summary[measure].unstable == unstable
            assert summary[measure].stable + summary[measure].grey + summary[
                measure
            ].unstable == len(records)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ensemble_summary([])
