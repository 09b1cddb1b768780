import numpy as np
import pytest

from decor import (
    ComponentSelection,
    EmbeddingMatrix,
    SyntheticSpec,
    component_groups,
    norm_match,
    reconstruct,
    similarity_profile,
    spectrum,
    synthesize,
    thin_svd,
)


@pytest.fixture(scope="module")
def small_fact():
    m = np.random.default_rng(9).standard_normal((30, 40))
    return m, thin_svd(m)


class TestReconstruct:
    def test_all_components_recover_original(self, small_fact):
        m, f = small_fact
        rec = reconstruct(f, ComponentSelection(tuple(range(f.k))))
        assert np.linalg.norm(rec - m) / np.linalg.norm(m) <= 1e-10

    def test_empty_selection_is_zero(self, small_fact):
        _, f = small_fact
        np.testing.assert_array_equal(
            reconstruct(f, ComponentSelection(())), np.zeros((30, 40))
        )

    def test_out_of_range_index_named(self, small_fact):
        _, f = small_fact
        with pytest.raises(ValueError, match="30.*k=30"):
            reconstruct(f, ComponentSelection((0, 30)))

    def test_selection_validation(self):
        with pytest.raises(ValueError, match="duplicate"):
            ComponentSelection((1, 1))
        with pytest.raises(ValueError, match="non-negative"):
            ComponentSelection((-1,))
        assert ComponentSelection((3, 1)).indices == (1, 3)
        assert ComponentSelection.from_ranks((2, 9)).indices == (1, 8)

    def test_additivity_on_disjoint_selections(self, small_fact):
        m, f = small_fact
        a = ComponentSelection(tuple(range(0, 7)))
        b = ComponentSelection(tuple(range(7, 19)))
        union = ComponentSelection(a.indices + b.indices)
        lhs = reconstruct(f, union)
        rhs = reconstruct(f, a) + reconstruct(f, b)
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(m).max()

    def test_component_orthogonality(self, small_fact):
        _, f = small_fact
        comps = [reconstruct(f, ComponentSelection((i,))) for i in (0, 3, 11)]
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                inner = float(np.einsum("ij,ij->", comps[i], comps[j]))
                assert abs(inner) <= 1e-10 * f.sigma[0] ** 2

    def test_energy_identity(self, small_fact):
        _, f = small_fact
        sel = ComponentSelection((0, 2, 5, 28))
        energy = np.einsum("ij,ij->", reconstruct(f, sel), reconstruct(f, sel))
        expect = float(np.sum(f.sigma[list(sel.indices)] ** 2))
        assert abs(energy - expect) <= 1e-10 * expect


class TestComponentGroups:
    def test_clip_shaped_groups(self):
        e = synthesize(SyntheticSpec(77, 768, 10, 0.5, 0))
        f = thin_svd(e.x)
        primary, subsequent, residual = component_groups(f, 77)
        assert primary.ranks == (1,)
        assert subsequent.ranks == tuple(range(2, 10))
        assert residual.ranks == tuple(range(20, 55))
        assert (len(primary), len(subsequent), len(residual)) == (1, 8, 35)

    def test_short_matrix_clips_residual_empty(self):
        f = thin_svd(np.random.default_rng(0).standard_normal((8, 50)))
        primary, subsequent, residual = component_groups(f, 8)
        assert len(residual) == 0
        assert subsequent.ranks == tuple(range(2, 9))

    def test_row_count_checked(self, small_fact):
        _, f = small_fact
        with pytest.raises(ValueError, match="rows"):
            component_groups(f, 31)


class TestSimilarityProfile:
    def test_self_similarity_all_ones(self):
        e = synthesize(SyntheticSpec(10, 6, 4, 0.5, 1))
        prof = similarity_profile(e, e.x)
        np.testing.assert_allclose(prof.per_token, np.ones(10), atol=1e-12)
        assert prof.word_mean == pytest.approx(1.0, abs=1e-12)

    def test_zero_reconstruction_all_zero(self):
        e = synthesize(SyntheticSpec(10, 6, 4, 0.5, 1))
        prof = similarity_profile(e, np.zeros((10, 6)))
        np.testing.assert_array_equal(prof.per_token, np.zeros(10))

    def test_shape_mismatch_rejected(self):
        e = synthesize(SyntheticSpec(10, 6, 4, 0.5, 1))
        with pytest.raises(ValueError, match="match"):
            similarity_profile(e, np.zeros((10, 7)))

    def test_primary_group_reconstructs_pads(self, synth_batch):
        for e, f in synth_batch:
            prof = similarity_profile(e, reconstruct(f, ComponentSelection((0,))))
            assert prof.pad_mean >= 0.9
            assert prof.word_mean <= 0.5

    def test_residual_group_reconstructs_noise(self, synth_batch):
        for e, f in synth_batch:
            _, _, residual = component_groups(f, e.length)
            prof = similarity_profile(e, reconstruct(f, residual))
            assert prof.word_mean <= 0.5
            assert prof.pad_mean <= 0.5

    def test_group_ordering_matches_structure(self, synth_batch):
        # dominant component explains pads, subsequent components explain words
        for e, f in synth_batch:
            primary, subsequent, _ = component_groups(f, e.length)
            p = similarity_profile(e, reconstruct(f, primary))
            s = similarity_profile(e, reconstruct(f, subsequent))
            assert p.pad_mean > s.pad_mean
            assert s.word_mean > p.word_mean


class TestSpectrum:
    def test_equal_sigmas_give_unit_dominance(self):
        e = EmbeddingMatrix(np.eye(4), word_count=2)
        rep = spectrum(e, 4)
        np.testing.assert_allclose(rep.sigmas, np.ones(4), atol=1e-14)
        assert rep.dominance_ratio == 1.0
        assert rep.normalized[0] == 1.0
        assert not rep.rank_deficient

    def test_rank1_flags_deficiency_with_capped_ratio(self):
        x = np.outer(np.arange(1.0, 5.0), np.ones(3))
        rep = spectrum(EmbeddingMatrix(x, word_count=1), 3)
        assert rep.rank_deficient
        assert rep.dominance_ratio == pytest.approx(1e10, rel=1e-12)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError, match="rank 0"):
            spectrum(EmbeddingMatrix(np.zeros((4, 3)), word_count=2), 3)

    def test_top_bounds(self):
        e = EmbeddingMatrix(np.eye(4), word_count=2)
        with pytest.raises(ValueError, match="top"):
            spectrum(e, 5)
        assert len(spectrum(e, 2).sigmas) == 2

    def test_synthetic_dominance(self, synth_batch):
        ratios = [spectrum(e, 1).dominance_ratio for e, _ in synth_batch[:5]]
        assert np.mean(ratios) >= 3.0


class TestNormMatch:
    def test_scalar_multiple_recovers_reference(self):
        ref = np.random.default_rng(2).standard_normal((6, 5))
        np.testing.assert_array_equal(norm_match(0.5 * ref, ref), ref)

    def test_identity(self):
        ref = np.random.default_rng(3).standard_normal((6, 5))
        np.testing.assert_array_equal(norm_match(ref, ref), ref)

    def test_zero_target_rejected(self):
        with pytest.raises(ValueError, match="zero target"):
            norm_match(np.zeros((2, 2)), np.ones((2, 2)))

    def test_primary_component_rescaled_to_input_norm(self):
        m = np.random.default_rng(4).standard_normal((77, 768))
        f = thin_svd(m)
        out = norm_match(reconstruct(f, ComponentSelection((0,))), m)
        got, want = np.linalg.norm(out), np.linalg.norm(m)
        assert abs(got - want) <= 1e-12 * want
