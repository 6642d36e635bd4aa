"""Tests for the speckle sampler, random streams, scenes and the ensemble dump."""
import numpy as np
import pytest

from polspeckle.core.errors import ContractViolation, DomainError
from polspeckle.core.polcore import CoherencyMatrix
from polspeckle.formats.ensemble import dump_ensemble, parse_ensemble, read_ensemble, write_ensemble
from polspeckle.simulation.scene import ImagePair, Region, SceneSpec, region_labels, render_scene
from polspeckle.simulation.speckle import (
    IntensityRecord,
    IntensityRecords,
    JonesEnsemble,
    cholesky_factor,
    empirical_coherency,
    pseudo_covariance,
    sample_jones,
    to_intensity_records,
)
from polspeckle.simulation.streams import SamplerConfig, derive_stream_id, splitmix64


class TestStreams:
    def test_splitmix64_is_64_bit(self):
        for x in (0, 1, 2 ** 63, 2 ** 64 - 1):
            assert 0 <= splitmix64(x) < 2 ** 64

    def test_stream_ids_are_distinct(self):
        ids = {derive_stream_id(m, n, r) for m in range(3) for n in range(3) for r in range(50)}
        assert len(ids) == 3 * 3 * 50

    def test_stream_ids_depend_on_order_and_length(self):
        assert derive_stream_id(1, 2) != derive_stream_id(2, 1)
        assert derive_stream_id(0) != derive_stream_id(0, 0)

    def test_negative_index_rejected(self):
        with pytest.raises(DomainError, match="unsigned 64-bit"):
            derive_stream_id(-1)

    def test_seed_must_fit_u64(self):
        with pytest.raises(DomainError):
            SamplerConfig(seed=2 ** 64)

    def test_same_config_same_draws(self):
        cfg = SamplerConfig(seed=42, stream_id=7)
        a = cfg.generator().standard_normal(16)
        b = cfg.generator().standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        base = SamplerConfig(seed=42)
        a = base.substream(0, 0, 1).generator().standard_normal(16)
        b = base.substream(0, 0, 2).generator().standard_normal(16)
        assert not np.array_equal(a, b)


class TestCholesky:
    def test_identity(self):
        np.testing.assert_allclose(cholesky_factor(CoherencyMatrix(a1=1.0, a4=1.0)), np.eye(2))

    def test_diagonal(self):
        np.testing.assert_allclose(
            cholesky_factor(CoherencyMatrix(a1=4.0, a4=9.0)), [[2.0, 0.0], [0.0, 3.0]]
        )

    def test_rank_one(self):
        factor = cholesky_factor(CoherencyMatrix(a1=4.0, a4=1.0, a2=2.0))
        np.testing.assert_allclose(factor, [[2.0, 0.0], [1.0, 0.0]])

    def test_zero_first_channel(self):
        factor = cholesky_factor(CoherencyMatrix(a1=0.0, a4=9.0))
        np.testing.assert_allclose(factor, [[0.0, 0.0], [0.0, 3.0]])

    def test_tolerance_band_is_simulable(self):
        # det = -5e-13 sits inside the PSD band accepted by CoherencyMatrix
        gamma = CoherencyMatrix(a1=1e-6, a4=1.0, a2=np.sqrt(1e-6 + 5e-13))
        factor = cholesky_factor(gamma)
        assert factor[1, 1] == 0.0
        ensemble = sample_jones(gamma, 50, SamplerConfig(seed=4))
        assert np.all(np.isfinite(ensemble.samples))

    def test_reconstructs_matrix(self, reference):
        for gamma in reference.values():
            factor = cholesky_factor(gamma)
            np.testing.assert_allclose(factor @ factor.conj().T, gamma.as_array(), rtol=1e-12, atol=1e-12)
            assert factor[0, 1] == 0
            assert factor[0, 0].real >= 0 and factor[1, 1].real >= 0


class TestSampler:
    def test_shape_and_read_only(self, reference):
        ensemble = sample_jones(reference["G1"], 10, SamplerConfig(seed=1))
        assert len(ensemble) == 10
        assert ensemble.samples.shape == (10, 2)
        with pytest.raises(ValueError):
            ensemble.samples[0, 0] = 0

    def test_zero_samples_rejected(self, reference):
        with pytest.raises(DomainError):
            sample_jones(reference["G1"], 0, SamplerConfig())

    def test_deterministic(self, reference):
        cfg = SamplerConfig(seed=42, stream_id=derive_stream_id(0, 0, 0))
        a = sample_jones(reference["G4"], 100, cfg)
        b = sample_jones(reference["G4"], 100, cfg)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_prefix_stable(self, reference):
        cfg = SamplerConfig(seed=3)
        short = sample_jones(reference["G4"], 50, cfg)
        long = sample_jones(reference["G4"], 500, cfg)
        np.testing.assert_array_equal(short.samples, long.samples[:50])

    def test_empirical_coherency_converges(self, reference):
        gamma = reference["G5"]
        ensemble = sample_jones(gamma, 100_000, SamplerConfig(seed=2024))
        estimate = empirical_coherency(ensemble)
        # five standard errors at N = 1e5
        assert estimate.a1 == pytest.approx(gamma.a1, abs=0.5)
        assert estimate.a4 == pytest.approx(gamma.a4, abs=0.3)
        assert abs(estimate.a2 - gamma.a2) < 0.4

    def test_circularity(self, reference):
        gamma = reference["G5"]
        ensemble = sample_jones(gamma, 100_000, SamplerConfig(seed=99))
        px, py = pseudo_covariance(ensemble)
        assert abs(px) < 0.7
        assert abs(py) < 0.35

    def test_rank_one_intensities_are_proportional(self):
        gamma = CoherencyMatrix(a1=4.0, a4=1.0, a2=2.0)
        records = to_intensity_records(sample_jones(gamma, 200, SamplerConfig(seed=5)))
        np.testing.assert_allclose(records.i1, 4.0 * records.i2, rtol=1e-12)

    def test_intensity_records(self):
        ensemble = JonesEnsemble(samples=np.array([[1 + 1j, 2j], [3.0, 0.0]]))
        records = to_intensity_records(ensemble, keep_cross=True)
        np.testing.assert_allclose(records.i1, [2.0, 9.0])
        np.testing.assert_allclose(records.i2, [4.0, 0.0])
        np.testing.assert_allclose(records.cross, [(1 + 1j) * -2j, 0.0])
        assert not to_intensity_records(ensemble).has_cross


class TestIntensityRecords:
    def test_from_tuples(self):
        records = IntensityRecords.from_records([(2.0, 4.0), (4.0, 2.0)])
        assert len(records) == 2
        assert records[1] == IntensityRecord(i1=4.0, i2=2.0)
        assert not records.has_cross

    def test_cross_kept_only_when_complete(self):
        full = IntensityRecords.from_records([(1.0, 1.0, 1j), (2.0, 2.0, 0j)])
        partial = IntensityRecords.from_records([(1.0, 1.0, 1j), (2.0, 2.0)])
        assert full.has_cross
        assert not partial.has_cross

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            IntensityRecords(i1=[1.0, 2.0], i2=[1.0])

    def test_negative_intensity(self):
        with pytest.raises(DomainError, match="nonnegative"):
            IntensityRecords(i1=[-1.0], i2=[1.0])

    def test_drop_cross(self):
        records = IntensityRecords(i1=[1.0], i2=[2.0], cross=[0.5j])
        assert records.drop_cross().cross is None
        assert list(records.drop_cross().i1) == [1.0]


class TestEnsembleDump:
    def test_text_format(self):
        ensemble = JonesEnsemble(samples=np.array([[1 + 2j, -0.5 + 0.25j]]))
        assert dump_ensemble(ensemble) == "N 1\n1.0 2.0 -0.5 0.25\n"

    def test_exact_reload(self, reference, tmp_path):
        ensemble = sample_jones(reference["G3"], 25, SamplerConfig(seed=11))
        path = write_ensemble(ensemble, tmp_path / "g3.txt")
        np.testing.assert_array_equal(read_ensemble(path).samples, ensemble.samples)

    def test_count_mismatch(self):
        with pytest.raises(DomainError, match="announces 2 samples"):
            parse_ensemble("N 2\n1 0 0 1\n")

    def test_bad_header(self):
        with pytest.raises(DomainError, match="header"):
            parse_ensemble("M 1\n1 0 0 1\n")


class TestScene:
    @pytest.fixture
    def scene(self, reference):
        return SceneSpec(
            width=12,
            height=8,
            background=reference["G2"],
            regions=(
                Region(x0=0, y0=0, x1=6, y1=8, gamma=reference["G5"], name="left"),
                Region(x0=4, y0=2, x1=10, y1=6, gamma=CoherencyMatrix(a1=4.0, a4=1.0, a2=2.0), name="top"),
            ),
            seed=17,
        )

    def test_region_outside_rejected(self, reference):
        with pytest.raises(DomainError, match="outside"):
            SceneSpec(width=4, height=4, background=reference["G1"],
                      regions=(Region(0, 0, 5, 2, reference["G2"], "wide"),))

    def test_empty_region_rejected(self, reference):
        with pytest.raises(DomainError):
            SceneSpec(width=4, height=4, background=reference["G1"],
                      regions=(Region(2, 0, 2, 2, reference["G2"], "empty"),))

    def test_labels_follow_painter_order(self, scene):
        labels = region_labels(scene)
        assert labels.shape == (8, 12)
        assert labels[0, 0] == 1
        assert labels[3, 5] == 2
        assert labels[3, 8] == 2
        assert labels[0, 11] == 0

    def test_render_is_deterministic(self, scene):
        a = render_scene(scene)
        b = render_scene(scene)
        np.testing.assert_array_equal(a.i1, b.i1)
        np.testing.assert_array_equal(a.i2, b.i2)
        assert a.cross is None

    def test_rows_are_independent_of_height(self, reference):
        small = SceneSpec(width=9, height=3, background=reference["G4"], seed=8)
        tall = SceneSpec(width=9, height=7, background=reference["G4"], seed=8)
        np.testing.assert_array_equal(render_scene(small).i1, render_scene(tall).i1[:3])

    def test_rank_one_region(self, scene):
        pair = render_scene(scene, keep_cross=True)
        block = pair.records(rows=slice(2, 6), cols=slice(6, 10))
        np.testing.assert_allclose(block.i1, 4.0 * block.i2, rtol=1e-12)
        np.testing.assert_allclose(np.abs(block.cross) ** 2, block.i1 * block.i2, rtol=1e-12)

    def test_records_are_row_major(self):
        i1 = np.arange(6.0).reshape(2, 3)
        pair = ImagePair(i1=i1, i2=np.zeros((2, 3)))
        assert list(pair.records(cols=slice(1, 3)).i1) == [1.0, 2.0, 4.0, 5.0]

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            ImagePair(i1=np.zeros((2, 3)), i2=np.zeros((3, 2)))


@pytest.mark.slow
class TestSamplerFidelity:
    N = 1_000_000

    @pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5", "G6"])
    def test_recovers_every_entry(self, reference, name):
        gamma = reference[name]
        ensemble = sample_jones(gamma, self.N, SamplerConfig(seed=2024, stream_id=int(name[1])))
        estimate = empirical_coherency(ensemble)
        root_n = np.sqrt(self.N)
        re_se = np.sqrt((gamma.a1 * gamma.a4 + (gamma.a2 ** 2).real) / (2 * self.N))
        im_se = np.sqrt((gamma.a1 * gamma.a4 - (gamma.a2 ** 2).real) / (2 * self.N))
        assert abs(estimate.a1 - gamma.a1) < 5 * gamma.a1 / root_n
        assert abs(estimate.a4 - gamma.a4) < 5 * gamma.a4 / root_n
        assert abs(estimate.a2.real - gamma.a2.real) < 5 * re_se
        assert abs(estimate.a2.imag - gamma.a2.imag) < 5 * im_se

    @pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5", "G6"])
    def test_pseudo_covariance_vanishes(self, reference, name):
        gamma = reference[name]
        ensemble = sample_jones(gamma, self.N, SamplerConfig(seed=77))
        px, py = pseudo_covariance(ensemble)
        bound = 4.0 / np.sqrt(self.N)
        assert abs(px) / gamma.a1 < bound
        assert abs(py) / gamma.a4 < bound

    def test_streams_are_uncorrelated(self, reference):
        gamma = reference["G5"]
        base = SamplerConfig(seed=42)
        a = sample_jones(gamma, self.N, base.substream(0, 0, 1))
        b = sample_jones(gamma, self.N, base.substream(0, 0, 2))
        bound = 4.0 / np.sqrt(self.N)
        assert abs(np.mean(a.ax * b.ax.conj())) / gamma.a1 < bound
        assert abs(np.mean(a.ay * b.ay.conj())) / gamma.a4 < bound

    def test_diagonal_intensity_is_exponential(self, reference):
        gamma = reference["G2"]
        records = to_intensity_records(sample_jones(gamma, self.N, SamplerConfig(seed=13)))
        assert np.var(records.i1) == pytest.approx(gamma.a1 ** 2, rel=0.1)
        assert np.var(records.i2) == pytest.approx(gamma.a4 ** 2, rel=0.1)
