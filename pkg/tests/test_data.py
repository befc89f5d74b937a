import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landmarkseg.data import (
    OrganSpec,
    SyntheticShapeSpec,
    distance_to_mask_boundary,
    generate_dataset,
    load_dataset,
    load_landmarks,
    load_pgm,
    occlude,
    polygon_area,
    polygon_perimeter,
    polygons_disjoint,
    rasterize_polygon,
    sample_occlusion_box,
    save_dataset,
    save_landmarks,
    save_pgm,
    split_dataset,
    split_indices,
)
from landmarkseg.errors import (
    GenerationError,
    GeometryError,
    ParseError,
    ValidationError,
)


class TestRasterize:
    def test_unit_square_center_rule(self):
        square = [(0.5, 0.5), (2.5, 0.5), (2.5, 2.5), (0.5, 2.5)]
        mask = rasterize_polygon(square, 4, 4)
        filled = {tuple(p) for p in np.argwhere(mask)}
        assert filled == {(1, 1), (1, 2), (2, 1), (2, 2)}

    def test_polygon_outside_grid(self):
        assert not rasterize_polygon([(9, 9), (12, 9), (11, 12)], 4, 4).any()

    def test_too_few_vertices(self):
        with pytest.raises(GeometryError):
            rasterize_polygon([(0, 0), (1, 1)], 4, 4)

    def test_convex_area_close_to_shoelace(self, rng):
        for _ in range(25):
            n = rng.integers(3, 9)
            angles = np.sort(rng.uniform(0, 2 * np.pi, n))
            radius = rng.uniform(3, 14)
            cx, cy = rng.uniform(16, 24, 2)
            poly = np.c_[cx + radius * np.cos(angles), cy + radius * np.sin(angles)]
            filled = rasterize_polygon(poly, 40, 40).sum()
            assert abs(filled - polygon_area(poly)) <= 2 * polygon_perimeter(poly)

    def test_translation_consistency(self, rng):
        tri = np.array([(1.2, 0.7), (3.9, 1.4), (2.1, 3.3)])
        base = rasterize_polygon(tri, 12, 12)
        shifted = rasterize_polygon(tri + 4, 12, 12)
        moved = np.zeros_like(base)
        moved[4:, 4:] = base[:8, :8]
        assert np.array_equal(moved, shifted)

    def test_adjacent_polygons_do_not_double_fill(self):
        left = [(0.0, 0.0), (3.0, 0.0), (3.0, 4.0), (0.0, 4.0)]
        right = [(3.0, 0.0), (6.0, 0.0), (6.0, 4.0), (3.0, 4.0)]
        a = rasterize_polygon(left, 4, 6)
        b = rasterize_polygon(right, 4, 6)
        assert not (a & b).any()
        assert (a | b).sum() == a.sum() + b.sum()

    def test_polygons_disjoint(self):
        a = [(0, 0), (2, 0), (2, 2), (0, 2)]
        far = [(5, 5), (7, 5), (7, 7), (5, 7)]
        crossing = [(1, 1), (3, 1), (3, 3), (1, 3)]
        inside = [(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)]
        assert polygons_disjoint(a, far)
        assert not polygons_disjoint(a, crossing)
        assert not polygons_disjoint(a, inside)


class TestSyntheticGeneration:
    def test_same_seed_bitwise_identical(self):
        spec = SyntheticShapeSpec(seed=5)
        first = generate_dataset(spec, 4)
        second = generate_dataset(SyntheticShapeSpec(seed=5), 4)
        for a, b in zip(first.samples, second.samples):
            assert np.array_equal(a.image, b.image)
            assert np.array_equal(a.landmarks, b.landmarks)
            assert np.array_equal(a.mask, b.mask)

    def test_zero_perturbation_identical_samples(self):
        spec = SyntheticShapeSpec(seed=2, perturb_amplitude=0.0,
                                  rotation_jitter=0.0, scale_jitter=0.0,
                                  translation_jitter=0.0, noise_level=0.0)
        ds = generate_dataset(spec, 3)
        assert np.array_equal(ds.samples[0].landmarks, ds.samples[1].landmarks)
        assert np.array_equal(ds.samples[0].image, ds.samples[2].image)

    def test_shared_adjacency_and_edge_count(self):
        ds = generate_dataset(SyntheticShapeSpec(seed=1), 3)
        expected_edges = sum(count for _, _, count, _ in ds.organ_ranges)
        assert ds.graph.num_edges == expected_edges
        assert ds.graph.num_nodes == sum(
            count for _, _, count, _ in ds.organ_ranges)

    def test_landmarks_normalized_and_labels_valid(self):
        ds = generate_dataset(SyntheticShapeSpec(seed=3), 5)
        for sample in ds.samples:
            assert sample.landmarks.min() >= 0.0
            assert sample.landmarks.max() <= 1.0
            assert sample.image.min() >= 0.0 and sample.image.max() <= 1.0
            assert sample.mask.max() < ds.num_classes

    def test_landmarks_on_mask_boundary_100_samples(self):
        ds = generate_dataset(SyntheticShapeSpec(seed=11), 100)
        worst = 0.0
        for sample in ds.samples:
            for _, start, count, class_id in ds.organ_ranges:
                points = sample.landmarks[start:start + count] * ds.image_size
                dist = distance_to_mask_boundary(points, sample.mask == class_id)
                worst = max(worst, float(dist.max()))
        assert worst <= 1.5, worst

    def test_impossible_spec_raises_generation_error(self):
        organs = [
            OrganSpec("a", 1, 6, (0.5, 0.5), (0.4, 0.4), 0.0, 0.5),
            OrganSpec("b", 2, 6, (0.5, 0.5), (0.4, 0.4), 0.0, 0.7),
        ]
        spec = SyntheticShapeSpec(organs=organs, seed=0, max_attempts=5)
        with pytest.raises(GenerationError):
            generate_dataset(spec, 1)

    def test_spec_roundtrip(self):
        spec = SyntheticShapeSpec(seed=9, noise_level=0.05)
        again = SyntheticShapeSpec.from_dict(spec.to_dict())
        assert again == spec

    def test_spec_rejects_unknown_fields(self):
        with pytest.raises(ValidationError):
            SyntheticShapeSpec.from_dict({"bogus": 1})


class TestOcclusion:
    def test_full_cover(self, rng):
        image = rng.random((1, 8, 8))
        assert (occlude(image, (0, 0, 8, 8)) == 0).all()

    def test_zero_box_identity(self, rng):
        image = rng.random((1, 8, 8))
        assert np.array_equal(occlude(image, (2, 2, 0, 0)), image)

    def test_exact_pixel_count(self):
        out = occlude(np.ones((4, 4)), (0, 0, 2, 2))
        assert (out == 0).sum() == 4

    @given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 7),
           st.integers(0, 7))
    @settings(max_examples=40, deadline=None)
    def test_idempotent(self, row, col, h, w):
        image = np.linspace(0, 1, 64).reshape(8, 8)
        once = occlude(image, (row, col, h, w))
        twice = occlude(once, (row, col, h, w))
        assert np.array_equal(once, twice)

    def test_sampled_box_in_bounds(self, rng):
        for side in (0, 3, 8):
            box = sample_occlusion_box((1, 8, 8), side, rng)
            row, col, h, w = box
            assert 0 <= row and row + h <= 8
            assert 0 <= col and col + w <= 8


class TestSplit:
    def test_ten_samples_split_7_1_2(self):
        train, val, test = split_indices(10, seed=0)
        assert (len(train), len(val), len(test)) == (7, 1, 2)

    def test_disjoint_covering(self, rng):
        n = int(rng.integers(10, 60))
        train, val, test = split_indices(n, seed=3)
        union = np.concatenate([train, val, test])
        assert len(union) == n
        assert len(set(union.tolist())) == n

    def test_same_seed_same_split(self):
        a = split_indices(25, seed=9)
        b = split_indices(25, seed=9)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_too_small(self):
        with pytest.raises(ValidationError):
            split_indices(9, seed=0)

    def test_dataset_split_preserves_structure(self):
        ds = generate_dataset(SyntheticShapeSpec(seed=4), 12)
        train, val, test = split_dataset(ds, seed=1)
        assert len(train) + len(val) + len(test) == 12
        assert train.graph.edges == ds.graph.edges


class TestIo:
    def test_dataset_roundtrip(self, tmp_path):
        ds = generate_dataset(SyntheticShapeSpec(seed=8), 4)
        save_dataset(tmp_path, ds)
        loaded = load_dataset(tmp_path)
        assert loaded.graph.edges == ds.graph.edges
        assert loaded.organ_ranges == ds.organ_ranges
        for a, b in zip(ds.samples, loaded.samples):
            assert np.array_equal(a.image, b.image)
            assert np.array_equal(a.landmarks, b.landmarks)
            assert np.array_equal(a.mask, b.mask)
            assert np.array_equal(a.organ_labels, b.organ_labels)

    def test_landmark_count_mismatch_is_parse_error(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("# landmarks 3\n0.1 0.2\n0.3 0.4\n")
        with pytest.raises(ParseError):
            load_landmarks(path)

    def test_landmark_bad_line_number_reported(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("# landmarks 2\n0.1 0.2\n0.3 oops\n")
        with pytest.raises(ParseError, match=":3"):
            load_landmarks(path)

    def test_166_landmark_fixture_loads(self, tmp_path):
        from landmarkseg.data import cyclic_adjacency, reference_organs

        organs = reference_organs()
        ranges = []
        start = 0
        for organ in organs:
            ranges.append((organ.name, start, organ.num_landmarks, organ.class_id))
            start += organ.num_landmarks
        coords = np.random.default_rng(0).random((166, 2))
        path = tmp_path / "jsrt_style.txt"
        save_landmarks(path, coords, ranges)
        loaded, loaded_ranges = load_landmarks(path)
        assert loaded.shape == (166, 2)
        assert np.array_equal(loaded, coords)
        graph = cyclic_adjacency(loaded_ranges, 166)
        assert graph.num_nodes == 166
        assert graph.num_edges == 166

    def test_pgm_roundtrip_8_and_16_bit(self, tmp_path, rng):
        small = rng.integers(0, 4, (5, 7))
        save_pgm(tmp_path / "m.pgm", small, 3)
        loaded, maxval = load_pgm(tmp_path / "m.pgm")
        assert maxval == 3 and np.array_equal(loaded, small)
        wide = rng.integers(0, 65536, (4, 6))
        save_pgm(tmp_path / "w.pgm", wide, 65535)
        loaded, maxval = load_pgm(tmp_path / "w.pgm")
        assert maxval == 65535 and np.array_equal(loaded, wide)

    def test_p2_ascii_reader(self, tmp_path):
        (tmp_path / "a.pgm").write_text("P2\n# comment\n3 2\n9\n1 2 3\n4 5 6\n")
        values, maxval = load_pgm(tmp_path / "a.pgm")
        assert maxval == 9
        assert np.array_equal(values, [[1, 2, 3], [4, 5, 6]])
