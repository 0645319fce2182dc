import math

import numpy as np
import pytest

from alc import fracdim, rng, setgen
from alc.errors import InvalidArgumentError
from alc.fracdim import (ScaleSchedule, covering_number,
                         hausdorff_dim_estimate, hausdorff_measure_delta,
                         jacobian, minkowski_dim, modified_minkowski_dim)
from alc.setgen import PointCloud, gen_cantor, gen_set_f


def brute_force_covering(points, rho, m):
    """Independent grid-occupancy count (plain python, element by element)."""
    side = 2.0 * rho / math.sqrt(m)
    return len({tuple(math.floor(c / side) for c in p) for p in points})


def segment_cloud(n=100_000, seed=11):
    gen = rng.stream(seed)
    return PointCloud(2, np.column_stack([gen.random(n), np.zeros(n)]),
                      label="segment")


class TestScaleSchedule:
    def test_dyadic(self):
        sched = ScaleSchedule.dyadic(3, 10)
        np.testing.assert_allclose(sched.radii, [2.0**-j for j in range(3, 11)])

    def test_rejects_short(self):
        with pytest.raises(InvalidArgumentError):
            ScaleSchedule([0.5, 0.25])

    def test_rejects_increasing(self):
        with pytest.raises(InvalidArgumentError):
            ScaleSchedule([0.25, 0.5, 1.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidArgumentError):
            ScaleSchedule([0.5, 0.25, 0.0])


class TestCoveringNumber:
    def test_singleton(self):
        cloud = PointCloud(2, [[0.3, 0.7]])
        for rho in (10.0, 1.0, 0.01):
            assert covering_number(cloud, rho) == 1

    def test_equispaced_1025(self):
        # cell side 1/16 on [0, 1]: cells 0..15 plus the cell of x = 1.0
        cloud = PointCloud(1, np.linspace(0, 1, 1025)[:, None])
        assert covering_number(cloud, 1 / 32) == 17

    def test_set_f_sqrt_scaling(self):
        cloud = gen_set_f(10_000)
        rho = 1e-4
        count = covering_number(cloud, rho)
        assert 0.5 * rho**-0.5 <= count <= 4 * rho**-0.5
        assert count == brute_force_covering(cloud.points, rho, 1)

    def test_matches_bruteforce_oracle(self):
        pts = rng.stream(4).random((500, 2))
        cloud = PointCloud(2, pts)
        for rho in (0.5, 0.1, 0.03, 0.007):
            assert covering_number(cloud, rho) == \
                brute_force_covering(pts, rho, 2)

    def test_rejects_bad_rho(self):
        with pytest.raises(InvalidArgumentError):
            covering_number(PointCloud(1, [[0.0]]), 0.0)

    def test_monotone_in_rho(self):
        cloud = PointCloud(2, rng.stream(8).random((2000, 2)))
        counts = [covering_number(cloud, rho)
                  for rho in (0.5, 0.2, 0.1, 0.05, 0.02)]
        assert counts == sorted(counts)

    def test_subset_monotonicity(self):
        pts = rng.stream(13).random((1000, 2))
        big = PointCloud(2, pts)
        small = PointCloud(2, pts[:300])
        for rho in (0.3, 0.1, 0.02):
            assert covering_number(small, rho) <= covering_number(big, rho)

    def test_block_bounds(self):
        pts = rng.stream(14).random((1200, 2))
        whole = PointCloud(2, pts)
        blocks = [PointCloud(2, pts[i::4]) for i in range(4)]
        for rho in (0.2, 0.05, 0.01):
            n_whole = covering_number(whole, rho)
            n_blocks = [covering_number(b, rho) for b in blocks]
            assert max(n_blocks) <= n_whole <= sum(n_blocks)


class TestMinkowskiDim:
    def test_segment(self):
        est = minkowski_dim(segment_cloud(), ScaleSchedule.dyadic(3, 10))
        assert 0.95 <= est.slope <= 1.05

    def test_cantor(self):
        est = minkowski_dim(gen_cantor(14), ScaleSchedule.geometric(3, 2, 8))
        assert 0.60 <= est.slope <= 0.66

    def test_set_f(self):
        est = minkowski_dim(gen_set_f(100_000), ScaleSchedule.dyadic(4, 12))
        assert 0.4 <= est.slope <= 0.6

    def test_slope_within_local_bounds(self):
        for cloud in (segment_cloud(20_000, 3), gen_cantor(12)):
            est = minkowski_dim(cloud, ScaleSchedule.dyadic(3, 8))
            assert est.slope_lo - 1e-9 <= est.slope <= est.slope_hi + 1e-9
            assert 0 <= est.slope_lo <= est.slope_hi
            assert 0 <= est.slope <= cloud.ambient_dim + 0.2

    def test_saturation_flagged(self):
        # two points: every scale is pinned at count 1 or count 2
        cloud = PointCloud(1, [[0.0], [0.5]])
        est = minkowski_dim(cloud, ScaleSchedule.dyadic(0, 6))
        assert len(est.saturated_scales) == 7
        assert est.slope == 0.0

    def test_scale_invariance(self):
        pts = rng.stream(31).random((3000, 2))
        cloud = PointCloud(2, pts)
        sched = ScaleSchedule.dyadic(2, 7)
        est = minkowski_dim(cloud, sched, anchor=0.0)
        lam = 3.7
        scaled = PointCloud(2, pts * lam)
        sched_scaled = ScaleSchedule(sched.radii * lam)
        est_scaled = minkowski_dim(scaled, sched_scaled, anchor=0.0)
        for (_, c1), (_, c2) in zip(est.per_scale, est_scaled.per_scale):
            assert c1 == c2
        assert est_scaled.slope == pytest.approx(est.slope, abs=1e-12)


class TestModifiedMinkowskiDim:
    def test_single_block_identity(self):
        cloud = segment_cloud(10_000, 6)
        sched = ScaleSchedule.dyadic(3, 8)
        single = modified_minkowski_dim([cloud], sched)
        direct = minkowski_dim(cloud, sched)
        assert single.slope == direct.slope
        assert single.block_slopes == [direct.slope]

    def test_two_disjoint_segments(self):
        gen = rng.stream(44)
        a = np.column_stack([gen.random(20_000), np.zeros(20_000)])
        b = np.column_stack([gen.random(20_000) + 3.0, np.ones(20_000)])
        est = modified_minkowski_dim(
            [PointCloud(2, a), PointCloud(2, b)], ScaleSchedule.dyadic(3, 9))
        assert 0.95 <= est.slope <= 1.05

    def test_set_f_finite_blocks_flat(self):
        pts = gen_set_f(10_000).points.ravel()
        blocks = []
        for i in range(1, 51):
            sel = pts[(pts >= 1 / (i + 1)) & (pts <= 1 / i)]
            blocks.append(PointCloud(1, sel[:, None]))
        blocks.append(PointCloud(1, pts[pts <= 1 / 51][:, None]))
        est = modified_minkowski_dim(blocks, ScaleSchedule.dyadic(4, 12))
        assert max(est.block_slopes[:-1]) <= 0.1

    def test_rejects_empty(self):
        with pytest.raises(InvalidArgumentError):
            modified_minkowski_dim([], ScaleSchedule.dyadic(1, 4))


def tenth_interval_cover():
    """[0,1] covered by 10 two-point clouds, each of diameter exactly 0.1."""
    return [PointCloud(1, [[i / 10.0], [i / 10.0 + 0.1]]) for i in range(10)]


class TestHausdorffMeasureDelta:
    def test_s1(self):
        assert hausdorff_measure_delta(tenth_interval_cover(), 1.0) == \
            pytest.approx(1.0, rel=1e-10)

    def test_s0_counts_cover(self):
        assert hausdorff_measure_delta(tenth_interval_cover(), 0.0) == \
            pytest.approx(10.0, rel=1e-10)

    def test_s2(self):
        assert hausdorff_measure_delta(tenth_interval_cover(), 2.0) == \
            pytest.approx(math.pi / 40.0, rel=1e-10)

    def test_rejects_negative_s(self):
        with pytest.raises(InvalidArgumentError):
            hausdorff_measure_delta(tenth_interval_cover(), -0.5)

    def test_monotone_in_s_for_small_diameters(self):
        gen = rng.stream(55)
        covers = [
            [PointCloud(2, gen.random((5, 2)) * 0.3) for _ in range(6)]
            for _ in range(5)
        ]
        s_values = np.linspace(0, 3, 13)
        for cover in covers:
            vals = [hausdorff_measure_delta(cover, s) for s in s_values]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


class TestHausdorffDimEstimate:
    def test_singleton_transitions_immediately(self):
        cloud = PointCloud(1, [[0.3]])
        s_grid = np.linspace(0, 1, 11)
        sweep = hausdorff_dim_estimate(cloud, s_grid, [0.5, 0.25, 0.125])
        assert sweep.transition_s <= s_grid[1]

    def test_segment_transition(self):
        # finite-scale bias: with value ratio threshold 1e-3 the crossing
        # sits near dim + 3/log10(delta_coarse/delta_fine), here 1 + 0.83
        sweep = hausdorff_dim_estimate(
            segment_cloud(), np.linspace(0, 2, 41),
            [2.0**-j for j in range(0, 13)])
        predicted = 1.0 + 3.0 / math.log10(2.0**12)
        assert sweep.transition_s == pytest.approx(predicted, abs=0.15)

    def test_values_monotone_in_s(self):
        sweep = hausdorff_dim_estimate(
            gen_cantor(10), np.linspace(0, 1, 11),
            [3.0**-j for j in range(1, 6)])
        diffs = np.diff(sweep.values, axis=0)
        assert np.all(diffs <= 1e-12)

    def test_transition_interpolation_mechanics(self):
        # synthetic value columns with a known crossing of the 1e-3 ratio
        s_grid = np.array([0.0, 1.0, 2.0])
        coarse = np.array([1.0, 1.0, 1.0])
        fine = np.array([1.0, 1e-2, 1e-4])
        got = fracdim._locate_transition(s_grid, coarse, fine)
        # log-ratio crosses -3 halfway between s=1 (-2) and s=2 (-4)
        assert got == pytest.approx(1.5)

    def test_no_transition_is_nan(self):
        s_grid = np.array([0.0, 0.5, 1.0])
        ones = np.ones(3)
        assert math.isnan(fracdim._locate_transition(s_grid, ones, ones))


class TestJacobian:
    def test_identity(self):
        assert jacobian(np.eye(3)) == pytest.approx(1.0, abs=1e-12)

    def test_projection(self):
        D = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        assert jacobian(D) == pytest.approx(1.0, abs=1e-12)

    def test_graph_map(self):
        # differential of z -> (z1, z2, z1)
        D = np.array([[1.0, 0], [0, 1.0], [1.0, 0]])
        assert jacobian(D) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_orthogonal_invariance(self):
        for seed in range(10):
            gen = rng.stream(seed)
            D = gen.standard_normal((5, 3))
            Q, _ = np.linalg.qr(gen.standard_normal((5, 5)))
            assert jacobian(Q @ D) == pytest.approx(jacobian(D), rel=1e-9)

    def test_clamps_roundoff(self):
        # rank-deficient: exact determinant 0, numerically tiny +/-
        D = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        assert jacobian(D) == pytest.approx(0.0, abs=1e-6)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidArgumentError):
            jacobian(np.array([[np.inf, 0.0]]))


class TestRectifiabilityConsistency:
    def test_lipschitz_curve_slope_at_most_one(self):
        # 1-parameter Lipschitz charts into R^3: pooled box dimension ~ 1
        ts = np.linspace(0.0, 3.0, 30_000)[:, None]
        charts = []
        for lo, hi in ((0.0, 1.0), (1.0, 2.0), (2.0, 3.0)):
            sel = ts[(ts[:, 0] >= lo) & (ts[:, 0] < hi)]
            images = np.column_stack(
                [np.cos(sel[:, 0]), np.sin(sel[:, 0]), sel[:, 0] / 3.0])
            charts.append((sel, images))
        cs = setgen.ChartedSet(1, 3, charts)
        est = minkowski_dim(cs.pooled_cloud(), ScaleSchedule.dyadic(3, 9))
        assert est.slope <= 1.0 + 0.15


class TestSerialization:
    def test_dimension_estimate_csv(self, tmp_path):
        est = minkowski_dim(gen_cantor(8), ScaleSchedule.geometric(3, 1, 5))
        path = tmp_path / "dim.csv"
        fracdim.save_dimension_estimate(est, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "rho,count"
        assert len(lines) == 1 + len(est.per_scale)
        import json
        meta = json.loads((tmp_path / "dim.csv.meta.json").read_text())
        assert meta["slope"] == est.slope
        assert set(meta) == {"slope", "slope_lo", "slope_hi", "r2",
                             "saturated_scales"}

    def test_sweep_csv(self, tmp_path):
        sweep = hausdorff_dim_estimate(
            gen_cantor(6), np.linspace(0, 1, 5), [0.5, 0.25, 0.125])
        path = tmp_path / "sweep.csv"
        fracdim.save_hausdorff_sweep(sweep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "s,delta,value"
        assert len(lines) == 1 + 5 * 3
