import math

import numpy as np
import pytest

import lidarcmp


def test_cloud_round_trips_numpy():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    cloud = lidarcmp.PointCloud(pts, intensity=np.array([0.5, 0.75]))
    assert len(cloud) == 2
    assert cloud.has_intensity()
    np.testing.assert_array_equal(cloud.points, pts)
    np.testing.assert_array_equal(cloud.intensity, [0.5, 0.75])

    bare = lidarcmp.PointCloud(pts)
    assert bare.intensity is None


def test_cloud_validation():
    with pytest.raises(ValueError):
        lidarcmp.PointCloud(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        lidarcmp.PointCloud(np.zeros((2, 3)), intensity=np.zeros(3))


def test_chamfer_and_dcd_hand_values():
    a = lidarcmp.PointCloud(np.array([[0.0, 0.0, 0.0]]))
    b = lidarcmp.PointCloud(np.array([[1.0, 0.0, 0.0]]))
    assert lidarcmp.chamfer(a, b)["value"] == 2.0
    r = lidarcmp.dcd(a, b, alpha=1.0)
    assert r["value"] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    assert r["orientation"] == "distance"
    assert r["metric"] == "dcd"
    assert lidarcmp.emd(a, lidarcmp.PointCloud(np.array([[3.0, 4.0, 0.0]])))["value"] == 5.0


def test_metrics_on_synthetic_scan():
    scan = lidarcmp.make_lidar_scan(3, ground_points=1000, wall_points=400)
    assert lidarcmp.voxel_iou(scan, scan)["value"] == 1.0
    assert lidarcmp.bev_distance(scan, scan)["value"] == 0.0
    assert lidarcmp.icp_rmse(scan, scan)["value"] == 0.0
    two = lidarcmp.two_step_compare(scan, scan)
    assert two["verdict"] == "similar"
    assert two["chamfer"] is None


def test_perturbations_deterministic():
    scan = lidarcmp.make_lidar_scan(5, ground_points=800, wall_points=200)
    noisy1 = lidarcmp.add_noise(scan, 0.2, 42)
    noisy2 = lidarcmp.add_noise(scan, 0.2, 42)
    np.testing.assert_array_equal(noisy1.points, noisy2.points)
    assert not np.array_equal(noisy1.points, scan.points)

    grown = lidarcmp.add_random_outliers(scan, 100, 7)
    assert len(grown) == len(scan) + 100

    sampled = lidarcmp.downsample_random(scan, 0.5, 1)
    assert len(sampled) == round(0.5 * len(scan))


def test_transform_and_index():
    scan = lidarcmp.make_lidar_scan(9, ground_points=500, wall_points=100)
    moved = lidarcmp.apply_transform(scan, np.eye(3), np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(moved.points[:, 0], scan.points[:, 0] + 1.0)

    index = lidarcmp.SpatialIndex(scan)
    pid, d = index.nearest(*scan.points[0])
    assert d == 0.0
    assert index.nearest_within(1e6, 1e6, 1e6, 1.0) is None


def test_file_round_trip(tmp_path):
    scan = lidarcmp.make_lidar_scan(11, ground_points=600, wall_points=200)
    for name, fmt in [("a.ply", "ply_binary"), ("a.bin", "kitti_bin"), ("b.ply", "ply_ascii")]:
        path = tmp_path / name
        lidarcmp.save(scan, path, format=fmt)
        back = lidarcmp.load(path)
        assert len(back) == len(scan)
        np.testing.assert_allclose(back.points, scan.points, atol=1e-4)

    with pytest.raises(ValueError):
        bare = lidarcmp.PointCloud(np.zeros((1, 3)))
        lidarcmp.save(bare, tmp_path / "fail.bin", format="kitti_bin")


def test_transfer_intensity():
    real = lidarcmp.make_lidar_scan(13, ground_points=400, wall_points=100)
    sim = lidarcmp.PointCloud(real.points)
    out, fraction = lidarcmp.transfer_intensity(sim, real, radius=1.0)
    assert fraction == 1.0
    np.testing.assert_array_equal(out.intensity, real.intensity)
