#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "lidarcmp/io.hpp"
#include "lidarcmp/kdtree.hpp"
#include "lidarcmp/metrics.hpp"
#include "lidarcmp/perturb.hpp"
#include "lidarcmp/synthetic.hpp"
#include "lidarcmp/types.hpp"

namespace py = pybind11;
using namespace lidarcmp;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

PointCloud cloud_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> points,
                             py::object intensity) {
  if (points.ndim() != 2 || points.shape(1) != 3) {
    throw PreconditionError("points must be an (n, 3) array");
  }
  PointCloud cloud;
  const auto n = static_cast<std::size_t>(points.shape(0));
  cloud.points.reserve(n);
  const auto view = points.unchecked<2>();
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back({view(i, 0), view(i, 1), view(i, 2)});
  }
  if (!intensity.is_none()) {
    const auto arr =
        py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(intensity);
    if (static_cast<std::size_t>(arr.size()) != n) {
      throw PreconditionError("intensity length must match the point count");
    }
    const auto iview = arr.unchecked<1>();
    cloud.intensity.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cloud.intensity.push_back(iview(i));
  }
  cloud.validate();
  return cloud;
}

py::array_t<double> points_array(const PointCloud& cloud) {
  py::array_t<double> out({static_cast<py::ssize_t>(cloud.size()), py::ssize_t(3)});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    view(i, 0) = cloud.points[i].x;
    view(i, 1) = cloud.points[i].y;
    view(i, 2) = cloud.points[i].z;
  }
  return out;
}

py::object intensity_array(const PointCloud& cloud) {
  if (!cloud.has_intensity()) return py::none();
  py::array_t<double> out(static_cast<py::ssize_t>(cloud.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < cloud.size(); ++i) view(i) = cloud.intensity[i];
  return out;
}

Affine affine_from_py(py::array_t<double, py::array::c_style | py::array::forcecast> linear,
                      py::array_t<double, py::array::c_style | py::array::forcecast> translation) {
  if (linear.ndim() != 2 || linear.shape(0) != 3 || linear.shape(1) != 3) {
    throw PreconditionError("linear must be a 3x3 array");
  }
  if (translation.size() != 3) throw PreconditionError("translation must have 3 entries");
  Affine t;
  const auto lv = linear.unchecked<2>();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.linear[i][j] = lv(i, j);
  }
  const auto tv = translation.unchecked<1>();
  t.translation = {tv(0), tv(1), tv(2)};
  return t;
}

metrics::SamplingSpec sampling_from_args(const std::string& sampling, int n, std::uint64_t seed,
                                         double cell) {
  metrics::SamplingSpec s;
  if (sampling == "random") {
    s.mode = metrics::SamplingSpec::Mode::random;
  } else if (sampling == "voxel") {
    s.mode = metrics::SamplingSpec::Mode::voxel;
  } else {
    throw PreconditionError("sampling must be 'random' or 'voxel'");
  }
  s.n = n;
  s.seed = seed;
  s.cell = cell;
  return s;
}

}  // namespace

PYBIND11_MODULE(_lidarcmp, m) {
  m.doc() = "Geometric similarity metrics and perturbation generators for LiDAR scans";

  py::register_exception<IoError>(m, "IoError", PyExc_IOError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init(&cloud_from_arrays), py::arg("points"), py::arg("intensity") = py::none())
      .def_property_readonly("points", &points_array)
      .def_property_readonly("intensity", &intensity_array)
      .def_readwrite("frame_id", &PointCloud::frame_id)
      .def("__len__", &PointCloud::size)
      .def("has_intensity", &PointCloud::has_intensity)
      .def("__repr__", [](const PointCloud& c) {
        return "PointCloud(" + std::to_string(c.size()) + " points" +
               (c.has_intensity() ? ", intensity" : "") + ")";
      });

  py::class_<SpatialIndex>(m, "SpatialIndex")
      .def(py::init<const PointCloud&>(), py::arg("cloud"))
      .def("__len__", &SpatialIndex::size)
      .def(
          "nearest",
          [](const SpatialIndex& idx, double x, double y, double z) {
            const auto hit = idx.nearest({x, y, z});
            return py::make_tuple(hit.index, hit.distance());
          },
          py::arg("x"), py::arg("y"), py::arg("z"))
      .def(
          "nearest_within",
          [](const SpatialIndex& idx, double x, double y, double z, double radius) -> py::object {
            const auto hit = idx.nearest_within({x, y, z}, radius);
            if (!hit) return py::none();
            return py::make_tuple(hit->index, hit->distance());
          },
          py::arg("x"), py::arg("y"), py::arg("z"), py::arg("radius"));

  // io
  m.def("load", [](const std::filesystem::path& p) { return load_cloud(p); }, py::arg("path"));
  m.def("load_ply", &load_ply, py::arg("path"));
  m.def("load_kitti_bin", &load_kitti_bin, py::arg("path"));
  m.def(
      "save",
      [](const PointCloud& cloud, const std::filesystem::path& path, const std::string& format) {
        save(cloud, path, format_from_name(format));
      },
      py::arg("cloud"), py::arg("path"), py::arg("format") = "ply_binary");
  m.def("bounds", [](const PointCloud& c) {
    const Aabb box = bounds(c);
    return py::make_tuple(py::make_tuple(box.min.x, box.min.y, box.min.z),
                          py::make_tuple(box.max.x, box.max.y, box.max.z));
  });

  // metrics; each returns the MetricResult wire dict
  m.def(
      "chamfer",
      [](const PointCloud& a, const PointCloud& b, py::object pre) {
        std::optional<double> p;
        if (!pre.is_none()) p = pre.cast<double>();
        return json_to_py(metrics::chamfer(a, b, p).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("pre_downsample") = py::none());
  m.def(
      "dcd",
      [](const PointCloud& a, const PointCloud& b, double alpha, py::object pre) {
        std::optional<double> p;
        if (!pre.is_none()) p = pre.cast<double>();
        return json_to_py(metrics::dcd(a, b, alpha, p).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("alpha") = 1.0, py::arg("pre_downsample") = py::none());
  m.def(
      "emd",
      [](const PointCloud& a, const PointCloud& b, std::size_t cap) {
        return json_to_py(metrics::emd(a, b, cap).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("size_cap") = 4096);
  m.def(
      "histogram_distance",
      [](const PointCloud& a, const PointCloud& b, const std::string& sampling, int n,
         std::uint64_t seed, double cell, int bins, double order) {
        return json_to_py(metrics::histogram_distance(
                              a, b, sampling_from_args(sampling, n, seed, cell), bins, order)
                              .to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("sampling") = "random", py::arg("n") = 1000,
      py::arg("seed") = 0, py::arg("cell") = 1.0, py::arg("bins") = 256, py::arg("order") = 1.0);
  m.def(
      "icp_rmse",
      [](const PointCloud& source, const PointCloud& target, int max_iterations,
         double convergence_tol, double max_correspondence_dist) {
        metrics::IcpParams params{max_iterations, convergence_tol, max_correspondence_dist};
        return json_to_py(metrics::icp_rmse(source, target, params).to_json());
      },
      py::arg("source"), py::arg("target"), py::arg("max_iterations") = 50,
      py::arg("convergence_tol") = 1e-6, py::arg("max_correspondence_dist") = 2.0);
  m.def(
      "voxel_iou",
      [](const PointCloud& a, const PointCloud& b, double voxel_size) {
        return json_to_py(metrics::voxel_iou(a, b, voxel_size).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("voxel_size") = 0.5);
  m.def(
      "bev_distance",
      [](const PointCloud& a, const PointCloud& b, double cell_size) {
        return json_to_py(metrics::bev_distance(a, b, cell_size).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("cell_size") = 0.5);
  m.def(
      "two_step_compare",
      [](const PointCloud& a, const PointCloud& b, double trigger) {
        return json_to_py(metrics::two_step_compare(a, b, trigger).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("trigger") = 0.9);
  m.def(
      "transfer_intensity",
      [](const PointCloud& sim, const PointCloud& real, double radius) {
        auto r = metrics::transfer_intensity(sim, real, radius);
        return py::make_tuple(std::move(r.cloud), r.matched_fraction);
      },
      py::arg("sim"), py::arg("real"), py::arg("radius") = 1.0);

  // perturbations
  m.def("add_noise", &perturb::add_noise, py::arg("cloud"), py::arg("std"), py::arg("seed"));
  m.def("add_random_outliers", &perturb::add_random_outliers, py::arg("cloud"), py::arg("count"),
        py::arg("seed"));
  m.def("add_clustered_outliers", &perturb::add_clustered_outliers, py::arg("cloud"),
        py::arg("n_clusters"), py::arg("max_points_per_cluster") = 1000,
        py::arg("max_radius") = 1.0, py::arg("max_center_dist") = 20.0, py::arg("seed") = 0);
  m.def("downsample_random", &perturb::downsample_random, py::arg("cloud"), py::arg("fraction"),
        py::arg("seed"));
  m.def("downsample_voxel", &perturb::downsample_voxel, py::arg("cloud"), py::arg("cell"));
  m.def(
      "apply_transform",
      [](const PointCloud& cloud,
         py::array_t<double, py::array::c_style | py::array::forcecast> linear,
         py::array_t<double, py::array::c_style | py::array::forcecast> translation) {
        return perturb::apply_transform(cloud, affine_from_py(linear, translation));
      },
      py::arg("cloud"), py::arg("linear"), py::arg("translation"));

  // synthetic data
  m.def("make_uniform_cloud", &make_uniform_cloud, py::arg("n"), py::arg("half_extent"),
        py::arg("seed"));
  m.def(
      "make_lidar_scan",
      [](std::uint64_t seed, std::size_t ground_points, std::size_t wall_points, int walls) {
        LidarScanOptions opts;
        opts.ground_points = ground_points;
        opts.wall_points = wall_points;
        opts.walls = walls;
        return make_lidar_scan(seed, opts);
      },
      py::arg("seed"), py::arg("ground_points") = 14000, py::arg("wall_points") = 6000,
      py::arg("walls") = 8);

  m.attr("__version__") = "0.1.0";
}
