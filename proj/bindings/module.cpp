// Python bindings for the floorloc core: geometry, raycasting, mining,
// contrastive numerics, the observation model, and the histogram filter.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "floorloc/experiment.hpp"
#include "floorloc/io.hpp"

namespace py = pybind11;
using namespace floorloc;

namespace {

OccupancyGrid grid_from_array(py::array_t<std::uint8_t, py::array::c_style> cells,
                              double resolution, double origin_x, double origin_y) {
    if (cells.ndim() != 2) throw InvalidGrid("cells must be a 2D array [rows=y][cols=x]");
    OccupancyGrid grid(static_cast<int>(cells.shape(1)), static_cast<int>(cells.shape(0)),
                       resolution, Cell::Free, origin_x, origin_y);
    auto view = cells.unchecked<2>();
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx) {
            const std::uint8_t v = view(cy, cx);
            if (v > 2) throw InvalidGrid("cell values must be 0 (free), 1 (occupied), 2 (unknown)");
            grid.at(cx, cy) = static_cast<Cell>(v);
        }
    return grid;
}

py::array_t<std::uint8_t> grid_to_array(const OccupancyGrid& grid) {
    py::array_t<std::uint8_t> out({grid.height, grid.width});
    auto view = out.mutable_unchecked<2>();
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx)
            view(cy, cx) = static_cast<std::uint8_t>(grid.at(cx, cy));
    return out;
}

DepthImage depth_from_array(py::array_t<double, py::array::c_style> values) {
    if (values.ndim() != 2) throw InvalidRange("depth must be a 2D array [rows=v][cols=u]");
    DepthImage img(static_cast<int>(values.shape(1)), static_cast<int>(values.shape(0)));
    auto view = values.unchecked<2>();
    for (int v = 0; v < img.height; ++v)
        for (int u = 0; u < img.width; ++u) img.at(u, v) = view(v, u);
    return img;
}

py::array_t<double> posterior_to_array(const PosteriorGrid& post) {
    py::array_t<double> out({post.height, post.width, post.bins});
    auto view = out.mutable_unchecked<3>();
    for (int cy = 0; cy < post.height; ++cy)
        for (int cx = 0; cx < post.width; ++cx)
            for (int b = 0; b < post.bins; ++b) view(cy, cx, b) = post.at(cx, cy, b);
    return out;
}

FeatureMap features_from_array(py::array_t<double, py::array::c_style> data) {
    if (data.ndim() != 2) throw InvalidRange("features must be a 2D array [N][F]");
    FeatureMap map(static_cast<int>(data.shape(0)), static_cast<int>(data.shape(1)));
    auto view = data.unchecked<2>();
    for (int i = 0; i < map.count; ++i)
        for (int t = 0; t < map.dim; ++t)
            map.row(i)[static_cast<std::size_t>(t)] = view(i, t);
    return map;
}

MatchSet matches_from_list(const std::vector<std::pair<int, int>>& pairs) {
    MatchSet M;
    M.pairs = pairs;
    return M;
}

RayScan scan_from_arrays(double fov, const std::vector<double>& depths) {
    RayScan scan;
    scan.fov = fov;
    scan.angles = scan_angles(static_cast<int>(depths.size()), fov);
    scan.depths = depths;
    scan.validate();
    return scan;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "floorplan localization core: projection geometry, correspondence "
              "mining, contrastive losses, ray scans, and the histogram filter";

    py::register_exception<Error>(m, "FloorlocError");

    // ---- geometry -----------------------------------------------------------
    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
                 CameraIntrinsics K{fx, fy, cx, cy, width, height};
                 K.validate();
                 return K;
             }),
             py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
             py::arg("height"))
        .def_readonly("fx", &CameraIntrinsics::fx)
        .def_readonly("fy", &CameraIntrinsics::fy)
        .def_readonly("cx", &CameraIntrinsics::cx)
        .def_readonly("cy", &CameraIntrinsics::cy)
        .def_readonly("width", &CameraIntrinsics::width)
        .def_readonly("height", &CameraIntrinsics::height);

    py::class_<RigidPose3>(m, "RigidPose3")
        .def(py::init([](const Mat3& rotation, const Vec3& translation) {
                 RigidPose3 p{rotation, translation};
                 p.validate(1e-6);
                 return p;
             }),
             py::arg("rotation") = Mat3::Identity(), py::arg("translation") = Vec3::Zero())
        .def_readonly("rotation", &RigidPose3::rotation)
        .def_readonly("translation", &RigidPose3::translation);

    py::class_<Pose2>(m, "Pose2")
        .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
             py::arg("phi") = 0.0)
        .def_readwrite("x", &Pose2::x)
        .def_readwrite("y", &Pose2::y)
        .def_readwrite("phi", &Pose2::phi)
        .def("__repr__", [](const Pose2& p) {
            return "Pose2(x=" + std::to_string(p.x) + ", y=" + std::to_string(p.y) +
                   ", phi=" + std::to_string(p.phi) + ")";
        });

    m.def("unproject", &unproject, py::arg("u"), py::arg("v"), py::arg("d"), py::arg("K"),
          "Back-project a pixel at depth d into the camera frame.");
    m.def("project", &project, py::arg("p_cam"), py::arg("K"),
          "Project a camera-frame point; returns (u, v, depth).");
    m.def("to_world", &to_world, py::arg("p_cam"), py::arg("pose"));
    m.def("to_camera", &to_camera, py::arg("p_world"), py::arg("pose"));
    m.def(
        "depth_to_cloud",
        [](py::array_t<double, py::array::c_style> depth, const CameraIntrinsics& K,
           const RigidPose3& pose, int stride) {
            const PointCloud cloud = depth_to_cloud(depth_from_array(depth), K, pose, stride);
            py::array_t<double> pts({static_cast<py::ssize_t>(cloud.size()),
                                     static_cast<py::ssize_t>(3)});
            auto view = pts.mutable_unchecked<2>();
            for (std::size_t i = 0; i < cloud.size(); ++i)
                for (int t = 0; t < 3; ++t)
                    view(static_cast<py::ssize_t>(i), t) = cloud.points[i](t);
            return pts;
        },
        py::arg("depth"), py::arg("K"), py::arg("pose"), py::arg("stride") = 1,
        "World-frame (N, 3) array of all valid depth pixels.");

    // ---- floorplan ------------------------------------------------------------
    py::class_<OccupancyGrid>(m, "OccupancyGrid")
        .def(py::init(&grid_from_array), py::arg("cells"), py::arg("resolution"),
             py::arg("origin_x") = 0.0, py::arg("origin_y") = 0.0,
             "cells[y][x]: 0 = free, 1 = occupied, 2 = unknown")
        .def_property_readonly("cells", &grid_to_array)
        .def_readonly("width", &OccupancyGrid::width)
        .def_readonly("height", &OccupancyGrid::height)
        .def_readonly("resolution", &OccupancyGrid::resolution)
        .def_readonly("origin_x", &OccupancyGrid::origin_x)
        .def_readonly("origin_y", &OccupancyGrid::origin_y);

    py::class_<RayScan>(m, "RayScan")
        .def(py::init(&scan_from_arrays), py::arg("fov"), py::arg("depths"))
        .def_readonly("fov", &RayScan::fov)
        .def_readonly("angles", &RayScan::angles)
        .def_readonly("depths", &RayScan::depths);

    m.def("raycast", &raycast, py::arg("grid"), py::arg("x"), py::arg("y"), py::arg("angle"),
          py::arg("max_range"), py::arg("unknown_blocks") = true,
          "Distance to the first blocking cell boundary, or max_range.");
    m.def("render_scan", &render_scan, py::arg("grid"), py::arg("pose"), py::arg("rays"),
          py::arg("fov"), py::arg("max_range"), py::arg("unknown_blocks") = true);
    m.def("free_poses", &free_poses, py::arg("grid"));

    // ---- mining ----------------------------------------------------------------
    py::class_<PixelCorrespondenceSet>(m, "PixelCorrespondenceSet")
        .def_readonly("ratio", &PixelCorrespondenceSet::ratio)
        .def_property_readonly("pairs", [](const PixelCorrespondenceSet& set) {
            std::vector<std::tuple<int, int, int, int>> out;
            for (const auto& [a, b] : set.pairs) out.emplace_back(a.u, a.v, b.u, b.v);
            return out;
        });

    m.def(
        "find_correspondences",
        [](py::array_t<double, py::array::c_style> da,
           py::array_t<double, py::array::c_style> db, const CameraIntrinsics& K,
           const RigidPose3& pa, const RigidPose3& pb, double threshold, int pixel_stride) {
            return find_correspondences(depth_from_array(da), depth_from_array(db), K, pa, pb,
                                        threshold, pixel_stride);
        },
        py::arg("depth_a"), py::arg("depth_b"), py::arg("K"), py::arg("pose_a"),
        py::arg("pose_b"), py::arg("threshold") = 0.02, py::arg("pixel_stride") = 1,
        "Mutual-nearest-neighbor pixel matches within the distance threshold.");

    // ---- contrastive -------------------------------------------------------------
    m.def(
        "point_info_nce",
        [](py::array_t<double, py::array::c_style> a, py::array_t<double, py::array::c_style> b,
           const std::vector<std::pair<int, int>>& matches, double tau, bool exclude_self,
           bool widen_pool) {
            InfoNceOptions opt;
            opt.exclude_self = exclude_self;
            opt.widen_pool = widen_pool;
            return point_info_nce(features_from_array(a), features_from_array(b),
                                  matches_from_list(matches), tau, opt);
        },
        py::arg("features_a"), py::arg("features_b"), py::arg("matches"),
        py::arg("tau") = 0.07, py::arg("exclude_self") = false, py::arg("widen_pool") = false);
    m.def(
        "point_info_nce_grad",
        [](py::array_t<double, py::array::c_style> a, py::array_t<double, py::array::c_style> b,
           const std::vector<std::pair<int, int>>& matches, double tau) {
            const FeatureMap A = features_from_array(a);
            const FeatureMap B = features_from_array(b);
            const auto g = point_info_nce_grad(A, B, matches_from_list(matches), tau);
            py::array_t<double> ga({A.count, A.dim}), gb({B.count, B.dim});
            std::copy(g.grad_a.begin(), g.grad_a.end(), ga.mutable_data());
            std::copy(g.grad_b.begin(), g.grad_b.end(), gb.mutable_data());
            return py::make_tuple(ga, gb);
        },
        py::arg("features_a"), py::arg("features_b"), py::arg("matches"), py::arg("tau") = 0.07);
    m.def("combined_loss", &combined_loss, py::arg("l_gcvi"), py::arg("l_vsag"),
          py::arg("w_gcvi") = 1.0, py::arg("w_vsag") = 1.0);

    // ---- observation model ---------------------------------------------------------
    py::class_<DepthDistribution>(m, "DepthDistribution")
        .def(py::init([](std::vector<double> grid, py::array_t<double, py::array::c_style> probs) {
                 if (probs.ndim() != 2 ||
                     probs.shape(1) != static_cast<py::ssize_t>(grid.size()))
                     throw InvalidDistribution("probs must be (rays, len(depth_grid))");
                 DepthDistribution P(static_cast<int>(probs.shape(0)), std::move(grid));
                 std::copy(probs.data(), probs.data() + probs.size(), P.probs.begin());
                 P.validate();
                 return P;
             }),
             py::arg("depth_grid"), py::arg("probs"))
        .def_readonly("rays", &DepthDistribution::rays)
        .def_readonly("hypotheses", &DepthDistribution::hypotheses)
        .def_readonly("depth_grid", &DepthDistribution::depth_grid)
        .def_property_readonly("probs", [](const DepthDistribution& P) {
            py::array_t<double> out({P.rays, P.hypotheses});
            std::copy(P.probs.begin(), P.probs.end(), out.mutable_data());
            return out;
        });

    m.def("uniform_depth_grid", &uniform_depth_grid, py::arg("k") = 64, py::arg("lo") = 0.1,
          py::arg("hi") = 10.0);
    m.def("upsample_rays", &upsample_rays, py::arg("p"), py::arg("v_target"));
    m.def("fuse", &fuse, py::arg("p_single"), py::arg("p_mv"), py::arg("omega"),
          "omega * Upsample(p_single) + (1 - omega) * p_mv, rowwise.");
    m.def("expected_scan", &expected_scan, py::arg("p"), py::arg("fov"));
    m.def("floc_loss", &floc_loss, py::arg("d"), py::arg("d_star"), py::arg("epsilon") = 1e-8,
          py::arg("literal_sign") = false,
          "Mean-L1 plus (1 - cosine) scan loss; literal_sign reproduces the printed form.");
    m.def("observe_oracle", &observe_oracle, py::arg("grid"), py::arg("clutter"), py::arg("gt"),
          py::arg("rays"), py::arg("fov"), py::arg("sigma_m"), py::arg("dropout"),
          py::arg("seed"), py::arg("max_range") = 10.0);

    // ---- filter ------------------------------------------------------------------------
    py::class_<PosteriorGrid>(m, "PosteriorGrid")
        .def_readonly("width", &PosteriorGrid::width)
        .def_readonly("height", &PosteriorGrid::height)
        .def_readonly("bins", &PosteriorGrid::bins)
        .def_property_readonly("probs", &posterior_to_array)
        .def("entropy", &PosteriorGrid::entropy)
        .def("total_mass", &PosteriorGrid::total_mass);

    py::class_<MotionDelta>(m, "MotionDelta")
        .def(py::init<double, double, double, double, double>(), py::arg("dx") = 0.0,
             py::arg("dy") = 0.0, py::arg("dphi") = 0.0, py::arg("sigma_trans") = 0.0,
             py::arg("sigma_rot") = 0.0)
        .def_readwrite("dx", &MotionDelta::dx)
        .def_readwrite("dy", &MotionDelta::dy)
        .def_readwrite("dphi", &MotionDelta::dphi)
        .def_readwrite("sigma_trans", &MotionDelta::sigma_trans)
        .def_readwrite("sigma_rot", &MotionDelta::sigma_rot);

    m.def("likelihood", &likelihood, py::arg("obs"), py::arg("map_scan"),
          py::arg("lambda_depth") = 3.0, py::arg("lambda_shape") = 1.0,
          py::arg("epsilon") = 1e-8);
    m.def(
        "single_frame_localize",
        [](const OccupancyGrid& grid, const RayScan& obs, int bins, double lambda_depth,
           double lambda_shape, double max_range) {
            LikelihoodParams params;
            params.lambda_depth = lambda_depth;
            params.lambda_shape = lambda_shape;
            auto result = single_frame_localize(grid, obs, bins, params, max_range);
            return py::make_tuple(result.best, std::move(result.scores));
        },
        py::arg("grid"), py::arg("obs"), py::arg("bins") = 36, py::arg("lambda_depth") = 3.0,
        py::arg("lambda_shape") = 1.0, py::arg("max_range") = 10.0,
        "Exhaustive pose scoring; returns (best_pose, score_volume).");
    m.def("init_uniform", &init_uniform, py::arg("grid"), py::arg("bins"));
    m.def("predict", &predict, py::arg("posterior"), py::arg("delta"));
    m.def(
        "update",
        [](const PosteriorGrid& post, const OccupancyGrid& grid, const RayScan& obs,
           double lambda_depth, double lambda_shape, double max_range) {
            LikelihoodParams params;
            params.lambda_depth = lambda_depth;
            params.lambda_shape = lambda_shape;
            HypothesisScans scans(grid, post.bins, obs.size(), obs.fov, max_range);
            return update(post, scans, obs, params);
        },
        py::arg("posterior"), py::arg("grid"), py::arg("obs"), py::arg("lambda_depth") = 3.0,
        py::arg("lambda_shape") = 1.0, py::arg("max_range") = 10.0);
    m.def("argmax_pose", &argmax_pose, py::arg("posterior"));
    m.def(
        "track",
        [](const OccupancyGrid& grid, const std::vector<RayScan>& obs,
           const std::vector<MotionDelta>& deltas, int bins, double lambda_depth,
           double lambda_shape, double max_range) {
            TrackParams params;
            params.bins = bins;
            params.like.lambda_depth = lambda_depth;
            params.like.lambda_shape = lambda_shape;
            params.max_range = max_range;
            const TrackResult result = track(grid, obs, deltas, params);
            std::vector<std::pair<Pose2, double>> steps;
            for (const TrackStep& s : result.steps) steps.emplace_back(s.estimate, s.entropy);
            return py::make_tuple(steps, result.posterior);
        },
        py::arg("grid"), py::arg("observations"), py::arg("deltas"), py::arg("bins") = 36,
        py::arg("lambda_depth") = 3.0, py::arg("lambda_shape") = 1.0,
        py::arg("max_range") = 10.0,
        "Full predict/update tracking; returns ([(pose, entropy)], final_posterior).");

    // ---- simulation ------------------------------------------------------------------
    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("seed", &ScenarioSpec::seed)
        .def_readwrite("width_cells", &ScenarioSpec::width_cells)
        .def_readwrite("height_cells", &ScenarioSpec::height_cells)
        .def_readwrite("resolution", &ScenarioSpec::resolution)
        .def_readwrite("rooms", &ScenarioSpec::rooms)
        .def_readwrite("room_min", &ScenarioSpec::room_min)
        .def_readwrite("door_width", &ScenarioSpec::door_width)
        .def_readwrite("clutter_count", &ScenarioSpec::clutter_count)
        .def_readwrite("steps", &ScenarioSpec::steps)
        .def_readwrite("step_length", &ScenarioSpec::step_length)
        .def_readwrite("heading_quantum", &ScenarioSpec::heading_quantum);

    m.def("gen_floorplan", &gen_floorplan, py::arg("spec"));
    m.def("add_clutter", &add_clutter, py::arg("grid"), py::arg("spec"));
    m.def(
        "gen_trajectory",
        [](const OccupancyGrid& clean, const OccupancyGrid& cluttered, const ScenarioSpec& spec,
           int rays, double fov, double sigma_m, double dropout, double max_range) {
            OracleObservationConfig obs;
            obs.rays = rays;
            obs.fov = fov;
            obs.sigma_m = sigma_m;
            obs.dropout = dropout;
            obs.max_range = max_range;
            const Trajectory traj = gen_trajectory(clean, cluttered, spec, obs);
            std::vector<std::tuple<Pose2, MotionDelta, RayScan>> out;
            for (const TrajectoryStep& s : traj.steps)
                out.emplace_back(s.gt, s.delta, s.observation);
            return out;
        },
        py::arg("clean"), py::arg("cluttered"), py::arg("spec"), py::arg("rays") = 40,
        py::arg("fov") = 108.0 * M_PI / 180.0, py::arg("sigma_m") = 0.0,
        py::arg("dropout") = 0.0, py::arg("max_range") = 10.0,
        "[(gt_pose, delta, observation)] along a simulated trajectory.");

    // ---- metrics ----------------------------------------------------------------------
    m.def(
        "success_rate",
        [](const std::vector<std::tuple<double, double, double, double, double, double>>& rows,
           double radius, std::optional<double> max_angle) {
            std::vector<LocalizationRecord> records;
            int seq = 0;
            for (const auto& [ex, ey, ephi, gx, gy, gphi] : rows)
                records.push_back({seq++, 0, {ex, ey, ephi}, {gx, gy, gphi}});
            return success_rate(records, radius, max_angle);
        },
        py::arg("records"), py::arg("radius"), py::arg("max_angle") = std::nullopt,
        "records: [(est_x, est_y, est_phi, gt_x, gt_y, gt_phi)], one per sequence.");
}
