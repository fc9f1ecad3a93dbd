#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "floorloc/io.hpp"
#include "floorloc/rng.hpp"
#include "testutil.hpp"

using namespace floorloc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("floorloc_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("key=value files round trip and reject junk") {
    TempDir dir;
    save_keyvalue(dir.file("a.txt"), {{"alpha", "1.5"}, {"beta", "hello"}});
    const auto kv = load_keyvalue(dir.file("a.txt"));
    CHECK(kv.at("alpha") == "1.5");
    CHECK(kv.at("beta") == "hello");

    std::ofstream(dir.file("bad.txt")) << "no equals sign here\n";
    CHECK_THROWS_AS(load_keyvalue(dir.file("bad.txt")), ParseError);
    CHECK_THROWS_AS(load_keyvalue(dir.file("missing.txt")), IoError);
}

TEST_CASE("intrinsics round trip") {
    TempDir dir;
    const CameraIntrinsics K{500.25, 499.75, 320.5, 239.5, 640, 480};
    save_intrinsics(dir.file("K.txt"), K);
    const CameraIntrinsics L = load_intrinsics(dir.file("K.txt"));
    CHECK(L == K);
}

TEST_CASE("poses round trip and enforce the rotation tolerance") {
    TempDir dir;
    Rng rng(6);
    std::vector<RigidPose3> poses;
    for (int i = 0; i < 5; ++i) poses.push_back(testutil::random_pose(rng));
    save_poses(dir.file("poses.txt"), poses);
    const auto loaded = load_poses(dir.file("poses.txt"));
    REQUIRE(loaded.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK((loaded[i].rotation - poses[i].rotation).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((loaded[i].translation - poses[i].translation).norm() < 1e-15);
    }

    std::ofstream(dir.file("bad.txt")) << "1 0 0 0\n0 2 0 0\n0 0 1 0\n0 0 0 1\n";
    CHECK_THROWS_AS(load_poses(dir.file("bad.txt")), InvalidRotation);
    std::ofstream(dir.file("short.txt")) << "1 0 0\n";
    CHECK_THROWS_AS(load_poses(dir.file("short.txt")), ParseError);
}

TEST_CASE("16-bit depth PNG round trips at millimeter precision") {
    TempDir dir;
    DepthImage depth(17, 9);
    Rng rng(2);
    for (double& v : depth.values) {
        v = rng.uniform() < 0.2 ? 0.0 : std::round(rng.uniform(100.0, 9000.0)) / 1000.0;
    }
    save_depth_png(dir.file("d.png"), depth);
    const DepthImage loaded = load_depth_png(dir.file("d.png"));
    REQUIRE(loaded.width == 17);
    REQUIRE(loaded.height == 9);
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        CHECK(loaded.values[i] == doctest::Approx(depth.values[i]).epsilon(1e-12));
}

TEST_CASE("floorplan PGM and PNG round trips, with unknown mask") {
    TempDir dir;
    OccupancyGrid grid = testutil::box_room(12, 0.05, -0.25, 0.75);
    grid.at(4, 5) = Cell::Occupied;

    for (const char* name : {"map.pgm", "map.png"}) {
        save_floorplan(dir.file(name), dir.file("meta.txt"), grid);
        const OccupancyGrid loaded = load_floorplan(dir.file(name), dir.file("meta.txt"));
        CHECK(loaded.cells == grid.cells);
        CHECK(loaded.resolution == grid.resolution);
        CHECK(loaded.origin_x == grid.origin_x);
        CHECK(loaded.origin_y == grid.origin_y);
    }

    // mask marks two cells Unknown (mask >= 128); rows flip like the raster.
    // write it through save_floorplan's convention: Free cells come out white.
    {
        OccupancyGrid marks(12, 12, 0.05, Cell::Occupied);
        marks.at(2, 2) = Cell::Free;
        marks.at(7, 9) = Cell::Free;
        save_floorplan(dir.file("mask.pgm"), dir.file("mask_meta.txt"), marks);
    }
    const OccupancyGrid with_unknown =
        load_floorplan(dir.file("map.pgm"), dir.file("meta.txt"), dir.file("mask.pgm"));
    CHECK(with_unknown.at(2, 2) == Cell::Unknown);
    CHECK(with_unknown.at(7, 9) == Cell::Unknown);
}

TEST_CASE("ray scan CSV round trips, including full-circle scans") {
    TempDir dir;
    const OccupancyGrid grid = testutil::box_room(20, 0.1);
    const RayScan fan = render_scan(grid, {1.0, 1.0, 0.4}, 11, 1.6, 10.0);
    save_scan_csv(dir.file("fan.csv"), fan);
    const RayScan fan2 = load_scan_csv(dir.file("fan.csv"));
    CHECK(fan2.angles == fan.angles);
    CHECK(fan2.depths == fan.depths);
    CHECK(fan2.fov == doctest::Approx(fan.fov).epsilon(1e-12));

    const RayScan circle = render_scan(grid, {1.0, 1.0, 0.0}, 72, 2.0 * M_PI, 10.0);
    save_scan_csv(dir.file("circle.csv"), circle);
    const RayScan circle2 = load_scan_csv(dir.file("circle.csv"));
    CHECK(circle2.depths == circle.depths);
    CHECK(circle2.fov == 2.0 * M_PI);
}

TEST_CASE("feature file round trip preserves float32 payloads") {
    TempDir dir;
    FeatureMap map(5, 3);
    Rng rng(3);
    for (double& v : map.data) v = static_cast<float>(rng.normal());  // f32-representable
    save_features(dir.file("f.feat"), map);
    const FeatureMap loaded = load_features(dir.file("f.feat"));
    CHECK(loaded.count == 5);
    CHECK(loaded.dim == 3);
    CHECK(loaded.data == map.data);

    std::ofstream(dir.file("junk.feat"), std::ios::binary) << "NOPE";
    CHECK_THROWS_AS(load_features(dir.file("junk.feat")), ParseError);
}

TEST_CASE("match CSV round trip") {
    TempDir dir;
    MatchSet M;
    M.pairs = {{0, 3}, {4, 1}, {2, 2}};
    save_matches_csv(dir.file("m.csv"), M);
    const MatchSet loaded = load_matches_csv(dir.file("m.csv"));
    CHECK(loaded.pairs == M.pairs);
}

TEST_CASE("depth distribution file round trips within float precision") {
    TempDir dir;
    Rng rng(4);
    DepthDistribution dist(6, uniform_depth_grid(16, 0.1, 10.0));
    for (int i = 0; i < 6; ++i) {
        auto row = dist.row(i);
        double sum = 0.0;
        for (double& p : row) {
            p = rng.uniform(0.01, 1.0);
            sum += p;
        }
        for (double& p : row) p /= sum;
    }
    save_distribution(dir.file("p.pdep"), dist);
    const DepthDistribution loaded = load_distribution(dir.file("p.pdep"));
    loaded.validate();
    CHECK(loaded.rays == 6);
    CHECK(loaded.hypotheses == 16);
    for (std::size_t i = 0; i < dist.probs.size(); ++i)
        CHECK(loaded.probs[i] == doctest::Approx(dist.probs[i]).epsilon(1e-6));
}

TEST_CASE("posterior dump round trip and heatmap rendering") {
    TempDir dir;
    const OccupancyGrid grid = testutil::box_room(10, 0.1);
    const PosteriorGrid post = init_uniform(grid, 4);
    save_posterior(dir.file("p.post"), post);
    const PosteriorDump dump = load_posterior(dir.file("p.post"));
    CHECK(dump.width == 10);
    CHECK(dump.height == 10);
    CHECK(dump.bins == 4);
    CHECK(dump.probs.size() == post.probs.size());

    save_heatmap_pgm(dir.file("h.pgm"), post);
    save_heatmap_pgm(dir.file("h2.pgm"), dump);
    CHECK(fs::file_size(dir.file("h.pgm")) > 0);
    CHECK(fs::exists(dir.file("h2.pgm")));
}

TEST_CASE("records CSV round trip") {
    TempDir dir;
    std::vector<LocalizationRecord> records;
    Rng rng(5);
    for (int i = 0; i < 7; ++i) {
        LocalizationRecord r;
        r.sequence = i / 3;
        r.step = i % 3;
        r.estimate = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-M_PI, M_PI)};
        r.ground_truth = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-M_PI, M_PI)};
        records.push_back(r);
    }
    save_records_csv(dir.file("r.csv"), records);
    const auto loaded = load_records_csv(dir.file("r.csv"));
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].sequence == records[i].sequence);
        CHECK(loaded[i].step == records[i].step);
        CHECK(loaded[i].estimate.x == records[i].estimate.x);
        CHECK(loaded[i].ground_truth.phi == records[i].ground_truth.phi);
    }
}

TEST_CASE("xyz cloud round trip") {
    TempDir dir;
    PointCloud cloud;
    Rng rng(8);
    for (int i = 0; i < 50; ++i)
        cloud.points.push_back(Vec3{rng.normal(), rng.normal(), rng.normal()});
    save_xyz(dir.file("c.xyz"), cloud);
    const PointCloud loaded = load_xyz(dir.file("c.xyz"));
    REQUIRE(loaded.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) CHECK(loaded.points[i] == cloud.points[i]);
}

TEST_CASE("trajectory round trip, scans included") {
    TempDir dir;
    ScenarioSpec spec;
    spec.seed = 77;
    spec.width_cells = 32;
    spec.height_cells = 32;
    spec.rooms = 2;
    spec.room_min = 0.8;
    spec.steps = 5;
    const OccupancyGrid grid = gen_floorplan(spec);
    OracleObservationConfig obs;
    obs.rays = 12;
    const Trajectory traj = gen_trajectory(grid, grid, spec, obs);
    save_trajectory(dir.file("traj.csv"), traj);
    const Trajectory loaded = load_trajectory(dir.file("traj.csv"));
    REQUIRE(loaded.steps.size() == traj.steps.size());
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        CHECK(loaded.steps[t].gt.x == traj.steps[t].gt.x);
        CHECK(loaded.steps[t].delta.dphi == traj.steps[t].delta.dphi);
        CHECK(loaded.steps[t].observation.depths == traj.steps[t].observation.depths);
    }
}
