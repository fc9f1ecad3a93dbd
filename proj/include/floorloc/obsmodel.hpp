#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "floorloc/floorplan.hpp"
#include "floorloc/rng.hpp"

namespace floorloc {

/// Per-ray probability distribution over a shared grid of depth hypotheses.
struct DepthDistribution {
    int rays = 0;
    int hypotheses = 0;
    std::vector<double> depth_grid;  // K values, strictly increasing
    std::vector<double> probs;       // V x K, row-major

    DepthDistribution() = default;
    DepthDistribution(int v, std::vector<double> grid)
        : rays(v), hypotheses(static_cast<int>(grid.size())), depth_grid(std::move(grid)),
          probs(static_cast<std::size_t>(v) * depth_grid.size(), 0.0) {}

    std::span<const double> row(int i) const {
        return {probs.data() + static_cast<std::size_t>(i) * hypotheses,
                static_cast<std::size_t>(hypotheses)};
    }
    std::span<double> row(int i) {
        return {probs.data() + static_cast<std::size_t>(i) * hypotheses,
                static_cast<std::size_t>(hypotheses)};
    }

    /// Rows must be nonnegative and sum to 1 within 1e-9; grid increasing.
    void validate() const;
};

/// Uniform depth-hypothesis grid, default K = 64 over [0.1, 10] m.
std::vector<double> uniform_depth_grid(int k = 64, double lo = 0.1, double hi = 10.0);

/// Linear interpolation of rows onto v_target equiangular rays over the same
/// fov, rows renormalized. v_target == rays returns the input unchanged.
DepthDistribution upsample_rays(const DepthDistribution& P, int v_target);

/// omega * Upsample(P_single) + (1 - omega) * P_mv, rowwise. omega = 1 and
/// omega = 0 reproduce the respective inputs exactly.
DepthDistribution fuse(const DepthDistribution& P_single, const DepthDistribution& P_mv,
                       double omega);

/// Per-ray expected depth under P, as a scan over `fov`.
RayScan expected_scan(const DepthDistribution& P, double fov);

/// Depth + shape loss between a predicted and a reference scan:
/// mean-L1 plus (1 - cosine). `literal_sign` adds the cosine instead,
/// reproducing the uncorrected printed form for comparison.
double floc_loss(const RayScan& d, const RayScan& d_star, double epsilon = 1e-8,
                 bool literal_sign = false);

/// Source of ray-scan observations for a trajectory.
class ObservationSource {
public:
    virtual ~ObservationSource() = default;
    virtual RayScan observe(const Pose2& gt) = 0;
    virtual int rays() const = 0;
    virtual double fov() const = 0;
};

struct OracleObservationConfig {
    int rays = 40;
    double fov = 108.0 * M_PI / 180.0;
    double sigma_m = 0.0;    // per-ray Gaussian depth noise
    double dropout = 0.0;    // probability a ray reads max_range
    double max_range = 10.0;
    bool unknown_blocks = true;
};

/// Renders scans from a (possibly cluttered) grid, then corrupts them with
/// seeded Gaussian noise and dropout. Owns its generator, so concurrent
/// trajectories never share state.
class OracleObservationSource : public ObservationSource {
public:
    OracleObservationSource(const OccupancyGrid& render_grid,
                            const OracleObservationConfig& config, std::uint64_t seed)
        : grid_(&render_grid), config_(config), rng_(seed) {}

    RayScan observe(const Pose2& gt) override;
    int rays() const override { return config_.rays; }
    double fov() const override { return config_.fov; }

private:
    const OccupancyGrid* grid_;
    OracleObservationConfig config_;
    Rng rng_;
};

/// One-shot oracle observation: render on the cluttered twin of `grid`, add
/// clamped Gaussian noise, then dropout. Deterministic per seed.
RayScan observe_oracle(const OccupancyGrid& grid, const OccupancyGrid& clutter,
                       const Pose2& gt, int v, double fov, double sigma_m,
                       double dropout, std::uint64_t seed, double max_range = 10.0);

}  // namespace floorloc
