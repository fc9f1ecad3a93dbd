#include "floorloc/obsmodel.hpp"

#include <algorithm>
#include <cmath>

namespace floorloc {

void DepthDistribution::validate() const {
    if (rays < 1 || hypotheses < 1) throw InvalidDistribution("empty distribution");
    if (depth_grid.size() != static_cast<std::size_t>(hypotheses) ||
        probs.size() != static_cast<std::size_t>(rays) * hypotheses)
        throw InvalidDistribution("buffer size mismatch");
    for (std::size_t k = 1; k < depth_grid.size(); ++k)
        if (!(depth_grid[k] > depth_grid[k - 1]) || !std::isfinite(depth_grid[k]))
            throw InvalidDistribution("depth grid must be finite and increasing");
    for (int i = 0; i < rays; ++i) {
        double sum = 0.0;
        for (double p : row(i)) {
            if (!(p >= 0.0)) throw InvalidDistribution("negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidDistribution("row does not sum to 1");
    }
}

std::vector<double> uniform_depth_grid(int k, double lo, double hi) {
    if (k < 1 || !(lo < hi)) throw InvalidRange("bad depth grid spec");
    std::vector<double> grid(static_cast<std::size_t>(k));
    if (k == 1) {
        grid[0] = lo;
        return grid;
    }
    for (int i = 0; i < k; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (k - 1);
    return grid;
}

DepthDistribution upsample_rays(const DepthDistribution& P, int v_target) {
    if (v_target < P.rays) throw DownsampleNotSupported("v_target below source ray count");
    if (v_target == P.rays) return P;

    DepthDistribution out(v_target, P.depth_grid);
    const int V = P.rays, K = P.hypotheses;
    for (int j = 0; j < v_target; ++j) {
        auto dst = out.row(j);
        if (V == 1) {
            std::copy(P.row(0).begin(), P.row(0).end(), dst.begin());
        } else {
            // Endpoint-aligned position in source row space.
            const double x = static_cast<double>(j) * (V - 1) / (v_target - 1);
            const int i0 = std::min(static_cast<int>(std::floor(x)), V - 2);
            const double f = x - i0;
            const auto r0 = P.row(i0), r1 = P.row(i0 + 1);
            for (int k = 0; k < K; ++k) dst[k] = (1.0 - f) * r0[k] + f * r1[k];
        }
        double sum = 0.0;
        for (double p : dst) sum += p;
        if (sum > 0.0)
            for (double& p : dst) p /= sum;
    }
    return out;
}

DepthDistribution fuse(const DepthDistribution& P_single, const DepthDistribution& P_mv,
                       double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidWeight("omega must lie in [0, 1]");
    if (P_single.hypotheses != P_mv.hypotheses || P_single.depth_grid != P_mv.depth_grid)
        throw HypothesisGridMismatch("inputs must share one depth-hypothesis grid");

    if (omega == 1.0) return upsample_rays(P_single, P_mv.rays);
    if (omega == 0.0) return P_mv;

    const DepthDistribution up = upsample_rays(P_single, P_mv.rays);
    DepthDistribution out(P_mv.rays, P_mv.depth_grid);
    for (std::size_t t = 0; t < out.probs.size(); ++t)
        out.probs[t] = omega * up.probs[t] + (1.0 - omega) * P_mv.probs[t];
    return out;
}

RayScan expected_scan(const DepthDistribution& P, double fov) {
    RayScan scan;
    scan.fov = fov;
    scan.angles = scan_angles(P.rays, fov);
    scan.depths.resize(static_cast<std::size_t>(P.rays));
    for (int i = 0; i < P.rays; ++i) {
        const auto r = P.row(i);
        double e = 0.0;
        for (int k = 0; k < P.hypotheses; ++k) e += r[k] * P.depth_grid[static_cast<std::size_t>(k)];
        scan.depths[static_cast<std::size_t>(i)] = e;
    }
    return scan;
}

double floc_loss(const RayScan& d, const RayScan& d_star, double epsilon, bool literal_sign) {
    if (d.size() != d_star.size() || std::abs(d.fov - d_star.fov) > 1e-12)
        throw ScanShapeMismatch("scans differ in ray count or fov");
    const int v = d.size();
    double l1 = 0.0, dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < v; ++i) {
        const double a = d.depths[static_cast<std::size_t>(i)];
        const double b = d_star.depths[static_cast<std::size_t>(i)];
        l1 += std::abs(a - b);
        dot += a * b;
        na += a * a;
        nb += b * b;
    }
    l1 /= v;
    const double cosine = dot / std::max(std::sqrt(na) * std::sqrt(nb), epsilon);
    return literal_sign ? l1 + cosine : l1 + (1.0 - cosine);
}

RayScan OracleObservationSource::observe(const Pose2& gt) {
    RayScan scan = render_scan(*grid_, gt, config_.rays, config_.fov, config_.max_range,
                               config_.unknown_blocks);
    for (double& d : scan.depths) {
        d += config_.sigma_m * rng_.normal();
        d = std::clamp(d, 0.0, config_.max_range);
    }
    for (double& d : scan.depths)
        if (rng_.uniform() < config_.dropout) d = config_.max_range;
    return scan;
}

RayScan observe_oracle(const OccupancyGrid& grid, const OccupancyGrid& clutter,
                       const Pose2& gt, int v, double fov, double sigma_m,
                       double dropout, std::uint64_t seed, double max_range) {
    if (clutter.width != grid.width || clutter.height != grid.height ||
        clutter.resolution != grid.resolution)
        throw InvalidGrid("clutter grid geometry differs from floorplan");
    OracleObservationConfig config;
    config.rays = v;
    config.fov = fov;
    config.sigma_m = sigma_m;
    config.dropout = dropout;
    config.max_range = max_range;
    OracleObservationSource source(clutter, config, seed);
    return source.observe(gt);
}

}  // namespace floorloc
