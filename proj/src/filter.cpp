#include "floorloc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floorloc {

double PosteriorGrid::total_mass() const {
    double sum = 0.0;
    for (double p : probs) sum += p;
    return sum;
}

double PosteriorGrid::entropy() const {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

void PosteriorGrid::validate() const {
    if (probs.size() != static_cast<std::size_t>(width) * height * bins ||
        blocked.size() != static_cast<std::size_t>(width) * height)
        throw InvalidGrid("posterior buffer size mismatch");
    for (double p : probs)
        if (!(p >= 0.0)) throw InvalidGrid("negative posterior entry");
    if (std::abs(total_mass() - 1.0) > 1e-9)
        throw InvalidGrid("posterior mass deviates from 1");
    for (int cy = 0; cy < height; ++cy)
        for (int cx = 0; cx < width; ++cx)
            if (cell_blocked(cx, cy))
                for (int b = 0; b < bins; ++b)
                    if (at(cx, cy, b) != 0.0)
                        throw InvalidGrid("mass on a blocked cell");
}

namespace {

double clamped_cosine(double dot, double na2, double nb2, double epsilon) {
    const double denom = std::max(std::sqrt(na2) * std::sqrt(nb2), epsilon);
    return std::clamp(dot / denom, -1.0, 1.0);
}

double likelihood_depths(std::span<const double> a, std::span<const double> b,
                         const LikelihoodParams& params) {
    double l1 = 0.0, dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        l1 += std::abs(a[i] - b[i]);
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    l1 /= static_cast<double>(a.size());
    const double cosine = clamped_cosine(dot, na2, nb2, params.epsilon);
    return std::exp(-params.lambda_depth * l1) * std::exp(-params.lambda_shape * (1.0 - cosine));
}

}  // namespace

double likelihood(const RayScan& obs, const RayScan& map_scan, double lambda_depth,
                  double lambda_shape, double epsilon) {
    if (obs.size() != map_scan.size() || std::abs(obs.fov - map_scan.fov) > 1e-12)
        throw ScanShapeMismatch("observation and map scan differ in shape");
    LikelihoodParams params;
    params.lambda_depth = lambda_depth;
    params.lambda_shape = lambda_shape;
    params.epsilon = epsilon;
    return likelihood_depths(obs.depths, map_scan.depths, params);
}

HypothesisScans::HypothesisScans(const OccupancyGrid& grid, int bins, int v, double fov,
                                 double max_range, bool unknown_blocks)
    : grid_(&grid), bins_(bins), v_(v), fov_(fov), max_range_(max_range),
      unknown_blocks_(unknown_blocks), angles_(scan_angles(v, fov)) {
    if (bins < 1) throw InvalidRange("need at least one orientation bin");
    const std::size_t hypotheses = static_cast<std::size_t>(grid.width) * grid.height * bins;
    store_.resize(hypotheses * static_cast<std::size_t>(v));
    rendered_.assign(hypotheses, 0);
}

std::span<const double> HypothesisScans::depths(int cx, int cy, int b) {
    const std::size_t h =
        (static_cast<std::size_t>(cy) * grid_->width + cx) * bins_ + b;
    double* slot = store_.data() + h * static_cast<std::size_t>(v_);
    if (!rendered_[h]) {
        const double x = grid_->cell_center_x(cx);
        const double y = grid_->cell_center_y(cy);
        const double phi = -M_PI + b * (2.0 * M_PI / bins_);
        for (int i = 0; i < v_; ++i)
            slot[i] = raycast(*grid_, x, y, phi + angles_[static_cast<std::size_t>(i)],
                              max_range_, unknown_blocks_);
        rendered_[h] = 1;
    }
    return {slot, static_cast<std::size_t>(v_)};
}

RayMatchScorer::RayMatchScorer(HypothesisScans& scans, const RayScan& obs,
                               const LikelihoodParams& params)
    : scans_(&scans), obs_(&obs), params_(params) {
    if (obs.size() != scans.rays() || std::abs(obs.fov - scans.fov()) > 1e-12)
        throw ScanShapeMismatch("observation does not match hypothesis scan shape");
}

double RayMatchScorer::score(int cx, int cy, int b, const Pose2&) {
    return likelihood_depths(obs_->depths, scans_->depths(cx, cy, b), params_);
}

namespace {

PosteriorGrid make_posterior_shell(const OccupancyGrid& grid, int bins) {
    PosteriorGrid post;
    post.width = grid.width;
    post.height = grid.height;
    post.bins = bins;
    post.resolution = grid.resolution;
    post.origin_x = grid.origin_x;
    post.origin_y = grid.origin_y;
    post.blocked.resize(static_cast<std::size_t>(grid.width) * grid.height);
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx)
            post.blocked[static_cast<std::size_t>(cy) * grid.width + cx] =
                grid.at(cx, cy) == Cell::Free ? 0 : 1;
    post.probs.assign(static_cast<std::size_t>(grid.width) * grid.height * bins, 0.0);
    return post;
}

void renormalize(PosteriorGrid& post) {
    const double total = post.total_mass();
    if (!(total > 0.0)) throw BeliefCollapsed("posterior mass vanished");
    for (double& p : post.probs) p /= total;
}

}  // namespace

PosteriorGrid init_uniform(const OccupancyGrid& grid, int bins) {
    if (bins < 1) throw InvalidRange("need at least one orientation bin");
    PosteriorGrid post = make_posterior_shell(grid, bins);
    std::size_t free_cells = 0;
    for (std::uint8_t b : post.blocked)
        if (!b) ++free_cells;
    if (free_cells == 0) throw EmptyHypothesisSpace("no Free cells in grid");
    const double p = 1.0 / (static_cast<double>(free_cells) * bins);
    for (int cy = 0; cy < post.height; ++cy)
        for (int cx = 0; cx < post.width; ++cx) {
            if (post.cell_blocked(cx, cy)) continue;
            for (int b = 0; b < bins; ++b) post.at(cx, cy, b) = p;
        }
    return post;
}

SingleFrameResult single_frame_localize(const OccupancyGrid& grid, const RayScan& obs,
                                        int bins, const LikelihoodParams& params,
                                        double max_range, HypothesisScans* cache) {
    obs.validate();
    PosteriorGrid scores = make_posterior_shell(grid, bins);
    bool any_free = false;
    for (std::uint8_t b : scores.blocked)
        if (!b) any_free = true;
    if (!any_free) throw EmptyHypothesisSpace("no Free cells in grid");

    HypothesisScans local(grid, bins, obs.size(), obs.fov, max_range);
    HypothesisScans& scans = cache ? *cache : local;
    RayMatchScorer scorer(scans, obs, params);

    double best = -1.0;
    int best_cx = 0, best_cy = 0, best_b = 0;
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx) {
            if (scores.cell_blocked(cx, cy)) continue;
            for (int b = 0; b < bins; ++b) {
                const double s = scorer.score(cx, cy, b, scores.hypothesis_pose(cx, cy, b));
                scores.at(cx, cy, b) = s;
                if (s > best) {  // strict: ties keep the lowest linear index
                    best = s;
                    best_cx = cx;
                    best_cy = cy;
                    best_b = b;
                }
            }
        }
    renormalize(scores);
    return {scores.hypothesis_pose(best_cx, best_cy, best_b), std::move(scores)};
}

namespace {

std::vector<double> gaussian_kernel(double sigma_cells) {
    if (!(sigma_cells > 0.0)) return {1.0};
    const int hw = static_cast<int>(std::ceil(3.0 * sigma_cells));
    std::vector<double> k(static_cast<std::size_t>(2 * hw + 1));
    double sum = 0.0;
    for (int i = -hw; i <= hw; ++i) {
        const double w = std::exp(-0.5 * (i / sigma_cells) * (i / sigma_cells));
        k[static_cast<std::size_t>(i + hw)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

// dest(x, y) = src(x - sx, y - sy), bilinear, zero outside.
void translate_bilinear(const std::vector<double>& src, std::vector<double>& dst, int w,
                        int h, double sx, double sy) {
    const double fx = std::floor(sx), fy = std::floor(sy);
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    const double ax = sx - fx, ay = sy - fy;
    const double w00 = (1.0 - ax) * (1.0 - ay), w10 = ax * (1.0 - ay);
    const double w01 = (1.0 - ax) * ay, w11 = ax * ay;
    auto read = [&](int x, int y) -> double {
        return (x >= 0 && x < w && y >= 0 && y < h)
                   ? src[static_cast<std::size_t>(y) * w + x]
                   : 0.0;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // source coordinate x - sx splits across the 4 surrounding cells
            const int x1 = x - ix, y1 = y - iy;
            dst[static_cast<std::size_t>(y) * w + x] =
                w00 * read(x1, y1) + w10 * read(x1 - 1, y1) + w01 * read(x1, y1 - 1) +
                w11 * read(x1 - 1, y1 - 1);
        }
}

void convolve_axis(std::vector<double>& data, std::vector<double>& tmp, int w, int h,
                   const std::vector<double>& kernel, bool along_x) {
    if (kernel.size() == 1) return;
    const int hw = static_cast<int>(kernel.size() / 2);
    tmp.assign(data.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -hw; k <= hw; ++k) {
                const int xx = along_x ? x - k : x;
                const int yy = along_x ? y : y - k;
                if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                acc += kernel[static_cast<std::size_t>(k + hw)] *
                       data[static_cast<std::size_t>(yy) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    data.swap(tmp);
}

}  // namespace

PosteriorGrid predict(const PosteriorGrid& post, const MotionDelta& delta) {
    // Exact no-op stays bit-identical.
    if (delta.dx == 0.0 && delta.dy == 0.0 && delta.dphi == 0.0 &&
        delta.sigma_trans <= 0.0 && delta.sigma_rot <= 0.0)
        return post;

    const int w = post.width, h = post.height, bins = post.bins;
    PosteriorGrid out = post;
    const std::vector<double> kernel = gaussian_kernel(delta.sigma_trans / post.resolution);

    // Translation + blur per orientation bin, each in its own heading frame.
    std::vector<double> slice(static_cast<std::size_t>(w) * h);
    std::vector<double> moved(slice.size()), tmp(slice.size());
    for (int b = 0; b < bins; ++b) {
        const double theta = post.bin_center(b);
        const double sx = (std::cos(theta) * delta.dx - std::sin(theta) * delta.dy) /
                          post.resolution;
        const double sy = (std::sin(theta) * delta.dx + std::cos(theta) * delta.dy) /
                          post.resolution;
        for (int cy = 0; cy < h; ++cy)
            for (int cx = 0; cx < w; ++cx)
                slice[static_cast<std::size_t>(cy) * w + cx] = post.at(cx, cy, b);
        translate_bilinear(slice, moved, w, h, sx, sy);
        convolve_axis(moved, tmp, w, h, kernel, true);
        convolve_axis(moved, tmp, w, h, kernel, false);
        for (int cy = 0; cy < h; ++cy)
            for (int cx = 0; cx < w; ++cx)
                out.at(cx, cy, b) = moved[static_cast<std::size_t>(cy) * w + cx];
    }

    // Orientation: circular fractional shift by dphi, then circular blur.
    const double bin_width = 2.0 * M_PI / bins;
    const double shift = delta.dphi / bin_width;
    const double fs = std::floor(shift);
    const int s0 = static_cast<int>(fs);
    const double frac = shift - fs;
    const std::vector<double> rot_kernel = gaussian_kernel(delta.sigma_rot / bin_width);
    const int rhw = static_cast<int>(rot_kernel.size() / 2);
    auto mod_bins = [bins](int b) { return ((b % bins) + bins) % bins; };

    std::vector<double> col(static_cast<std::size_t>(bins)), col2(col.size());
    for (int cy = 0; cy < h; ++cy)
        for (int cx = 0; cx < w; ++cx) {
            for (int b = 0; b < bins; ++b) col[static_cast<std::size_t>(b)] = out.at(cx, cy, b);
            for (int b = 0; b < bins; ++b)
                col2[static_cast<std::size_t>(b)] =
                    (1.0 - frac) * col[static_cast<std::size_t>(mod_bins(b - s0))] +
                    frac * col[static_cast<std::size_t>(mod_bins(b - s0 - 1))];
            if (rot_kernel.size() > 1) {
                for (int b = 0; b < bins; ++b) {
                    double acc = 0.0;
                    for (int k = -rhw; k <= rhw; ++k)
                        acc += rot_kernel[static_cast<std::size_t>(k + rhw)] *
                               col2[static_cast<std::size_t>(mod_bins(b - k))];
                    col[static_cast<std::size_t>(b)] = acc;
                }
                col.swap(col2);
            }
            for (int b = 0; b < bins; ++b) out.at(cx, cy, b) = col2[static_cast<std::size_t>(b)];
        }

    // Mass that moved into walls is removed before renormalizing.
    for (int cy = 0; cy < h; ++cy)
        for (int cx = 0; cx < w; ++cx)
            if (out.cell_blocked(cx, cy))
                for (int b = 0; b < bins; ++b) out.at(cx, cy, b) = 0.0;
    renormalize(out);
    return out;
}

PosteriorGrid update(const PosteriorGrid& post, Scorer& scorer) {
    PosteriorGrid out = post;
    for (int cy = 0; cy < post.height; ++cy)
        for (int cx = 0; cx < post.width; ++cx) {
            if (post.cell_blocked(cx, cy)) continue;
            for (int b = 0; b < post.bins; ++b) {
                const double p = post.at(cx, cy, b);
                if (p == 0.0) continue;
                out.at(cx, cy, b) =
                    p * scorer.score(cx, cy, b, post.hypothesis_pose(cx, cy, b));
            }
        }
    renormalize(out);
    return out;
}

PosteriorGrid update(const PosteriorGrid& post, HypothesisScans& scans, const RayScan& obs,
                     const LikelihoodParams& params) {
    RayMatchScorer scorer(scans, obs, params);
    return update(post, scorer);
}

Pose2 argmax_pose(const PosteriorGrid& post) {
    double best = -1.0;
    int best_cx = 0, best_cy = 0, best_b = 0;
    for (int cy = 0; cy < post.height; ++cy)
        for (int cx = 0; cx < post.width; ++cx)
            for (int b = 0; b < post.bins; ++b)
                if (post.at(cx, cy, b) > best) {
                    best = post.at(cx, cy, b);
                    best_cx = cx;
                    best_cy = cy;
                    best_b = b;
                }
    return post.hypothesis_pose(best_cx, best_cy, best_b);
}

TrackResult track(const OccupancyGrid& grid, std::span<const RayScan> observations,
                  std::span<const MotionDelta> deltas, const TrackParams& params,
                  const std::function<void(int, const PosteriorGrid&)>& on_step) {
    if (observations.empty() || deltas.size() != observations.size())
        throw InvalidRange("need matching, nonempty observation and delta sequences");
    HypothesisScans scans(grid, params.bins, observations[0].size(), observations[0].fov,
                          params.max_range, params.unknown_blocks);
    PosteriorGrid post = init_uniform(grid, params.bins);
    TrackResult result;
    result.steps.reserve(observations.size());
    for (std::size_t t = 0; t < observations.size(); ++t) {
        if (t > 0) post = predict(post, deltas[t]);
        post = update(post, scans, observations[t], params.like);
        result.steps.push_back({argmax_pose(post), post.entropy()});
        if (on_step) on_step(static_cast<int>(t), post);
    }
    result.posterior = std::move(post);
    return result;
}

}  // namespace floorloc
