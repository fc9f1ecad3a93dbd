#pragma once

#include <span>
#include <utility>
#include <vector>

#include "floorloc/error.hpp"

namespace floorloc {

enum class FeatureOrigin { Pixel2D, Point3D };

/// N feature vectors of dimension F, row-major.
struct FeatureMap {
    int count = 0;
    int dim = 0;
    std::vector<double> data;
    FeatureOrigin origin = FeatureOrigin::Pixel2D;
    bool unit_norm = false;

    FeatureMap() = default;
    FeatureMap(int n, int f, FeatureOrigin o = FeatureOrigin::Pixel2D)
        : count(n), dim(f), data(static_cast<std::size_t>(n) * f, 0.0), origin(o) {}

    std::span<const double> row(int i) const {
        return {data.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<double> row(int i) {
        return {data.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }

    /// Checks finiteness, and unit norms (within 1e-9) when the flag is set.
    void validate() const;
};

/// Anchor/positive index pairs: anchors index map A, positives index map B.
struct MatchSet {
    std::vector<std::pair<int, int>> pairs;

    std::size_t size() const { return pairs.size(); }
};

struct InfoNceOptions {
    /// Drop the anchor's own positive from the denominator pool. The printed
    /// formula keeps it; off by default.
    bool exclude_self = false;
    /// Use every vector of B as the negative pool instead of the positives of
    /// the match set.
    bool widen_pool = false;
};

/// PointInfoNCE: -sum_{(i,j) in M} log softmax over the pool of dot(f_i, f_k)/tau,
/// with the pool defaulting to the positives of M itself. Max-subtraction keeps
/// the evaluation stable for large similarities.
double point_info_nce(const FeatureMap& A, const FeatureMap& B, const MatchSet& M,
                      double tau, const InfoNceOptions& options = {});

struct InfoNceGradients {
    std::vector<double> grad_a;  // same shape as A.data
    std::vector<double> grad_b;  // same shape as B.data
};

/// Analytic gradients of point_info_nce with respect to both feature maps.
InfoNceGradients point_info_nce_grad(const FeatureMap& A, const FeatureMap& B,
                                     const MatchSet& M, double tau,
                                     const InfoNceOptions& options = {});

/// Weighted sum of the two contrastive terms (default weighting 1:1).
double combined_loss(double l_gcvi, double l_vsag, double w_gcvi = 1.0,
                     double w_vsag = 1.0);

}  // namespace floorloc
