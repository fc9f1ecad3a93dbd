#include "floorloc/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floorloc {

void FeatureMap::validate() const {
    if (count < 0 || dim < 0 || data.size() != static_cast<std::size_t>(count) * dim)
        throw InvalidRange("feature buffer size mismatch");
    for (double v : data)
        if (!std::isfinite(v)) throw InvalidRange("non-finite feature entry");
    if (unit_norm) {
        for (int i = 0; i < count; ++i) {
            double n2 = 0.0;
            for (double v : row(i)) n2 += v * v;
            if (std::abs(std::sqrt(n2) - 1.0) > 1e-9)
                throw InvalidRange("unit-norm flag set but row norm != 1");
        }
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
}

void check_inputs(const FeatureMap& A, const FeatureMap& B, const MatchSet& M, double tau) {
    if (M.pairs.empty()) throw EmptyMatchSet("loss needs at least one pair");
    if (!(tau > 0.0)) throw InvalidTemperature("tau must be positive");
    if (A.dim != B.dim) throw InvalidRange("feature dimensions differ");
    for (const auto& [i, j] : M.pairs) {
        if (i < 0 || i >= A.count || j < 0 || j >= B.count)
            throw OutOfBounds("match index outside feature map");
    }
}

/// Pool of candidate positives for one anchor. Entries are row indices into B;
/// in the default mode entry k is pair k's positive, so `self` masks the
/// anchor's own occurrence rather than every duplicate of its positive row.
struct Pool {
    std::vector<int> rows;
    int self = -1;  // position inside rows to skip under exclude_self, or -1
};

Pool make_pool(const MatchSet& M, const FeatureMap& B, std::size_t anchor,
               const InfoNceOptions& options) {
    Pool pool;
    if (options.widen_pool) {
        pool.rows.resize(static_cast<std::size_t>(B.count));
        for (int k = 0; k < B.count; ++k) pool.rows[static_cast<std::size_t>(k)] = k;
        if (options.exclude_self) pool.self = M.pairs[anchor].second;
    } else {
        pool.rows.reserve(M.pairs.size());
        for (const auto& [i, j] : M.pairs) pool.rows.push_back(j);
        if (options.exclude_self) pool.self = static_cast<int>(anchor);
    }
    return pool;
}

}  // namespace

double point_info_nce(const FeatureMap& A, const FeatureMap& B, const MatchSet& M,
                      double tau, const InfoNceOptions& options) {
    check_inputs(A, B, M, tau);
    double loss = 0.0;
    std::vector<double> sims;
    for (std::size_t a = 0; a < M.pairs.size(); ++a) {
        const auto anchor = A.row(M.pairs[a].first);
        const double s_pos = dot(anchor, B.row(M.pairs[a].second)) / tau;

        const Pool pool = make_pool(M, B, a, options);
        sims.clear();
        double max_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pool.rows.size(); ++k) {
            if (static_cast<int>(k) == pool.self) continue;
            const double s = dot(anchor, B.row(pool.rows[k])) / tau;
            sims.push_back(s);
            max_sim = std::max(max_sim, s);
        }
        if (sims.empty()) throw EmptyMatchSet("denominator pool empty");

        double sum = 0.0;
        for (double s : sims) sum += std::exp(s - max_sim);
        loss += -s_pos + max_sim + std::log(sum);
    }
    return loss;
}

InfoNceGradients point_info_nce_grad(const FeatureMap& A, const FeatureMap& B,
                                     const MatchSet& M, double tau,
                                     const InfoNceOptions& options) {
    check_inputs(A, B, M, tau);
    InfoNceGradients g;
    g.grad_a.assign(A.data.size(), 0.0);
    g.grad_b.assign(B.data.size(), 0.0);
    const int F = A.dim;
    const double inv_tau = 1.0 / tau;

    std::vector<double> sims;
    std::vector<int> rows;
    for (std::size_t a = 0; a < M.pairs.size(); ++a) {
        const int ia = M.pairs[a].first;
        const int ja = M.pairs[a].second;
        const auto anchor = A.row(ia);

        const Pool pool = make_pool(M, B, a, options);
        sims.clear();
        rows.clear();
        double max_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pool.rows.size(); ++k) {
            if (static_cast<int>(k) == pool.self) continue;
            rows.push_back(pool.rows[k]);
            sims.push_back(dot(anchor, B.row(pool.rows[k])) / tau);
            max_sim = std::max(max_sim, sims.back());
        }
        if (sims.empty()) throw EmptyMatchSet("denominator pool empty");
        double sum = 0.0;
        for (double s : sims) sum += std::exp(s - max_sim);

        double* ga = g.grad_a.data() + static_cast<std::size_t>(ia) * F;
        // dL/ds_k = p_k / tau for pool entries, minus 1/tau at the positive.
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double coef = std::exp(sims[k] - max_sim) / sum * inv_tau;
            const auto bk = B.row(rows[k]);
            double* gb = g.grad_b.data() + static_cast<std::size_t>(rows[k]) * F;
            for (int t = 0; t < F; ++t) {
                ga[t] += coef * bk[t];
                gb[t] += coef * anchor[t];
            }
        }
        const auto bpos = B.row(ja);
        double* gb = g.grad_b.data() + static_cast<std::size_t>(ja) * F;
        for (int t = 0; t < F; ++t) {
            ga[t] -= inv_tau * bpos[t];
            gb[t] -= inv_tau * anchor[t];
        }
    }
    return g;
}

double combined_loss(double l_gcvi, double l_vsag, double w_gcvi, double w_vsag) {
    if (w_gcvi < 0.0 || w_vsag < 0.0) throw InvalidWeight("weights must be >= 0");
    return w_gcvi * l_gcvi + w_vsag * l_vsag;
}

}  // namespace floorloc
