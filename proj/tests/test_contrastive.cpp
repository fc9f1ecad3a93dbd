#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "floorloc/contrastive.hpp"
#include "floorloc/rng.hpp"

using namespace floorloc;

namespace {

FeatureMap random_features(Rng& rng, int n, int f, bool normalize = false) {
    FeatureMap map(n, f);
    for (double& v : map.data) v = rng.normal();
    if (normalize) {
        for (int i = 0; i < n; ++i) {
            auto row = map.row(i);
            double norm = 0.0;
            for (double v : row) norm += v * v;
            norm = std::sqrt(norm);
            for (double& v : row) v /= norm;
        }
        map.unit_norm = true;
    }
    map.validate();
    return map;
}

MatchSet diagonal_matches(int m) {
    MatchSet M;
    for (int i = 0; i < m; ++i) M.pairs.emplace_back(i, i);
    return M;
}

// naive double-loop evaluation in extended precision
long double loss_oracle(const FeatureMap& A, const FeatureMap& B, const MatchSet& M,
                        long double tau) {
    long double loss = 0.0L;
    for (const auto& [i, j] : M.pairs) {
        long double pos = 0.0L;
        for (int t = 0; t < A.dim; ++t)
            pos += static_cast<long double>(A.row(i)[static_cast<std::size_t>(t)]) *
                   static_cast<long double>(B.row(j)[static_cast<std::size_t>(t)]);
        long double denom = 0.0L;
        for (const auto& [i2, k] : M.pairs) {
            long double s = 0.0L;
            for (int t = 0; t < A.dim; ++t)
                s += static_cast<long double>(A.row(i)[static_cast<std::size_t>(t)]) *
                     static_cast<long double>(B.row(k)[static_cast<std::size_t>(t)]);
            denom += std::exp(s / tau);
        }
        loss += -std::log(std::exp(pos / tau) / denom);
    }
    return loss;
}

}  // namespace

TEST_CASE("single pair gives zero loss and zero gradients") {
    Rng rng(1);
    const FeatureMap A = random_features(rng, 3, 4);
    const FeatureMap B = random_features(rng, 3, 4);
    MatchSet M;
    M.pairs.emplace_back(1, 2);
    CHECK(point_info_nce(A, B, M, 0.07) == doctest::Approx(0.0));
    const auto g = point_info_nce_grad(A, B, M, 0.07);
    for (double v : g.grad_a) CHECK(std::abs(v) < 1e-14);
    for (double v : g.grad_b) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("uniform similarities give |M| ln |M| at any temperature") {
    // all-equal feature rows force every dot product equal
    FeatureMap A(4, 3), B(4, 3);
    for (double& v : A.data) v = 0.5;
    for (double& v : B.data) v = -0.25;
    const MatchSet M = diagonal_matches(4);
    for (double tau : {1e-3, 0.07, 1.0, 100.0})
        CHECK(point_info_nce(A, B, M, tau) ==
              doctest::Approx(4.0 * std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("matches the extended-precision double-loop oracle") {
    Rng rng(42);
    for (int n = 0; n < 50; ++n) {
        const int m = 8, f = 16;
        const FeatureMap A = random_features(rng, m, f, true);
        const FeatureMap B = random_features(rng, m, f, true);
        const MatchSet M = diagonal_matches(m);
        const double loss = point_info_nce(A, B, M, 0.07);
        const long double expected = loss_oracle(A, B, M, 0.07L);
        CHECK(std::abs(loss - static_cast<double>(expected)) <
              1e-10 * std::max(1.0, std::abs(static_cast<double>(expected))));
    }
}

TEST_CASE("oracle agreement with duplicate indices and cross maps") {
    Rng rng(43);
    const FeatureMap A = random_features(rng, 6, 5);
    const FeatureMap B = random_features(rng, 7, 5);
    MatchSet M;
    M.pairs = {{0, 3}, {2, 3}, {2, 5}, {5, 0}, {1, 1}};
    const double loss = point_info_nce(A, B, M, 0.5);
    CHECK(std::abs(loss - static_cast<double>(loss_oracle(A, B, M, 0.5L))) < 1e-10);
}

TEST_CASE("errors: empty match set and bad temperature") {
    Rng rng(2);
    const FeatureMap A = random_features(rng, 2, 2);
    CHECK_THROWS_AS(point_info_nce(A, A, MatchSet{}, 0.07), EmptyMatchSet);
    CHECK_THROWS_AS(point_info_nce(A, A, diagonal_matches(2), 0.0), InvalidTemperature);
    CHECK_THROWS_AS(point_info_nce(A, A, diagonal_matches(2), -1.0), InvalidTemperature);
    MatchSet bad;
    bad.pairs.emplace_back(0, 5);
    CHECK_THROWS_AS(point_info_nce(A, A, bad, 0.07), OutOfBounds);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(7);
    const double h = 1e-6, tau = 0.07;
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        FeatureMap A = random_features(rng, 6, 5, true);
        FeatureMap B = random_features(rng, 6, 5, true);
        const MatchSet M = diagonal_matches(6);
        const auto g = point_info_nce_grad(A, B, M, tau);
        auto check_map = [&](FeatureMap& map, const std::vector<double>& grad) {
            for (std::size_t t = 0; t < map.data.size(); t += 7) {  // sampled entries
                const double keep = map.data[t];
                map.data[t] = keep + h;
                const double up = point_info_nce(A, B, M, tau);
                map.data[t] = keep - h;
                const double down = point_info_nce(A, B, M, tau);
                map.data[t] = keep;
                const double fd = (up - down) / (2.0 * h);
                const double rel = std::abs(grad[t] - fd) /
                                   std::max({1.0, std::abs(fd), std::abs(grad[t])});
                worst = std::max(worst, rel);
            }
        };
        check_map(A, g.grad_a);
        check_map(B, g.grad_b);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("swapping a symmetric two-pair configuration flips the gradients") {
    FeatureMap A(2, 2), B(2, 2);
    A.row(0)[0] = 1.0;
    A.row(1)[1] = 1.0;
    B.row(0)[0] = 1.0;
    B.row(1)[1] = 1.0;
    const auto g = point_info_nce_grad(A, B, diagonal_matches(2), 0.5);
    // pair 1 is pair 0 with coordinates swapped, so gradients mirror
    CHECK(g.grad_a[0] == doctest::Approx(g.grad_a[3]).epsilon(1e-12));
    CHECK(g.grad_a[1] == doctest::Approx(g.grad_a[2]).epsilon(1e-12));
    CHECK(g.grad_b[0] == doctest::Approx(g.grad_b[3]).epsilon(1e-12));
}

TEST_CASE("property: loss is nonnegative and pool-permutation invariant") {
    Rng rng(11);
    for (int n = 0; n < 40; ++n) {
        const int m = 5;
        const FeatureMap A = random_features(rng, m, 4);
        const FeatureMap B = random_features(rng, m, 4);
        MatchSet M = diagonal_matches(m);
        const double base = point_info_nce(A, B, M, 0.3);
        CHECK(base >= 0.0);
        std::rotate(M.pairs.begin(), M.pairs.begin() + 2, M.pairs.end());
        const double rotated = point_info_nce(A, B, M, 0.3);
        CHECK(rotated == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("property: stable for huge similarity magnitudes") {
    FeatureMap A(3, 1), B(3, 1);
    const double tau = 0.07;
    A.row(0)[0] = 1e4 / tau;
    A.row(1)[0] = -1e4 / tau;
    A.row(2)[0] = 5e3;
    B.row(0)[0] = 1.0;
    B.row(1)[0] = 1.0;
    B.row(2)[0] = -1.0;
    const double loss = point_info_nce(A, B, diagonal_matches(3), tau);
    CHECK(std::isfinite(loss));
    const auto g = point_info_nce_grad(A, B, diagonal_matches(3), tau);
    for (double v : g.grad_a) CHECK(std::isfinite(v));
    for (double v : g.grad_b) CHECK(std::isfinite(v));
}

TEST_CASE("separated features drive the loss to zero as tau -> 0+") {
    // each anchor's own positive is strictly closest
    FeatureMap A(4, 4), B(4, 4);
    for (int i = 0; i < 4; ++i) {
        A.row(i)[static_cast<std::size_t>(i)] = 1.0;
        B.row(i)[static_cast<std::size_t>(i)] = 1.0;
    }
    CHECK(point_info_nce(A, B, diagonal_matches(4), 1e-3) < 1e-6);
}

TEST_CASE("exclude-self pool variant") {
    Rng rng(13);
    const FeatureMap A = random_features(rng, 3, 4);
    const FeatureMap B = random_features(rng, 3, 4);
    InfoNceOptions opt;
    opt.exclude_self = true;
    const double excl = point_info_nce(A, B, diagonal_matches(3), 0.07, opt);
    const double incl = point_info_nce(A, B, diagonal_matches(3), 0.07);
    CHECK(excl < incl);  // dropping the positive from the pool shrinks the denominator
    CHECK_THROWS_AS(point_info_nce(A, B, diagonal_matches(1), 0.07, opt), EmptyMatchSet);
}

TEST_CASE("widened pool uses every row of B") {
    Rng rng(14);
    const FeatureMap A = random_features(rng, 2, 3);
    const FeatureMap B = random_features(rng, 6, 3);
    MatchSet M;
    M.pairs = {{0, 1}, {1, 4}};
    InfoNceOptions opt;
    opt.widen_pool = true;
    // oracle with the pool = all of B
    long double expected = 0.0L;
    for (const auto& [i, j] : M.pairs) {
        auto dot = [&](int a, int b) {
            long double s = 0.0L;
            for (int t = 0; t < 3; ++t)
                s += static_cast<long double>(A.row(a)[static_cast<std::size_t>(t)]) *
                     static_cast<long double>(B.row(b)[static_cast<std::size_t>(t)]);
            return s;
        };
        long double denom = 0.0L;
        for (int k = 0; k < 6; ++k) denom += std::exp(dot(i, k) / 0.07L);
        expected += -(dot(i, j) / 0.07L) + std::log(denom);
    }
    CHECK(point_info_nce(A, B, M, 0.07, opt) ==
          doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
}

TEST_CASE("combined loss weighting") {
    CHECK(combined_loss(2.0, 3.0) == 5.0);
    CHECK(combined_loss(7.25, 0.0, 1.0, 0.0) == 7.25);
    CHECK(combined_loss(1.5, 2.5, 0.3, 0.7) == doctest::Approx(2.2).epsilon(1e-15));
    CHECK_THROWS_AS(combined_loss(1.0, 1.0, -0.1, 1.0), InvalidWeight);
}
