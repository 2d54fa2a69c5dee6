#include <gtest/gtest.h>

#include <cmath>

#include "probpnn/dist.hpp"
#include "probpnn/evaluate.hpp"
#include "probpnn/metrics.hpp"
#include "probpnn/random.hpp"

using namespace probpnn;

namespace {

QuantileForecasts gaussian_quantiles(const std::vector<double>& mu, const std::vector<double>& sigma,
                                     const std::vector<double>& levels) {
    QuantileForecasts q;
    for (double a : levels) {
        std::vector<double> c(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) c[i] = mu[i] + sigma[i] * normal_quantile(a);
        q[a] = c;
    }
    return q;
}

std::vector<double> all_levels() {
    auto s = QuantileSets::standard();
    std::vector<double> v = s.pinball;
    for (auto [lo, hi] : s.coverage) {
        v.push_back(lo);
        v.push_back(hi);
    }
    return v;
}

QuantileForecasts constant_bands(std::size_t t, double lo_value, double hi_value) {
    QuantileForecasts q;
    for (auto [lo, hi] : QuantileSets::standard().coverage) {
        q[lo] = std::vector<double>(t, lo_value);
        q[hi] = std::vector<double>(t, hi_value);
    }
    return q;
}

}  // namespace

TEST(QuantileSets, StandardLevels) {
    const auto s = QuantileSets::standard();
    EXPECT_EQ(s.pinball.size(), 27u);
    EXPECT_TRUE(std::is_sorted(s.pinball.rbegin(), s.pinball.rend()));
    EXPECT_EQ(s.pinball.front(), 0.99);
    EXPECT_EQ(s.pinball.back(), 0.01);
    ASSERT_EQ(s.coverage.size(), 9u);
    double width = 0.0;
    for (auto [lo, hi] : s.coverage) {
        EXPECT_LT(lo, hi);
        width += hi - lo;
    }
    EXPECT_NEAR(width, 4.5, 1e-12);
}

TEST(Crps, PerfectEnsembleIsZero) {
    std::vector<double> ens(4 * 3, 2.0);
    EXPECT_EQ(ncrps(ens, 4, std::vector<double>(3, 2.0), 1.0), 0.0);
}

TEST(Crps, TwoMemberHandExample) {
    const double y = 3.0;
    std::vector<double> m{y - 1, y + 1};
    EXPECT_DOUBLE_EQ(crps_ensemble(m, y), 0.5);
    std::vector<double> ens{y + 1, y - 1};
    EXPECT_DOUBLE_EQ(ncrps(ens, 2, std::vector<double>{y}, 1.0), 0.5);
}

TEST(Crps, SortedFormulaMatchesDoubleSum) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> m(37);
        for (auto& x : m) x = rng.uniform(-3, 3);
        const double y = rng.uniform(-3, 3);
        double a = 0, b = 0;
        for (double xi : m) {
            a += std::fabs(xi - y);
            for (double xj : m) b += std::fabs(xi - xj);
        }
        const double n = static_cast<double>(m.size());
        const double brute = a / n - b / (2 * n * n);
        EXPECT_NEAR(crps_ensemble(m, y), brute, 1e-12);
    }
}

TEST(Crps, Errors) {
    std::vector<double> ens(4, 1.0);
    EXPECT_THROW(ncrps(ens, 2, std::vector<double>{1.0, 1.0}, 0.0), ConfigError);
    EXPECT_THROW(ncrps(ens, 1, std::vector<double>{1.0, 1.0, 1.0, 1.0}, 1.0), ConfigError);
    EXPECT_THROW(ncrps(ens, 2, std::vector<double>{1.0}, 1.0), ConfigError);
}

TEST(Crps, DegenerateEnsembleEqualsNmae) {
    Rng rng(2);
    std::vector<double> mu(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        mu[i] = rng.uniform(0, 10);
        y[i] = rng.uniform(0, 10);
    }
    std::vector<double> ens;
    for (int r = 0; r < 5; ++r) ens.insert(ens.end(), mu.begin(), mu.end());
    EXPECT_NEAR(ncrps(ens, 5, y, 12.0), nmae(mu, y, 12.0), 1e-9);
}

TEST(Pinball, HandExamples) {
    const std::vector<double> y{5.0};
    QuantileForecasts q{{0.5, {3.0}}};
    EXPECT_DOUBLE_EQ(npl(q, y, 1.0, {0.5}), 1.0);
    QuantileForecasts over{{0.9, {7.0}}};
    EXPECT_DOUBLE_EQ(npl(over, y, 1.0, {0.9}), 2.0 * 0.1);
    QuantileForecasts under{{0.9, {3.0}}};
    EXPECT_DOUBLE_EQ(npl(under, y, 2.0, {0.9}), 2.0 * 0.9 / 2.0);
}

TEST(Pinball, PerfectQuantilesAndMissingLevel) {
    const std::vector<double> y{1, 2, 3};
    QuantileForecasts q;
    for (double a : QuantileSets::standard().pinball) q[a] = y;
    EXPECT_EQ(npl(q, y, 3.0), 0.0);
    q.erase(0.5);
    EXPECT_THROW(npl(q, y, 3.0), ConfigError);
}

TEST(Pinball, MatchesDoubleLoop) {
    Rng rng(3);
    const std::size_t t = 50;
    std::vector<double> y(t), mu(t), sigma(t);
    for (std::size_t i = 0; i < t; ++i) {
        y[i] = rng.uniform(0, 20);
        mu[i] = rng.uniform(0, 20);
        sigma[i] = rng.uniform(0.5, 4);
    }
    const auto levels = QuantileSets::standard().pinball;
    const auto q = gaussian_quantiles(mu, sigma, levels);
    double brute = 0.0;
    for (double a : levels)
        for (std::size_t i = 0; i < t; ++i) {
            const double yq = mu[i] + sigma[i] * normal_quantile(a);
            brute += y[i] >= yq ? (y[i] - yq) * a : (yq - y[i]) * (1 - a);
        }
    brute /= (20.0 * t * levels.size());
    EXPECT_NEAR(npl(q, y, 20.0), brute, 1e-12);
}

TEST(Pinball, MedianIsHalfNmae) {
    Rng rng(4);
    std::vector<double> y(40), mu(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = rng.uniform(0, 5);
        mu[i] = rng.uniform(0, 5);
    }
    QuantileForecasts q{{0.5, mu}};
    EXPECT_NEAR(npl(q, y, 5.0, {0.5}), nmae(mu, y, 5.0) / 2.0, 1e-12);
}

TEST(Coverage, StrictBands) {
    const std::vector<double> lo{0, 0}, hi{1, 1};
    EXPECT_EQ(coverage_rate(lo, hi, std::vector<double>{0.5, 0.2}), 1.0);
    EXPECT_EQ(coverage_rate(lo, hi, std::vector<double>{0.0, 1.0}), 0.0);
    EXPECT_EQ(coverage_rate(lo, hi, std::vector<double>{0.5, 1.5}), 0.5);
    EXPECT_THROW(coverage_rate(lo, hi, std::vector<double>{0.5}), ConfigError);
}

TEST(Dicr, AllOrNothingCoverage) {
    const std::vector<double> y(10, 0.0);
    EXPECT_NEAR(dicr(constant_bands(10, -1, 1), y), 4.5, 1e-12);
    EXPECT_NEAR(dicr(constant_bands(10, 1, 2), y), 4.5, 1e-12);
    auto missing = constant_bands(10, -1, 1);
    missing.erase(0.05);
    EXPECT_THROW(dicr(missing, y), ConfigError);
}

TEST(Dicr, CalibratedGaussianHasSmallDeviation) {
    Rng rng(5);
    const std::size_t t = 10000;
    std::vector<double> mu(t), sigma(t), y(t);
    for (std::size_t i = 0; i < t; ++i) {
        mu[i] = rng.uniform(-10, 10);
        sigma[i] = rng.uniform(0.5, 3);
        y[i] = rng.normal(mu[i], sigma[i]);
    }
    const auto q = gaussian_quantiles(mu, sigma, all_levels());
    EXPECT_LE(dicr(q, y), 0.15);
}

TEST(Dicr, InvariantUnderMonotoneTransform) {
    Rng rng(6);
    const std::size_t t = 300;
    std::vector<double> mu(t), sigma(t), y(t);
    for (std::size_t i = 0; i < t; ++i) {
        mu[i] = rng.uniform(-1, 1);
        sigma[i] = rng.uniform(0.2, 1);
        y[i] = rng.normal(mu[i], 1.0);
    }
    auto q = gaussian_quantiles(mu, sigma, all_levels());
    const double before = dicr(q, y);
    auto f = [](double x) { return std::exp(x) + 3.0 * x; };
    for (auto& [a, curve] : q)
        for (auto& v : curve) v = f(v);
    for (auto& v : y) v = f(v);
    EXPECT_DOUBLE_EQ(dicr(q, y), before);
}

TEST(Nmae, Values) {
    const std::vector<double> y{1, 2, 3}, mu{3, 4, 5};
    EXPECT_EQ(nmae(y, y, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(nmae(mu, y, 10.0), 0.2);
    EXPECT_THROW(nmae(mu, y, 0.0), ConfigError);
    EXPECT_THROW(nmae(mu, std::vector<double>{1}, 1.0), ConfigError);
}

TEST(Metrics, ScaleConsistency) {
    Rng rng(7);
    const std::size_t t = 24, n = 200;
    std::vector<double> mu(t), sigma(t), y(t);
    for (std::size_t i = 0; i < t; ++i) {
        mu[i] = rng.uniform(5, 15);
        sigma[i] = rng.uniform(0.5, 2);
        y[i] = rng.uniform(5, 15);
    }
    GaussianForecast g{{}, mu, sigma};
    const auto ens = sample_ensemble(g, n, 3);
    const auto q = gaussian_quantiles(mu, sigma, QuantileSets::standard().pinball);
    const double alpha = 7.5;
    auto scaled = [alpha](std::vector<double> v) {
        for (auto& x : v) x *= alpha;
        return v;
    };
    QuantileForecasts qs;
    for (const auto& [a, c] : q) qs[a] = scaled(c);
    EXPECT_NEAR(ncrps(scaled(ens), n, scaled(y), alpha * 15.0), ncrps(ens, n, y, 15.0), 1e-10);
    EXPECT_NEAR(npl(qs, scaled(y), alpha * 15.0), npl(q, y, 15.0), 1e-10);
    EXPECT_NEAR(nmae(scaled(mu), scaled(y), alpha * 15.0), nmae(mu, y, 15.0), 1e-10);
}

TEST(Ranks, TotalOrderAndTies) {
    EXPECT_EQ(rank_methods({{0.1, 0.2}, {0.3, 0.5}}), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(rank_methods({{0.4, 0.4}}), (std::vector<double>{1.5, 1.5}));
    EXPECT_EQ(rank_row(std::vector<double>{2, 1, 2, 0}), (std::vector<double>{3.5, 2.0, 3.5, 1.0}));
}

TEST(Ranks, HandBuiltTable) {
    // series x methods (A, B, C)
    //   s1: 0.10 0.20 0.30 -> 1 2 3
    //   s2: 0.50 0.40 0.40 -> 3 1.5 1.5
    //   s3: 0.90 0.10 0.50 -> 3 1 2
    const auto r = rank_methods({{0.10, 0.20, 0.30}, {0.50, 0.40, 0.40}, {0.90, 0.10, 0.50}});
    EXPECT_DOUBLE_EQ(r[0], 7.0 / 3.0);
    EXPECT_DOUBLE_EQ(r[1], 4.5 / 3.0);
    EXPECT_DOUBLE_EQ(r[2], 6.5 / 3.0);
}

TEST(Ranks, RowsArePermutationsOfRanks) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(5);
        for (auto& x : s) x = std::round(rng.uniform(0, 4));
        const auto r = rank_row(s);
        double sum = 0.0;
        for (double x : r) sum += x;
        EXPECT_DOUBLE_EQ(sum, 15.0);
    }
}

TEST(Ranks, Errors) {
    EXPECT_THROW(rank_methods({{0.1, std::nan("")}}), ConfigError);
    EXPECT_THROW(rank_methods({{0.1, 0.2}, {0.3}}), ConfigError);
    EXPECT_THROW(rank_methods({}), ConfigError);
}

TEST(ScoreForecasts, ConsistentWithDirectMetrics) {
    Rng rng(9);
    EvaluationInput in;
    for (int f = 0; f < 3; ++f) {
        GaussianForecast g{{}, std::vector<double>(24), std::vector<double>(24)};
        std::vector<double> y(24);
        for (std::size_t i = 0; i < 24; ++i) {
            g.mu[i] = rng.uniform(5, 15);
            g.sigma[i] = rng.uniform(0.5, 2);
            y[i] = rng.normal(g.mu[i], g.sigma[i]);
        }
        in.forecasts.push_back(g);
        in.targets.push_back(y);
    }
    const auto s = score_forecasts(in, 20.0, 1000, 1);
    std::vector<double> y, mu;
    double closed = 0.0;
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t i = 0; i < 24; ++i) {
            y.push_back(in.targets[f][i]);
            mu.push_back(in.forecasts[f].mu[i]);
            closed += crps_gaussian(in.forecasts[f].mu[i], in.forecasts[f].sigma[i], in.targets[f][i]);
        }
    closed /= 72.0 * 20.0;
    EXPECT_NEAR(s.ncrps, closed, 0.05 * closed);
    EXPECT_DOUBLE_EQ(s.nmae, nmae(mu, y, 20.0));
    EXPECT_GE(s.dicr, 0.0);
    EXPECT_LE(s.dicr, 4.5 + 1e-12);
    const auto again = score_forecasts(in, 20.0, 1000, 1);
    EXPECT_EQ(again.ncrps, s.ncrps);
}

TEST(Climatology, MeanAndPopulationStd) {
    const std::vector<double> ref{1, 2, 3, 4};
    const auto g = climatology_forecast(ref, 5);
    EXPECT_EQ(g.mu, std::vector<double>(5, 2.5));
    EXPECT_DOUBLE_EQ(g.sigma[0], std::sqrt(1.25));
    EXPECT_THROW(climatology_forecast(std::vector<double>{}, 5), ConfigError);
}
