#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ajd/limits.hpp"
#include "ajd/simulate.hpp"
#include "oracles.hpp"

using namespace ajd;

namespace {

ModelSpec cir_jump_spec(double beta = -1.0, double kappa = 1.0) {
    return make_cir(1.0, beta, 1.0, 1.0, kappa, JumpDist::product({Exponential{2.0}}));
}

double cir_mean(double b, double beta, double x0, double t) {
    const double e = std::exp(beta * t);
    return x0 * e + b * (e - 1.0) / beta;
}

}  // namespace

TEST_CASE("jump-free paths have no jump epochs and stay on the grid") {
    const auto spec = make_cir(1.0, -1.0, 1.0);
    const auto path = simulate_path(spec, Vec::Ones(1), 2.0, 1e-2, 99);
    CHECK(path.jump_epochs.empty());
    CHECK_EQ(path.times.size(), 201);
    CHECK_EQ(path.times.front(), 0.0);
    CHECK_EQ(path.times.back(), doctest::Approx(2.0));
}

TEST_CASE("path invariants: nonnegative volatility factors, increasing times, jump bookkeeping") {
    const auto spec = cir_jump_spec();
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const auto path = simulate_path(spec, Vec::Constant(1, 0.2), 10.0, 1e-3, seed);
        for (size_t k = 0; k < path.times.size(); ++k) {
            CHECK(path.states[k][0] >= 0.0);
            if (k) CHECK(path.times[k] >= path.times[k - 1]);
        }
        for (double tj : path.jump_epochs) {
            CHECK(tj >= 0.0);
            CHECK(tj <= 10.0);
        }
        CHECK_EQ(path.times.size(), 10001 + path.jump_epochs.size());
    }
}

TEST_CASE("Euler mean matches the closed-form CIR first moment at 3 SE") {
    const auto spec = make_cir(1.0, -1.0, 1.0);
    const int npaths = 30000;
    const double dt = 4e-3, T = 1.0;
    std::vector<double> endpoints(npaths);
    for (int p = 0; p < npaths; ++p) {
        double last = 0.0;
        walk_path(spec, Vec::Ones(1), T, dt, path_stream(2024, p),
                  [&](double, const Vec& x, bool) {
                      last = x[0];
                      return true;
                  });
        endpoints[p] = last;
    }
    const auto m = oracles::sample_moments(endpoints);
    const double exact = cir_mean(1.0, -1.0, 1.0, T);  // = 1
    CHECK_EQ(exact, doctest::Approx(1.0));
    CHECK(std::abs(m.mean - exact) < 3.0 * m.se + 0.01 * dt);
}

TEST_CASE("weak convergence of the skeleton mean at rate >= O(dt)") {
    const auto spec = make_cir(1.0, -1.0, 1.0);
    const double x0 = 4.0, T = 1.0;
    const double exact = cir_mean(1.0, -1.0, x0, T);
    const std::vector<double> dts = {0.2, 0.1, 0.05};
    std::vector<double> log_bias, log_dt;
    for (double dt : dts) {
        const int npaths = 150000;
        std::vector<double> endpoints(npaths);
        for (int p = 0; p < npaths; ++p) {
            double last = 0.0;
            walk_path(spec, Vec::Constant(1, x0), T, dt,
                      path_stream(7000 + static_cast<int>(1000 * dt), p),
                      [&](double, const Vec& x, bool) {
                          last = x[0];
                          return true;
                      });
            endpoints[p] = last;
        }
        const auto m = oracles::sample_moments(endpoints);
        log_bias.push_back(std::log(std::abs(m.mean - exact)));
        log_dt.push_back(std::log(dt));
    }
    // slope of log|bias| against log dt over the end points
    const double slope = (log_bias.front() - log_bias.back()) / (log_dt.front() - log_dt.back());
    CHECK(slope >= 0.8);
}

TEST_CASE("OU endpoint mean and variance match the closed forms") {
    const auto spec = make_ou(0.5, -1.0, 2.0);  // mean reverts to 0.5
    const double x0 = -2.0, T = 1.0, dt = 2e-3;
    const int npaths = 30000;
    std::vector<double> endpoints(npaths);
    for (int p = 0; p < npaths; ++p) {
        double last = 0.0;
        walk_path(spec, Vec::Constant(1, x0), T, dt, path_stream(31337, p),
                  [&](double, const Vec& x, bool) {
                      last = x[0];
                      return true;
                  });
        endpoints[p] = last;
    }
    const auto m = oracles::sample_moments(endpoints);
    const double e = std::exp(-T);
    const double mean_exact = x0 * e + 0.5 * (1.0 - e);
    const double var_exact = 2.0 * (1.0 - std::exp(-2.0 * T)) / 2.0;
    CHECK(std::abs(m.mean - mean_exact) < 4.0 * m.se);
    CHECK(std::abs(m.sd * m.sd - var_exact) < 0.02 * var_exact + 4.0 * dt);
}

TEST_CASE("correlated diffusion blocks: 2-D mean matches the linear ODE") {
    // alpha_1 couples the factor and dependent coordinates, so the step uses
    // the full PSD square root rather than the diagonal shortcut
    ModelSpec spec;
    spec.d = 2;
    spec.m = 1;
    spec.a = Mat::Zero(2, 2);
    spec.a(1, 1) = 0.5;
    Mat a1(2, 2);
    a1 << 1.0, 0.4, 0.4, 0.6;
    spec.alpha = {a1, Mat::Zero(2, 2)};
    spec.b = (Vec(2) << 1.0, 0.2).finished();
    spec.beta = (Mat(2, 2) << -1.0, 0.0, 0.7, -1.5).finished();
    spec.kappa = Vec::Zero(2);
    spec.jumps = JumpDist::degenerate(Vec::Zero(2));
    REQUIRE(validate_spec(spec).admissible);

    const Vec x0 = (Vec(2) << 2.0, -1.0).finished();
    const double T = 1.0, dt = 0.01;

    // deterministic oracle: RK4 on m' = b + beta m
    Vec mean_exact = x0;
    const int nsteps = 400;
    const double h = T / nsteps;
    for (int k = 0; k < nsteps; ++k) {
        auto f = [&](const Vec& y) { return (spec.b + spec.beta * y).eval(); };
        const Vec k1 = f(mean_exact);
        const Vec k2 = f(mean_exact + 0.5 * h * k1);
        const Vec k3 = f(mean_exact + 0.5 * h * k2);
        const Vec k4 = f(mean_exact + h * k3);
        mean_exact += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    const int npaths = 20000;
    std::vector<double> e1(npaths), e2(npaths);
    for (int p = 0; p < npaths; ++p) {
        Vec last = x0;
        walk_path(spec, x0, T, dt, path_stream(90210, p), [&](double, const Vec& x, bool) {
            last = x;
            return true;
        });
        e1[p] = last[0];
        e2[p] = last[1];
    }
    const auto m1 = oracles::sample_moments(e1);
    const auto m2 = oracles::sample_moments(e2);
    CHECK(std::abs(m1.mean - mean_exact[0]) < 4.0 * m1.se + 0.01);
    CHECK(std::abs(m2.mean - mean_exact[1]) < 4.0 * m2.se + 0.01);
}

TEST_CASE("long-run jump rate matches the stationary intensity") {
    const auto spec = cir_jump_spec();  // effective drift -0.5, v = 3, E Lambda = 4
    const Vec v = corollary_mean(spec);
    CHECK_EQ(v[0], doctest::Approx(3.0));
    const double expected_rate = spec.lambda0 + spec.kappa[0] * v[0];

    const double T = 2000.0;
    long jumps = 0;
    walk_path(spec, Vec::Ones(1), T, 1e-3, SplitMix64(515), [&](double, const Vec&, bool is_jump) {
        jumps += is_jump ? 1 : 0;
        return true;
    });
    const double rate = static_cast<double>(jumps) / T;
    CHECK(std::abs(rate - expected_rate) < 0.35);
}

TEST_CASE("skeleton: n = 0, determinism, seed sensitivity") {
    const auto spec = cir_jump_spec();
    const auto single = simulate_skeleton(spec, Vec::Ones(1), 0.5, 0, 1e-3, 7);
    REQUIRE_EQ(single.states.size(), 1);
    CHECK_EQ(single.states[0][0], 1.0);

    const auto a = simulate_skeleton(spec, Vec::Ones(1), 0.5, 200, 1e-3, 7);
    const auto b = simulate_skeleton(spec, Vec::Ones(1), 0.5, 200, 1e-3, 7);
    REQUIRE_EQ(a.states.size(), 201);
    for (size_t k = 0; k < a.states.size(); ++k) CHECK_EQ(a.states[k][0], b.states[k][0]);

    const auto c = simulate_skeleton(spec, Vec::Ones(1), 0.5, 200, 1e-3, 8);
    bool differs = false;
    for (size_t k = 0; k < a.states.size(); ++k)
        differs = differs || a.states[k][0] != c.states[k][0];
    CHECK(differs);
}

TEST_CASE("paths are reproducible per (seed, path index)") {
    const auto spec = cir_jump_spec();
    const auto run = [&](std::uint64_t seed, std::uint64_t idx) {
        std::vector<double> trace;
        walk_path(spec, Vec::Ones(1), 1.0, 1e-2, path_stream(seed, idx),
                  [&](double, const Vec& x, bool) {
                      trace.push_back(x[0]);
                      return true;
                  });
        return trace;
    };
    CHECK(run(1, 0) == run(1, 0));
    CHECK(run(1, 0) != run(1, 1));
    CHECK(run(1, 1) != run(2, 1));
}

TEST_CASE("thinning with constant intensity produces exponential inter-jump times") {
    // kappa = 0: the dominating rate equals lambda and every candidate lands
    const auto spec = make_cir(1.0, -1.0, 1.0, 20.0, 0.0, JumpDist::product({Exponential{2.0}}));
    std::vector<double> epochs;
    walk_path(spec, Vec::Ones(1), 5000.0, 1e-3, SplitMix64(808),
              [&](double t, const Vec&, bool is_jump) {
                  if (is_jump) epochs.push_back(t);
                  return true;
              });
    REQUIRE(epochs.size() > 90000);
    std::vector<double> gaps(epochs.size() - 1);
    for (size_t k = 1; k < epochs.size(); ++k) gaps[k - 1] = epochs[k] - epochs[k - 1];

    const double d =
        oracles::ks_distance(gaps, [](double t) { return 1.0 - std::exp(-20.0 * t); });
    const double p = oracles::kolmogorov_pvalue(std::sqrt(static_cast<double>(gaps.size())) * d);
    CHECK(p > 1e-3);
}

TEST_CASE("state-dependent thinning keeps multi-factor paths in the state space") {
    ModelSpec spec;
    spec.d = 2;
    spec.m = 1;
    spec.a = Mat::Zero(2, 2);
    spec.a(1, 1) = 1.0;
    Mat a1 = Mat::Zero(2, 2);
    a1(0, 0) = 1.0;
    a1(1, 1) = 0.3;
    spec.alpha = {a1, Mat::Zero(2, 2)};
    spec.b = (Vec(2) << 1.0, 0.0).finished();
    spec.beta = (Mat(2, 2) << -1.0, 0.0, 0.5, -2.0).finished();
    spec.lambda0 = 1.0;
    spec.kappa = (Vec(2) << 1.0, 0.0).finished();
    spec.jumps = JumpDist::product({Exponential{2.0}, Gaussian{0.0, 0.5}});
    REQUIRE(validate_spec(spec).admissible);

    long jumps = 0;
    walk_path(spec, Vec::Zero(2), 50.0, 1e-3, SplitMix64(99),
              [&](double, const Vec& x, bool is_jump) {
                  CHECK(x[0] >= 0.0);
                  jumps += is_jump ? 1 : 0;
                  return true;
              });
    CHECK(jumps > 0);
}

TEST_CASE("coarse steps with jump feedback still track the stationary jump rate") {
    // large diffusion swings at dt = 0.05 exercise the margin-doubling path
    const auto spec = make_cir(1.5, -2.0, 2.0, 1.0, 1.0, JumpDist::product({Exponential{2.0}}));
    const Vec v = corollary_mean(spec);  // (1.5 + 0.5) / 1.5
    CHECK_EQ(v[0], doctest::Approx(4.0 / 3.0));
    const double expected_rate = 1.0 + v[0];

    const double T = 3000.0;
    long jumps = 0;
    walk_path(spec, Vec::Ones(1), T, 0.05, SplitMix64(4242),
              [&](double, const Vec&, bool is_jump) {
                  jumps += is_jump ? 1 : 0;
                  return true;
              });
    const double rate = static_cast<double>(jumps) / T;
    CHECK(std::abs(rate - expected_rate) < 0.25);
}

TEST_CASE("a jump faster than any dominating margin exhausts the retries") {
    // a huge point-mass jump mid-step makes Lambda(X(tau-)) outrun the
    // doubled margins, so the step errors out after five attempts
    const auto spec =
        make_cir(1.0, -1.0, 1.0, 20.0, 1e-3, JumpDist::degenerate(Vec::Constant(1, 1e9)));
    REQUIRE(validate_spec(spec).admissible);
    CHECK_THROWS_AS(simulate_path(spec, Vec::Ones(1), 2.0, 1.0, 31), std::runtime_error);
}

TEST_CASE("intensity blowup trips the numeric guard") {
    const auto spec = cir_jump_spec(-1.0, 4.0);  // transient: effective rate +1
    CHECK_THROWS_AS(simulate_path(spec, Vec::Constant(1, 3e8), 0.01, 1e-3, 5),
                    std::runtime_error);
}

TEST_CASE("cir_exact_step matches the transition mean at 4 SE") {
    SplitMix64 rng(314);
    const double b = 1.0, beta = -1.0, alpha = 1.0, x = 1.7, delta = 0.8;
    const int n = 1000000;
    std::vector<double> draws(n);
    for (int k = 0; k < n; ++k) draws[k] = cir_exact_step(b, beta, alpha, x, delta, rng);
    const auto m = oracles::sample_moments(draws);
    CHECK(std::abs(m.mean - cir_mean(b, beta, x, delta)) < 4.0 * m.se);
}

TEST_CASE("cir_exact_step is continuous at delta -> 0") {
    SplitMix64 rng(271);
    const double x = 1.3;
    double prev_median = 1e9;
    for (double delta : {0.5, 0.05, 0.005}) {
        std::vector<double> dev(20001);
        for (auto& v : dev) v = std::abs(cir_exact_step(1.0, -1.0, 1.0, x, delta, rng) - x);
        std::nth_element(dev.begin(), dev.begin() + 10000, dev.end());
        const double median = dev[10000];
        CHECK(median < prev_median);
        prev_median = median;
    }
    CHECK(prev_median < 0.06);
}

TEST_CASE("cir_exact_step long-run law is Gamma(2b/alpha, -2beta/alpha)") {
    SplitMix64 rng(999);
    const int n = 1000000;
    std::vector<double> chain(n);
    double x = 1.0;
    for (int k = 0; k < n; ++k) {
        x = cir_exact_step(1.0, -1.0, 1.0, x, 1.0, rng);
        chain[k] = x;
    }
    const double d =
        oracles::ks_distance(chain, [](double v) { return oracles::gamma2_cdf(2.0, v); });
    CHECK(d < 0.01);
}

TEST_CASE("cir_exact_step validates its parameters") {
    SplitMix64 rng(1);
    CHECK_THROWS_AS(cir_exact_step(1.0, 0.5, 1.0, 1.0, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(cir_exact_step(0.4, -1.0, 1.0, 1.0, 0.1, rng), std::invalid_argument);
}

TEST_CASE("sample_jump: degenerate draws are the point mass") {
    SplitMix64 rng(5);
    const Vec z0 = (Vec(2) << 0.4, -1.1).finished();
    const auto dist = JumpDist::degenerate(z0);
    for (int k = 0; k < 10; ++k) CHECK((sample_jump(dist, rng) - z0).norm() == 0.0);
}
