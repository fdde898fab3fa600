#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ajd/model.hpp"
#include "ajd/rng.hpp"

namespace ajd {

// Piecewise record of one path: every grid epoch plus every jump epoch
// (post-jump state). Volatility factors are nonnegative at every epoch.
struct PathSample {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> jump_epochs;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::string scheme = "euler-full-truncation/thinning";
};

// The path observed on the grid {0, delta, ..., n delta}.
struct SkeletonSample {
    double delta = 0.0;
    std::vector<Vec> states;
    std::uint64_t seed = 0;
};

// Visitor invoked at t = 0 and at every recorded epoch; return false to stop
// the walk early. The Vec reference is only valid during the call.
using PathVisitor = std::function<bool(double t, const Vec& x, bool is_jump)>;

// Euler-Maruyama with full truncation on the volatility factors; jumps by
// per-step thinning under a locally dominating rate (3-sigma margin on the
// intensity, doubled on the rare excursions, at most 5 retries).
void walk_path(const ModelSpec& spec, const Vec& x0, double T, double dt, SplitMix64 rng,
               const PathVisitor& visit);

PathSample simulate_path(const ModelSpec& spec, const Vec& x0, double T, double dt,
                         std::uint64_t seed);

SkeletonSample simulate_skeleton(const ModelSpec& spec, const Vec& x0, double delta, long n,
                                 double dt, std::uint64_t seed);

// Exact transition draw for the 1-D square-root diffusion
// dX = (b + beta X) dt + sqrt(alpha X) dW, beta < 0, via the noncentral
// chi-square law with 4b/alpha degrees of freedom. Used as the scheme-bias
// oracle.
double cir_exact_step(double b, double beta, double alpha, double x, double delta,
                      SplitMix64& rng);

Vec sample_jump(const JumpDist& dist, SplitMix64& rng);

}  // namespace ajd
