#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ajd/simulate.hpp"
#include "ajd/stability.hpp"

namespace ajd {

// Registry of test functionals with polynomial (or bounded) growth, so the
// moment-weighted norm conditions hold by construction.
class Functional {
  public:
    enum class Kind { Identity, CoordinatePower, IndicatorBox };

    static Functional identity();
    static Functional coordinate_power(int coord, int power);
    static Functional indicator_box(const Vec& lo, const Vec& hi);

    Kind kind() const { return kind_; }
    const std::string& id() const { return id_; }
    int out_dim(int d) const { return kind_ == Kind::Identity ? d : 1; }
    Vec operator()(const Vec& x) const;

  private:
    Kind kind_ = Kind::Identity;
    std::string id_ = "identity";
    int coord_ = 0;
    int power_ = 1;
    Vec lo_, hi_;
};

// Trapezoid between recorded epochs, divided by the horizon.
Vec time_average(const PathSample& path, const Functional& h);

// Arithmetic mean of h(X(i delta)), i = 1..n.
Vec skeleton_average(const SkeletonSample& skel, const Functional& h);

// Nonoverlapping batch means estimator of the long-run variance of a
// stationary sequence: (L/(nb-1)) sum_j (m_j - mbar)(m_j - mbar)'.
Mat batch_means_variance(const std::vector<Vec>& series, int nbatches);

// Corollary limits for the identity functional:
//   v = -(beta + E(Z)kappa')^{-1} (b + lambda E(Z))
//   Sigma = A(a + lambda E(ZZ'))A' + sum_i v_i A(alpha_i + kappa_i E(ZZ'))A',
// with A = -(beta + E(Z)kappa')^{-1}.
Vec corollary_mean(const ModelSpec& spec);
Mat corollary_cov(const ModelSpec& spec);

struct ErgodicReport {
    std::string h_id;
    bool skeleton = false;
    double horizon = 0.0;  // T (continuous) or n (skeleton)
    Vec average;
    int batch_count = 0;
    Mat bm_variance;   // batch-means estimate of the FCLT variance
    Vec ci_halfwidth;  // 95%
    std::optional<Vec> target;
    Vec z_scores;  // empty without a target
};

// Default batch count: floor(sqrt(#observations)) capped at 200.
int default_batch_count(long n_observations);

// One long run, streamed: continuous time average with batch means over
// equal time windows. nbatches <= 0 picks the default (observations = steps).
ErgodicReport ergodic_report_continuous(const ModelSpec& spec, const Vec& x0, double T, double dt,
                                        std::uint64_t seed, const Functional& h, int nbatches = 0,
                                        const std::optional<Vec>& target = std::nullopt);

ErgodicReport ergodic_report_skeleton(const ModelSpec& spec, const Vec& x0, double delta, long n,
                                      double dt, std::uint64_t seed, const Functional& h,
                                      int nbatches = 0,
                                      const std::optional<Vec>& target = std::nullopt);

struct FcltReport {
    int replicates = 0;
    double horizon = 0.0;
    std::vector<double> normalized;  // standardized endpoint sums
    double quantile_correlation = 0.0;
    double variance_slope = 0.0;  // log-log slope of Var(block sum) vs block size
    std::vector<double> block_sizes;
    std::vector<double> block_variances;
};

// Independent replicates of the normalized additive functional
// sqrt(T)(time_average - center), standardized by the Corollary covariance
// (identity h) or a pooled batch estimate. Requires an exponentially ergodic
// classification. Uses the first output component of h.
FcltReport fclt_diagnostic(const ModelSpec& spec, const Functional& h, int replicates,
                           double horizon, int finest_blocks = 8, double dt = 1e-3,
                           std::uint64_t seed = kDefaultSeed);

}  // namespace ajd
