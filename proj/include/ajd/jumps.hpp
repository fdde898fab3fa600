#pragma once

#include <variant>
#include <vector>

#include "ajd/types.hpp"

namespace ajd {

// Per-coordinate jump marginals. The families are chosen so that the mean,
// second moment, and extended transform stay analytic.
struct PointMass {
    double value = 0.0;
};
struct Exponential {
    double rate = 1.0;  // theta > 0, mean 1/theta
};
struct Gaussian {
    double mean = 0.0;
    double var = 1.0;
};
using JumpMarginal = std::variant<PointMass, Exponential, Gaussian>;

// Jump-size distribution nu: either a point mass z0 or a product of
// independent coordinate marginals. Mean and second-moment matrix are cached
// at construction.
class JumpDist {
  public:
    enum class Kind { Degenerate, ProductIndependent };

    JumpDist() : JumpDist(degenerate(Vec::Zero(1))) {}

    static JumpDist degenerate(const Vec& z0);
    static JumpDist product(std::vector<JumpMarginal> components);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(components_.size()); }
    const std::vector<JumpMarginal>& components() const { return components_; }
    const Vec& mean() const { return mean_; }
    const Mat& second_moment() const { return second_; }

    bool is_point_mass() const;  // all components degenerate
    Vec point() const;           // valid only when is_point_mass()

  private:
    JumpDist(Kind k, std::vector<JumpMarginal> comps);

    Kind kind_;
    std::vector<JumpMarginal> components_;
    Vec mean_;
    Mat second_;
};

struct JumpMoments {
    Vec mean;
    Mat second_moment;
    double p_abs_moment = 0.0;  // E||Z||^p
    bool finite = true;         // all supported families have every moment
};

// Analytic mean/second moment; E||Z||^p via tensor quadrature over the
// stochastic coordinates (exact for point masses).
JumpMoments jump_moments(const JumpDist& dist, double p);

// Extended transform  chi(u) = E exp(u'Z)  for complex u. Requires
// Re(u_i) < rate_i on exponential coordinates.
Complex jump_transform(const JumpDist& dist, const CVec& u);

// Largest c such that the transform is defined whenever Re(u_i) < c for
// coordinate i (exponential rate, +inf otherwise).
double transform_domain_bound(const JumpDist& dist, int i);

}  // namespace ajd
