#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ajd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Tolerance for treating a symmetric matrix as PSD.
inline constexpr double kPsdTol = 1e-8;
// Eigenvalues with real part in [-kStabilityTol, kStabilityTol] are treated
// as the unresolved boundary case.
inline constexpr double kStabilityTol = 1e-10;

inline constexpr std::uint64_t kDefaultSeed = 1234567;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Symmetrize before any PSD test; inputs may carry round-off asymmetry.
inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace ajd
