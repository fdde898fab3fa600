#pragma once

#include <functional>
#include <vector>

#include "ajd/jumps.hpp"
#include "ajd/types.hpp"

namespace ajd {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss rules from the Golub-Welsch eigenproblem of the Jacobi matrix.
QuadRule gauss_laguerre(int n);  // weight e^{-t} on [0, inf)
QuadRule gauss_hermite(int n);   // weight e^{-t^2} on R

struct NuExpectation {
    double value = 0.0;
    double std_error = 0.0;  // 0 for exact/quadrature evaluation
};

// E f(Z) for the supported jump families. Point masses are exact; up to
// 3 stochastic coordinates use tensor Gauss-Laguerre/Hermite (64 nodes per
// dimension); beyond that a fixed-seed Monte Carlo fallback reports its
// standard error.
NuExpectation nu_expectation(const JumpDist& dist,
                             const std::function<double(const Vec&)>& f,
                             int nodes_per_dim = 64,
                             int mc_samples = 200000);

}  // namespace ajd
