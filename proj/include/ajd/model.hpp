#pragma once

#include <string>
#include <vector>

#include "ajd/jumps.hpp"
#include "ajd/types.hpp"

namespace ajd {

// Affine jump-diffusion on the canonical state space R_+^m x R^{d-m}:
//   drift      b + beta x
//   diffusion  a + sum_i x_i alpha_i
//   intensity  lambda0 + kappa'x,  jump sizes ~ jumps.
// The first m coordinates are the volatility factors. Specs are treated as
// immutable after construction; every operation on them is pure, so sharing
// across threads is safe.
struct ModelSpec {
    int d = 1;
    int m = 0;
    Mat a;
    std::vector<Mat> alpha;
    Vec b;
    Mat beta;
    double lambda0 = 0.0;
    Vec kappa;
    JumpDist jumps;

    bool has_jumps() const { return lambda0 > 0.0 || (kappa.array() != 0.0).any(); }
};

struct Violation {
    std::string field;
    std::string description;
};

struct ValidationReport {
    bool admissible = false;
    bool feller_ok = false;  // 2 b_i > alpha_{i,ii} > 0 for i <= m
    std::vector<Violation> violations;
};

// Checks the admissibility clauses and the Feller/ellipticity conditions.
// Dimension mismatches are hard errors, not violation entries.
ValidationReport validate_spec(const ModelSpec& spec);

inline void require_admissible(const ModelSpec& spec) {
    const auto report = validate_spec(spec);
    if (!report.admissible) {
        std::string msg = "spec not admissible:";
        for (const auto& v : report.violations) msg += " [" + v.field + "] " + v.description + ";";
        throw std::invalid_argument(msg);
    }
}

bool in_state_space(const ModelSpec& spec, const Vec& x, double tol = 0.0);

struct Coefficients {
    Vec drift;
    Mat diffusion;  // sigma sigma', symmetric PSD
    double intensity = 0.0;
};

Coefficients eval_coefficients(const ModelSpec& spec, const Vec& x);

// Symmetric PSD square root of the diffusion matrix at x; errors if the
// matrix is numerically indefinite (min eigenvalue < -1e-8).
Mat diffusion_factor(const ModelSpec& spec, const Vec& x);

// Convenience constructors for the 1-D work-horses.
//   CIR:  dX = (b + beta X) dt + sqrt(alpha X) dW   (+ jumps)
//   OU:   dX = (b + beta X) dt + sqrt(a) dW         (+ jumps)
ModelSpec make_cir(double b, double beta, double alpha, double lambda0 = 0.0,
                   double kappa = 0.0, const JumpDist& jumps = JumpDist::degenerate(Vec::Zero(1)));
ModelSpec make_ou(double b, double beta, double a, double lambda0 = 0.0,
                  const JumpDist& jumps = JumpDist::degenerate(Vec::Zero(1)));

}  // namespace ajd
