#pragma once

#include <string>
#include <vector>

#include "ajd/model.hpp"
#include "ajd/simulate.hpp"

namespace ajd {

// Frequency grid for the conditional-characteristic-function moment
// conditions; purely imaginary points keep the transform domain valid for
// any admissible parameters.
struct MomentGrid {
    std::vector<CVec> u_points;
    double delta = 0.5;
};

// {0.5i, i, 2i} along each coordinate direction.
MomentGrid default_grid(int d, double delta);

// Per-u residual e^{u'y} - exp(phi(delta,u) + psi(delta,u)'x); conditional
// mean zero at the true parameters.
CVec moment_residual(const ModelSpec& spec, const MomentGrid& grid, const Vec& x, const Vec& y);

// Consecutive skeleton transitions (x_k, y_k) = (X(k delta), X((k+1) delta)).
struct TransitionData {
    std::vector<Vec> x;
    std::vector<Vec> y;

    static TransitionData from_skeleton(const SkeletonSample& skel);
};

// Scalar parameter references for the fit: "lambda", "b[i]", "kappa[i]",
// "beta[i][j]", "a[i][j]", "alpha[k][i][j]"; bare "b"/"beta"/"alpha"/"kappa"
// address the leading entry. Matrix entries are kept symmetric on write.
struct ParamRef {
    enum class Field { B, Beta, A, Alpha, Lambda, Kappa };
    Field field = Field::Beta;
    int k = 0, i = 0, j = 0;
    std::string name;
};

ParamRef parse_param_ref(const std::string& text, int d);
double get_param(const ModelSpec& spec, const ParamRef& ref);
void set_param(ModelSpec& spec, const ParamRef& ref, double value);

// gbar' W gbar with gbar the mean residual stacked as
// [Re g_1, Im g_1, Re g_2, ...]; +inf when the embedded parameters are not
// admissible or the transform leaves its domain.
double gmm_objective(const ModelSpec& spec, const TransitionData& data, const MomentGrid& grid,
                     const Mat& weight);

double gmm_objective(const ModelSpec& spec, const TransitionData& data, const MomentGrid& grid);

struct FitOptions {
    long budget = 400;      // max objective evaluations
    int restarts = 2;
    std::uint64_t seed = kDefaultSeed;
    double initial_step = 0.25;
    double xtol = 1e-6;
    double ftol = 1e-12;
};

struct FitResult {
    std::vector<std::string> free_names;
    Vec params;
    double objective = 0.0;
    long iterations = 0;  // objective evaluations used
    bool converged = false;
    ModelSpec spec;  // template with the fitted parameters embedded
};

// Derivative-free simplex descent with seeded restarts; deterministic given
// (seed, budget). An empty free list returns the template unchanged.
FitResult fit(const TransitionData& data, const ModelSpec& template_spec,
              const std::vector<std::string>& free_params, const MomentGrid& grid,
              const FitOptions& options = {});

}  // namespace ajd
