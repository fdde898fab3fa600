#include "ajd/model.hpp"

#include <cmath>

namespace ajd {

namespace {

constexpr double kZeroTol = 1e-12;

void check_dims(const ModelSpec& spec) {
    require(spec.d >= 1, "ModelSpec: d must be >= 1");
    require(spec.m >= 0 && spec.m <= spec.d, "ModelSpec: m must lie in [0, d]");
    const auto d = spec.d;
    require(spec.a.rows() == d && spec.a.cols() == d, "ModelSpec: a must be d x d");
    require(static_cast<int>(spec.alpha.size()) == d, "ModelSpec: need d alpha matrices");
    for (const auto& ai : spec.alpha)
        require(ai.rows() == d && ai.cols() == d, "ModelSpec: alpha_i must be d x d");
    require(spec.b.size() == d, "ModelSpec: b must have length d");
    require(spec.beta.rows() == d && spec.beta.cols() == d, "ModelSpec: beta must be d x d");
    require(spec.kappa.size() == d, "ModelSpec: kappa must have length d");
    require(spec.jumps.dim() == d, "ModelSpec: jump distribution dimension mismatch");
}

double min_eigenvalue_sym(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Mat& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + m.cwiseAbs().maxCoeff());
}

}  // namespace

ValidationReport validate_spec(const ModelSpec& spec) {
    check_dims(spec);
    ValidationReport report;
    auto violate = [&](const std::string& field, const std::string& desc) {
        report.violations.push_back({field, desc});
    };

    const int d = spec.d, m = spec.m;

    // (i) a symmetric PSD with a_II = 0
    if (!is_symmetric(spec.a)) violate("a", "not symmetric");
    else if (min_eigenvalue_sym(spec.a) < -kPsdTol) violate("a", "not positive semidefinite");
    if (m > 0 && spec.a.topLeftCorner(m, m).cwiseAbs().maxCoeff() > kZeroTol)
        violate("a", "a_II must vanish");

    // (ii) alpha_i PSD with only the (i,i) entry of the II block nonzero;
    //      alpha_i = 0 for dependent coordinates
    for (int i = 0; i < d; ++i) {
        const auto& ai = spec.alpha[i];
        const std::string name = "alpha[" + std::to_string(i) + "]";
        if (i >= m) {
            if (ai.cwiseAbs().maxCoeff() > kZeroTol) violate(name, "must vanish for i > m");
            continue;
        }
        if (!is_symmetric(ai)) {
            violate(name, "not symmetric");
            continue;
        }
        if (min_eigenvalue_sym(ai) < -kPsdTol) violate(name, "not positive semidefinite");
        Mat ii = ai.topLeftCorner(m, m);
        ii(i, i) = 0.0;
        if (ii.cwiseAbs().maxCoeff() > kZeroTol)
            violate(name, "II block must be alpha_{i,ii} * Id(i)");
    }

    // (iii) b_I >= 0
    for (int i = 0; i < m; ++i)
        if (spec.b[i] < 0.0) violate("b", "b_" + std::to_string(i + 1) + " must be nonnegative");

    // (iv) beta_IJ = 0, beta_II nonnegative off-diagonal
    if (m > 0 && d > m && spec.beta.topRightCorner(m, d - m).cwiseAbs().maxCoeff() > kZeroTol)
        violate("beta", "beta_IJ must vanish");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j && spec.beta(i, j) < 0.0)
                violate("beta", "beta_II off-diagonal must be nonnegative");

    // (v) lambda >= 0, kappa_I >= 0, kappa_J = 0
    if (spec.lambda0 < 0.0) violate("lambda", "must be nonnegative");
    for (int i = 0; i < m; ++i)
        if (spec.kappa[i] < 0.0) violate("kappa", "kappa_I must be nonnegative");
    for (int i = m; i < d; ++i)
        if (std::abs(spec.kappa[i]) > kZeroTol) violate("kappa", "kappa_J must vanish");

    // (vi) jump support contained in the canonical state space
    const auto& comps = spec.jumps.components();
    for (int i = 0; i < m; ++i) {
        const std::string name = "jumps[" + std::to_string(i) + "]";
        if (const auto* pm = std::get_if<PointMass>(&comps[i])) {
            if (pm->value < 0.0) violate(name, "point mass on a volatility factor must be >= 0");
        } else if (std::holds_alternative<Gaussian>(comps[i])) {
            violate(name, "gaussian marginal not supported on a volatility factor");
        }
    }

    // a_JJ strictly positive definite
    if (d > m) {
        const Mat ajj = spec.a.bottomRightCorner(d - m, d - m);
        if (min_eigenvalue_sym(ajj) <= kPsdTol) violate("a", "a_JJ must be strictly positive definite");
    }

    // Feller: 2 b_i > alpha_{i,ii} > 0
    report.feller_ok = true;
    for (int i = 0; i < m; ++i) {
        const double aii = spec.alpha[i](i, i);
        if (!(aii > 0.0)) {
            report.feller_ok = false;
            violate("alpha[" + std::to_string(i) + "]", "alpha_{i,ii} must be strictly positive");
        } else if (!(2.0 * spec.b[i] > aii)) {
            report.feller_ok = false;
            violate("b", "Feller: 2b_" + std::to_string(i + 1) + "=" + std::to_string(2.0 * spec.b[i]) +
                             " <= alpha_" + std::to_string(i + 1) + "=" + std::to_string(aii));
        }
    }

    report.admissible = report.violations.empty();
    return report;
}

bool in_state_space(const ModelSpec& spec, const Vec& x, double tol) {
    require(x.size() == spec.d, "state dimension mismatch");
    for (int i = 0; i < spec.m; ++i)
        if (x[i] < -tol) return false;
    return true;
}

Coefficients eval_coefficients(const ModelSpec& spec, const Vec& x) {
    check_dims(spec);
    if (!in_state_space(spec, x)) throw std::domain_error("eval_coefficients: x outside state space");
    Coefficients out;
    out.drift = spec.b + spec.beta * x;
    out.diffusion = spec.a;
    for (int i = 0; i < spec.m; ++i) out.diffusion += x[i] * spec.alpha[i];
    out.diffusion = symmetrized(out.diffusion);
    out.intensity = spec.lambda0 + spec.kappa.dot(x);
    return out;
}

Mat diffusion_factor(const ModelSpec& spec, const Vec& x) {
    const Mat sig2 = eval_coefficients(spec, x).diffusion;
    Eigen::SelfAdjointEigenSolver<Mat> es(sig2);
    const Vec ev = es.eigenvalues();
    if (ev.minCoeff() < -kPsdTol)
        throw std::domain_error("diffusion_factor: diffusion matrix numerically indefinite");
    Vec sq = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
}

ModelSpec make_cir(double b, double beta, double alpha, double lambda0, double kappa,
                   const JumpDist& jumps) {
    ModelSpec spec;
    spec.d = 1;
    spec.m = 1;
    spec.a = Mat::Zero(1, 1);
    spec.alpha = {Mat::Constant(1, 1, alpha)};
    spec.b = Vec::Constant(1, b);
    spec.beta = Mat::Constant(1, 1, beta);
    spec.lambda0 = lambda0;
    spec.kappa = Vec::Constant(1, kappa);
    spec.jumps = jumps;
    return spec;
}

ModelSpec make_ou(double b, double beta, double a, double lambda0, const JumpDist& jumps) {
    ModelSpec spec;
    spec.d = 1;
    spec.m = 0;
    spec.a = Mat::Constant(1, 1, a);
    spec.alpha = {Mat::Zero(1, 1)};
    spec.b = Vec::Constant(1, b);
    spec.beta = Mat::Constant(1, 1, beta);
    spec.lambda0 = lambda0;
    spec.kappa = Vec::Zero(1);
    spec.jumps = jumps;
    return spec;
}

}  // namespace ajd
