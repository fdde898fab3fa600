#include "ajd/stability.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ajd/quadrature.hpp"

namespace ajd {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Ergodic: return "ERGODIC";
        case Classification::ExpErgodic: return "EXP_ERGODIC";
        case Classification::Transient1d: return "TRANSIENT_1D";
        case Classification::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

double max_real_eigenvalue(const Mat& m) {
    require(m.rows() == m.cols(), "max_real_eigenvalue: matrix must be square");
    Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

Mat effective_drift_matrix(const ModelSpec& spec) {
    return spec.beta + spec.jumps.mean() * spec.kappa.transpose();
}

StabilityReport classify(const ModelSpec& spec, double p) {
    require_admissible(spec);
    require(p > 0.0, "classify: p must be positive");

    StabilityReport report;
    report.eig_beta_max_re = max_real_eigenvalue(spec.beta);
    const bool kappa_zero = !(spec.kappa.array() != 0.0).any();
    const Mat effective = effective_drift_matrix(spec);
    report.eig_effective_max_re = kappa_zero ? report.eig_beta_max_re
                                             : max_real_eigenvalue(effective);

    const double rate = report.eig_effective_max_re;
    if (rate < -kStabilityTol) {
        // Supported jump families have all moments, so the p-moment clause
        // always upgrades to exponential ergodicity.
        report.classification = Classification::ExpErgodic;
        report.p = kappa_zero ? p : std::max(p, 1.0);
        report.H = solve_lyapunov(kappa_zero ? spec.beta : effective);
        report.notes = kappa_zero ? "beta stable, state-independent jumps"
                                  : "beta + E(Z)kappa' stable (strong mean reversion)";
    } else if (rate > kStabilityTol) {
        if (spec.d == 1 && spec.m == 1) {
            report.classification = Classification::Transient1d;
            report.notes = "beta + E(Z)kappa > 0 in one dimension";
        } else {
            report.classification = Classification::Inconclusive;
            report.notes = "effective drift matrix not stable; no multi-d transience criterion";
        }
    } else {
        report.classification = Classification::Inconclusive;
        report.notes = "max real eigenvalue within the boundary strip";
    }
    return report;
}

Mat solve_lyapunov(const Mat& m) {
    require(m.rows() == m.cols(), "solve_lyapunov: matrix must be square");
    const int d = static_cast<int>(m.rows());
    require(max_real_eigenvalue(m) < 0.0, "solve_lyapunov: matrix must be stable");

    // vec(M'H + H M) = (I (x) M' + M' (x) I) vec(H) = -vec(I)
    Mat kron = Mat::Zero(d * d, d * d);
    const Mat mt = m.transpose();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                kron(i + d * j, k + d * j) += mt(i, k);  // I (x) M'
                kron(i + d * j, i + d * k) += mt(j, k);  // M' (x) I
            }
    Vec rhs = Vec::Zero(d * d);
    for (int i = 0; i < d; ++i) rhs[i + d * i] = -1.0;
    Vec h = kron.fullPivLu().solve(rhs);

    Mat H(d, d);
    for (int j = 0; j < d; ++j) H.col(j) = h.segment(d * j, d);
    H = symmetrized(H);

    const double residual = (m.transpose() * H + H * m + Mat::Identity(d, d)).norm();
    if (residual >= 1e-9) throw std::runtime_error("solve_lyapunov: residual too large");
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("solve_lyapunov: H not positive definite");
    return H;
}

GeneratorProbe GeneratorProbe::log_probe(const Mat& H) {
    GeneratorProbe p;
    p.family = Family::Log;
    p.H = symmetrized(H);
    return p;
}

GeneratorProbe GeneratorProbe::power_probe(double pow, const Mat& H) {
    GeneratorProbe p;
    p.family = Family::Power;
    p.p = pow;
    p.H = symmetrized(H);
    return p;
}

GeneratorProbe GeneratorProbe::exp_neg_probe(double epsilon) {
    require(epsilon > 0.0, "exp_neg_probe: epsilon must be positive");
    GeneratorProbe p;
    p.family = Family::ExpNeg;
    p.epsilon = epsilon;
    p.H = Mat::Identity(1, 1);
    return p;
}

double GeneratorProbe::g(const Vec& x) const {
    switch (family) {
        case Family::Log: return std::log1p(x.dot(H * x));
        case Family::Power: return std::pow(1.0 + x.dot(H * x), 0.5 * p);
        case Family::ExpNeg: return 1.0 - std::exp(-epsilon * x[0]);
    }
    return 0.0;
}

Vec GeneratorProbe::grad(const Vec& x) const {
    switch (family) {
        case Family::Log: {
            const double q = 1.0 + x.dot(H * x);
            return (2.0 / q) * (H * x);
        }
        case Family::Power: {
            const double q = 1.0 + x.dot(H * x);
            const double gx = std::pow(q, 0.5 * p);
            return (p * gx / q) * (H * x);
        }
        case Family::ExpNeg:
            return Vec::Constant(1, epsilon * std::exp(-epsilon * x[0]));
    }
    return Vec();
}

Mat GeneratorProbe::hessian(const Vec& x) const {
    switch (family) {
        case Family::Log: {
            const double q = 1.0 + x.dot(H * x);
            const Vec hx = H * x;
            return (2.0 / q) * H - (4.0 / (q * q)) * (hx * hx.transpose());
        }
        case Family::Power: {
            const double q = 1.0 + x.dot(H * x);
            const double gx = std::pow(q, 0.5 * p);
            const Vec hx = H * x;
            return (p * gx / q) * (H + ((p - 2.0) / q) * (hx * hx.transpose()));
        }
        case Family::ExpNeg:
            return Mat::Constant(1, 1, -epsilon * epsilon * std::exp(-epsilon * x[0]));
    }
    return Mat();
}

GeneratorProbe default_probe(const ModelSpec& spec, GeneratorProbe::Family family, double p,
                             double epsilon) {
    if (family == GeneratorProbe::Family::ExpNeg) {
        require(spec.d == 1, "exp-neg probe is 1-D only");
        return GeneratorProbe::exp_neg_probe(epsilon);
    }
    const auto report = classify(spec, p);
    Mat H = report.H ? *report.H : Mat::Identity(spec.d, spec.d);
    return family == GeneratorProbe::Family::Log ? GeneratorProbe::log_probe(H)
                                                 : GeneratorProbe::power_probe(p, H);
}

GeneratorValues generator_apply(const ModelSpec& spec, const GeneratorProbe& probe, const Vec& x) {
    if (!in_state_space(spec, x)) throw std::domain_error("generator_apply: x outside state space");
    if (probe.family == GeneratorProbe::Family::ExpNeg)
        require(spec.d == 1, "exp-neg probe is 1-D only");
    else
        require(probe.H.rows() == spec.d && probe.H.cols() == spec.d,
                "generator_apply: probe H dimension mismatch");

    const auto coeff = eval_coefficients(spec, x);

    GeneratorValues out;
    out.continuous_part =
        probe.grad(x).dot(coeff.drift) + 0.5 * (coeff.diffusion * probe.hessian(x)).trace();

    if (spec.has_jumps()) {
        if (probe.family == GeneratorProbe::Family::ExpNeg) {
            // integral of g(x+z)-g(x) = e^{-eps x} (1 - E e^{-eps Z}), analytic
            const double eps = probe.epsilon;
            CVec u = CVec::Constant(1, Complex(-eps, 0.0));
            const double laplace = jump_transform(spec.jumps, u).real();
            out.jump_part = coeff.intensity * std::exp(-eps * x[0]) * (1.0 - laplace);
        } else if (spec.jumps.is_point_mass()) {
            const Vec z0 = spec.jumps.point();
            out.jump_part = coeff.intensity * (probe.g(x + z0) - probe.g(x));
        } else {
            const double gx = probe.g(x);
            const auto integral = nu_expectation(
                spec.jumps, [&](const Vec& z) { return probe.g(x + z) - gx; });
            out.jump_part = coeff.intensity * integral.value;
            out.jump_std_error = coeff.intensity * integral.std_error;
        }
    }
    out.total = out.continuous_part + out.jump_part;
    return out;
}

ScanReport lyapunov_scan(const ModelSpec& spec, const GeneratorProbe& probe,
                         const std::vector<double>& radii, const std::vector<Vec>& directions) {
    require(!radii.empty() && !directions.empty(), "lyapunov_scan: empty radius/direction set");
    require(probe.family != GeneratorProbe::Family::ExpNeg,
            "lyapunov_scan: use Log or Power probes");
    const auto report = classify(spec);
    require(report.classification != Classification::Inconclusive,
            "lyapunov_scan: classification inconclusive");

    ScanReport scan;
    scan.radii = radii;
    scan.worst_per_radius.assign(radii.size(), 0.0);

    {
        const Mat M = effective_drift_matrix(spec);
        Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(-(probe.H * M + M.transpose() * probe.H)),
                                              Eigen::EigenvaluesOnly);
        scan.gamma_lower = es.eigenvalues().minCoeff();
        Eigen::SelfAdjointEigenSolver<Mat> esH(probe.H, Eigen::EigenvaluesOnly);
        scan.delta_min = esH.eigenvalues().minCoeff();
        scan.delta_max = esH.eigenvalues().maxCoeff();
    }

    Vec worst_state = Vec::Zero(spec.d);
    for (size_t r = 0; r < radii.size(); ++r) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& dir : directions) {
            Vec x = radii[r] * dir.normalized();
            for (int i = 0; i < spec.m; ++i) x[i] = std::max(x[i], 0.0);
            const auto gen = generator_apply(spec, probe, x);
            const double value = probe.family == GeneratorProbe::Family::Log
                                     ? gen.total
                                     : gen.total / probe.g(x);
            if (value > worst) {
                worst = value;
                if (r + 1 == radii.size()) worst_state = x;
            }
        }
        scan.worst_per_radius[r] = worst;
    }

    // Smallest sampled radius with negativity from there on out.
    int idx = -1;
    for (int r = static_cast<int>(radii.size()) - 1; r >= 0; --r) {
        if (scan.worst_per_radius[r] < 0.0) idx = r;
        else break;
    }
    if (idx < 0) {
        scan.found = false;
        scan.violating_state = worst_state;
        scan.worst_value = scan.worst_per_radius.back();
    } else {
        scan.found = true;
        scan.k_star = radii[idx];
        double tail_max = -std::numeric_limits<double>::infinity();
        for (size_t r = idx; r < radii.size(); ++r)
            tail_max = std::max(tail_max, scan.worst_per_radius[r]);
        scan.margin = -tail_max;
    }
    return scan;
}

double transience_rate_1d(const ModelSpec& spec, double epsilon) {
    require(spec.d == 1 && spec.m == 1, "transience_rate_1d: requires d = m = 1");
    require(epsilon > 0.0, "transience_rate_1d: epsilon must be positive");
    const double beta = spec.beta(0, 0);
    const double alpha = spec.alpha[0](0, 0);
    const double kappa = spec.kappa[0];
    double laplace = 1.0;
    if (kappa != 0.0 || spec.lambda0 != 0.0) {
        CVec u = CVec::Constant(1, Complex(-epsilon, 0.0));
        laplace = jump_transform(spec.jumps, u).real();
    }
    return epsilon * beta - 0.5 * epsilon * epsilon * alpha + kappa * (1.0 - laplace);
}

double transience_rate_slope0(const ModelSpec& spec) {
    require(spec.d == 1 && spec.m == 1, "transience_rate_slope0: requires d = m = 1");
    return spec.beta(0, 0) + spec.kappa[0] * spec.jumps.mean()[0];
}

}  // namespace ajd
