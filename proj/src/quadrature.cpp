#include "ajd/quadrature.hpp"

#include <cmath>

#include "ajd/rng.hpp"

namespace ajd {

namespace {

// Nodes = eigenvalues of the symmetric Jacobi matrix, weights = mu0 * (first
// eigenvector component)^2.
QuadRule golub_welsch(const Vec& diag, const Vec& offdiag, double mu0) {
    const int n = static_cast<int>(diag.size());
    Mat jacobi = Mat::Zero(n, n);
    jacobi.diagonal() = diag;
    for (int i = 0; i + 1 < n; ++i) {
        jacobi(i, i + 1) = offdiag[i];
        jacobi(i + 1, i) = offdiag[i];
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadRule gauss_laguerre(int n) {
    require(n >= 1, "gauss_laguerre: need n >= 1");
    Vec diag(n), off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = k;
    return golub_welsch(diag, off, 1.0);
}

QuadRule gauss_hermite(int n) {
    require(n >= 1, "gauss_hermite: need n >= 1");
    Vec diag = Vec::Zero(n), off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
    return golub_welsch(diag, off, std::sqrt(M_PI));
}

NuExpectation nu_expectation(const JumpDist& dist,
                             const std::function<double(const Vec&)>& f,
                             int nodes_per_dim, int mc_samples) {
    const int d = dist.dim();
    const auto& comps = dist.components();

    std::vector<int> stochastic;  // coordinates that need integration
    Vec z(d);
    for (int i = 0; i < d; ++i) {
        if (const auto* pm = std::get_if<PointMass>(&comps[i])) {
            z[i] = pm->value;
        } else if (const auto* g = std::get_if<Gaussian>(&comps[i]); g && g->var == 0.0) {
            z[i] = g->mean;
        } else {
            stochastic.push_back(i);
        }
    }

    if (stochastic.empty()) return {f(z), 0.0};

    if (static_cast<int>(stochastic.size()) <= 3) {
        // Tensor rule: Gauss-Laguerre for exponentials, Gauss-Hermite for
        // gaussians; weights already include the density normalization.
        struct Dim {
            int coord;
            std::vector<double> nodes;
            std::vector<double> weights;
        };
        std::vector<Dim> dims;
        for (int i : stochastic) {
            Dim dim;
            dim.coord = i;
            if (const auto* e = std::get_if<Exponential>(&comps[i])) {
                QuadRule r = gauss_laguerre(nodes_per_dim);
                dim.nodes.resize(r.nodes.size());
                for (size_t k = 0; k < r.nodes.size(); ++k) dim.nodes[k] = r.nodes[k] / e->rate;
                dim.weights = r.weights;  // sum to 1
            } else {
                const auto& g = std::get<Gaussian>(comps[i]);
                QuadRule r = gauss_hermite(nodes_per_dim);
                const double s = std::sqrt(2.0 * g.var);
                dim.nodes.resize(r.nodes.size());
                dim.weights.resize(r.weights.size());
                const double norm = 1.0 / std::sqrt(M_PI);
                for (size_t k = 0; k < r.nodes.size(); ++k) {
                    dim.nodes[k] = g.mean + s * r.nodes[k];
                    dim.weights[k] = r.weights[k] * norm;
                }
            }
            dims.push_back(std::move(dim));
        }
        double total = 0.0;
        const int nd = static_cast<int>(dims.size());
        std::vector<int> idx(nd, 0);
        while (true) {
            double w = 1.0;
            for (int k = 0; k < nd; ++k) {
                z[dims[k].coord] = dims[k].nodes[idx[k]];
                w *= dims[k].weights[idx[k]];
            }
            total += w * f(z);
            int k = 0;
            while (k < nd && ++idx[k] == static_cast<int>(dims[k].nodes.size())) idx[k++] = 0;
            if (k == nd) break;
        }
        return {total, 0.0};
    }

    // MC fallback with a fixed internal seed so results are reproducible.
    SplitMix64 rng(0x9D2C5680CA876563ull);
    NormalSampler normal;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < mc_samples; ++s) {
        for (int i : stochastic) {
            if (const auto* e = std::get_if<Exponential>(&comps[i])) {
                z[i] = exponential_draw(rng, e->rate);
            } else {
                const auto& g = std::get<Gaussian>(comps[i]);
                z[i] = g.mean + std::sqrt(g.var) * normal(rng);
            }
        }
        const double v = f(z);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / mc_samples;
    const double var = std::max(0.0, sumsq / mc_samples - mean * mean);
    return {mean, std::sqrt(var / mc_samples)};
}

}  // namespace ajd
