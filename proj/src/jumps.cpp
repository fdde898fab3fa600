#include "ajd/jumps.hpp"

#include <cmath>

#include "ajd/quadrature.hpp"

namespace ajd {

namespace {

double marginal_mean(const JumpMarginal& c) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointMass>) return v.value;
            if constexpr (std::is_same_v<T, Exponential>) return 1.0 / v.rate;
            if constexpr (std::is_same_v<T, Gaussian>) return v.mean;
        },
        c);
}

double marginal_second_moment(const JumpMarginal& c) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointMass>) return v.value * v.value;
            if constexpr (std::is_same_v<T, Exponential>) return 2.0 / (v.rate * v.rate);
            if constexpr (std::is_same_v<T, Gaussian>) return v.mean * v.mean + v.var;
        },
        c);
}

}  // namespace

JumpDist::JumpDist(Kind k, std::vector<JumpMarginal> comps)
    : kind_(k), components_(std::move(comps)) {
    require(!components_.empty(), "JumpDist: empty component list");
    const int d = dim();
    mean_.resize(d);
    Vec ex2(d);
    for (int i = 0; i < d; ++i) {
        const auto& c = components_[i];
        if (const auto* e = std::get_if<Exponential>(&c))
            require(e->rate > 0.0, "JumpDist: exponential rate must be positive");
        if (const auto* g = std::get_if<Gaussian>(&c))
            require(g->var >= 0.0, "JumpDist: gaussian variance must be nonnegative");
        mean_[i] = marginal_mean(c);
        ex2[i] = marginal_second_moment(c);
    }
    // Independent coordinates: E Z_i Z_j = E Z_i E Z_j off the diagonal.
    second_ = mean_ * mean_.transpose();
    second_.diagonal() = ex2;
}

JumpDist JumpDist::degenerate(const Vec& z0) {
    std::vector<JumpMarginal> comps;
    comps.reserve(z0.size());
    for (int i = 0; i < z0.size(); ++i) comps.push_back(PointMass{z0[i]});
    return JumpDist(Kind::Degenerate, std::move(comps));
}

JumpDist JumpDist::product(std::vector<JumpMarginal> components) {
    return JumpDist(Kind::ProductIndependent, std::move(components));
}

bool JumpDist::is_point_mass() const {
    for (const auto& c : components_) {
        if (std::holds_alternative<Exponential>(c)) return false;
        if (const auto* g = std::get_if<Gaussian>(&c)) {
            if (g->var > 0.0) return false;
        }
    }
    return true;
}

Vec JumpDist::point() const {
    require(is_point_mass(), "JumpDist::point on a non-degenerate distribution");
    return mean_;
}

JumpMoments jump_moments(const JumpDist& dist, double p) {
    require(p > 0.0, "jump_moments: p must be positive");
    JumpMoments out;
    out.mean = dist.mean();
    out.second_moment = dist.second_moment();
    out.finite = true;
    out.p_abs_moment =
        nu_expectation(dist, [p](const Vec& z) { return std::pow(z.norm(), p); }).value;
    return out;
}

Complex jump_transform(const JumpDist& dist, const CVec& u) {
    require(u.size() == dist.dim(), "jump_transform: dimension mismatch");
    Complex out(1.0, 0.0);
    const auto& comps = dist.components();
    for (int i = 0; i < dist.dim(); ++i) {
        const Complex ui = u[i];
        if (const auto* pm = std::get_if<PointMass>(&comps[i])) {
            out *= std::exp(ui * pm->value);
        } else if (const auto* e = std::get_if<Exponential>(&comps[i])) {
            if (ui.real() >= e->rate)
                throw std::domain_error("jump_transform: transform diverges (Re(u) >= rate)");
            out *= e->rate / (e->rate - ui);
        } else {
            const auto& g = std::get<Gaussian>(comps[i]);
            out *= std::exp(g.mean * ui + 0.5 * g.var * ui * ui);
        }
    }
    return out;
}

double transform_domain_bound(const JumpDist& dist, int i) {
    require(i >= 0 && i < dist.dim(), "transform_domain_bound: index out of range");
    if (const auto* e = std::get_if<Exponential>(&dist.components()[i])) return e->rate;
    return std::numeric_limits<double>::infinity();
}

}  // namespace ajd
