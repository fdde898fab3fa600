#include "ajd/riccati.hpp"

#include <cmath>

namespace ajd {

namespace {

constexpr double kDomainMargin = 1e-9;

void check_transform_domain(const ModelSpec& spec, const CVec& psi, double t) {
    if (!spec.has_jumps()) return;
    for (int i = 0; i < spec.d; ++i) {
        const double bound = transform_domain_bound(spec.jumps, i);
        if (psi[i].real() >= bound - kDomainMargin)
            throw TransformDomainError("transform domain violated on coordinate " +
                                           std::to_string(i + 1) + " at t=" + std::to_string(t),
                                       t);
    }
}

struct State {
    Complex phi;
    CVec psi;
};

State rk4_integrate(const ModelSpec& spec, const CVec& u, double T, int nsteps,
                    std::vector<double>* grid, std::vector<Complex>* phis,
                    std::vector<CVec>* psis) {
    const double h = nsteps > 0 ? T / nsteps : 0.0;
    State st{Complex(0.0, 0.0), u};
    if (grid) {
        grid->push_back(0.0);
        phis->push_back(st.phi);
        psis->push_back(st.psi);
    }
    auto rhs = [&](const State& s, double t) -> State {
        check_transform_domain(spec, s.psi, t);
        auto r = riccati_rhs(spec, s.psi);
        return State{r.dphi, std::move(r.dpsi)};
    };
    for (int k = 0; k < nsteps; ++k) {
        const double t = k * h;
        const State k1 = rhs(st, t);
        State s2{st.phi + 0.5 * h * k1.phi, st.psi + 0.5 * h * k1.psi};
        const State k2 = rhs(s2, t + 0.5 * h);
        State s3{st.phi + 0.5 * h * k2.phi, st.psi + 0.5 * h * k2.psi};
        const State k3 = rhs(s3, t + 0.5 * h);
        State s4{st.phi + h * k3.phi, st.psi + h * k3.psi};
        const State k4 = rhs(s4, t + h);
        st.phi += (h / 6.0) * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
        st.psi += (h / 6.0) * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
        if (grid) {
            grid->push_back((k + 1) * h);
            phis->push_back(st.phi);
            psis->push_back(st.psi);
        }
    }
    return st;
}

}  // namespace

RiccatiRhs riccati_rhs(const ModelSpec& spec, const CVec& psi) {
    require(psi.size() == spec.d, "riccati_rhs: psi dimension mismatch");
    Complex jump_term(0.0, 0.0);
    if (spec.has_jumps()) jump_term = jump_transform(spec.jumps, psi) - 1.0;

    // Plain bilinear forms (no conjugation): psi'b, psi'a psi, psi'alpha_i psi.
    auto bilinear = [](const CVec& v, const CVec& w) { return (v.array() * w.array()).sum(); };

    RiccatiRhs out;
    const CVec apsi = spec.a.cast<Complex>() * psi;
    out.dphi = bilinear(psi, spec.b.cast<Complex>()) + 0.5 * bilinear(psi, apsi) +
               spec.lambda0 * jump_term;
    out.dpsi.resize(spec.d);
    for (int i = 0; i < spec.d; ++i) {
        Complex quad(0.0, 0.0);
        if (i < spec.m) quad = bilinear(psi, spec.alpha[i].cast<Complex>() * psi);
        const Complex linear = bilinear(psi, spec.beta.col(i).cast<Complex>());
        out.dpsi[i] = linear + 0.5 * quad + spec.kappa[i] * jump_term;
    }
    return out;
}

TransformSolution solve_transform(const ModelSpec& spec, const CVec& u, double T, double dt,
                                  bool allow_real_u) {
    require(u.size() == spec.d, "solve_transform: u dimension mismatch");
    require(T >= 0.0, "solve_transform: T must be nonnegative");
    if (!allow_real_u) {
        for (int i = 0; i < spec.m; ++i)
            require(u[i].real() <= 0.0, "solve_transform: need Re(u_I) <= 0");
        for (int i = spec.m; i < spec.d; ++i)
            require(u[i].real() == 0.0, "solve_transform: need Re(u_J) = 0");
    }
    if (dt <= 0.0) dt = std::min(1e-3, T > 0.0 ? T / 1000.0 : 1e-3);

    TransformSolution sol;
    sol.u = u;
    if (T == 0.0) {
        sol.grid = {0.0};
        sol.phi = {Complex(0.0, 0.0)};
        sol.psi = {u};
        return sol;
    }

    const int nsteps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-12)));
    rk4_integrate(spec, u, T, nsteps, &sol.grid, &sol.phi, &sol.psi);
    const State fine = rk4_integrate(spec, u, T, 2 * nsteps, nullptr, nullptr, nullptr);
    sol.step_error_estimate = std::max(std::abs(sol.phi.back() - fine.phi),
                                       (sol.psi.back() - fine.psi).cwiseAbs().maxCoeff());
    sol.accuracy_warning = !(sol.step_error_estimate < 1e-8);
    return sol;
}

Complex char_fn(const ModelSpec& spec, const Vec& x, double t, const CVec& u, double dt) {
    require(x.size() == spec.d, "char_fn: x dimension mismatch");
    const auto sol = solve_transform(spec, u, t, dt);
    const Complex psix = (sol.psi_end().array() * x.array().cast<Complex>()).sum();
    return std::exp(sol.phi_end() + psix);
}

double semiflow_residual(const ModelSpec& spec, const CVec& u, double t, double s, double dt) {
    const auto sol_ts = solve_transform(spec, u, t + s, dt);
    const auto sol_t = solve_transform(spec, u, t, dt);
    const auto sol_s = solve_transform(spec, u, s, dt);
    // continue for s from psi(t,u), and for t from psi(s,u)
    const auto cont_s = solve_transform(spec, sol_t.psi_end(), s, dt, /*allow_real_u=*/true);
    const auto cont_t = solve_transform(spec, sol_s.psi_end(), t, dt, /*allow_real_u=*/true);

    const double phi_res =
        std::abs(sol_ts.phi_end() - (sol_t.phi_end() + cont_s.phi_end()));
    const double psi_res = (sol_ts.psi_end() - cont_t.psi_end()).norm();
    return std::max(phi_res, psi_res);
}

PhiPsi ou_transform_closed_form(double b, double beta, double a, Complex u, double t) {
    require(beta != 0.0, "ou_transform_closed_form: beta must be nonzero");
    const double e1 = std::exp(beta * t);
    const double e2 = std::exp(2.0 * beta * t);
    PhiPsi out;
    out.psi = u * e1;
    out.phi = (b / beta) * u * (e1 - 1.0) + (a / (4.0 * beta)) * u * u * (e2 - 1.0);
    return out;
}

PhiPsi cir_transform_closed_form(double b, double beta, double alpha, Complex u, double t) {
    require(beta != 0.0 && alpha > 0.0, "cir_transform_closed_form: need beta != 0, alpha > 0");
    const double e1 = std::exp(beta * t);
    const Complex denom = 1.0 - (alpha * u / (2.0 * beta)) * (e1 - 1.0);
    if (std::abs(denom) < 1e-14)
        throw std::domain_error("cir_transform_closed_form: pole in the transform");
    PhiPsi out;
    out.psi = u * e1 / denom;
    out.phi = -(2.0 * b / alpha) * std::log(denom);
    return out;
}

}  // namespace ajd
