#pragma once

#include <vector>

#include "ajd/model.hpp"

namespace ajd {

// Thrown when the jump transform leaves its domain mid-integration.
struct TransformDomainError : std::runtime_error {
    TransformDomainError(const std::string& msg, double t)
        : std::runtime_error(msg), time(t) {}
    double time;
};

// Solution of the generalized Riccati system
//   phi' = psi'b + (1/2) psi'a psi + lambda (chi(psi) - 1)
//   psi_i' = psi'beta_i + (1/2) psi'alpha_i psi + kappa_i (chi(psi) - 1)
// with phi(0) = 0, psi(0) = u, beta_i the i-th column of beta and chi the
// jump transform. The conditional characteristic function is
// exp(phi(t,u) + psi(t,u)'x).
struct TransformSolution {
    CVec u;
    std::vector<double> grid;
    std::vector<Complex> phi;
    std::vector<CVec> psi;
    double step_error_estimate = 0.0;
    bool accuracy_warning = false;  // estimate above 1e-8

    const Complex& phi_end() const { return phi.back(); }
    const CVec& psi_end() const { return psi.back(); }
};

struct RiccatiRhs {
    Complex dphi;
    CVec dpsi;
};

RiccatiRhs riccati_rhs(const ModelSpec& spec, const CVec& psi);

// Classical RK4 on a uniform grid with a step-halving error estimate at the
// endpoint. u must satisfy Re(u_I) <= 0, Re(u_J) = 0 unless allow_real_u.
TransformSolution solve_transform(const ModelSpec& spec, const CVec& u, double T,
                                  double dt = 0.0, bool allow_real_u = false);

Complex char_fn(const ModelSpec& spec, const Vec& x, double t, const CVec& u, double dt = 0.0);

// Max deviation in the composition identities
//   phi(t+s,u) = phi(t,u) + phi(s, psi(t,u))
//   psi(t+s,u) = psi(t, psi(s,u))
double semiflow_residual(const ModelSpec& spec, const CVec& u, double t, double s,
                         double dt = 0.0);

struct PhiPsi {
    Complex phi;
    Complex psi;
};

// Independent closed forms for the 1-D jump-free models.
//   OU  (m=0): psi = u e^{bt*t},  phi = (b/bt) u (e^{bt*t}-1) + (a/(4bt)) u^2 (e^{2bt*t}-1)
//   CIR (m=1): psi = u e^{bt*t} / D,  phi = -(2b/al) log D,
//              D = 1 - (al*u/(2bt)) (e^{bt*t}-1)
PhiPsi ou_transform_closed_form(double b, double beta, double a, Complex u, double t);
PhiPsi cir_transform_closed_form(double b, double beta, double alpha, Complex u, double t);

}  // namespace ajd
