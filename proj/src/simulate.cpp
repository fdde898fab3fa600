#include "ajd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ajd {

namespace {

constexpr int kMaxThinningRetries = 5;

Vec truncated(const ModelSpec& spec, Vec x) {
    for (int i = 0; i < spec.m; ++i) x[i] = std::max(x[i], 0.0);
    return x;
}

// Scalar engine for d == 1; the long-horizon runs live here.
class Engine1d {
  public:
    Engine1d(const ModelSpec& spec, double x0) : spec_(spec), x_(x0), buf_(1) {
        is_vol_ = spec.m == 1;
        a_ = spec.a(0, 0);
        alpha_ = spec.alpha[0](0, 0);
        b_ = spec.b[0];
        beta_ = spec.beta(0, 0);
        kappa_ = spec.kappa[0];
        if (is_vol_ && x_ < 0.0) x_ = 0.0;
    }

    void diffuse(double h, SplitMix64& rng, NormalSampler& normal) {
        const double xp = is_vol_ ? std::max(x_, 0.0) : x_;
        const double var = a_ + alpha_ * xp;
        x_ += (b_ + beta_ * xp) * h + std::sqrt(std::max(var, 0.0) * h) * normal(rng);
        if (is_vol_ && x_ < 0.0) x_ = 0.0;
    }

    double intensity() const {
        return spec_.lambda0 + kappa_ * (is_vol_ ? std::max(x_, 0.0) : x_);
    }

    double intensity_margin(double h) const {
        if (kappa_ == 0.0) return 0.0;
        const double xp = is_vol_ ? std::max(x_, 0.0) : x_;
        const double sd = std::sqrt(std::max(a_ + alpha_ * xp, 0.0) * h);
        return 3.0 * kappa_ * (sd + std::abs(b_ + beta_ * xp) * h);
    }

    void add_jump(const Vec& z) {
        x_ += z[0];
        if (is_vol_ && x_ < 0.0) x_ = 0.0;
    }

    const Vec& state() {
        buf_[0] = x_;
        return buf_;
    }
    double save() const { return x_; }
    void restore(double s) { x_ = s; }

  private:
    const ModelSpec& spec_;
    double x_;
    Vec buf_;
    bool is_vol_;
    double a_, alpha_, b_, beta_, kappa_;
};

// General engine; detects a diagonal diffusion matrix so the multi-d
// long runs avoid a per-step eigensolve.
class EngineNd {
  public:
    EngineNd(const ModelSpec& spec, const Vec& x0)
        : spec_(spec), x_(truncated(spec, x0)), xp_(spec.d), drift_(spec.d), z_(spec.d),
          sig2_(spec.d, spec.d) {
        diagonal_ = spec.a.isDiagonal(1e-14);
        for (int i = 0; i < spec.m && diagonal_; ++i)
            diagonal_ = spec.alpha[i].isDiagonal(1e-14);
    }

    void diffuse(double h, SplitMix64& rng, NormalSampler& normal) {
        truncate_into_xp();
        drift_ = spec_.b + spec_.beta * xp_;
        sig2_ = spec_.a;
        for (int i = 0; i < spec_.m; ++i) sig2_ += xp_[i] * spec_.alpha[i];
        for (int i = 0; i < spec_.d; ++i) z_[i] = normal(rng);
        const double sq = std::sqrt(h);
        if (diagonal_) {
            for (int i = 0; i < spec_.d; ++i)
                x_[i] += drift_[i] * h + std::sqrt(std::max(sig2_(i, i), 0.0)) * sq * z_[i];
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(sig2_);
            const Mat root = es.eigenvectors() *
                             es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                             es.eigenvectors().transpose();
            x_ += drift_ * h + root * (sq * z_);
        }
        for (int i = 0; i < spec_.m; ++i) x_[i] = std::max(x_[i], 0.0);
    }

    double intensity() const {
        double v = spec_.lambda0;
        for (int i = 0; i < spec_.m; ++i) v += spec_.kappa[i] * std::max(x_[i], 0.0);
        return v;
    }

    double intensity_margin(double h) {
        if (!(spec_.kappa.array() != 0.0).any()) return 0.0;
        truncate_into_xp();
        drift_ = spec_.b + spec_.beta * xp_;
        sig2_ = spec_.a;
        for (int i = 0; i < spec_.m; ++i) sig2_ += xp_[i] * spec_.alpha[i];
        double margin = 0.0;
        for (int i = 0; i < spec_.d; ++i) {
            if (spec_.kappa[i] == 0.0) continue;
            const double sd = std::sqrt(std::max(sig2_(i, i), 0.0) * h);
            margin += spec_.kappa[i] * (sd + std::abs(drift_[i]) * h);
        }
        return 3.0 * margin;
    }

    void add_jump(const Vec& z) {
        x_ += z;
        for (int i = 0; i < spec_.m; ++i) x_[i] = std::max(x_[i], 0.0);
    }

    const Vec& state() { return x_; }
    Vec save() const { return x_; }
    void restore(const Vec& s) { x_ = s; }

  private:
    void truncate_into_xp() {
        xp_ = x_;
        for (int i = 0; i < spec_.m; ++i) xp_[i] = std::max(xp_[i], 0.0);
    }

    const ModelSpec& spec_;
    Vec x_;
    Vec xp_, drift_, z_;
    Mat sig2_;
    bool diagonal_;
};

template <class Engine>
void walk_with_engine(const ModelSpec& spec, Engine& eng, double T, double dt, SplitMix64& rng,
                      const PathVisitor& visit) {
    NormalSampler normal;
    const bool jumps = spec.has_jumps();
    const long nsteps = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-12)));
    const double h = T / static_cast<double>(nsteps);

    if (!visit(0.0, eng.state(), false)) return;

    std::vector<double> candidates;
    for (long k = 0; k < nsteps; ++k) {
        const double t0 = static_cast<double>(k) * h;
        if (!jumps) {
            eng.diffuse(h, rng, normal);
            if (!visit(t0 + h, eng.state(), false)) return;
            continue;
        }

        double margin = eng.intensity_margin(h);
        const auto saved = eng.save();
        int attempt = 0;
        while (true) {
            const double lambda_bar = eng.intensity() + margin;
            bool dominated = true;
            const long ncand = poisson_draw(rng, lambda_bar * h);
            candidates.clear();
            for (long j = 0; j < ncand; ++j) candidates.push_back(rng.uniform() * h);
            std::sort(candidates.begin(), candidates.end());

            double sub_t = 0.0;
            for (double tau : candidates) {
                if (tau > sub_t) eng.diffuse(tau - sub_t, rng, normal);
                sub_t = tau;
                const double ratio = lambda_bar > 0.0 ? eng.intensity() / lambda_bar : 0.0;
                if (ratio > 1.0) {
                    dominated = false;
                    break;
                }
                if (rng.uniform() < ratio) {
                    const Vec z = sample_jump(spec.jumps, rng);
                    eng.add_jump(z);
                    if (!visit(t0 + tau, eng.state(), true)) return;
                }
            }
            if (dominated) {
                eng.diffuse(h - sub_t, rng, normal);
                break;
            }
            eng.restore(saved);
            margin = margin > 0.0 ? 2.0 * margin : 1.0;
            if (++attempt > kMaxThinningRetries)
                throw std::runtime_error("walk_path: dominating rate violated after retries");
        }
        if (!visit(t0 + h, eng.state(), false)) return;
    }
}

}  // namespace

void walk_path(const ModelSpec& spec, const Vec& x0, double T, double dt, SplitMix64 rng,
               const PathVisitor& visit) {
    require(x0.size() == spec.d, "walk_path: x0 dimension mismatch");
    require(in_state_space(spec, x0, 1e-12), "walk_path: x0 outside state space");
    require(T > 0.0 && dt > 0.0 && dt <= T + 1e-15, "walk_path: need 0 < dt <= T");
    if (spec.d == 1) {
        Engine1d eng(spec, x0[0]);
        walk_with_engine(spec, eng, T, dt, rng, visit);
    } else {
        EngineNd eng(spec, x0);
        walk_with_engine(spec, eng, T, dt, rng, visit);
    }
}

PathSample simulate_path(const ModelSpec& spec, const Vec& x0, double T, double dt,
                         std::uint64_t seed) {
    require_admissible(spec);
    PathSample path;
    path.seed = seed;
    path.dt = dt;
    walk_path(spec, x0, T, dt, SplitMix64(seed), [&](double t, const Vec& x, bool is_jump) {
        path.times.push_back(t);
        path.states.push_back(x);
        if (is_jump) path.jump_epochs.push_back(t);
        return true;
    });
    return path;
}

SkeletonSample simulate_skeleton(const ModelSpec& spec, const Vec& x0, double delta, long n,
                                 double dt, std::uint64_t seed) {
    require_admissible(spec);
    require(delta > 0.0 && n >= 0, "simulate_skeleton: need delta > 0, n >= 0");
    SkeletonSample skel;
    skel.delta = delta;
    skel.seed = seed;
    skel.states.reserve(n + 1);
    if (n == 0) {
        skel.states.push_back(truncated(spec, x0));
        return skel;
    }
    // Align the step grid with the skeleton grid.
    const long nsub = std::max(1L, std::lround(delta / dt));
    const double h = delta / static_cast<double>(nsub);
    long grid_count = 0;
    walk_path(spec, x0, delta * static_cast<double>(n), h, SplitMix64(seed),
              [&](double, const Vec& x, bool is_jump) {
                  if (is_jump) return true;
                  if (grid_count % nsub == 0) skel.states.push_back(x);
                  ++grid_count;
                  return true;
              });
    return skel;
}

double cir_exact_step(double b, double beta, double alpha, double x, double delta,
                      SplitMix64& rng) {
    require(beta < 0.0 && alpha > 0.0 && 2.0 * b > alpha,
            "cir_exact_step: need beta < 0 and the Feller condition 2b > alpha > 0");
    require(x >= 0.0 && delta > 0.0, "cir_exact_step: need x >= 0, delta > 0");
    const double e = std::exp(beta * delta);
    const double c = alpha * (1.0 - e) / (-4.0 * beta);
    const double df = 4.0 * b / alpha;  // > 2 under Feller
    const double ncp = x * e / c;

    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.5 * (df - 1.0), 2.0);
    const double n = normal(rng) + std::sqrt(ncp);
    const double y = n * n + gamma(rng);
    return c * y;
}

Vec sample_jump(const JumpDist& dist, SplitMix64& rng) {
    Vec z(dist.dim());
    NormalSampler normal;
    const auto& comps = dist.components();
    for (int i = 0; i < dist.dim(); ++i) {
        if (const auto* pm = std::get_if<PointMass>(&comps[i])) {
            z[i] = pm->value;
        } else if (const auto* e = std::get_if<Exponential>(&comps[i])) {
            z[i] = exponential_draw(rng, e->rate);
        } else {
            const auto& g = std::get<Gaussian>(comps[i]);
            z[i] = g.mean + std::sqrt(g.var) * normal(rng);
        }
    }
    return z;
}

}  // namespace ajd
