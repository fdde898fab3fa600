#include "ajd/limits.hpp"

#include <cmath>

#include "ajd/parallel.hpp"
#include "ajd/stats.hpp"

namespace ajd {

Functional Functional::identity() { return Functional{}; }

Functional Functional::coordinate_power(int coord, int power) {
    require(coord >= 0 && power >= 1, "coordinate_power: need coord >= 0, power >= 1");
    Functional f;
    f.kind_ = Kind::CoordinatePower;
    f.coord_ = coord;
    f.power_ = power;
    f.id_ = "x" + std::to_string(coord + 1) + "^" + std::to_string(power);
    return f;
}

Functional Functional::indicator_box(const Vec& lo, const Vec& hi) {
    require(lo.size() == hi.size(), "indicator_box: bound dimension mismatch");
    Functional f;
    f.kind_ = Kind::IndicatorBox;
    f.lo_ = lo;
    f.hi_ = hi;
    f.id_ = "indicator_box";
    return f;
}

Vec Functional::operator()(const Vec& x) const {
    switch (kind_) {
        case Kind::Identity: return x;
        case Kind::CoordinatePower: {
            require(coord_ < x.size(), "coordinate_power: coordinate out of range");
            return Vec::Constant(1, std::pow(x[coord_], power_));
        }
        case Kind::IndicatorBox: {
            require(lo_.size() == x.size(), "indicator_box: dimension mismatch");
            const bool inside = (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
            return Vec::Constant(1, inside ? 1.0 : 0.0);
        }
    }
    return Vec();
}

Vec time_average(const PathSample& path, const Functional& h) {
    require(path.times.size() >= 2, "time_average: path has fewer than two epochs");
    const double T = path.times.back() - path.times.front();
    require(T > 0.0, "time_average: zero horizon");
    Vec acc = Vec::Zero(h.out_dim(static_cast<int>(path.states.front().size())));
    Vec prev = h(path.states.front());
    for (size_t k = 1; k < path.times.size(); ++k) {
        const Vec cur = h(path.states[k]);
        acc += 0.5 * (path.times[k] - path.times[k - 1]) * (prev + cur);
        prev = cur;
    }
    return acc / T;
}

Vec skeleton_average(const SkeletonSample& skel, const Functional& h) {
    require(skel.states.size() >= 2, "skeleton_average: need at least one observation");
    Vec acc = Vec::Zero(h.out_dim(static_cast<int>(skel.states.front().size())));
    for (size_t k = 1; k < skel.states.size(); ++k) acc += h(skel.states[k]);
    return acc / static_cast<double>(skel.states.size() - 1);
}

Mat batch_means_variance(const std::vector<Vec>& series, int nbatches) {
    require(nbatches >= 2, "batch_means_variance: need at least 2 batches");
    const long n = static_cast<long>(series.size());
    require(n >= 10L * nbatches, "batch_means_variance: need length >= 10 * nbatches");
    const long len = n / nbatches;
    const int dim = static_cast<int>(series.front().size());

    std::vector<Vec> means(nbatches, Vec::Zero(dim));
    for (int j = 0; j < nbatches; ++j) {
        for (long i = 0; i < len; ++i) means[j] += series[j * len + i];
        means[j] /= static_cast<double>(len);
    }
    Vec grand = Vec::Zero(dim);
    for (const auto& m : means) grand += m;
    grand /= static_cast<double>(nbatches);

    Mat est = Mat::Zero(dim, dim);
    for (const auto& m : means) est += (m - grand) * (m - grand).transpose();
    est *= static_cast<double>(len) / static_cast<double>(nbatches - 1);
    return est;
}

namespace {

Mat stable_effective_inverse(const ModelSpec& spec) {
    const Mat M = effective_drift_matrix(spec);
    require(max_real_eigenvalue(M) < -kStabilityTol,
            "corollary limits: beta + E(Z)kappa' must be stable");
    return (-M).fullPivLu().inverse();
}

}  // namespace

Vec corollary_mean(const ModelSpec& spec) {
    // Only stability of the effective drift matrix is needed; degenerate
    // diffusion coefficients are fine here.
    const Mat M = effective_drift_matrix(spec);
    require(max_real_eigenvalue(M) < -kStabilityTol,
            "corollary_mean: beta + E(Z)kappa' must be stable");
    const Vec rhs = spec.b + spec.lambda0 * spec.jumps.mean();
    const Vec v = M.fullPivLu().solve(-rhs);
    const double residual = (M * v + rhs).norm();
    if (!(residual < 1e-12 * (1.0 + rhs.norm())))
        throw std::runtime_error("corollary_mean: linear solve residual too large");
    return v;
}

Mat corollary_cov(const ModelSpec& spec) {
    const Vec v = corollary_mean(spec);
    const Mat A = stable_effective_inverse(spec);  // A = -(beta + E(Z)kappa')^{-1}
    const Mat ezz = spec.jumps.second_moment();
    Mat inner = spec.a + spec.lambda0 * ezz;
    for (int i = 0; i < spec.m; ++i) inner += v[i] * (spec.alpha[i] + spec.kappa[i] * ezz);
    return symmetrized(A * inner * A.transpose());
}

namespace {

// Streaming trapezoid integrals of h along one walk, split exactly at batch
// boundaries.
struct BatchAccumulator {
    double total_T;
    int nbatches;
    Vec total;               // integral over [0, T]
    std::vector<Vec> batch;  // integral over each window
    double batch_len;
    double prev_t = 0.0;
    Vec prev_h;
    bool first = true;

    BatchAccumulator(double T, int nb, int dim)
        : total_T(T), nbatches(nb), total(Vec::Zero(dim)),
          batch(nb, Vec::Zero(dim)), batch_len(T / nb) {}

    int batch_of(double t) const {
        int j = static_cast<int>(t / batch_len);
        return std::min(j, nbatches - 1);
    }

    void add(double t, const Vec& hx) {
        if (first) {
            first = false;
            prev_t = t;
            prev_h = hx;
            return;
        }
        if (t <= prev_t) {  // jump epoch at an existing time stamp
            prev_h = hx;
            return;
        }
        double t0 = prev_t;
        Vec h0 = prev_h;
        int j0 = batch_of(t0);
        const int j1 = batch_of(t);
        while (j0 < j1) {
            const double tb = (j0 + 1) * batch_len;
            const Vec hb = prev_h + (hx - prev_h) * ((tb - prev_t) / (t - prev_t));
            const Vec seg = 0.5 * (tb - t0) * (h0 + hb);
            batch[j0] += seg;
            total += seg;
            t0 = tb;
            h0 = hb;
            ++j0;
        }
        const Vec seg = 0.5 * (t - t0) * (h0 + hx);
        batch[j0] += seg;
        total += seg;
        prev_t = t;
        prev_h = hx;
    }
};

}  // namespace

int default_batch_count(long n_observations) {
    const long root = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n_observations))));
    return static_cast<int>(std::clamp(root, 10L, 200L));
}

ErgodicReport ergodic_report_continuous(const ModelSpec& spec, const Vec& x0, double T, double dt,
                                        std::uint64_t seed, const Functional& h, int nbatches,
                                        const std::optional<Vec>& target) {
    if (nbatches <= 0) nbatches = default_batch_count(static_cast<long>(T / dt));
    require(nbatches >= 10, "ergodic_report_continuous: need at least 10 batches");
    require_admissible(spec);
    const int dim = h.out_dim(spec.d);
    BatchAccumulator acc(T, nbatches, dim);
    walk_path(spec, x0, T, dt, SplitMix64(seed), [&](double t, const Vec& x, bool) {
        acc.add(t, h(x));
        return true;
    });

    ErgodicReport rep;
    rep.h_id = h.id();
    rep.skeleton = false;
    rep.horizon = T;
    rep.average = acc.total / T;
    rep.batch_count = nbatches;

    const double len = acc.batch_len;
    std::vector<Vec> means(nbatches);
    for (int j = 0; j < nbatches; ++j) means[j] = acc.batch[j] / len;
    Vec grand = Vec::Zero(dim);
    for (const auto& m : means) grand += m;
    grand /= nbatches;
    Mat est = Mat::Zero(dim, dim);
    for (const auto& m : means) est += (m - grand) * (m - grand).transpose();
    est *= len / static_cast<double>(nbatches - 1);
    rep.bm_variance = est;
    rep.ci_halfwidth = (1.96 / std::sqrt(T)) * est.diagonal().cwiseMax(0.0).cwiseSqrt();

    if (target) {
        rep.target = target;
        rep.z_scores = Vec::Zero(dim);
        for (int i = 0; i < dim; ++i) {
            const double se = std::sqrt(std::max(est(i, i), 1e-300) / T);
            rep.z_scores[i] = (rep.average[i] - (*target)[i]) / se;
        }
    }
    return rep;
}

ErgodicReport ergodic_report_skeleton(const ModelSpec& spec, const Vec& x0, double delta, long n,
                                      double dt, std::uint64_t seed, const Functional& h,
                                      int nbatches, const std::optional<Vec>& target) {
    if (nbatches <= 0) nbatches = default_batch_count(n);
    require(nbatches >= 10, "ergodic_report_skeleton: need at least 10 batches");
    const auto skel = simulate_skeleton(spec, x0, delta, n, dt, seed);
    std::vector<Vec> series;
    series.reserve(n);
    for (size_t k = 1; k < skel.states.size(); ++k) series.push_back(h(skel.states[k]));

    ErgodicReport rep;
    rep.h_id = h.id();
    rep.skeleton = true;
    rep.horizon = static_cast<double>(n);
    rep.average = skeleton_average(skel, h);
    rep.batch_count = nbatches;
    rep.bm_variance = batch_means_variance(series, nbatches);
    rep.ci_halfwidth =
        (1.96 / std::sqrt(static_cast<double>(n))) * rep.bm_variance.diagonal().cwiseMax(0.0).cwiseSqrt();
    if (target) {
        rep.target = target;
        const int dim = static_cast<int>(rep.average.size());
        rep.z_scores = Vec::Zero(dim);
        for (int i = 0; i < dim; ++i) {
            const double se = std::sqrt(std::max(rep.bm_variance(i, i), 1e-300) / n);
            rep.z_scores[i] = (rep.average[i] - (*target)[i]) / se;
        }
    }
    return rep;
}

FcltReport fclt_diagnostic(const ModelSpec& spec, const Functional& h, int replicates,
                           double horizon, int finest_blocks, double dt, std::uint64_t seed) {
    require(replicates >= 10, "fclt_diagnostic: need at least 10 replicates");
    require(finest_blocks >= 2 && (finest_blocks & (finest_blocks - 1)) == 0,
            "fclt_diagnostic: finest_blocks must be a power of two");
    const auto cls = classify(spec);
    require(cls.classification == Classification::ExpErgodic,
            "fclt_diagnostic: requires an exponentially ergodic model");

    const bool identity = h.kind() == Functional::Kind::Identity;
    Vec center_vec;
    double sigma2 = 0.0;
    if (identity) {
        center_vec = corollary_mean(spec);
        sigma2 = corollary_cov(spec)(0, 0);
    }

    // Start replicates near the stationary mean with a short warmup.
    Vec x0 = identity ? center_vec : corollary_mean(spec);
    for (int i = 0; i < spec.m; ++i) x0[i] = std::max(x0[i], 1e-8);
    const double warmup = 5.0;

    // Pilot pass for non-identity functionals: center and scale from one
    // long run's batch means.
    double center_scalar;
    if (identity) {
        center_scalar = center_vec[0];
    } else {
        const auto pilot = ergodic_report_continuous(spec, x0, 64.0 * horizon, dt,
                                                     seed ^ 0x517CC1B727220A95ull, h, 64);
        center_scalar = pilot.average[0];
        sigma2 = std::max(pilot.bm_variance(0, 0), 1e-300);
    }

    const int levels = static_cast<int>(std::lround(std::log2(finest_blocks))) + 1;
    std::vector<std::vector<double>> block_integrals(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        std::vector<double>& blocks = block_integrals[r];
        blocks.assign(finest_blocks, 0.0);
        const double block_len = horizon / finest_blocks;
        double prev_t = 0.0, prev_h = 0.0;
        bool started = false;
        walk_path(spec, x0, warmup + horizon, dt, path_stream(seed, r),
                  [&](double t, const Vec& x, bool) {
                      const double tt = t - warmup;
                      const double hx = h(x)[0] - center_scalar;
                      if (tt < 0.0) return true;
                      if (!started) {
                          started = true;
                          prev_t = tt;
                          prev_h = hx;
                          return true;
                      }
                      if (tt <= prev_t) {
                          prev_h = hx;
                          return true;
                      }
                      // split the trapezoid exactly at block boundaries
                      double t0 = prev_t, h0 = prev_h;
                      int j0 = std::min(static_cast<int>(t0 / block_len), finest_blocks - 1);
                      const int j1 = std::min(static_cast<int>(tt / block_len), finest_blocks - 1);
                      while (j0 < j1) {
                          const double tb = (j0 + 1) * block_len;
                          const double hb = prev_h + (hx - prev_h) * (tb - prev_t) / (tt - prev_t);
                          blocks[j0] += 0.5 * (tb - t0) * (h0 + hb);
                          t0 = tb;
                          h0 = hb;
                          ++j0;
                      }
                      blocks[j0] += 0.5 * (tt - t0) * (h0 + hx);
                      prev_t = tt;
                      prev_h = hx;
                      return true;
                  });
    });

    FcltReport rep;
    rep.replicates = replicates;
    rep.horizon = horizon;
    rep.normalized.reserve(replicates);
    const double sig = std::sqrt(sigma2);
    for (int r = 0; r < replicates; ++r) {
        const double total = pairwise_sum(block_integrals[r]);
        rep.normalized.push_back(total / (std::sqrt(horizon) * sig));
    }
    rep.quantile_correlation = normal_quantile_correlation(rep.normalized);

    // Pooled second moments of block sums across dyadic block sizes.
    for (int level = 0; level < levels; ++level) {
        const int width = 1 << level;
        const double bsize = horizon * width / finest_blocks;
        double sq = 0.0;
        long count = 0;
        for (int r = 0; r < replicates; ++r) {
            for (int j = 0; j + width <= finest_blocks; j += width) {
                double s = 0.0;
                for (int k = 0; k < width; ++k) s += block_integrals[r][j + k];
                sq += s * s;
                ++count;
            }
        }
        rep.block_sizes.push_back(bsize);
        rep.block_variances.push_back(sq / count);
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < rep.block_sizes.size(); ++i) {
        lx.push_back(std::log(rep.block_sizes[i]));
        ly.push_back(std::log(std::max(rep.block_variances[i], 1e-300)));
    }
    rep.variance_slope = linear_fit(lx, ly).slope;
    return rep;
}

}  // namespace ajd
