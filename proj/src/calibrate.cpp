#include "ajd/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ajd/riccati.hpp"
#include "ajd/rng.hpp"

namespace ajd {

MomentGrid default_grid(int d, double delta) {
    require(d >= 1 && delta > 0.0, "default_grid: need d >= 1, delta > 0");
    MomentGrid grid;
    grid.delta = delta;
    const double levels[] = {0.5, 1.0, 2.0};
    for (int i = 0; i < d; ++i) {
        for (double lv : levels) {
            CVec u = CVec::Zero(d);
            u[i] = Complex(0.0, lv);
            grid.u_points.push_back(std::move(u));
        }
    }
    return grid;
}

CVec moment_residual(const ModelSpec& spec, const MomentGrid& grid, const Vec& x, const Vec& y) {
    require(!grid.u_points.empty(), "moment_residual: empty grid");
    CVec out(grid.u_points.size());
    for (size_t q = 0; q < grid.u_points.size(); ++q) {
        const CVec& u = grid.u_points[q];
        const Complex uy = (u.array() * y.array().cast<Complex>()).sum();
        out[q] = std::exp(uy) - char_fn(spec, x, grid.delta, u);
    }
    return out;
}

TransitionData TransitionData::from_skeleton(const SkeletonSample& skel) {
    require(skel.states.size() >= 2, "TransitionData: skeleton too short");
    TransitionData data;
    data.x.assign(skel.states.begin(), skel.states.end() - 1);
    data.y.assign(skel.states.begin() + 1, skel.states.end());
    return data;
}

namespace {

int parse_index(const std::string& text, size_t& pos) {
    require(pos < text.size() && text[pos] == '[', "param ref: expected '['");
    const size_t close = text.find(']', pos);
    require(close != std::string::npos, "param ref: missing ']'");
    const int idx = std::stoi(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
    return idx;
}

}  // namespace

ParamRef parse_param_ref(const std::string& text, int d) {
    ParamRef ref;
    ref.name = text;
    size_t pos = text.find('[');
    const std::string head = text.substr(0, pos);
    std::vector<int> idx;
    if (pos != std::string::npos) {
        size_t p = pos;
        while (p < text.size()) idx.push_back(parse_index(text, p));
    }
    auto need = [&](size_t n) {
        require(idx.size() == n || idx.empty(), "param ref '" + text + "': wrong index count");
        while (idx.size() < n) idx.push_back(0);
    };
    if (head == "b") {
        ref.field = ParamRef::Field::B;
        need(1);
        ref.i = idx[0];
    } else if (head == "beta") {
        ref.field = ParamRef::Field::Beta;
        need(2);
        ref.i = idx[0];
        ref.j = idx.size() > 1 ? idx[1] : 0;
    } else if (head == "a") {
        ref.field = ParamRef::Field::A;
        need(2);
        ref.i = idx[0];
        ref.j = idx.size() > 1 ? idx[1] : 0;
    } else if (head == "alpha") {
        ref.field = ParamRef::Field::Alpha;
        need(3);
        ref.k = idx[0];
        ref.i = idx.size() > 1 ? idx[1] : 0;
        ref.j = idx.size() > 2 ? idx[2] : 0;
    } else if (head == "lambda") {
        ref.field = ParamRef::Field::Lambda;
        need(0);
    } else if (head == "kappa") {
        ref.field = ParamRef::Field::Kappa;
        need(1);
        ref.i = idx[0];
    } else {
        throw std::invalid_argument("param ref: unknown field '" + head + "'");
    }
    require(ref.i >= 0 && ref.i < d && ref.j >= 0 && ref.j < d && ref.k >= 0 && ref.k < d,
            "param ref '" + text + "': index out of range");
    return ref;
}

double get_param(const ModelSpec& spec, const ParamRef& ref) {
    switch (ref.field) {
        case ParamRef::Field::B: return spec.b[ref.i];
        case ParamRef::Field::Beta: return spec.beta(ref.i, ref.j);
        case ParamRef::Field::A: return spec.a(ref.i, ref.j);
        case ParamRef::Field::Alpha: return spec.alpha[ref.k](ref.i, ref.j);
        case ParamRef::Field::Lambda: return spec.lambda0;
        case ParamRef::Field::Kappa: return spec.kappa[ref.i];
    }
    return 0.0;
}

void set_param(ModelSpec& spec, const ParamRef& ref, double value) {
    switch (ref.field) {
        case ParamRef::Field::B: spec.b[ref.i] = value; break;
        case ParamRef::Field::Beta: spec.beta(ref.i, ref.j) = value; break;
        case ParamRef::Field::A:
            spec.a(ref.i, ref.j) = value;
            spec.a(ref.j, ref.i) = value;
            break;
        case ParamRef::Field::Alpha:
            spec.alpha[ref.k](ref.i, ref.j) = value;
            spec.alpha[ref.k](ref.j, ref.i) = value;
            break;
        case ParamRef::Field::Lambda: spec.lambda0 = value; break;
        case ParamRef::Field::Kappa: spec.kappa[ref.i] = value; break;
    }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mean residual per u, with the y-side exponentials reusable across calls.
struct GmmEvaluator {
    const TransitionData& data;
    const MomentGrid& grid;
    Mat weight;
    std::vector<Complex> mean_ey;  // mean over k of e^{u'y_k}, per u

    GmmEvaluator(const TransitionData& d, const MomentGrid& g, const Mat& w)
        : data(d), grid(g), weight(w) {
        require(!grid.u_points.empty(), "gmm: empty grid");
        require(!data.x.empty() && data.x.size() == data.y.size(), "gmm: bad transition data");
        const long n = static_cast<long>(data.x.size());
        mean_ey.resize(grid.u_points.size());
        for (size_t q = 0; q < grid.u_points.size(); ++q) {
            const CVec& u = grid.u_points[q];
            Complex acc(0.0, 0.0);
            for (long k = 0; k < n; ++k)
                acc += std::exp((u.array() * data.y[k].array().cast<Complex>()).sum());
            mean_ey[q] = acc / static_cast<double>(n);
        }
        const int dim = 2 * static_cast<int>(grid.u_points.size());
        require(weight.rows() == dim && weight.cols() == dim,
                "gmm: weight must be (2 * #u) square over stacked Re/Im parts");
    }

    double operator()(const ModelSpec& spec) const {
        if (!validate_spec(spec).admissible) return kInf;
        const long n = static_cast<long>(data.x.size());
        Vec gbar(2 * static_cast<int>(grid.u_points.size()));
        try {
            for (size_t q = 0; q < grid.u_points.size(); ++q) {
                const auto sol = solve_transform(spec, grid.u_points[q], grid.delta);
                const Complex phi = sol.phi_end();
                const CVec& psi = sol.psi_end();
                Complex acc(0.0, 0.0);
                for (long k = 0; k < n; ++k) {
                    const Complex px = (psi.array() * data.x[k].array().cast<Complex>()).sum();
                    acc += std::exp(phi + px);
                }
                const Complex g = mean_ey[q] - acc / static_cast<double>(n);
                gbar[2 * q] = g.real();
                gbar[2 * q + 1] = g.imag();
            }
        } catch (const TransformDomainError&) {
            return kInf;
        }
        return gbar.dot(weight * gbar);
    }
};

struct Simplex {
    std::vector<Vec> points;
    std::vector<double> values;
};

}  // namespace

double gmm_objective(const ModelSpec& spec, const TransitionData& data, const MomentGrid& grid,
                     const Mat& weight) {
    return GmmEvaluator(data, grid, weight)(spec);
}

double gmm_objective(const ModelSpec& spec, const TransitionData& data, const MomentGrid& grid) {
    const int dim = 2 * static_cast<int>(grid.u_points.size());
    return gmm_objective(spec, data, grid, Mat::Identity(dim, dim));
}

FitResult fit(const TransitionData& data, const ModelSpec& template_spec,
              const std::vector<std::string>& free_params, const MomentGrid& grid,
              const FitOptions& options) {
    FitResult result;
    result.free_names = free_params;
    result.spec = template_spec;

    const int dim = 2 * static_cast<int>(grid.u_points.size());
    GmmEvaluator eval(data, grid, Mat::Identity(dim, dim));

    if (free_params.empty()) {
        result.params = Vec();
        result.objective = eval(template_spec);
        result.converged = true;
        return result;
    }

    std::vector<ParamRef> refs;
    for (const auto& name : free_params) refs.push_back(parse_param_ref(name, template_spec.d));
    const int k = static_cast<int>(refs.size());

    Vec start(k);
    for (int i = 0; i < k; ++i) start[i] = get_param(template_spec, refs[i]);

    long evals = 0;
    auto objective = [&](const Vec& p) {
        ModelSpec s = template_spec;
        for (int i = 0; i < k; ++i) set_param(s, refs[i], p[i]);
        ++evals;
        return eval(s);
    };

    Vec best = start;
    double best_f = objective(start);
    bool converged = false;
    SplitMix64 rng(options.seed);

    for (int restart = 0; restart <= options.restarts && evals < options.budget; ++restart) {
        Vec origin = best;
        if (restart > 0)
            for (int i = 0; i < k; ++i)
                origin[i] += options.initial_step * (rng.uniform() - 0.5) *
                             (std::abs(best[i]) + 1.0);

        // Nelder-Mead simplex around the origin.
        Simplex sx;
        sx.points.push_back(origin);
        sx.values.push_back(objective(origin));
        for (int i = 0; i < k; ++i) {
            Vec p = origin;
            p[i] += options.initial_step * (std::abs(p[i]) + 1.0);
            sx.points.push_back(p);
            sx.values.push_back(objective(p));
        }

        auto order = [&] {
            std::vector<int> idx(sx.points.size());
            for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
            std::sort(idx.begin(), idx.end(),
                      [&](int a, int b) { return sx.values[a] < sx.values[b]; });
            Simplex sorted;
            for (int i : idx) {
                sorted.points.push_back(sx.points[i]);
                sorted.values.push_back(sx.values[i]);
            }
            sx = std::move(sorted);
        };

        while (evals < options.budget) {
            order();
            if (sx.values[0] < best_f) {
                best_f = sx.values[0];
                best = sx.points[0];
            }
            double spread = 0.0;
            for (int i = 0; i < k; ++i)
                spread = std::max(spread, (sx.points[i + 1] - sx.points[0]).norm());
            if (spread < options.xtol &&
                std::abs(sx.values[k] - sx.values[0]) < options.ftol * (1.0 + std::abs(sx.values[0]))) {
                converged = true;
                break;
            }

            Vec centroid = Vec::Zero(k);
            for (int i = 0; i < k; ++i) centroid += sx.points[i];
            centroid /= k;

            const Vec reflected = centroid + (centroid - sx.points[k]);
            const double fr = objective(reflected);
            if (fr < sx.values[0]) {
                const Vec expanded = centroid + 2.0 * (centroid - sx.points[k]);
                const double fe = objective(expanded);
                if (fe < fr) {
                    sx.points[k] = expanded;
                    sx.values[k] = fe;
                } else {
                    sx.points[k] = reflected;
                    sx.values[k] = fr;
                }
            } else if (fr < sx.values[k - 1]) {
                sx.points[k] = reflected;
                sx.values[k] = fr;
            } else {
                const Vec contracted = centroid + 0.5 * (sx.points[k] - centroid);
                const double fc = objective(contracted);
                if (fc < sx.values[k]) {
                    sx.points[k] = contracted;
                    sx.values[k] = fc;
                } else {
                    for (int i = 1; i <= k; ++i) {
                        sx.points[i] = sx.points[0] + 0.5 * (sx.points[i] - sx.points[0]);
                        sx.values[i] = objective(sx.points[i]);
                    }
                }
            }
        }
        order();
        if (sx.values[0] < best_f) {
            best_f = sx.values[0];
            best = sx.points[0];
        }
    }

    result.params = best;
    result.objective = best_f;
    result.iterations = evals;
    result.converged = converged;
    for (int i = 0; i < k; ++i) set_param(result.spec, refs[i], best[i]);
    return result;
}

}  // namespace ajd
