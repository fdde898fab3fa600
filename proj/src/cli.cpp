#include "ajd/cli.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ajd/calibrate.hpp"
#include "ajd/limits.hpp"
#include "ajd/model_io.hpp"
#include "ajd/parallel.hpp"
#include "ajd/riccati.hpp"
#include "ajd/stability.hpp"

namespace ajd {

namespace {

constexpr int kSchemaVersion = 1;

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.outdir);
    return (std::filesystem::path(cfg.outdir) / name).string();
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

Json stability_to_json(const StabilityReport& rep) {
    Json j;
    j["eig_beta_max_re"] = rep.eig_beta_max_re;
    j["eig_effective_max_re"] = rep.eig_effective_max_re;
    j["classification"] = to_string(rep.classification);
    j["p"] = rep.p;
    j["ergodic"] = rep.ergodic();
    if (rep.H) j["H"] = matrix_to_json(*rep.H);
    j["notes"] = rep.notes;
    return j;
}

Json ergodic_to_json(const ErgodicReport& rep) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["h"] = rep.h_id;
    j["skeleton"] = rep.skeleton;
    j["horizon"] = rep.horizon;
    j["average"] = vector_to_json(rep.average);
    j["batch_count"] = rep.batch_count;
    j["bm_variance"] = matrix_to_json(rep.bm_variance);
    j["ci_halfwidth"] = vector_to_json(rep.ci_halfwidth);
    if (rep.target) {
        j["target"] = vector_to_json(*rep.target);
        j["z_scores"] = vector_to_json(rep.z_scores);
    }
    return j;
}

Vec start_state(const RunConfig& cfg, const ModelSpec& spec) {
    if (cfg.x0.empty()) return Vec::Zero(spec.d);
    require(static_cast<int>(cfg.x0.size()) == spec.d, "--x0 needs d components");
    Vec x(spec.d);
    for (int i = 0; i < spec.d; ++i) x[i] = cfg.x0[i];
    return x;
}

Functional parse_functional(const std::string& id, int d) {
    if (id == "identity") return Functional::identity();
    // "x<i>^<k>" -> coordinate power
    if (id.size() >= 2 && id[0] == 'x') {
        const auto caret = id.find('^');
        const int coord = std::stoi(id.substr(1, caret - 1)) - 1;
        const int power = caret == std::string::npos ? 1 : std::stoi(id.substr(caret + 1));
        require(coord >= 0 && coord < d, "functional: coordinate out of range");
        return Functional::coordinate_power(coord, power);
    }
    // "box:lo,hi" -> indicator of [lo,hi]^d
    if (id.rfind("box:", 0) == 0) {
        const auto comma = id.find(',');
        require(comma != std::string::npos, "functional: box:lo,hi");
        const double lo = std::stod(id.substr(4, comma - 4));
        const double hi = std::stod(id.substr(comma + 1));
        return Functional::indicator_box(Vec::Constant(d, lo), Vec::Constant(d, hi));
    }
    throw std::invalid_argument("unknown functional id '" + id + "'");
}

int cmd_check(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    const auto validation = validate_spec(spec);
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["validation"] = validation_to_json(validation);
    if (validation.admissible) j["stability"] = stability_to_json(classify(spec));
    std::cout << j.dump(2) << "\n";
    return validation.admissible ? kExitOk : kExitValidation;
}

int cmd_simulate(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    require_admissible(spec);
    const Vec x0 = start_state(cfg, spec);

    if (cfg.skeleton_delta > 0.0) {
        require(cfg.paths == 1, "skeleton output supports a single path");
        const auto skel = simulate_skeleton(spec, x0, cfg.skeleton_delta, cfg.n, cfg.dt, cfg.seed);
        std::vector<std::string> cols = {"t"};
        for (int i = 0; i < spec.d; ++i) cols.push_back("x_" + std::to_string(i + 1));
        std::vector<std::vector<double>> rows;
        for (size_t k = 0; k < skel.states.size(); ++k) {
            std::vector<double> row = {static_cast<double>(k) * skel.delta};
            for (int i = 0; i < spec.d; ++i) row.push_back(skel.states[k][i]);
            rows.push_back(std::move(row));
        }
        write_csv_artifact(artifact_path(cfg, "skeleton.csv"), "skeleton", cols, rows);
        return kExitOk;
    }

    std::vector<std::string> cols = {"path_id", "t"};
    for (int i = 0; i < spec.d; ++i) cols.push_back("x_" + std::to_string(i + 1));
    cols.push_back("is_jump");

    std::vector<PathSample> samples(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t p) {
        PathSample path;
        path.seed = cfg.seed;
        walk_path(spec, x0, cfg.T, cfg.dt, path_stream(cfg.seed, p),
                  [&](double t, const Vec& x, bool is_jump) {
                      path.times.push_back(t);
                      path.states.push_back(x);
                      if (is_jump) path.jump_epochs.push_back(t);
                      return true;
                  });
        samples[p] = std::move(path);
    });

    std::vector<std::vector<double>> rows;
    for (long p = 0; p < cfg.paths; ++p) {
        const auto& path = samples[p];
        size_t jump_idx = 0;
        for (size_t k = 0; k < path.times.size(); ++k) {
            const bool is_jump = jump_idx < path.jump_epochs.size() &&
                                 path.jump_epochs[jump_idx] == path.times[k];
            if (is_jump) ++jump_idx;
            std::vector<double> row = {static_cast<double>(p), path.times[k]};
            for (int i = 0; i < spec.d; ++i) row.push_back(path.states[k][i]);
            row.push_back(is_jump ? 1.0 : 0.0);
            rows.push_back(std::move(row));
        }
    }
    write_csv_artifact(artifact_path(cfg, "paths.csv"), "paths", cols, rows);
    return kExitOk;
}

int cmd_transform(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    require_admissible(spec);
    require(static_cast<int>(cfg.u_args.size()) == spec.d, "--u needs d complex components");
    CVec u(spec.d);
    for (int i = 0; i < spec.d; ++i) u[i] = parse_complex(cfg.u_args[i]);

    const auto sol = solve_transform(spec, u, cfg.T, cfg.dt);
    std::vector<std::string> cols = {"t", "phi_re", "phi_im"};
    for (int i = 0; i < spec.d; ++i) {
        cols.push_back("psi" + std::to_string(i + 1) + "_re");
        cols.push_back("psi" + std::to_string(i + 1) + "_im");
    }
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < sol.grid.size(); ++k) {
        std::vector<double> row = {sol.grid[k], sol.phi[k].real(), sol.phi[k].imag()};
        for (int i = 0; i < spec.d; ++i) {
            row.push_back(sol.psi[k][i].real());
            row.push_back(sol.psi[k][i].imag());
        }
        rows.push_back(std::move(row));
    }
    write_csv_artifact(artifact_path(cfg, "transform.csv"), "transform", cols, rows);
    return kExitOk;
}

int cmd_stationary(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    require_admissible(spec);
    const auto h = parse_functional(cfg.h_id, spec.d);

    std::optional<Vec> target;
    const auto cls = classify(spec);
    if (cls.ergodic() && h.kind() == Functional::Kind::Identity)
        target = corollary_mean(spec);

    const auto rep = ergodic_report_continuous(spec, start_state(cfg, spec), cfg.T, cfg.dt,
                                               cfg.seed, h, cfg.nbatches, target);
    Json j = ergodic_to_json(rep);
    j["classification"] = to_string(cls.classification);
    j["T"] = cfg.T;
    j["dt"] = cfg.dt;
    j["seed"] = cfg.seed;
    write_json(artifact_path(cfg, "stationary.json"), j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_fclt(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    require_admissible(spec);
    const auto h = parse_functional(cfg.h_id, spec.d);
    const auto rep = fclt_diagnostic(spec, h, static_cast<int>(cfg.replicates), cfg.horizon,
                                     cfg.finest_blocks, cfg.dt, cfg.seed);
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["replicates"] = rep.replicates;
    j["horizon"] = rep.horizon;
    j["quantile_correlation"] = rep.quantile_correlation;
    j["variance_slope"] = rep.variance_slope;
    j["block_sizes"] = rep.block_sizes;
    j["block_variances"] = rep.block_variances;
    write_json(artifact_path(cfg, "fclt.json"), j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_transience(const RunConfig& cfg) {
    const ModelSpec spec = load_spec(cfg.spec_path);
    require_admissible(spec);
    require(spec.d == 1 && spec.m == 1, "transience: requires d = m = 1");

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["slope_at_zero"] = transience_rate_slope0(spec);

    Json grid = Json::array();
    double eps_positive = 0.0;
    for (int k = 1; k <= cfg.eps_points; ++k) {
        const double eps = cfg.eps_max * k / cfg.eps_points;
        const double hval = transience_rate_1d(spec, eps);
        grid.push_back(Json{{"eps", eps}, {"h", hval}});
        if (hval > 0.0 && eps_positive == 0.0) eps_positive = eps;
    }
    j["h_grid"] = std::move(grid);
    j["transient_certificate"] = eps_positive > 0.0;
    if (eps_positive > 0.0) j["eps_with_positive_h"] = eps_positive;

    // Escape experiment: first crossing time of the level per path, reported
    // as the cumulative exceedance fraction over a time grid.
    const Vec x0 = cfg.x0.empty() ? Vec::Ones(1) : start_state(cfg, spec);
    std::vector<double> crossing(cfg.paths, -1.0);
    parallel_for(cfg.paths, [&](std::size_t p) {
        walk_path(spec, x0, cfg.escape_T, cfg.dt, path_stream(cfg.seed, p),
                  [&](double t, const Vec& x, bool) {
                      if (x[0] >= cfg.level) {
                          crossing[p] = t;
                          return false;  // indicator only; stop before the
                                         // intensity blows up along the escape
                      }
                      return true;
                  });
    });
    long count = 0;
    for (double c : crossing) count += c >= 0.0 ? 1 : 0;

    const int series_points = 25;
    Json series = Json::array();
    for (int k = 1; k <= series_points; ++k) {
        const double t = cfg.escape_T * k / series_points;
        long n = 0;
        for (double c : crossing) n += (c >= 0.0 && c <= t) ? 1 : 0;
        series.push_back(Json{{"t", t}, {"fraction", static_cast<double>(n) / cfg.paths}});
    }
    j["escape"] = Json{{"level", cfg.level},
                       {"T", cfg.escape_T},
                       {"paths", cfg.paths},
                       {"fraction", static_cast<double>(count) / cfg.paths},
                       {"series", std::move(series)}};
    write_json(artifact_path(cfg, "transience.json"), j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_calibrate(const RunConfig& cfg) {
    const ModelSpec tmpl = load_spec(cfg.spec_path);
    require_admissible(tmpl);

    const CsvTable table = read_csv_artifact(cfg.data_path);
    require(table.columns.size() >= 2 && table.columns[0] == "t",
            "calibrate: expected skeleton CSV with columns t,x_1,...");
    require(static_cast<int>(table.columns.size()) == tmpl.d + 1,
            "calibrate: data dimension does not match the template");
    require(table.rows.size() >= 3, "calibrate: too few observations");

    const double delta = table.rows[1][0] - table.rows[0][0];
    require(delta > 0.0, "calibrate: nonincreasing time column");
    for (size_t k = 1; k < table.rows.size(); ++k)
        require(std::abs(table.rows[k][0] - table.rows[k - 1][0] - delta) < 1e-9 * (1.0 + delta),
                "calibrate: time grid must be uniform");

    TransitionData data;
    for (size_t k = 0; k + 1 < table.rows.size(); ++k) {
        Vec x(tmpl.d), y(tmpl.d);
        for (int i = 0; i < tmpl.d; ++i) {
            x[i] = table.rows[k][i + 1];
            y[i] = table.rows[k + 1][i + 1];
        }
        data.x.push_back(std::move(x));
        data.y.push_back(std::move(y));
    }

    MomentGrid grid;
    if (cfg.u_args.empty()) {
        grid = default_grid(tmpl.d, delta);
    } else {
        grid.delta = delta;
        for (int i = 0; i < tmpl.d; ++i) {
            for (const auto& text : cfg.u_args) {
                CVec u = CVec::Zero(tmpl.d);
                u[i] = parse_complex(text);
                grid.u_points.push_back(std::move(u));
            }
        }
    }
    FitOptions options;
    options.seed = cfg.seed;
    const auto result = fit(data, tmpl, cfg.free_params, grid, options);

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["free"] = result.free_names;
    Json est = Json::array();
    for (int i = 0; i < result.params.size(); ++i) est.push_back(result.params[i]);
    j["estimate"] = std::move(est);
    j["objective"] = result.objective;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["delta"] = delta;
    j["n"] = table.rows.size() - 1;
    j["spec"] = spec_to_json(result.spec);
    const auto cls = classify(result.spec);
    j["classification"] = to_string(cls.classification);
    if (!cls.ergodic()) j["warning"] = "fitted model is not classified ergodic";
    write_json(artifact_path(cfg, "fit.json"), j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

CsvTable read_csv_artifact(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV: " + path);
    CsvTable table;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "CSV: empty file");
    const std::string prefix = "# schema=ajd.";
    require(line.rfind(prefix, 0) == 0, "CSV: missing schema line");
    const auto dot = line.rfind(".v1");
    require(dot != std::string::npos, "CSV: unsupported schema version");
    table.kind = line.substr(prefix.size(), dot - prefix.size());

    require(static_cast<bool>(std::getline(in, line)), "CSV: missing header");
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) table.columns.push_back(col);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> values;
        std::string cell;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        require(values.size() == table.columns.size(), "CSV: ragged row");
        table.rows.push_back(std::move(values));
    }
    return table;
}

void write_csv_artifact(const std::string& path, const std::string& kind,
                        const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV: " + path);
    out << "# schema=ajd." << kind << ".v1\n";
    for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
        out << "\n";
    }
}

Complex parse_complex(const std::string& text) {
    require(!text.empty(), "empty complex literal");
    std::string s = text;
    bool imag_only = false;
    if (s.back() == 'i' || s.back() == 'I') {
        // find the split between real and imaginary parts, if any
        size_t split = std::string::npos;
        for (size_t k = s.size() - 1; k > 0; --k) {
            if ((s[k] == '+' || s[k] == '-') && !(std::tolower(s[k - 1]) == 'e')) {
                split = k;
                break;
            }
        }
        if (split == std::string::npos) {
            imag_only = true;
        } else {
            const double re = std::stod(s.substr(0, split));
            std::string im = s.substr(split, s.size() - split - 1);
            if (im == "+" || im == "-") im += "1";
            return Complex(re, std::stod(im));
        }
    }
    if (imag_only) {
        std::string im = s.substr(0, s.size() - 1);
        if (im.empty() || im == "+" || im == "-") im += "1";
        return Complex(0.0, std::stod(im));
    }
    return Complex(std::stod(s), 0.0);
}

int run(const RunConfig& config) {
    try {
        if (config.subcommand == "check") return cmd_check(config);
        if (config.subcommand == "simulate") return cmd_simulate(config);
        if (config.subcommand == "transform") return cmd_transform(config);
        if (config.subcommand == "stationary") return cmd_stationary(config);
        if (config.subcommand == "fclt") return cmd_fclt(config);
        if (config.subcommand == "transience") return cmd_transience(config);
        if (config.subcommand == "calibrate") return cmd_calibrate(config);
        std::cerr << "unknown subcommand: " << config.subcommand << "\n";
        return kExitValidation;
    } catch (const TransformDomainError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace ajd
