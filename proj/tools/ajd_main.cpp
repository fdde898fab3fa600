#include <CLI11.hpp>

#include "ajd/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"affine jump-diffusion toolkit"};
    app.require_subcommand(1);

    ajd::RunConfig cfg;

    auto add_common = [&](CLI::App* sub, bool needs_spec = true) {
        if (needs_spec) sub->add_option("spec", cfg.spec_path, "model spec JSON")->required();
        sub->add_option("--out", cfg.outdir, "output directory");
        sub->add_option("--seed", cfg.seed, "master seed");
    };

    auto* check = app.add_subcommand("check", "validate and classify a model");
    add_common(check);

    auto* simulate = app.add_subcommand("simulate", "simulate paths to CSV");
    add_common(simulate);
    simulate->add_option("--x0", cfg.x0, "initial state (d values)");
    simulate->add_option("--T", cfg.T, "horizon");
    simulate->add_option("--dt", cfg.dt, "step size");
    simulate->add_option("--paths", cfg.paths, "number of paths");
    simulate->add_option("--skeleton-delta", cfg.skeleton_delta,
                         "emit skeleton CSV at this sampling interval");
    simulate->add_option("--n", cfg.n, "skeleton observation count");

    auto* transform = app.add_subcommand("transform", "solve the Riccati transform to CSV");
    add_common(transform);
    transform->add_option("--u", cfg.u_args, "initial condition, one complex per coordinate")
        ->required();
    transform->add_option("--T", cfg.T, "horizon");
    transform->add_option("--dt", cfg.dt, "ODE step");

    auto* stationary = app.add_subcommand("stationary", "long-run ergodic average report");
    add_common(stationary);
    stationary->add_option("--x0", cfg.x0, "initial state");
    stationary->add_option("--T", cfg.T, "horizon");
    stationary->add_option("--dt", cfg.dt, "step size");
    stationary->add_option("--batches", cfg.nbatches, "batch count");
    stationary->add_option("--functional", cfg.h_id, "functional: identity | x<i>^<k> | box:lo,hi");

    auto* fclt = app.add_subcommand("fclt", "normality diagnostic for additive functionals");
    add_common(fclt);
    fclt->add_option("--replicates", cfg.replicates, "independent replicates");
    fclt->add_option("--horizon", cfg.horizon, "per-replicate horizon");
    fclt->add_option("--blocks", cfg.finest_blocks, "finest block count (power of two)");
    fclt->add_option("--dt", cfg.dt, "step size");
    fclt->add_option("--functional", cfg.h_id, "functional id");

    auto* transience = app.add_subcommand("transience", "1-D transience certificate and escape run");
    add_common(transience);
    transience->add_option("--x0", cfg.x0, "initial state");
    transience->add_option("--paths", cfg.paths, "escape-run paths");
    transience->add_option("--T", cfg.escape_T, "escape horizon");
    transience->add_option("--dt", cfg.dt, "step size");
    transience->add_option("--level", cfg.level, "exceedance level");
    transience->add_option("--eps-max", cfg.eps_max, "h(eps) grid upper end");
    transience->add_option("--eps-points", cfg.eps_points, "h(eps) grid size");

    auto* calibrate = app.add_subcommand("calibrate", "fit free parameters to skeleton data");
    calibrate->add_option("data", cfg.data_path, "skeleton CSV")->required();
    calibrate->add_option("template", cfg.spec_path, "template spec JSON")->required();
    calibrate->add_option("--free", cfg.free_params, "free parameters, e.g. beta b[0]");
    calibrate->add_option("--grid", cfg.u_args,
                          "frequency levels per coordinate (default 0.5i 1i 2i)");
    calibrate->add_option("--out", cfg.outdir, "output directory");
    calibrate->add_option("--seed", cfg.seed, "optimizer seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ajd::kExitValidation;
    }

    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (cfg.subcommand == "transience") cfg.paths = std::max(cfg.paths, 1L);
    return ajd::run(cfg);
}
