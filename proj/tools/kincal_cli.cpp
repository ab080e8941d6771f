// Experiment runner: executes the calibration loop for the configured
// selection methods and writes the per-run, per-iteration and summary CSVs.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "kincal/harness.hpp"

namespace {

void print_summary(const kincal::SuiteResult& suite) {
    std::printf("%-8s %16s %16s %16s %12s\n", "method", "pos_err[mm]", "rot_err[deg]",
                "movement[deg]", "discarded");
    for (std::size_t m = 0; m < suite.config.methods.size(); ++m) {
        const auto s = kincal::summarize_method(suite.config.methods[m], suite.runs[m]);
        std::printf("%-8s %9.3f±%-6.3f %9.3f±%-6.3f %10.1f±%-5.1f %7.2f±%-4.2f\n",
                    kincal::method_name(s.method).c_str(), s.final_pos_err_mm.mean,
                    s.final_pos_err_mm.stddev, s.final_rot_err_deg.mean,
                    s.final_rot_err_deg.stddev, s.final_cum_move_deg.mean,
                    s.final_cum_move_deg.stddev, s.discarded.mean, s.discarded.stddev);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kincal: online body-schema calibration experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the calibration experiment suite");
    std::string config_path;
    std::string out_dir;
    std::string methods;
    std::string noise_mode;
    int reps = -1;
    std::int64_t seed = -1;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--reps", reps, "repetition count override");
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--methods", methods, "comma-separated method filter (r,al,ucsal,ccsal)");
    run->add_option("--noise", noise_mode, "noise mode override (pdn|cn)");

    CLI11_PARSE(app, argc, argv);

    try {
        kincal::ExperimentConfig cfg =
            kincal::experiment_from_config(kincal::ConfigDoc::load(config_path));
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
        if (reps > 0)
            cfg.repetitions = reps;
        if (seed >= 0)
            cfg.master_seed = static_cast<std::uint64_t>(seed);
        if (!noise_mode.empty())
            cfg.noise_mode = kincal::noise_mode_from_name(noise_mode);
        if (!methods.empty()) {
            cfg.methods.clear();
            std::string tok;
            std::istringstream in(methods);
            while (std::getline(in, tok, ','))
                cfg.methods.push_back(kincal::method_from_name(tok));
        }

        const std::size_t total = cfg.methods.size() * static_cast<std::size_t>(cfg.repetitions);
        std::size_t done = 0;
        const kincal::SuiteResult suite = kincal::run_suite(cfg, [&](const kincal::RunRecord& rec) {
            ++done;
            std::fprintf(stderr, "[%zu/%zu] %s rep %d done\n", done, total,
                         kincal::method_name(rec.method).c_str(), rec.run_id);
        });
        kincal::emit_outputs(suite, cfg.out_dir);
        print_summary(suite);
        std::printf("outputs written to %s\n", cfg.out_dir.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
