// d2l: distributed dictionary learning simulator.
//
//   d2l run      [flags]  distributed run on a synthetic instance -> run.csv
//   d2l denoise  [flags]  patch-based image denoising -> PGMs + quality report
//   d2l compare  [flags]  both variants vs the diffusion baseline -> compare.csv
//   d2l validate [flags]  graph / weight / gradient self-checks

#include "d2l/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<long> rounds;
    std::optional<std::string> variant;
    std::optional<int> agents;
    std::optional<std::string> graph;
    std::optional<std::string> image;
    std::string out_dir = ".";
};

void add_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "key=value config file");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--rounds", f.rounds, "number of rounds");
    cmd->add_option("--variant", f.variant, "plain | linearized");
    cmd->add_option("--agents", f.agents, "number of agents");
    cmd->add_option("--graph", f.graph, "graph schedule kind");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
}

d2l::ExperimentConfig load(const Flags& f, d2l::ExperimentConfig cfg)
{
    if (!f.config.empty()) d2l::apply_config_file(cfg, f.config);
    if (f.seed) cfg.run.seed = *f.seed;
    if (f.rounds) cfg.run.max_rounds = *f.rounds;
    if (f.variant) cfg.set("variant", *f.variant);
    if (f.agents) cfg.synthetic.agents = *f.agents;
    if (f.graph) cfg.set("graph", *f.graph);
    if (f.image) cfg.denoise.image = *f.image;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const Flags& f, const std::string& name)
{
    fs::create_directories(f.out_dir);
    std::ofstream out(fs::path(f.out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(f.out_dir) / name).string());
    return out;
}

int cmd_run(const Flags& f)
{
    const auto cfg = load(f, d2l::ExperimentConfig::synthetic_defaults());
    const auto trace = d2l::run_synthetic(cfg);
    auto out = open_out(f, "run.csv");
    d2l::write_csv(out, trace);
    const auto& last = trace.back();
    std::cout << "rounds " << last.nu << "  messages " << last.messages << "  objective "
              << d2l::format_number(last.objective) << "  delta " << d2l::format_number(last.delta) << "  cons_err "
              << d2l::format_number(last.cons_err) << '\n';
    if (last.flags) std::cout << "note: " << last.flags << " inner solves hit their iteration budget\n";
    return 0;
}

int cmd_denoise(const Flags& f)
{
    const auto cfg = load(f, d2l::ExperimentConfig::denoise_defaults());
    const auto res = d2l::run_denoise(d2l::denoise_source(cfg), cfg);
    const fs::path dir(f.out_dir);
    fs::create_directories(dir);
    d2l::write_pgm(dir / "clean.pgm", res.clean);
    d2l::write_pgm(dir / "noisy.pgm", res.noisy);
    d2l::write_pgm(dir / "denoised.pgm", res.denoised);
    {
        auto out = open_out(f, "denoise_trace.csv");
        d2l::write_csv(out, res.trace);
    }
    auto report = open_out(f, "denoise_report.csv");
    report << "image,messages,psnr_db,mse\n";
    report << "noisy,0," << d2l::format_number(res.input.psnr_db) << ',' << d2l::format_number(res.input.mse) << '\n';
    report << "denoised," << res.trace.back().messages << ',' << d2l::format_number(res.output.psnr_db) << ','
           << d2l::format_number(res.output.mse) << '\n';
    std::cout << "variant " << d2l::to_string(cfg.run.sched.variant) << "  noise sigma " << res.noise_sigma << '\n'
              << "noisy     PSNR " << res.input.psnr_db << " dB  MSE " << res.input.mse << '\n'
              << "denoised  PSNR " << res.output.psnr_db << " dB  MSE " << res.output.mse << "  after "
              << res.trace.back().messages << " message exchanges\n";
    return 0;
}

int cmd_compare(const Flags& f)
{
    const auto cfg = load(f, d2l::ExperimentConfig::synthetic_defaults());
    const auto traces = d2l::run_compare(cfg);
    auto out = open_out(f, "compare.csv");
    d2l::write_merged_csv(out, traces);
    for (long budget : cfg.budgets) {
        std::cout << "budget " << budget << ':';
        for (const auto& [name, trace] : traces) {
            const auto& r = trace.at_message_budget(budget);
            std::cout << "  " << name << " delta=" << d2l::format_number(r.delta)
                      << " cons_err=" << d2l::format_number(r.cons_err);
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_validate(const Flags& f)
{
    const auto cfg = load(f, d2l::ExperimentConfig::synthetic_defaults());
    bool all = true;
    for (const auto& c : d2l::run_validate(cfg)) {
        std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
        std::cout << '\n';
        all = all && c.pass;
    }
    std::cout << (all ? "all checks passed" : "some checks failed") << '\n';
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed dictionary learning simulator"};
    app.require_subcommand(1);

    Flags run_f, denoise_f, compare_f, validate_f;
    auto* run = app.add_subcommand("run", "distributed run on a synthetic instance");
    auto* denoise = app.add_subcommand("denoise", "patch-based image denoising");
    auto* compare = app.add_subcommand("compare", "variants vs diffusion baseline at equal message budgets");
    auto* validate = app.add_subcommand("validate", "graph, weight and gradient self-checks");
    add_flags(run, run_f);
    add_flags(denoise, denoise_f);
    denoise->add_option("--image", denoise_f.image, "8-bit PGM (P2/P5) to denoise; center-cropped");
    add_flags(compare, compare_f);
    add_flags(validate, validate_f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_f);
        if (*denoise) return cmd_denoise(denoise_f);
        if (*compare) return cmd_compare(compare_f);
        if (*validate) return cmd_validate(validate_f);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
