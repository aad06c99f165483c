#include "fde-dep/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace fdedep::cli;

    CLI::App app{"fde-dep: retarded functional differential equations, continuous dependence experiments"};
    app.require_subcommand(1);

    RunConfig config;
    std::string output = ".";
    double h = 0;
    double tol = 0;
    double radius = 0;
    std::size_t k_max = 0;
    std::uint64_t seed = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"solve", "Solve one problem; writes trajectory.csv and diagnostics.json"},
        {"family", "Run a continuous-dependence experiment; writes report.json and family.csv"},
        {"fourier", "Fourier partial-sum application; writes fourier.csv and fourier.json"},
        {"check-seq", "Classify a function sequence; writes verdicts.json"},
    };
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> h_opt, tol_opt, radius_opt, k_opt, seed_opt;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        // -h would collide with --h, the grid step.
        sub->set_help_flag("--help", "Print this help message and exit");
        sub->add_option("input", config.input, "JSON input file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", output, "Output directory")->capture_default_str();
        h_opt.push_back(sub->add_option("--h", h, "Grid step override"));
        tol_opt.push_back(sub->add_option("--tol", tol, "Picard tolerance override"));
        radius_opt.push_back(sub->add_option("--radius", radius, "Tube radius override"));
        k_opt.push_back(sub->add_option("--k-max", k_max, "Largest member index (family K, sequence k_max)"));
        seed_opt.push_back(sub->add_option("--seed", seed, "Seed for the random spot checks"));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        config.command = *parse_command(commands[i].first);
        if (*h_opt[i]) config.overrides.h = h;
        if (*tol_opt[i]) config.overrides.tol = tol;
        if (*radius_opt[i]) config.overrides.radius = radius;
        if (*k_opt[i]) config.overrides.k_max = k_max;
        if (*seed_opt[i]) config.overrides.seed = seed;
    }
    config.output = output;
    return run(config, std::cout, std::cerr);
}
