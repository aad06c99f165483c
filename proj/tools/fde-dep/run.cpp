#include "fde-dep/run.hpp"

#include "fdedep/csv.hpp"
#include "fdedep/error.hpp"
#include "fdedep/json_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

namespace fdedep::cli {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw ConfigError(path.string() + ": write failed");
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// The timestamp is the only line that differs between identical runs.
void write_manifest(const RunConfig& c, const json& resolved, const std::vector<std::string>& files) {
    const Overrides& o = c.overrides;
    json manifest = {{"tool", "fde-dep"},
                     {"version", "0.1.0"},
                     {"command", command_name(c.command)},
                     {"input", c.input.string()},
                     {"output", c.output.string()},
                     {"overrides",
                      {{"h", opt(o.h)}, {"tol", opt(o.tol)}, {"radius", opt(o.radius)}, {"k_max", opt(o.k_max)},
                       {"seed", opt(o.seed)}}},
                     {"config", resolved},
                     {"files", files},
                     {"generated_at", utc_now()}};
    write_json(c.output / "manifest.json", manifest);
}

int run_solve(const RunConfig& c, std::ostream& out) {
    const ProblemConfig cfg = load_problem(read_document(c.input), c.overrides);
    const SolveResult r = solve(cfg.problem, cfg.solver);
    std::filesystem::create_directories(c.output);
    write_text(c.output / "trajectory.csv", to_csv(r.x.fn()));
    json diag = to_json(r);
    diag["problem"] = to_json(cfg.problem);
    write_json(c.output / "diagnostics.json", diag);
    write_manifest(c, cfg.resolved, {"trajectory.csv", "diagnostics.json"});
    const bool ok = r.status == SolveStatus::Completed;
    out << "solve: " << (ok ? "Completed" : "Stalled") << ", reached t = " << cfg.problem.sigma + r.achieved << " in "
        << r.steps.size() << " step(s)";
    if (!ok) out << " (" << r.stall_reason << ")";
    out << "\n";
    return ok ? kPassed : kFailedVerdict;
}

int run_family(const RunConfig& c, std::ostream& out) {
    const FamilyConfig cfg = load_family(read_document(c.input), c.overrides);
    const DependenceReport rep = run_dependence(cfg.family, cfg.options);
    std::filesystem::create_directories(c.output);
    write_json(c.output / "report.json", to_json(rep));
    {
        std::ofstream csv(c.output / "family.csv", std::ios::binary);
        write_family_csv(csv, rep);
    }
    write_manifest(c, cfg.resolved, {"report.json", "family.csv"});
    out << "family: existence " << (rep.existence ? "pass" : "FAIL") << ", convergence "
        << (rep.convergence_passed ? "pass" : "FAIL") << ", bound violations " << rep.solver_violations << "\n";
    for (const auto& u : rep.untestable) out << "  untestable: " << u << "\n";
    return rep.passed() ? kPassed : kFailedVerdict;
}

int run_fourier(const RunConfig& c, std::ostream& out) {
    const FourierConfig cfg = load_fourier(read_document(c.input), c.overrides);
    const FourierReport rep = run_fourier_application(cfg.f, cfg.options);
    std::filesystem::create_directories(c.output);
    {
        std::ofstream csv(c.output / "fourier.csv", std::ios::binary);
        write_fourier_csv(csv, rep);
    }
    write_json(c.output / "fourier.json", to_json(rep));
    write_manifest(c, cfg.resolved, {"fourier.csv", "fourier.json"});
    bool completed = rep.base_completed && rep.reference_completed;
    for (const auto& o : rep.orders) completed = completed && o.completed;
    const bool ok = completed && !rep.continuous_convergence.refuted() && rep.gronwall_all && rep.bessel_holds;
    out << "fourier: " << rep.orders.size() << " order(s), continuous convergence "
        << to_string(rep.continuous_convergence.tag) << ", Gronwall check " << (rep.gronwall_all ? "pass" : "FAIL")
        << "\n";
    if (rep.variation_warning) out << "  warning: total variation grows under refinement\n";
    return ok ? kPassed : kFailedVerdict;
}

int run_check_seq(const RunConfig& c, std::ostream& out) {
    const SeqConfig cfg = load_seq(read_document(c.input), c.overrides);
    const ConsistencyMatrix m = cross_check(cfg.seq, cfg.lab);
    std::filesystem::create_directories(c.output);
    write_json(c.output / "verdicts.json", to_json(m));
    write_manifest(c, cfg.resolved, {"verdicts.json"});
    for (const Verdict* v : {&m.pointwise, &m.exhaustive, &m.weak_exhaustive, &m.continuous, &m.uniform})
        out << v->check << ": " << to_string(v->tag) << "\n";
    for (const auto& i : m.inconsistencies) out << "INCONSISTENCY " << i.rule << ": " << i.detail << "\n";
    return m.any_refuted() || !m.inconsistencies.empty() ? kFailedVerdict : kPassed;
}

} // namespace

std::optional<Command> parse_command(std::string_view name) {
    if (name == "solve") return Command::Solve;
    if (name == "family") return Command::Family;
    if (name == "fourier") return Command::Fourier;
    if (name == "check-seq") return Command::CheckSeq;
    return std::nullopt;
}

std::string_view command_name(Command command) {
    switch (command) {
    case Command::Solve: return "solve";
    case Command::Family: return "family";
    case Command::Fourier: return "fourier";
    case Command::CheckSeq: return "check-seq";
    }
    return "";
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const Overrides& o = config.overrides;
        if (o.h && !(*o.h > 0.0)) throw ConfigError("--h must be positive");
        if (o.tol && !(*o.tol > 0.0)) throw ConfigError("--tol must be positive");
        if (o.radius && !(*o.radius > 0.0)) throw ConfigError("--radius must be positive");
        if (o.k_max && config.command == Command::CheckSeq && *o.k_max < 2)
            throw ConfigError("--k-max must be at least 2");
        switch (config.command) {
        case Command::Solve: return run_solve(config, out);
        case Command::Family: return run_family(config, out);
        case Command::Fourier: return run_fourier(config, out);
        case Command::CheckSeq: return run_check_seq(config, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "error: " << config.input.string() << ": " << e.what() << "\n";
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kUsageError;
}

} // namespace fdedep::cli
