#pragma once

#include "fde-dep/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace fdedep::cli {

enum class Command { Solve, Family, Fourier, CheckSeq };

std::optional<Command> parse_command(std::string_view name);
std::string_view command_name(Command command);

struct RunConfig {
    Command command = Command::Solve;
    std::filesystem::path input;
    std::filesystem::path output = ".";
    Overrides overrides;
};

/// Exit codes of run().
enum ExitCode : int { kPassed = 0, kFailedVerdict = 1, kUsageError = 2 };

/// Loads the input, runs the pipeline and writes every report plus manifest.json into the
/// output directory. Progress goes to `out`, error messages to `err`. Never throws.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace fdedep::cli
