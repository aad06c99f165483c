#pragma once

#include "fdedep/dependence.hpp"
#include "fdedep/fourier.hpp"
#include "fdedep/lab.hpp"
#include "fdedep/problem.hpp"
#include "fdedep/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace fdedep::cli {

/// Bad input: unreadable file, malformed JSON, a missing or mistyped field, an invalid value.
/// The message starts with `file:line:column`, followed by the field path for semantic errors.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<double> h;
    std::optional<double> tol;
    std::optional<double> radius;
    std::optional<std::size_t> k_max;
    std::optional<std::uint64_t> seed;
};

struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
};

/// Parsed document plus its origin, for error messages.
struct Document {
    std::string file;
    nlohmann::json root;
    /// Where each value starts, keyed by path ("base.solver.tol", "orders[2]"); object
    /// members point at their key.
    std::map<std::string, SourcePos> positions;
};

/// Position index of a syntactically valid JSON text.
std::map<std::string, SourcePos> locate_values(const std::string& text);

Document read_document(const std::filesystem::path& path);
Document parse_document(const std::string& text, const std::string& file);

// Each loader also returns `resolved`: the input with every default filled in.

struct ProblemConfig {
    ProblemSpec problem;
    SolverOptions solver;
    nlohmann::json resolved;
};

struct FamilyConfig {
    FamilySpec family;
    DependenceOptions options;
    nlohmann::json resolved;
};

struct FourierConfig {
    Expr f;
    FourierOptions options;
    nlohmann::json resolved;
};

struct SeqConfig {
    FnSeq seq;
    LabConfig lab;
    nlohmann::json resolved;
};

ProblemConfig load_problem(const Document& doc, const Overrides& overrides);
FamilyConfig load_family(const Document& doc, const Overrides& overrides);
FourierConfig load_fourier(const Document& doc, const Overrides& overrides);
SeqConfig load_seq(const Document& doc, const Overrides& overrides);

} // namespace fdedep::cli
