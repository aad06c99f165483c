#pragma once

#include "fdedep/dependence.hpp"
#include "fdedep/fourier.hpp"
#include "fdedep/lab.hpp"
#include "fdedep/problem.hpp"
#include "fdedep/solver.hpp"
#include "fdedep/tube_lab.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>

namespace fdedep {

// JSON views of the library's reports. Verdicts always carry their resolution and a
// `meaning` line: a ConsistentUpTo verdict is not a proof.

nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const Resolution& r);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const LabConfig& c);
nlohmann::json to_json(const ConsistencyMatrix& m);

nlohmann::json to_json(const SolverOptions& o);
nlohmann::json to_json(const StepRecord& s);
/// Diagnostics block of a solve (the trajectory itself goes to CSV).
nlohmann::json to_json(const SolveResult& r);
/// sigma, r, h, horizon, rhs sources and the phi node values.
nlohmann::json to_json(const ProblemSpec& p);

nlohmann::json to_json(const TubeBound& b);
nlohmann::json to_json(const RandomTubeCheck& c);
nlohmann::json to_json(const LadderCheck& c);
nlohmann::json to_json(const MemberResult& m);
nlohmann::json to_json(const DependenceOptions& o);
nlohmann::json to_json(const DependenceReport& r);

nlohmann::json to_json(const FourierCoeffs& c);
nlohmann::json to_json(const FourierOptions& o);
nlohmann::json to_json(const FourierReport& r);

/// `n, sup_rhs_err, sup_sol_err` table.
void write_fourier_csv(std::ostream& out, const FourierReport& report);

} // namespace fdedep
