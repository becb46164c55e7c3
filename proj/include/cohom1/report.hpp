#pragma once

#include "cohom1/einstein.hpp"
#include "cohom1/formal.hpp"
#include "cohom1/shooting.hpp"

#include <json.hpp>

#include <set>

namespace cohom1 {

using Json = nlohmann::json;

inline constexpr const char* kReportSchema = "cohom1-report/1";

// Rationals are written as strings "a/b" (or "a" for integers) so that no precision is lost.
Json to_json(const Rational& r);
Json to_json(const QVector& v);
Json to_json(const std::vector<QVector>& vs);
Json to_json(const ParamEnv& env);

Json model_report(const ModelSpec& spec);
Json einstein_report(const ModelSpec& spec, std::size_t trials, std::uint64_t seed);

// Series dump: coefficients in both conventions, kernel basis, D_m, det table when a
// closed form exists, and the residual certificate.
Json series_report(const SeriesSolution<Rational>& sol, std::size_t det_hi = 20);

struct CheckOutcome {
	std::string name;
	bool pass = false;
	Json detail;
};

struct Verification {
	std::vector<CheckOutcome> checks;
	[[nodiscard]] bool pass() const;
	[[nodiscard]] Json to_json() const;
};

struct VerifyOptions {
	std::size_t equivalence_trials = 100;
	std::size_t order = 12;
	std::size_t det_hi = 20;
	std::size_t random_bindings = 5;
	std::uint64_t seed = 7;
	ParamEnv env;  // lambda and slot values; missing ones default to 1
};

// Exact identity suite for one model.
Verification verify_model(const ModelSpec& spec, const VerifyOptions& opt);

Json trajectory_report(const Trajectory& traj, const DefectReport& defect);
std::string trajectory_csv(const Trajectory& traj);
Json scan_report(const ModelSpec& spec, int endpoint, const std::vector<ScanRow>& rows);
std::string scan_csv(const ModelSpec& spec, const std::vector<ScanRow>& rows);
Json match_report(const MatchParams& p, const MatchResult& r);
Json minimize_report(const MinimizeResult& r);

// ---------------------------------------------------------------------------
// Reproduction suite: one section per acceptance check.

struct SectionResult {
	std::string name;
	int criterion = 0;
	bool pass = false;
	std::string summary;
	Json detail;
	double seconds = 0.0;
};

struct ReproduceOptions {
	std::set<std::string> only;  // section names; empty runs everything
	std::uint64_t seed = 20240611;
	bool deterministic = false;
};

struct ReproduceResult {
	std::vector<SectionResult> sections;
	std::string nonexistence_csv;
	[[nodiscard]] bool pass() const;
	[[nodiscard]] Json to_json(bool deterministic) const;
};

const std::vector<std::string>& reproduce_sections();
// Throws InvalidParameters for an unknown section name.
ReproduceResult reproduce(const ReproduceOptions& opt);

}  // namespace cohom1
