#pragma once

#include "cohom1/einstein.hpp"
#include "cohom1/formal.hpp"

#include <functional>
#include <optional>

namespace cohom1 {

class SeriesDivergent : public Error {
   public:
	SeriesDivergent(double eps, double estimate);
	double eps, estimate;
};

class StepUnderflow : public Error {
   public:
	using Error::Error;
};

enum class Termination { ReachedTarget, Collapse, Blowup, StepUnderflow };
std::string to_string(Termination t);

// ---------------------------------------------------------------------------
// Generic adaptive Dormand-Prince 5(4) integration with a terminal event.

using OdeRhs = std::function<void(double t, const std::vector<double>& y, std::vector<double>& dy)>;
// Returns a positive value while the state is admissible; a sign change ends the run.
using OdeEvent = std::function<double(double t, const std::vector<double>& y)>;
using OdeObserver = std::function<void(double t, const std::vector<double>& y)>;

struct IntegratorOptions {
	double rtol = 1e-10;
	double atol = 1e-12;
	double h_initial = 1e-4;
	double h_max = 0.02;
	double h_min_relative = 1e-13;
	std::size_t max_steps = 2000000;
	double event_tolerance = 1e-13;
};

struct OdeResult {
	double t = 0.0;
	std::vector<double> y;
	Termination reason = Termination::ReachedTarget;
	std::size_t accepted = 0, rejected = 0;
	std::size_t event_index = 0;  // which event fired, when reason is not ReachedTarget
};

// Integrates from t0 towards t1 (t1 > t0). Events are tested after every accepted step;
// the first crossing is located by bisection on the step size. The observer sees the
// initial state and every accepted state, including the final one.
OdeResult integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> y0, double t1,
                        const IntegratorOptions& opt, const std::vector<std::pair<OdeEvent, Termination>>& events = {},
                        const OdeObserver& observer = {});

// ---------------------------------------------------------------------------
// Einstein system in f-variables, compiled for floating point.

class FSystem {
   public:
	FSystem() = default;
	FSystem(const EinsteinSystem& sys, double lambda);
	// Arbitrary solved form f'' = F(f, f'); used for manufactured tests.
	FSystem(std::vector<Expr> F, std::vector<Rational> dims, double lambda);

	[[nodiscard]] std::size_t size() const { return s_; }
	void second_derivatives(const double* f, const double* fp, double* out, std::vector<double>& scratch) const;
	[[nodiscard]] double trace(const std::vector<double>& f, const std::vector<double>& fpp) const;
	[[nodiscard]] std::optional<double> constraint(const std::vector<double>& f) const;
	[[nodiscard]] double lambda() const { return lambda_; }

   private:
	std::size_t s_ = 0;
	Program F_;
	std::vector<double> dims_;
	std::optional<Program> nondiag_;
	double lambda_ = 0.0;
};

// The (x, y) field of a singular IVP, compiled for floating point.
class XYSystem {
   public:
	XYSystem(const SingularIVP& ivp, const Env<double>& env);
	void rhs(double t, const std::vector<double>& xy, std::vector<double>& d, std::vector<double>& scratch) const;
	[[nodiscard]] std::size_t size() const { return n_; }

   private:
	std::size_t n_;
	Program A_, B_, C_;
};

// ---------------------------------------------------------------------------

enum class MonitorKind { Swap45, Swap23, ModelBConstraint, Trace };
std::string to_string(MonitorKind k);

struct Trajectory {
	int seed_endpoint = 0;
	double lambda = 0.0;
	// Local parameter tau: distance from the seeded orbit. g(tau) = f(tau) at endpoint 0
	// and f(T - tau) at endpoint 1; fp stores dg/dtau.
	std::vector<double> tau;
	std::vector<std::vector<double>> f, fp, fpp;
	std::vector<double> trace;  // Einstein1 residual at each sample
	Termination reason = Termination::ReachedTarget;
	std::size_t accepted = 0, rejected = 0;
	int collapsed = -1;  // coordinate that fell below the collapse threshold
	double seed_eps = 0.0, seed_error = 0.0;
	double max_trace = 0.0, max_swap45 = 0.0, max_swap23 = 0.0, max_constraint = 0.0;
};

struct ShootingOptions {
	std::size_t order = 12;
	double eps = 1e-2;
	double min_eps = 1e-5;
	double seed_tolerance = 1e-10;
	double tol = 1e-10;
	double t_switch = 0.25;
	double t_max = 6.0;
	double collapse = 1e-8;
	double blowup = 1e8;
	double h_max = 0.02;
};

struct SeedState {
	double tau = 0.0;
	std::vector<double> x, y;    // singular-IVP variables
	std::vector<double> f, fp;   // local f-variables
	double error_estimate = 0.0; // relative change between orders M and M-2
};

// Evaluates the series at tau = eps and converts to f-variables. Throws SeriesDivergent
// when the tail estimate exceeds tolerance.
SeedState seed_from_series(const SeriesSolution<Rational>& sol, double eps, double tolerance);
SeedState seed_from_series(const SeriesSolution<double>& sol, double eps, double tolerance);

// Conversions between (x, y) and local f-variables at parameter tau.
void xy_to_f(const std::vector<bool>& collapsing, double tau, const std::vector<double>& x,
             const std::vector<double>& y, std::vector<double>& f, std::vector<double>& fp);
void f_to_xy(const std::vector<bool>& collapsing, double tau, const std::vector<double>& f,
             const std::vector<double>& fp, std::vector<double>& x, std::vector<double>& y);

// Integrates f'' = F from (f, fp) at tau0 to tau1 with monitors.
Trajectory integrate_f(const FSystem& sys, double tau0, const std::vector<double>& f, const std::vector<double>& fp,
                       double tau1, const ShootingOptions& opt);

// Seeds from the series, integrates the (x, y) system to t_switch and then the f-system.
Trajectory shoot(const ModelSpec& spec, const SeriesSolution<Rational>& sol, const ShootingOptions& opt);

double invariant_monitor(const Trajectory& traj, MonitorKind kind);
// Relative deviation max(|x_i - x_j|, |y_i - y_j|) / max(1, |.|, |.|) with x = f^2, y = f f'.
double swap_gap(const std::vector<double>& f, const std::vector<double>& fp, std::size_t i, std::size_t j);

struct DefectReport {
	int target_endpoint = 0;
	double defect = 0.0;  // square root of defect^2
	double tau = 0.0;     // meeting parameter where the minimum occurs
	std::map<std::string, double> slots;  // group means at the minimum
	std::vector<std::pair<std::string, double>> breakdown;
};

// Defect of one local state against the target orbit reached at this parameter.
DefectReport state_defect(const BoundaryData& target, const std::vector<double>& f, const std::vector<double>& fp);
// Minimum over the trajectory samples.
DefectReport boundary_defect(const Trajectory& traj, const BoundaryData& target);

struct ScanPoint {
	ParamEnv env;     // lambda and slot parameters
	QVector free;     // kernel parameters
};

struct ScanRow {
	ScanPoint point;
	Termination reason = Termination::ReachedTarget;
	double tau_end = 0.0;
	DefectReport defect;
	double max_trace = 0.0, max_swap = 0.0, max_constraint = 0.0;
	std::optional<double> compatibility_residual;  // Model A at endpoint 0
	std::string error;
};

// Rows are computed independently in parallel (bounded by COHOM1_THREADS) and returned in
// grid order.
std::vector<ScanRow> scan(const ModelSpec& spec, int endpoint, const std::vector<ScanPoint>& grid,
                          const ShootingOptions& opt);

std::size_t worker_count();

// ---------------------------------------------------------------------------
// Two-sided matching for Model A.

struct MatchParams {
	double zeta0 = 1.0, s0 = 0.0, zeta1 = 1.0, s1 = 0.0, lambda = 1.0, T = 2.0;
};

struct MatchResult {
	bool feasible = true;
	std::string infeasible_reason;
	std::vector<double> mismatch;  // (f_0 - f_1, f_0' - f_1') at T/2
	double norm = 0.0;
	std::string failed_side;  // "endpoint 0" or "endpoint 1" when an integration failed
};

struct MatchOptions {
	ShootingOptions shooting;
	bool allow_negative_lambda = false;
	std::optional<double> f2pp0;  // prescribed f_2''(0)
	std::optional<double> f3pp1;  // prescribed f_3''(1)
	double compatibility_tolerance = 1e-9;
};

MatchResult match_two_sided_A(const ModelSpec& spec, const MatchParams& p, const MatchOptions& opt);

struct MinimizeOptions {
	std::size_t restarts = 4;
	std::size_t max_evaluations = 400;
	std::uint64_t seed = 12345;
	double initial_step = 0.25;
};

struct MinimizeResult {
	MatchParams best;
	double best_norm = 0.0;
	std::size_t evaluations = 0;
	std::vector<double> restart_norms;
};

MinimizeResult minimize_match_A(const ModelSpec& spec, const MatchParams& start, const MatchOptions& opt,
                                const MinimizeOptions& mopt);

}  // namespace cohom1
