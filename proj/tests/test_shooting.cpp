#include "cohom1/shooting.hpp"

#include "support.hpp"

#include <cmath>
#include <cstdlib>

using namespace cohom1;
using namespace testgen;

namespace {

ParamEnv bind(std::initializer_list<std::pair<const char*, Rational>> kv) {
	ParamEnv env;
	for (const auto& [k, v] : kv) { env[k] = v; }
	return env;
}

SeriesSolution<Rational> series(const ModelSpec& spec, int endpoint, const ParamEnv& env, std::size_t M = 12) {
	const auto& ivp = singular_ivp(spec, endpoint);
	return formal_solution<Rational>(ivp, env, M, QVector(kernel_dimension(ivp, env), 0));
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
	double m = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) { m = std::max(m, std::fabs(a[i] - b[i]) / std::max(1.0, std::fabs(b[i]))); }
	return m;
}

// Harmonic oscillator y'' = -y on [0, 1] with a fixed step h; returns the error at t = 1.
double oscillator_error(double h) {
	IntegratorOptions opt;
	opt.rtol = opt.atol = 1e6;  // accept every step
	opt.h_initial = opt.h_max = h;
	OdeRhs rhs = [](double, const std::vector<double>& y, std::vector<double>& d) {
		d[0] = y[1];
		d[1] = -y[0];
	};
	const OdeResult r = integrate_ode(rhs, 0.0, {1.0, 0.0}, 1.0, opt);
	REQUIRE(r.reason == Termination::ReachedTarget);
	return std::hypot(r.y[0] - std::cos(1.0), r.y[1] + std::sin(1.0));
}

}  // namespace

TEST_SUITE("shooting") {
	TEST_CASE("straight lines are reproduced") {
		const FSystem lines({Expr(0), Expr(0), Expr(0)}, {1, 1, 1}, 0.0);
		ShootingOptions opt;
		const std::vector<double> f{1.0, 2.0, 0.5}, fp{0.5, -0.3, 0.25};
		const Trajectory tr = integrate_f(lines, 0.0, f, fp, 2.0, opt);
		CHECK(tr.reason == Termination::ReachedTarget);
		for (std::size_t k = 0; k < tr.tau.size(); ++k) {
			for (std::size_t i = 0; i < 3; ++i) {
				CHECK(std::fabs(tr.f[k][i] - (f[i] + fp[i] * tr.tau[k])) <= 1e-12);
				CHECK(std::fabs(tr.fp[k][i] - fp[i]) <= 1e-12);
			}
		}
		for (std::size_t k = 1; k < tr.tau.size(); ++k) { CHECK(tr.tau[k] > tr.tau[k - 1]); }
		CHECK(tr.tau.back() == doctest::Approx(2.0).epsilon(1e-14));
	}

	TEST_CASE("fixed-step error falls at fifth order") {
		const double e1 = oscillator_error(0.1), e2 = oscillator_error(0.05), e3 = oscillator_error(0.025);
		CHECK(e1 / e2 > 20.0);
		CHECK(e1 / e2 < 48.0);
		CHECK(e2 / e3 > 20.0);
		CHECK(e2 / e3 < 48.0);
	}

	TEST_CASE("adaptive error tracks the tolerance on a manufactured solution") {
		OdeRhs rhs = [](double, const std::vector<double>& y, std::vector<double>& d) {
			d[0] = y[1];
			d[1] = -y[0];
		};
		double previous = 1.0;
		for (double tol : {1e-6, 1e-8, 1e-10}) {
			IntegratorOptions opt;
			opt.rtol = tol;
			opt.atol = tol;
			opt.h_max = 1.0;
			const OdeResult r = integrate_ode(rhs, 0.0, {1.0, 0.0}, 5.0, opt);
			const double err = std::hypot(r.y[0] - std::cos(5.0), r.y[1] + std::sin(5.0));
			CHECK(err < 100 * tol);
			CHECK(err < previous);
			previous = err;
		}
	}

	TEST_CASE("events end the run at the crossing") {
		OdeRhs rhs = [](double, const std::vector<double>&, std::vector<double>& d) { d[0] = -1.0; };
		IntegratorOptions opt;
		OdeEvent ev = [](double, const std::vector<double>& y) { return y[0] - 0.25; };
		const OdeResult r = integrate_ode(rhs, 0.0, {1.0}, 5.0, opt, {{ev, Termination::Collapse}});
		CHECK(r.reason == Termination::Collapse);
		CHECK(r.t == doctest::Approx(0.75).epsilon(1e-10));
	}

	TEST_CASE("non-finite states count as blowup") {
		OdeRhs rhs = [](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = y[0] * y[0]; };
		IntegratorOptions opt;
		const OdeResult r = integrate_ode(rhs, 0.0, {1.0}, 5.0, opt, {{[](double, const std::vector<double>& y) { return 1e8 - std::fabs(y[0]); }, Termination::Blowup}});
		CHECK(r.reason == Termination::Blowup);
		CHECK(r.t < 1.0);
	}

	TEST_CASE("seeding from the series") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const ParamEnv env = bind({{"lambda", 1}, {"zeta0sq", 1}});
		const auto s12 = series(C, 0, env, 12), s10 = series(C, 0, env, 10);
		const SeedState a = seed_from_series(s12, 1e-2, 1e-6), b = seed_from_series(s10, 1e-2, 1e-6);
		CHECK(max_rel_diff(a.x, b.x) < 1e-12);
		CHECK(max_rel_diff(a.y, b.y) < 1e-12);
		CHECK(a.error_estimate < 1e-12);
		const SeedState tiny = seed_from_series(s12, 1e-7, 1e-6);
		CHECK(max_rel_diff(tiny.x, initial_point<double>(s12.ivp, to_double_env(env))) < 1e-12);
		CHECK_THROWS_AS(seed_from_series(s12, 10.0, 1e-10), SeriesDivergent);
	}

	TEST_CASE("conversion between singular and f variables round-trips") {
		Rng rng(701);
		for (int trial = 0; trial < 50; ++trial) {
			const std::size_t n = 5;
			std::vector<bool> coll(n);
			std::vector<double> f(n), fp(n), x, y, f2, fp2;
			for (std::size_t i = 0; i < n; ++i) {
				coll[i] = uniform_int(rng, 0, 1) == 1;
				f[i] = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
				fp[i] = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
			}
			const double tau = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
			f_to_xy(coll, tau, f, fp, x, y);
			xy_to_f(coll, tau, x, y, f2, fp2);
			CHECK(max_rel_diff(f2, f) < 1e-12);
			CHECK(max_rel_diff(fp2, fp) < 1e-11);
		}
	}

	TEST_CASE("tightening the tolerance changes the state by less than ten tolerances") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const auto sol = series(C, 0, bind({{"lambda", 1}, {"zeta0sq", 1}}));
		ShootingOptions loose;
		loose.tol = 1e-8;
		loose.t_max = 0.6;
		ShootingOptions tight = loose;
		tight.tol = 1e-9;
		const Trajectory a = shoot(C, sol, loose), b = shoot(C, sol, tight);
		REQUIRE(a.reason == Termination::ReachedTarget);
		REQUIRE(b.reason == Termination::ReachedTarget);
		CHECK(max_rel_diff(a.f.back(), b.f.back()) < 10 * loose.tol);
		CHECK(max_rel_diff(a.fp.back(), b.fp.back()) < 10 * loose.tol);
	}

	TEST_CASE("swap invariants hold on symmetric seeds") {
		struct Case {
			ModelId id;
			int endpoint;
			ParamEnv env;
			MonitorKind kind;
		};
		const std::vector<Case> cases{
		    {ModelId::C, 0, bind({{"lambda", 1}, {"zeta0sq", 1}}), MonitorKind::Swap23},
		    {ModelId::D, 1, bind({{"lambda", 1}, {"zeta1sq", 1}, {"xi1sq", q(1, 2)}}), MonitorKind::Swap45},
		    {ModelId::E, 0, bind({{"lambda", 2}, {"zeta0sq", 1}}), MonitorKind::Swap45},
		    {ModelId::B, 1, bind({{"lambda", 1}, {"zeta1sq", 1}, {"xi1sq", 2}}), MonitorKind::Swap45},
		};
		for (const auto& c : cases) {
			CAPTURE(static_cast<int>(c.id));
			const ModelSpec spec = model(c.id);
			const Trajectory tr = shoot(spec, series(spec, c.endpoint, c.env), ShootingOptions{});
			CHECK(tr.tau.size() > 10);
			CHECK(invariant_monitor(tr, c.kind) < 1e-9);
			for (const auto& f : tr.f) {
				for (double v : f) { CHECK(v > 0.0); }
			}
		}
	}

	TEST_CASE("an asymmetric perturbation is visible to the monitor") {
		const ModelSpec D = model(ModelId::D);
		const ParamEnv env = bind({{"lambda", 1}, {"zeta1sq", 1}, {"xi1sq", 1}});
		const auto sol = series(D, 1, env);
		SeedState seed = seed_from_series(sol, 1e-2, 1e-10);
		seed.x[3] += 1e-3;
		std::vector<double> f, fp;
		xy_to_f(sol.ivp.collapsing, seed.tau, seed.x, seed.y, f, fp);
		const FSystem sys(printed_system(D), 1.0);
		const Trajectory tr = integrate_f(sys, seed.tau, f, fp, seed.tau + 0.05, ShootingOptions{});
		CHECK(invariant_monitor(tr, MonitorKind::Swap45) >= 5e-4);
		CHECK(swap_gap(tr.f.front(), tr.fp.front(), 3, 4) >= 5e-4);
	}

	TEST_CASE("Model B constraint is monitored along the trajectory") {
		const ModelSpec B = model(ModelId::B);
		const Trajectory tr = shoot(B, series(B, 1, bind({{"lambda", 1}, {"zeta1sq", 1}, {"xi1sq", 1}})), ShootingOptions{});
		const double m = invariant_monitor(tr, MonitorKind::ModelBConstraint);
		CHECK(std::isfinite(m));
		CHECK(m >= 0.0);
		CHECK(invariant_monitor(tr, MonitorKind::Trace) == doctest::Approx(tr.max_trace));
	}

	TEST_CASE("boundary defect examples") {
		const ModelSpec C = model(ModelId::C);
		const BoundaryData& c1 = boundary_conditions(C, 1);
		const DefectReport exact = state_defect(c1, {1.3, 0.0, 1.3}, {0.0, -0.5, 0.0});
		CHECK(exact.defect == doctest::Approx(0.0));
		CHECK(exact.slots.at("zeta1sq") == doctest::Approx(1.69));
		for (double a : {0.1, 0.5, 2.0}) {
			const DefectReport flat = state_defect(c1, {1.0, a, a}, {0.0, 0.0, 0.0});
			CHECK(flat.defect * flat.defect >= a * a + 0.25 - 1e-12);
			CHECK(state_defect(c1, {1.0, a, a}, {0.0, -0.5, 0.0}).defect >= a - 1e-12);
		}

		const ModelSpec B = model(ModelId::B);
		const BoundaryData& b0 = boundary_conditions(B, 0);
		Rng rng(702);
		for (int trial = 0; trial < 20; ++trial) {
			const double a = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
			std::vector<double> f(5), fp(5);
			for (std::size_t i = 0; i < 5; ++i) {
				f[i] = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
				fp[i] = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
			}
			f[3] = f[4] = a;
			CHECK(state_defect(b0, f, fp).defect >= a);
		}
	}

	TEST_CASE("property: defect vanishes exactly on admissible boundary states") {
		Rng rng(703);
		for (const auto& ec : all_endpoints()) {
			CAPTURE(ec.label);
			const ModelSpec spec = model(ec.id);
			const BoundaryData& bd = boundary_conditions(spec, ec.endpoint);
			for (int trial = 0; trial < 10; ++trial) {
				std::vector<double> f(spec.s, 0.0), fp(spec.s, 0.0);
				for (const auto& g : bd.groups) {
					const double zeta = std::uniform_real_distribution<double>(0.2, 3.0)(rng);
					for (int i : g.members) { f[static_cast<std::size_t>(i)] = zeta; }
				}
				for (std::size_t k = 0; k < bd.collapsing.size(); ++k) {
					fp[static_cast<std::size_t>(bd.collapsing[k])] = -std::sqrt(to_double(bd.c_squared[k]));
				}
				const DefectReport ok = state_defect(bd, f, fp);
				CHECK(ok.defect < 1e-12);
				const auto i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(spec.s) - 1));
				const double bump = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
				fp[i] += bump;
				const DefectReport bad = state_defect(bd, f, fp);
				CHECK(bad.defect >= bump - 1e-12);
				CHECK(bad.defect <= bump + 1e-12);
			}
		}
	}

	TEST_CASE("trajectory defect is the minimum over samples") {
		const ModelSpec C = model(ModelId::C);
		const BoundaryData& c1 = boundary_conditions(C, 1);
		Trajectory tr;
		tr.tau = {0.1, 0.2, 0.3};
		tr.f = {{1.0, 0.5, 0.5}, {1.2, 0.0, 1.2}, {1.0, 0.2, 0.9}};
		tr.fp = {{0.0, 0.0, 0.0}, {0.0, -0.5, 0.0}, {0.1, 0.0, 0.0}};
		const DefectReport rep = boundary_defect(tr, c1);
		CHECK(rep.defect == doctest::Approx(0.0));
		CHECK(rep.tau == 0.2);
	}

	TEST_CASE("parameter scans") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		CHECK(scan(C, 0, {}, ShootingOptions{}).empty());

		std::vector<ScanPoint> grid;
		for (const Rational z : {q(1, 2), q(1), q(2)}) {
			for (const Rational l : {q(1), q(2), q(4)}) { grid.push_back({bind({{"lambda", l}, {"zeta0sq", z * z}}), {}}); }
		}
		const auto rows = scan(C, 0, grid, ShootingOptions{});
		REQUIRE(rows.size() == grid.size());
		for (std::size_t k = 0; k < rows.size(); ++k) {
			CHECK(rows[k].error.empty());
			CHECK(rows[k].point.env == grid[k].env);
			CHECK(rows[k].defect.defect >= 0.1);
			CHECK(rows[k].max_swap < 1e-8);
		}
		const auto again = scan(C, 0, grid, ShootingOptions{});
		for (std::size_t k = 0; k < rows.size(); ++k) {
			CHECK(again[k].defect.defect == rows[k].defect.defect);
			CHECK(again[k].tau_end == rows[k].tau_end);
		}

		const ModelSpec A = model(ModelId::A);
		std::vector<ScanPoint> gridA;
		for (const Rational z : {q(1, 2), q(1), q(2)}) { gridA.push_back({bind({{"lambda", 2}, {"zeta0sq", z}}), qv({q(1, 2)})}); }
		ShootingOptions shortRun;
		shortRun.t_max = 0.5;
		for (const auto& row : scan(A, 0, gridA, shortRun)) {
			REQUIRE(row.compatibility_residual.has_value());
			CHECK(std::fabs(*row.compatibility_residual) < 1e-12);
		}

		std::vector<ScanPoint> invalid{{bind({{"lambda", 1}, {"zeta0sq", -1}}), {}}};
		CHECK_FALSE(scan(C, 0, invalid, ShootingOptions{}).at(0).error.empty());
	}

	TEST_CASE("time-reversed integration returns to the forward state") {
		const ModelSpec A = model(ModelId::A);
		const double lambda = 2.0;
		const auto sol = series(A, 0, bind({{"lambda", 2}, {"zeta0sq", 1}}));
		const SeedState seed = seed_from_series(sol, 1e-2, 1e-10);
		std::vector<double> f, fp;
		xy_to_f(sol.ivp.collapsing, seed.tau, seed.x, seed.y, f, fp);
		const FSystem sys(printed_system(A), lambda);
		ShootingOptions opt;
		const double T = 0.6, mid = 0.3;
		const Trajectory first = integrate_f(sys, seed.tau, f, fp, mid, opt);
		const Trajectory second = integrate_f(sys, mid, first.f.back(), first.fp.back(), T, opt);
		REQUIRE(second.reason == Termination::ReachedTarget);
		std::vector<double> back_fp = second.fp.back();
		for (auto& v : back_fp) { v = -v; }
		const Trajectory reversed = integrate_f(sys, 0.0, second.f.back(), back_fp, T - mid, opt);
		REQUIRE(reversed.reason == Termination::ReachedTarget);
		double mismatch = 0.0;
		for (std::size_t i = 0; i < 3; ++i) {
			mismatch = std::max(mismatch, std::fabs(reversed.f.back()[i] - first.f.back()[i]));
			mismatch = std::max(mismatch, std::fabs(reversed.fp.back()[i] + first.fp.back()[i]));
		}
		CHECK(mismatch < 1e-8);
	}

	TEST_CASE("two-sided matching for Model A") {
		const ModelSpec A = model(ModelId::A);
		MatchOptions mo;
		MatchParams p;
		p.lambda = 2.0;
		p.T = 1.5;
		const MatchResult r = match_two_sided_A(A, p, mo);
		CHECK(r.feasible);
		if (r.failed_side.empty()) {
			CHECK(r.mismatch.size() == 6);
			CHECK(std::isfinite(r.norm));
		} else {
			CHECK((r.failed_side == "endpoint 0" || r.failed_side == "endpoint 1"));
		}

		MatchOptions wrong = mo;
		wrong.f2pp0 = 5.0;  // lambda would have to be 2(p+1) - 2(q+1)*5 < 0 at zeta0 = 1
		const MatchResult bad = match_two_sided_A(A, p, wrong);
		CHECK_FALSE(bad.feasible);
		CHECK_FALSE(bad.infeasible_reason.empty());
		CHECK(bad.mismatch.empty());

		MatchParams neg = p;
		neg.zeta0 = -1.0;
		CHECK_FALSE(match_two_sided_A(A, neg, mo).feasible);
		CHECK_THROWS_AS(match_two_sided_A(model(ModelId::C), p, mo), InvalidParameters);
	}

	TEST_CASE("matching minimizer is deterministic and does not worsen the start") {
		const ModelSpec A = model(ModelId::A);
		MatchParams start;
		start.lambda = 2.0;
		start.T = 1.5;
		MinimizeOptions mopt;
		mopt.restarts = 2;
		mopt.max_evaluations = 60;
		const MinimizeResult a = minimize_match_A(A, start, MatchOptions{}, mopt);
		const MinimizeResult b = minimize_match_A(A, start, MatchOptions{}, mopt);
		CHECK(a.best_norm == b.best_norm);
		CHECK(a.restart_norms == b.restart_norms);
		const MatchResult at_start = match_two_sided_A(A, start, MatchOptions{});
		if (at_start.feasible && at_start.failed_side.empty()) { CHECK(a.best_norm <= at_start.norm); }
		CHECK(a.best.zeta0 > 0.0);
		CHECK(a.best.T > 0.0);
	}

	TEST_CASE("thread cap follows the environment") {
		setenv("COHOM1_THREADS", "1", 1);
		CHECK(worker_count() == 1);
		setenv("COHOM1_THREADS", "junk", 1);
		CHECK(worker_count() >= 1);
		unsetenv("COHOM1_THREADS");
	}
}
