#include "cohom1/shooting.hpp"

#include "cohom1/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace cohom1 {

SeriesDivergent::SeriesDivergent(double e, double est)
    : Error("series tail estimate " + std::to_string(est) + " too large at eps = " + std::to_string(e)),
      eps(e),
      estimate(est) {}

std::string to_string(Termination t) {
	switch (t) {
		case Termination::ReachedTarget:
			return "reached_target";
		case Termination::Collapse:
			return "collapse";
		case Termination::Blowup:
			return "blowup";
		case Termination::StepUnderflow:
			return "step_underflow";
	}
	return "unknown";
}

std::string to_string(MonitorKind k) {
	switch (k) {
		case MonitorKind::Swap45:
			return "swap45";
		case MonitorKind::Swap23:
			return "swap23";
		case MonitorKind::ModelBConstraint:
			return "modelB_constraint";
		case MonitorKind::Trace:
			return "trace";
	}
	return "unknown";
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct Stepper {
	const OdeRhs& rhs;
	std::size_t n;
	std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp;

	Stepper(const OdeRhs& r, std::size_t dim)
	    : rhs(r), n(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim) {}

	// One step from (t, y) with k1 = f(t, y) already filled. Writes y_new and the error
	// estimate; k7 holds f(t + h, y_new).
	void step(double t, const std::vector<double>& y, double h, std::vector<double>& ynew, std::vector<double>& err) {
		for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + h * a21 * k1[i]; }
		rhs(t + c2 * h, tmp, k2);
		for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]); }
		rhs(t + c3 * h, tmp, k3);
		for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]); }
		rhs(t + c4 * h, tmp, k4);
		for (std::size_t i = 0; i < n; ++i) {
			tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
		}
		rhs(t + c5 * h, tmp, k5);
		for (std::size_t i = 0; i < n; ++i) {
			tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
		}
		rhs(t + h, tmp, k6);
		for (std::size_t i = 0; i < n; ++i) {
			ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
		}
		rhs(t + h, ynew, k7);
		for (std::size_t i = 0; i < n; ++i) {
			err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
		}
	}
};

bool finite(const std::vector<double>& v) {
	return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> y0, double t1,
                        const IntegratorOptions& opt, const std::vector<std::pair<OdeEvent, Termination>>& events,
                        const OdeObserver& observer) {
	const std::size_t n = y0.size();
	OdeResult res;
	res.t = t0;
	res.y = std::move(y0);
	if (observer) { observer(res.t, res.y); }
	auto fired = [&](double t, const std::vector<double>& y) -> std::optional<std::size_t> {
		if (!finite(y)) {
			for (std::size_t k = 0; k < events.size(); ++k) {
				if (events[k].second == Termination::Blowup) { return k; }
			}
			return events.size();
		}
		for (std::size_t k = 0; k < events.size(); ++k) {
			const double g = events[k].first(t, y);
			if (!(g > 0.0)) { return k; }
		}
		return std::nullopt;
	};
	if (auto k = fired(res.t, res.y)) {
		res.reason = *k < events.size() ? events[*k].second : Termination::Blowup;
		res.event_index = *k;
		return res;
	}
	if (t1 <= t0) { return res; }

	Stepper st(rhs, n);
	std::vector<double> ynew(n), err(n);
	rhs(res.t, res.y, st.k1);
	double h = std::min({opt.h_initial, opt.h_max, t1 - t0});
	for (std::size_t steps = 0; steps < opt.max_steps; ++steps) {
		const double hmin = opt.h_min_relative * std::max(1.0, std::fabs(res.t));
		if (h < hmin) {
			res.reason = Termination::StepUnderflow;
			return res;
		}
		bool last = false;
		if (res.t + h >= t1) {
			h = t1 - res.t;
			last = true;
		}
		st.step(res.t, res.y, h, ynew, err);
		double en = 0.0;
		bool ok = finite(ynew) && finite(err);
		if (ok) {
			for (std::size_t i = 0; i < n; ++i) {
				const double sc = opt.atol + opt.rtol * std::max(std::fabs(res.y[i]), std::fabs(ynew[i]));
				en += (err[i] / sc) * (err[i] / sc);
			}
			en = std::sqrt(en / static_cast<double>(std::max<std::size_t>(n, 1)));
		}
		if (!ok || en > 1.0) {
			++res.rejected;
			const double fac = ok ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25;
			h *= fac;
			continue;
		}
		const double tnew = last ? t1 : res.t + h;
		if (auto k = fired(tnew, ynew)) {
			// Locate the first crossing between res.t and tnew by bisection on the step size.
			double lo = 0.0, hi = h;
			std::vector<double> yhi = ynew, ytry(n), etry(n);
			const double etol = opt.event_tolerance * std::max(1.0, std::fabs(res.t));
			std::size_t which = *k;
			while (hi - lo > etol) {
				const double mid = 0.5 * (lo + hi);
				st.step(res.t, res.y, mid, ytry, etry);
				rhs(res.t, res.y, st.k1);
				if (auto kk = fired(res.t + mid, ytry)) {
					hi = mid;
					yhi = ytry;
					which = *kk;
				} else {
					lo = mid;
				}
			}
			++res.accepted;
			res.t += hi;
			res.y = yhi;
			res.reason = which < events.size() ? events[which].second : Termination::Blowup;
			res.event_index = which;
			if (observer) { observer(res.t, res.y); }
			return res;
		}
		++res.accepted;
		res.t = tnew;
		res.y = ynew;
		st.k1 = st.k7;
		if (observer) { observer(res.t, res.y); }
		if (last) {
			res.reason = Termination::ReachedTarget;
			return res;
		}
		const double fac = en > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
		h = std::min(h * fac, opt.h_max);
	}
	res.reason = Termination::StepUnderflow;
	return res;
}

// ---------------------------------------------------------------------------

FSystem::FSystem(const EinsteinSystem& sys, double lambda)
    : s_(sys.s), F_(sys.F, Env<double>{{"lambda", lambda}}), lambda_(lambda) {
	for (const auto& d : sys.dims) { dims_.push_back(to_double(d)); }
	if (sys.nondiagonal) { nondiag_ = Program({*sys.nondiagonal}, Env<double>{}); }
}

FSystem::FSystem(std::vector<Expr> F, std::vector<Rational> dims, double lambda)
    : s_(F.size()), F_(F, Env<double>{{"lambda", lambda}}), lambda_(lambda) {
	for (const auto& d : dims) { dims_.push_back(to_double(d)); }
}

void FSystem::second_derivatives(const double* f, const double* fp, double* out, std::vector<double>& scratch) const {
	F_.run(0.0, f, fp, nullptr, out, scratch);
}

double FSystem::trace(const std::vector<double>& f, const std::vector<double>& fpp) const {
	double acc = lambda_;
	for (std::size_t i = 0; i < s_; ++i) { acc += dims_[i] * fpp[i] / f[i]; }
	return acc;
}

std::optional<double> FSystem::constraint(const std::vector<double>& f) const {
	if (!nondiag_) { return std::nullopt; }
	std::vector<double> scratch, out(1);
	std::vector<double> zero(f.size(), 0.0);
	nondiag_->run(0.0, f.data(), zero.data(), nullptr, out.data(), scratch);
	return out[0];
}

XYSystem::XYSystem(const SingularIVP& ivp, const Env<double>& env)
    : n_(ivp.dim), A_(ivp.A, env), B_(ivp.B, env), C_(ivp.C, env) {}

void XYSystem::rhs(double t, const std::vector<double>& xy, std::vector<double>& d,
                   std::vector<double>& scratch) const {
	const double* x = xy.data();
	const double* y = xy.data() + n_;
	std::vector<double> a(n_), b(n_), c(n_);
	A_.run(t, x, y, nullptr, a.data(), scratch);
	B_.run(t, x, y, nullptr, b.data(), scratch);
	C_.run(t, x, y, nullptr, c.data(), scratch);
	for (std::size_t i = 0; i < n_; ++i) {
		d[i] = 2.0 * y[i];
		d[n_ + i] = a[i] / (t * t) + b[i] / t + c[i];
	}
}

// ---------------------------------------------------------------------------

void xy_to_f(const std::vector<bool>& collapsing, double tau, const std::vector<double>& x,
             const std::vector<double>& y, std::vector<double>& f, std::vector<double>& fp) {
	const std::size_t n = x.size();
	f.resize(n);
	fp.resize(n);
	for (std::size_t i = 0; i < n; ++i) {
		if (collapsing[i]) {
			f[i] = tau * std::sqrt(x[i]);
			fp[i] = (tau * tau * y[i] + tau * x[i]) / f[i];
		} else {
			f[i] = std::sqrt(x[i]);
			fp[i] = y[i] / f[i];
		}
	}
}

void f_to_xy(const std::vector<bool>& collapsing, double tau, const std::vector<double>& f,
             const std::vector<double>& fp, std::vector<double>& x, std::vector<double>& y) {
	const std::size_t n = f.size();
	x.resize(n);
	y.resize(n);
	for (std::size_t i = 0; i < n; ++i) {
		if (collapsing[i]) {
			x[i] = f[i] * f[i] / (tau * tau);
			y[i] = f[i] * fp[i] / (tau * tau) - f[i] * f[i] / (tau * tau * tau);
		} else {
			x[i] = f[i] * f[i];
			y[i] = f[i] * fp[i];
		}
	}
}

namespace {

template <class T>
SeedState seed_impl(const SeriesSolution<T>& sol, double eps, double tolerance) {
	const std::size_t n = sol.ivp.dim;
	const std::size_t M = sol.order;
	auto eval = [&](const std::vector<Vector<T>>& C, std::size_t upto, std::vector<double>& out) {
		out.assign(n, 0.0);
		for (std::size_t i = 0; i < n; ++i) {
			double acc = 0.0;
			for (std::size_t k = std::min(upto, C.size() - 1) + 1; k-- > 0;) { acc = acc * eps + to_double(C[k][i]); }
			out[i] = acc;
		}
	};
	SeedState s;
	s.tau = eps;
	std::vector<double> xlow, ylow;
	eval(sol.X, M, s.x);
	eval(sol.X, M - 2, xlow);
	eval(sol.Y, M - 1, s.y);
	eval(sol.Y, M - 3, ylow);
	double est = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		est = std::max(est, std::fabs(s.x[i] - xlow[i]) / std::max(1.0, std::fabs(s.x[i])));
		est = std::max(est, std::fabs(s.y[i] - ylow[i]) / std::max(1.0, std::fabs(s.y[i])));
	}
	s.error_estimate = est;
	if (!(est <= tolerance)) { throw SeriesDivergent(eps, est); }
	for (std::size_t i = 0; i < n; ++i) {
		if (!(s.x[i] > 0.0)) { throw SeriesDivergent(eps, std::numeric_limits<double>::infinity()); }
	}
	xy_to_f(sol.ivp.collapsing, eps, s.x, s.y, s.f, s.fp);
	return s;
}

double relative_gap(double a, double b) { return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

double swap_gap(const std::vector<double>& f, const std::vector<double>& fp, std::size_t i, std::size_t j) {
	// Deviation in the non-collapsing variables x = f^2, y = f f'.
	return std::max(relative_gap(f[i] * f[i], f[j] * f[j]), relative_gap(f[i] * fp[i], f[j] * fp[j]));
}

namespace {

struct Recorder {
	const FSystem& sys;
	Trajectory& traj;
	std::vector<double> scratch, fpp;

	void record(double tau, const std::vector<double>& f, const std::vector<double>& fp) {
		const std::size_t n = f.size();
		fpp.assign(n, 0.0);
		sys.second_derivatives(f.data(), fp.data(), fpp.data(), scratch);
		traj.tau.push_back(tau);
		traj.f.push_back(f);
		traj.fp.push_back(fp);
		traj.fpp.push_back(fpp);
		const double tr = sys.trace(f, fpp);
		traj.trace.push_back(tr);
		if (std::isfinite(tr)) { traj.max_trace = std::max(traj.max_trace, std::fabs(tr)); }
		if (n >= 5) { traj.max_swap45 = std::max(traj.max_swap45, swap_gap(f, fp, 3, 4)); }
		if (n >= 3) { traj.max_swap23 = std::max(traj.max_swap23, swap_gap(f, fp, 1, 2)); }
		if (auto c = sys.constraint(f)) {
			if (std::isfinite(*c)) { traj.max_constraint = std::max(traj.max_constraint, std::fabs(*c)); }
		}
	}
};

IntegratorOptions integrator_options(const ShootingOptions& opt) {
	IntegratorOptions io;
	io.rtol = opt.tol;
	io.atol = opt.tol * 1e-2;
	io.h_max = opt.h_max;
	io.h_initial = std::min(1e-4, opt.h_max);
	return io;
}

// f-phase state layout: (f, f').
Trajectory integrate_f_into(Trajectory traj, const FSystem& sys, double tau0, const std::vector<double>& f,
                            const std::vector<double>& fp, double tau1, const ShootingOptions& opt,
                            bool record_initial) {
	const std::size_t n = sys.size();
	Recorder rec{sys, traj, {}, {}};
	std::vector<double> scratch;
	OdeRhs rhs = [&](double, const std::vector<double>& y, std::vector<double>& d) {
		for (std::size_t i = 0; i < n; ++i) { d[i] = y[n + i]; }
		sys.second_derivatives(y.data(), y.data() + n, d.data() + n, scratch);
	};
	std::vector<std::pair<OdeEvent, Termination>> events;
	for (std::size_t i = 0; i < n; ++i) {
		events.emplace_back([i, &opt](double, const std::vector<double>& y) { return y[i] - opt.collapse; },
		                    Termination::Collapse);
	}
	events.emplace_back(
	    [&opt](double, const std::vector<double>& y) {
		    double m = 0.0;
		    for (double v : y) { m = std::max(m, std::fabs(v)); }
		    return opt.blowup - m;
	    },
	    Termination::Blowup);
	std::vector<double> y0(f);
	y0.insert(y0.end(), fp.begin(), fp.end());
	bool first = true;
	OdeObserver obs = [&](double t, const std::vector<double>& y) {
		if (first && !record_initial) {
			first = false;
			return;
		}
		first = false;
		rec.record(t, std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)),
		           std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(n), y.end()));
	};
	auto res = integrate_ode(rhs, tau0, y0, tau1, integrator_options(opt), events, obs);
	traj.reason = res.reason;
	traj.accepted += res.accepted;
	traj.rejected += res.rejected;
	if (res.reason == Termination::Collapse) { traj.collapsed = static_cast<int>(res.event_index); }
	return traj;
}

template <class T>
Trajectory shoot_impl(const ModelSpec& spec, const SeriesSolution<T>& sol, const ShootingOptions& opt,
                      double t_end) {
	Env<double> env;
	for (const auto& [k, v] : sol.env) { env[k] = to_double(v); }
	const double lambda = env.at("lambda");
	const FSystem fsys(printed_system(spec), lambda);
	const SingularIVP& ivp = sol.ivp;
	const std::size_t n = ivp.dim;

	double eps = opt.eps;
	SeedState seed;
	for (;;) {
		try {
			seed = seed_from_series(sol, eps, opt.seed_tolerance);
			break;
		} catch (const SeriesDivergent&) {
			if (eps / 2 < opt.min_eps) { throw; }
			eps /= 2;
		}
	}
	Trajectory traj;
	traj.seed_endpoint = ivp.endpoint;
	traj.lambda = lambda;
	traj.seed_eps = eps;
	traj.seed_error = seed.error_estimate;
	Recorder rec{fsys, traj, {}, {}};

	const double t_xy = std::min(opt.t_switch, t_end);
	std::vector<double> f = seed.f, fp = seed.fp;
	double tau = eps;
	if (t_xy > eps) {
		const XYSystem xys(ivp, env);
		std::vector<double> scratch;
		OdeRhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& d) { xys.rhs(t, y, d, scratch); };
		std::vector<std::pair<OdeEvent, Termination>> events;
		for (std::size_t i = 0; i < n; ++i) {
			const bool col = ivp.collapsing[i];
			events.emplace_back(
			    [i, col, &opt](double t, const std::vector<double>& y) {
				    if (!(y[i] > 0.0)) { return y[i]; }
				    return (col ? t : 1.0) * std::sqrt(y[i]) - opt.collapse;
			    },
			    Termination::Collapse);
		}
		events.emplace_back(
		    [&opt](double, const std::vector<double>& y) {
			    double m = 0.0;
			    for (double v : y) { m = std::max(m, std::fabs(v)); }
			    return opt.blowup - m;
		    },
		    Termination::Blowup);
		std::vector<double> y0(seed.x);
		y0.insert(y0.end(), seed.y.begin(), seed.y.end());
		std::vector<double> xs(n), ys(n), ff, ffp;
		OdeObserver obs = [&](double t, const std::vector<double>& y) {
			std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), xs.begin());
			std::copy(y.begin() + static_cast<std::ptrdiff_t>(n), y.end(), ys.begin());
			xy_to_f(ivp.collapsing, t, xs, ys, ff, ffp);
			rec.record(t, ff, ffp);
		};
		auto res = integrate_ode(rhs, eps, y0, t_xy, integrator_options(opt), events, obs);
		traj.accepted += res.accepted;
		traj.rejected += res.rejected;
		traj.reason = res.reason;
		if (res.reason != Termination::ReachedTarget) {
			if (res.reason == Termination::Collapse) { traj.collapsed = static_cast<int>(res.event_index); }
			return traj;
		}
		tau = res.t;
		f = traj.f.back();
		fp = traj.fp.back();
	} else {
		rec.record(tau, f, fp);
	}
	if (tau >= t_end) { return traj; }
	return integrate_f_into(std::move(traj), fsys, tau, f, fp, t_end, opt, false);
}

}  // namespace

SeedState seed_from_series(const SeriesSolution<Rational>& sol, double eps, double tolerance) {
	return seed_impl(sol, eps, tolerance);
}

SeedState seed_from_series(const SeriesSolution<double>& sol, double eps, double tolerance) {
	return seed_impl(sol, eps, tolerance);
}

Trajectory integrate_f(const FSystem& sys, double tau0, const std::vector<double>& f, const std::vector<double>& fp,
                       double tau1, const ShootingOptions& opt) {
	Trajectory traj;
	traj.lambda = sys.lambda();
	return integrate_f_into(std::move(traj), sys, tau0, f, fp, tau1, opt, true);
}

Trajectory shoot(const ModelSpec& spec, const SeriesSolution<Rational>& sol, const ShootingOptions& opt) {
	return shoot_impl(spec, sol, opt, opt.t_max);
}

double invariant_monitor(const Trajectory& traj, MonitorKind kind) {
	switch (kind) {
		case MonitorKind::Swap45:
			return traj.max_swap45;
		case MonitorKind::Swap23:
			return traj.max_swap23;
		case MonitorKind::ModelBConstraint:
			return traj.max_constraint;
		case MonitorKind::Trace:
			return traj.max_trace;
	}
	return 0.0;
}

// ---------------------------------------------------------------------------

DefectReport state_defect(const BoundaryData& target, const std::vector<double>& f, const std::vector<double>& fp) {
	DefectReport rep;
	rep.target_endpoint = target.endpoint;
	double total = 0.0;
	for (std::size_t k = 0; k < target.collapsing.size(); ++k) {
		const auto i = static_cast<std::size_t>(target.collapsing[k]);
		const double c = std::sqrt(to_double(target.c_squared[k]));
		// In the local parameter the target is approached with g_i' = -c_i.
		const double term = f[i] * f[i] + (fp[i] + c) * (fp[i] + c);
		rep.breakdown.emplace_back("collapse_" + std::to_string(i + 1), term);
		total += term;
	}
	for (const auto& g : target.groups) {
		double mean = 0.0;
		for (int i : g.members) { mean += f[static_cast<std::size_t>(i)]; }
		mean /= static_cast<double>(g.members.size());
		double var = 0.0, slope = 0.0;
		for (int i : g.members) {
			const auto u = static_cast<std::size_t>(i);
			var += (f[u] - mean) * (f[u] - mean);
			slope += fp[u] * fp[u];
		}
		var /= static_cast<double>(g.members.size());
		rep.slots[g.slot] = mean * mean;
		rep.breakdown.emplace_back("slope_" + g.slot, slope);
		rep.breakdown.emplace_back("spread_" + g.slot, var);
		total += slope + var;
	}
	rep.defect = std::sqrt(total);
	return rep;
}

DefectReport boundary_defect(const Trajectory& traj, const BoundaryData& target) {
	DefectReport best;
	best.target_endpoint = target.endpoint;
	best.defect = std::numeric_limits<double>::infinity();
	for (std::size_t k = 0; k < traj.tau.size(); ++k) {
		DefectReport r = state_defect(target, traj.f[k], traj.fp[k]);
		if (std::isfinite(r.defect) && r.defect < best.defect) {
			best = r;
			best.tau = traj.tau[k];
		}
	}
	return best;
}

std::size_t worker_count() {
	std::size_t n = std::max(1u, std::thread::hardware_concurrency());
	if (const char* env = std::getenv("COHOM1_THREADS")) {
		char* end = nullptr;
		const long v = std::strtol(env, &end, 10);
		if (end != env && v >= 1) { n = std::min<std::size_t>(n, static_cast<std::size_t>(v)); }
	}
	return n;
}

namespace {

template <class F>
void parallel_for(std::size_t count, F&& body) {
	const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
	if (workers <= 1) {
		for (std::size_t i = 0; i < count; ++i) { body(i); }
		return;
	}
	std::atomic<std::size_t> next{0};
	std::vector<std::thread> pool;
	for (std::size_t w = 0; w < workers; ++w) {
		pool.emplace_back([&] {
			for (std::size_t i = next++; i < count; i = next++) { body(i); }
		});
	}
	for (auto& t : pool) { t.join(); }
}

}  // namespace

std::vector<ScanRow> scan(const ModelSpec& spec, int endpoint, const std::vector<ScanPoint>& grid,
                          const ShootingOptions& opt) {
	std::vector<ScanRow> rows(grid.size());
	const SingularIVP& ivp = singular_ivp(spec, endpoint);
	const BoundaryData& target = boundary_conditions(spec, 1 - endpoint);
	parallel_for(grid.size(), [&](std::size_t k) {
		ScanRow& row = rows[k];
		row.point = grid[k];
		try {
			check_endpoint_env(spec, endpoint, grid[k].env);
			auto sol = formal_solution<Rational>(ivp, grid[k].env, opt.order, grid[k].free);
			Trajectory traj = shoot(spec, sol, opt);
			row.reason = traj.reason;
			row.tau_end = traj.tau.empty() ? 0.0 : traj.tau.back();
			row.defect = boundary_defect(traj, target);
			row.max_trace = traj.max_trace;
			row.max_constraint = traj.max_constraint;
			if (spec.id == ModelId::C) {
				row.max_swap = traj.max_swap23;
			} else if (spec.s >= 5) {
				row.max_swap = traj.max_swap45;
			}
			if (spec.id == ModelId::A) {
				auto xs = sol.factorial_coefficient(2);
				const char* slot = endpoint == 0 ? "zeta0sq" : "zeta1sq";
				const std::size_t coord = endpoint == 0 ? 1 : 2;
				// Float path: the identity is evaluated from the rounded coefficient.
				row.compatibility_residual =
				    compatibility_lambda_A(spec.id, endpoint, spec.integers, to_double(grid[k].env.at(slot)),
				                           to_double(xs[coord])) -
				    to_double(grid[k].env.at("lambda"));
			}
		} catch (const std::exception& e) {
			row.error = e.what();
		}
	});
	return rows;
}

// ---------------------------------------------------------------------------

MatchResult match_two_sided_A(const ModelSpec& spec, const MatchParams& p, const MatchOptions& opt) {
	if (spec.id != ModelId::A) { throw InvalidParameters("matching is implemented for Model A"); }
	MatchResult out;
	auto infeasible = [&](const std::string& why) {
		out.feasible = false;
		out.infeasible_reason = why;
		out.norm = std::numeric_limits<double>::infinity();
		return out;
	};
	if (!(p.zeta0 > 0.0) || !(p.zeta1 > 0.0)) { return infeasible("zeta0 and zeta1 must be positive"); }
	if (!(p.T > 0.0)) { return infeasible("interval length must be positive"); }
	if (!opt.allow_negative_lambda && !(p.lambda > 0.0)) { return infeasible("lambda must be positive"); }
	const double P = to_double(spec.integers.at("p")), Q = to_double(spec.integers.at("q"));
	if (opt.f2pp0) {
		const double need = 2 * (P + 1) / (p.zeta0 * p.zeta0) - 2 * (Q + 1) * *opt.f2pp0 / p.zeta0;
		if (std::fabs(need - p.lambda) > opt.compatibility_tolerance * std::max(1.0, std::fabs(p.lambda))) {
			return infeasible("prescribed f2''(0) requires lambda = " + std::to_string(need));
		}
	}
	if (opt.f3pp1) {
		const double need = 2 * (Q + 1) / (p.zeta1 * p.zeta1) - 2 * (P + 1) * *opt.f3pp1 / p.zeta1;
		if (std::fabs(need - p.lambda) > opt.compatibility_tolerance * std::max(1.0, std::fabs(p.lambda))) {
			return infeasible("prescribed f3''(1) requires lambda = " + std::to_string(need));
		}
	}
	const double half = p.T / 2;
	std::vector<double> fs[2], fps[2];
	for (int e = 0; e < 2; ++e) {
		const std::string side = "endpoint " + std::to_string(e);
		Env<double> env{{"lambda", p.lambda}};
		env[e == 0 ? "zeta0sq" : "zeta1sq"] = e == 0 ? p.zeta0 * p.zeta0 : p.zeta1 * p.zeta1;
		try {
			auto sol = formal_solution<double>(singular_ivp(spec, e), env, opt.shooting.order,
			                                   Vector<double>{e == 0 ? p.s0 : p.s1});
			Trajectory traj = shoot_impl(spec, sol, opt.shooting, half);
			if (traj.reason != Termination::ReachedTarget || traj.tau.empty() ||
			    std::fabs(traj.tau.back() - half) > 1e-9 * std::max(1.0, half)) {
				out.failed_side = side;
				out.norm = std::numeric_limits<double>::infinity();
				out.infeasible_reason = side + " terminated early: " + to_string(traj.reason);
				return out;
			}
			fs[e] = traj.f.back();
			fps[e] = traj.fp.back();
		} catch (const std::exception& ex) {
			out.failed_side = side;
			out.norm = std::numeric_limits<double>::infinity();
			out.infeasible_reason = side + ": " + ex.what();
			return out;
		}
	}
	double acc = 0.0;
	for (std::size_t i = 0; i < fs[0].size(); ++i) { out.mismatch.push_back(fs[0][i] - fs[1][i]); }
	// The endpoint-1 branch runs in the reflected parameter, so f' = -g'.
	for (std::size_t i = 0; i < fs[0].size(); ++i) { out.mismatch.push_back(fps[0][i] + fps[1][i]); }
	for (double v : out.mismatch) { acc += v * v; }
	out.norm = std::sqrt(acc);
	return out;
}

namespace {

// Search coordinates: (log zeta0, s0, log zeta1, s1, lambda or log lambda, log T).
std::vector<double> encode(const MatchParams& p, bool log_lambda) {
	return {std::log(p.zeta0), p.s0, std::log(p.zeta1), p.s1, log_lambda ? std::log(p.lambda) : p.lambda,
	        std::log(p.T)};
}

MatchParams decode(const std::vector<double>& v, bool log_lambda) {
	return {std::exp(v[0]), v[1], std::exp(v[2]), v[3], log_lambda ? std::exp(v[4]) : v[4], std::exp(v[5])};
}

}  // namespace

MinimizeResult minimize_match_A(const ModelSpec& spec, const MatchParams& start, const MatchOptions& opt,
                                const MinimizeOptions& mopt) {
	const bool log_lambda = !opt.allow_negative_lambda;
	const double penalty = 1e6;
	auto objective = [&](const std::vector<double>& v) {
		MatchResult r = match_two_sided_A(spec, decode(v, log_lambda), opt);
		return std::isfinite(r.norm) ? r.norm : penalty;
	};
	const std::size_t restarts = std::max<std::size_t>(mopt.restarts, 1);
	std::vector<std::vector<double>> starts;
	Rng rng(mopt.seed);
	std::normal_distribution<double> gauss(0.0, 0.5);
	for (std::size_t r = 0; r < restarts; ++r) {
		auto v = encode(start, log_lambda);
		if (r > 0) {
			for (auto& x : v) { x += gauss(rng); }
		}
		starts.push_back(v);
	}
	struct Outcome {
		std::vector<double> x;
		double value = 0.0;
		std::size_t evals = 0;
	};
	std::vector<Outcome> outcomes(restarts);
	parallel_for(restarts, [&](std::size_t r) {
		const std::size_t dim = starts[r].size();
		std::vector<std::vector<double>> simplex{starts[r]};
		for (std::size_t j = 0; j < dim; ++j) {
			auto v = starts[r];
			v[j] += mopt.initial_step;
			simplex.push_back(v);
		}
		std::vector<double> vals;
		std::size_t evals = 0;
		for (const auto& v : simplex) {
			vals.push_back(objective(v));
			++evals;
		}
		while (evals < mopt.max_evaluations) {
			std::vector<std::size_t> idx(simplex.size());
			for (std::size_t i = 0; i < idx.size(); ++i) { idx[i] = i; }
			std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
			std::vector<std::vector<double>> s2;
			std::vector<double> v2;
			for (auto i : idx) {
				s2.push_back(simplex[i]);
				v2.push_back(vals[i]);
			}
			simplex = s2;
			vals = v2;
			if (vals.back() - vals.front() <= 1e-12 * (1.0 + std::fabs(vals.front()))) { break; }
			std::vector<double> centroid(dim, 0.0);
			for (std::size_t i = 0; i < dim; ++i) {
				for (std::size_t j = 0; j < dim; ++j) { centroid[j] += simplex[i][j] / static_cast<double>(dim); }
			}
			auto along = [&](double t) {
				std::vector<double> v(dim);
				for (std::size_t j = 0; j < dim; ++j) { v[j] = centroid[j] + t * (simplex[dim][j] - centroid[j]); }
				return v;
			};
			auto xr = along(-1.0);
			const double fr = objective(xr);
			++evals;
			if (fr < vals[0]) {
				auto xe = along(-2.0);
				const double fe = objective(xe);
				++evals;
				if (fe < fr) {
					simplex[dim] = xe;
					vals[dim] = fe;
				} else {
					simplex[dim] = xr;
					vals[dim] = fr;
				}
			} else if (fr < vals[dim - 1]) {
				simplex[dim] = xr;
				vals[dim] = fr;
			} else {
				auto xc = fr < vals[dim] ? along(-0.5) : along(0.5);
				const double fc = objective(xc);
				++evals;
				if (fc < std::min(fr, vals[dim])) {
					simplex[dim] = xc;
					vals[dim] = fc;
				} else {
					for (std::size_t i = 1; i <= dim; ++i) {
						for (std::size_t j = 0; j < dim; ++j) {
							simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
						}
						vals[i] = objective(simplex[i]);
						++evals;
					}
				}
			}
		}
		std::size_t best = 0;
		for (std::size_t i = 1; i < vals.size(); ++i) {
			if (vals[i] < vals[best]) { best = i; }
		}
		outcomes[r] = {simplex[best], vals[best], evals};
	});
	MinimizeResult res;
	std::size_t best = 0;
	for (std::size_t r = 0; r < restarts; ++r) {
		res.restart_norms.push_back(outcomes[r].value);
		res.evaluations += outcomes[r].evals;
		if (outcomes[r].value < outcomes[best].value) { best = r; }
	}
	res.best = decode(outcomes[best].x, log_lambda);
	res.best_norm = outcomes[best].value;
	return res;
}

}  // namespace cohom1
