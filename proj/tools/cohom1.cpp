#include "cohom1/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace cohom1;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitIntegration = 2;
constexpr int kExitUsage = 64;

class UsageError : public Error {
   public:
	using Error::Error;
};

Rational arg_rational(const std::string& s, bool allow_decimal) {
	try {
		return parse_rational(s, allow_decimal);
	} catch (const Error& e) {
		throw UsageError(e.what());
	}
}

struct ModelArgs {
	std::string model;
	std::optional<long> p, q, n;
	std::vector<std::string> params;

	void attach(CLI::App* app, bool required = true) {
		auto* m = app->add_option("--model", model, "Model letter A-E");
		if (required) { m->required(); }
		app->add_option("--p", p, "Model A integer p");
		app->add_option("--q", q, "Model A integer q");
		app->add_option("--n", n, "Model B/C integer n");
		app->add_option("--params", params, "Bindings name=a/b (lambda, zeta0sq, zeta1sq, xi1sq; zeta0 etc. are squared)")
		    ->delimiter(',');
	}

	[[nodiscard]] ParamEnv integers(ModelId id) const {
		ParamEnv ints;
		const auto names = integer_parameter_names(id);
		auto take = [&](const char* name, const std::optional<long>& v) {
			if (!v) { return; }
			if (std::find(names.begin(), names.end(), name) == names.end()) {
				throw UsageError(std::string("--") + name + " does not apply to Model " + model_letter(id));
			}
			ints[name] = Rational(*v);
		};
		take("p", p);
		take("q", q);
		take("n", n);
		if (!ints.empty() && ints.size() != names.size()) {
			auto d = default_integers(id);
			for (const auto& k : names) {
				if (!ints.count(k)) { ints[k] = d.at(k); }
			}
		}
		return ints;
	}

	[[nodiscard]] ModelSpec spec() const {
		return get_model(parse_model_id(model), integers(parse_model_id(model)));
	}

	// Exact bindings; "zeta0=a/b" binds zeta0sq to its square.
	[[nodiscard]] ParamEnv env(bool allow_decimal) const {
		ParamEnv env;
		for (const auto& kv : params) {
			const auto eq = kv.find('=');
			if (eq == std::string::npos) { throw UsageError("binding '" + kv + "' is not of the form name=value"); }
			std::string key = kv.substr(0, eq);
			Rational v = arg_rational(kv.substr(eq + 1), allow_decimal);
			if (key == "zeta0" || key == "zeta1" || key == "xi1") {
				key += "sq";
				v = v * v;
			}
			env[key] = v;
		}
		return env;
	}
};

QVector parse_free(const std::vector<std::string>& items, const std::vector<std::string>& names, bool allow_decimal) {
	QVector v(names.size(), Rational(0));
	for (const auto& kv : items) {
		const auto eq = kv.find('=');
		if (eq == std::string::npos) { throw UsageError("free parameter '" + kv + "' is not of the form name=value"); }
		const std::string key = kv.substr(0, eq);
		const auto it = std::find(names.begin(), names.end(), key);
		if (it == names.end()) { throw UsageError("unknown free parameter '" + key + "'"); }
		v[static_cast<std::size_t>(it - names.begin())] = arg_rational(kv.substr(eq + 1), allow_decimal);
	}
	return v;
}

void emit(const std::string& text, const std::string& path) {
	if (path.empty() || path == "-") {
		std::cout << text;
		return;
	}
	std::ofstream out(path, std::ios::binary);
	if (!out) { throw UsageError("cannot write '" + path + "'"); }
	out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Shared {
	std::string out;
	bool deterministic = false;
};

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"Cohomogeneity-one Einstein metrics on complex projective spaces"};
	app.set_config("--config", "", "Key-value configuration file; command-line flags take precedence");
	app.require_subcommand(1);
	app.fallthrough();
	Shared shared;
	app.add_option("--out", shared.out, "Output file (directory for reproduce)");
	app.add_flag("--deterministic", shared.deterministic, "Omit timestamps and timings from reports");

	// model
	ModelArgs model_args;
	auto* model_cmd = app.add_subcommand("model", "Print the model data");
	model_args.attach(model_cmd);

	// einstein check
	ModelArgs ein_args;
	std::size_t ein_trials = 100;
	std::uint64_t ein_seed = 1;
	auto* ein_cmd = app.add_subcommand("einstein", "Einstein system utilities");
	ein_cmd->require_subcommand(1);
	auto* ein_check = ein_cmd->add_subcommand("check", "Compare generic and transcribed solved forms");
	ein_args.attach(ein_check);
	ein_check->add_option("--trials", ein_trials, "Random points")->check(CLI::PositiveNumber);
	ein_check->add_option("--seed", ein_seed, "Random seed");

	// series
	ModelArgs ser_args;
	int ser_endpoint = 0;
	std::size_t ser_order = 12, ser_det_hi = 20;
	std::vector<std::string> ser_free;
	auto* ser_cmd = app.add_subcommand("series", "Exact formal power-series solution at a singular orbit");
	ser_args.attach(ser_cmd);
	ser_cmd->add_option("--endpoint", ser_endpoint, "0 or 1")->check(CLI::IsMember({0, 1}));
	ser_cmd->add_option("--order", ser_order, "Truncation order M")->check(CLI::Range(2, 200));
	ser_cmd->add_option("--free", ser_free, "Kernel parameters name=a/b (s, r, ...)")->delimiter(',');
	ser_cmd->add_option("--det-max", ser_det_hi, "Largest m in the determinant table");

	// verify
	ModelArgs ver_args;
	VerifyOptions ver_opt;
	auto* ver_cmd = app.add_subcommand("verify", "Exact identity suite for a model");
	ver_args.attach(ver_cmd);
	ver_cmd->add_option("--order", ver_opt.order, "Series order for residual checks")->check(CLI::Range(2, 200));
	ver_cmd->add_option("--trials", ver_opt.equivalence_trials, "Random points for the Einstein comparison");
	ver_cmd->add_option("--seed", ver_opt.seed, "Random seed");

	// shoot
	ModelArgs sh_args;
	int sh_endpoint = 0;
	std::vector<std::string> sh_free;
	ShootingOptions sh_opt;
	std::string sh_csv;
	auto* sh_cmd = app.add_subcommand("shoot", "Integrate from a singular orbit and measure the opposite-orbit defect");
	sh_args.attach(sh_cmd);
	sh_cmd->add_option("--endpoint", sh_endpoint, "Seed endpoint")->check(CLI::IsMember({0, 1}));
	sh_cmd->add_option("--free", sh_free, "Kernel parameters name=value")->delimiter(',');
	sh_cmd->add_option("--order", sh_opt.order, "Series order for the seed");
	sh_cmd->add_option("--eps", sh_opt.eps, "Seed parameter");
	sh_cmd->add_option("--tol", sh_opt.tol, "Integrator tolerance");
	sh_cmd->add_option("--t-max", sh_opt.t_max, "Largest parameter value");
	sh_cmd->add_option("--t-switch", sh_opt.t_switch, "Switch from (x, y) to f-variables");
	sh_cmd->add_option("--collapse", sh_opt.collapse, "Collapse threshold");
	sh_cmd->add_option("--blowup", sh_opt.blowup, "Blowup threshold");
	sh_cmd->add_option("--csv", sh_csv, "Write the trajectory as CSV");

	// scan
	ModelArgs sc_args;
	int sc_endpoint = 0;
	std::vector<std::string> sc_zeta{"1/2", "1", "2"}, sc_lambda{"1", "2", "4"}, sc_free;
	ShootingOptions sc_opt;
	std::string sc_format = "json";
	auto* sc_cmd = app.add_subcommand("scan", "Defect scan over a (zeta, lambda) grid");
	sc_args.attach(sc_cmd, true);
	sc_cmd->add_option("--endpoint", sc_endpoint, "Seed endpoint")->check(CLI::IsMember({0, 1}));
	sc_cmd->add_option("--zeta", sc_zeta, "Values of every slot parameter zeta (squared internally)")->delimiter(',');
	sc_cmd->add_option("--lambda", sc_lambda, "Values of lambda")->delimiter(',');
	sc_cmd->add_option("--free", sc_free, "Kernel parameters name=value")->delimiter(',');
	sc_cmd->add_option("--tol", sc_opt.tol, "Integrator tolerance");
	sc_cmd->add_option("--t-max", sc_opt.t_max, "Largest parameter value");
	sc_cmd->add_option("--format", sc_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

	// match
	ModelArgs ma_args;
	MatchParams ma_p;
	MatchOptions ma_opt;
	std::optional<double> ma_f2, ma_f3;
	bool ma_min = false;
	MinimizeOptions ma_mopt;
	auto* ma_cmd = app.add_subcommand("match", "Two-sided matching for Model A");
	ma_args.attach(ma_cmd, false);
	ma_cmd->add_option("--zeta0", ma_p.zeta0, "Endpoint-0 orbit size");
	ma_cmd->add_option("--s0", ma_p.s0, "Endpoint-0 kernel parameter");
	ma_cmd->add_option("--zeta1", ma_p.zeta1, "Endpoint-1 orbit size");
	ma_cmd->add_option("--s1", ma_p.s1, "Endpoint-1 kernel parameter");
	ma_cmd->add_option("--lambda", ma_p.lambda, "Einstein constant");
	ma_cmd->add_option("--T", ma_p.T, "Interval length");
	ma_cmd->add_option("--f2pp0", ma_f2, "Prescribed f_2''(0)");
	ma_cmd->add_option("--f3pp1", ma_f3, "Prescribed f_3''(1)");
	ma_cmd->add_flag("--allow-negative-lambda", ma_opt.allow_negative_lambda, "Admit lambda <= 0");
	ma_cmd->add_flag("--minimize", ma_min, "Run the simplex search from the given point");
	ma_cmd->add_option("--restarts", ma_mopt.restarts, "Minimizer restarts");
	ma_cmd->add_option("--max-evals", ma_mopt.max_evaluations, "Evaluations per restart");
	ma_cmd->add_option("--seed", ma_mopt.seed, "Restart seed");

	// reproduce
	ReproduceOptions rep_opt;
	std::vector<std::string> rep_only;
	auto* rep_cmd = app.add_subcommand("reproduce", "Run the full check suite and write a report bundle");
	rep_cmd->add_option("--only", rep_only, "Sections to run: " + [] {
		std::string s;
		for (const auto& n : reproduce_sections()) { s += (s.empty() ? "" : ", ") + n; }
		return s;
	}())->delimiter(',');
	rep_cmd->add_option("--seed", rep_opt.seed, "Random seed");

	try {
		app.parse(argc, argv);
	} catch (const CLI::Success& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return kExitUsage;
	}

	try {
		if (*model_cmd) {
			emit(dump(model_report(model_args.spec())), shared.out);
			return kExitOk;
		}
		if (*ein_check) {
			const auto j = einstein_report(ein_args.spec(), ein_trials, ein_seed);
			emit(dump(j), shared.out);
			return j["equivalent"].get<bool>() ? kExitOk : kExitCheckFailed;
		}
		if (*ser_cmd) {
			const auto spec = ser_args.spec();
			const auto env = ser_args.env(false);
			check_endpoint_env(spec, ser_endpoint, env);
			const SingularIVP& ivp = singular_ivp(spec, ser_endpoint);
			const auto names = free_parameter_names(kernel_dimension(ivp, env));
			const auto sol = formal_solution<Rational>(ivp, env, ser_order, parse_free(ser_free, names, false));
			emit(dump(series_report(sol, ser_det_hi)), shared.out);
			return kExitOk;
		}
		if (*ver_cmd) {
			const auto spec = ver_args.spec();
			ver_opt.env = ver_args.env(false);
			const auto v = verify_model(spec, ver_opt);
			auto j = v.to_json();
			j["model"] = std::string(1, model_letter(spec.id));
			j["integers"] = to_json(spec.integers);
			emit(dump(j), shared.out);
			return v.pass() ? kExitOk : kExitCheckFailed;
		}
		if (*sh_cmd) {
			const auto spec = sh_args.spec();
			const auto env = sh_args.env(true);
			check_endpoint_env(spec, sh_endpoint, env);
			const SingularIVP& ivp = singular_ivp(spec, sh_endpoint);
			const auto names = free_parameter_names(kernel_dimension(ivp, env));
			const auto sol = formal_solution<Rational>(ivp, env, sh_opt.order, parse_free(sh_free, names, true));
			Trajectory traj;
			try {
				traj = shoot(spec, sol, sh_opt);
			} catch (const SeriesDivergent& e) {
				std::cerr << "integration failure: " << e.what() << "\n";
				return kExitIntegration;
			}
			auto j = trajectory_report(traj, boundary_defect(traj, boundary_conditions(spec, 1 - sh_endpoint)));
			j["model"] = std::string(1, model_letter(spec.id));
			j["params"] = to_json(env);
			if (!traj.f.empty()) {
				std::vector<double> generic;
				for (std::size_t i = 0; i < spec.s; ++i) { generic.push_back(to_double(spec.rescale[i]) * traj.f.back()[i]); }
				j["f_end_generic"] = generic;
			}
			emit(dump(j), shared.out);
			if (!sh_csv.empty()) { emit(trajectory_csv(traj), sh_csv); }
			return traj.reason == Termination::StepUnderflow ? kExitIntegration : kExitOk;
		}
		if (*sc_cmd) {
			const auto spec = sc_args.spec();
			const SingularIVP& ivp = singular_ivp(spec, sc_endpoint);
			std::vector<ScanPoint> grid;
			for (const auto& zs : sc_zeta) {
				const Rational z = arg_rational(zs, true);
				for (const auto& ls : sc_lambda) {
					ScanPoint pt;
					pt.env["lambda"] = arg_rational(ls, true);
					for (const auto& slot : boundary_conditions(spec, sc_endpoint).slots()) { pt.env[slot] = z * z; }
					pt.free = parse_free(sc_free, free_parameter_names(kernel_dimension(ivp, pt.env)), true);
					grid.push_back(pt);
				}
			}
			const auto rows = scan(spec, sc_endpoint, grid, sc_opt);
			emit(sc_format == "csv" ? scan_csv(spec, rows) : dump(scan_report(spec, sc_endpoint, rows)), shared.out);
			const bool failed = std::any_of(rows.begin(), rows.end(), [](const ScanRow& r) {
				return !r.error.empty() || r.reason == Termination::StepUnderflow;
			});
			return failed ? kExitIntegration : kExitOk;
		}
		if (*ma_cmd) {
			if (!ma_args.model.empty() && parse_model_id(ma_args.model) != ModelId::A) {
				throw UsageError("matching is implemented for Model A only");
			}
			ModelArgs a = ma_args;
			a.model = "A";
			const auto spec = a.spec();
			ma_opt.f2pp0 = ma_f2;
			ma_opt.f3pp1 = ma_f3;
			const auto r = match_two_sided_A(spec, ma_p, ma_opt);
			auto j = match_report(ma_p, r);
			j["integers"] = to_json(spec.integers);
			if (ma_min && r.feasible) {
				j["minimizer"] = minimize_report(minimize_match_A(spec, ma_p, ma_opt, ma_mopt));
			}
			emit(dump(j), shared.out);
			return r.failed_side.empty() ? kExitOk : kExitIntegration;
		}
		if (*rep_cmd) {
			rep_opt.only = std::set<std::string>(rep_only.begin(), rep_only.end());
			rep_opt.deterministic = shared.deterministic;
			const auto res = reproduce(rep_opt);
			const std::filesystem::path dir = shared.out.empty() ? std::filesystem::path("reproduce_out") : std::filesystem::path(shared.out);
			std::filesystem::create_directories(dir);
			emit(dump(res.to_json(shared.deterministic)), (dir / "report.json").string());
			if (!res.nonexistence_csv.empty()) { emit(res.nonexistence_csv, (dir / "nonexistence.csv").string()); }
			for (const auto& s : res.sections) {
				std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << ": " << s.summary << "\n";
			}
			return res.pass() ? kExitOk : kExitCheckFailed;
		}
	} catch (const UsageError& e) {
		std::cerr << "usage error: " << e.what() << "\n";
		return kExitUsage;
	} catch (const InvalidParameters& e) {
		std::cerr << "invalid parameters: " << e.what() << "\n";
		return kExitUsage;
	} catch (const UnboundParameter& e) {
		std::cerr << "invalid parameters: " << e.what() << "\n";
		return kExitUsage;
	} catch (const Error& e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitCheckFailed;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitCheckFailed;
	}
	return kExitOk;
}
