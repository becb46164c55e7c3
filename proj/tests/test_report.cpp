#include "cohom1/report.hpp"

#include "support.hpp"

#include <sstream>

using namespace cohom1;
using namespace testgen;

namespace {

ParamEnv bind(std::initializer_list<std::pair<const char*, Rational>> kv) {
	ParamEnv env;
	for (const auto& [k, v] : kv) { env[k] = v; }
	return env;
}

const CheckOutcome* find_check(const Verification& v, const std::string& name) {
	for (const auto& c : v.checks) {
		if (c.name == name) { return &c; }
	}
	return nullptr;
}

std::size_t line_count(const std::string& s) {
	std::size_t n = 0;
	for (char c : s) { n += c == '\n' ? 1 : 0; }
	return n;
}

}  // namespace

TEST_SUITE("report") {
	TEST_CASE("rationals are serialized as exact strings") {
		CHECK(to_json(q(3, 2)) == "3/2");
		CHECK(to_json(q(5)) == "5");
		CHECK(to_json(q(-1, 3)) == "-1/3");
		CHECK(to_json(qv({1, q(1, 2)})) == Json::array({"1", "1/2"}));
		CHECK(to_json(bind({{"lambda", q(2, 3)}}))["lambda"] == "2/3");
	}

	TEST_CASE("model and series reports") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const Json m = model_report(C);
		CHECK(m["schema"] == kReportSchema);
		CHECK(m["dims"].size() == 3);

		const auto sol = formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 6, {});
		const Json s = series_report(sol, 20);
		CHECK(s["schema"] == kReportSchema);
		REQUIRE(s["det_table"].size() == 21);
		for (std::size_t mm = 0; mm <= 20; ++mm) {
			const long m = static_cast<long>(mm);
			CHECK(s["det_table"][mm]["det"] == to_string(Rational((m + 1) * (m + 3) * (m + 3))));
			CHECK(s["det_table"][mm]["equal"] == true);
		}
		CHECK(s["kernel"].empty());
		CHECK(s.contains("certificate"));
	}

	TEST_CASE("verification suites") {
		VerifyOptions opt;
		opt.equivalence_trials = 20;
		opt.order = 8;
		opt.random_bindings = 2;
		const Verification c = verify_model(get_model(ModelId::C, bind({{"n", 3}})), opt);
		CHECK(c.pass());
		REQUIRE(find_check(c, "det_formula@0") != nullptr);
		CHECK(find_check(c, "det_formula@0")->detail["table"].size() == 21);
		REQUIRE(find_check(c, "reduced_subsystem") != nullptr);
		CHECK(find_check(c, "reduced_subsystem")->pass);

		const Verification a = verify_model(get_model(ModelId::A, bind({{"p", 2}, {"q", 1}})), opt);
		CHECK(a.pass());
		const CheckOutcome* k = find_check(a, "kernel@0");
		REQUIRE(k != nullptr);
		CHECK(k->pass);
		CHECK(k->detail["basis"] == Json::array({Json::array({"-2", "0", "1"})}));
		CHECK(a.to_json()["pass"] == true);
	}

	TEST_CASE("trajectory and scan tables") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const auto sol = formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 12, {});
		ShootingOptions opt;
		opt.t_max = 0.5;
		const Trajectory tr = shoot(C, sol, opt);
		const DefectReport d = boundary_defect(tr, boundary_conditions(C, 1));
		const Json j = trajectory_report(tr, d);
		CHECK(j["termination"] == "reached_target");
		const std::string csv = trajectory_csv(tr);
		CHECK(line_count(csv) == tr.tau.size() + 1);

		std::vector<ScanPoint> grid{{bind({{"lambda", 1}, {"zeta0sq", 1}}), {}}, {bind({{"lambda", 2}, {"zeta0sq", 4}}), {}}};
		const auto rows = scan(C, 0, grid, opt);
		CHECK(line_count(scan_csv(C, rows)) == 3);
		CHECK(scan_report(C, 0, rows)["rows"].size() == 2);
	}

	TEST_CASE("reproduction sections") {
		ReproduceOptions opt;
		opt.only = {"float", "compatibility"};
		opt.deterministic = true;
		const ReproduceResult a = reproduce(opt);
		REQUIRE(a.sections.size() == 2);
		CHECK(a.pass());
		for (const auto& s : a.sections) { CHECK((s.name == "float" || s.name == "compatibility")); }
		const ReproduceResult b = reproduce(opt);
		CHECK(a.to_json(true).dump(2) == b.to_json(true).dump(2));
		CHECK_FALSE(a.to_json(true).contains("generated_at"));

		ReproduceOptions bad;
		bad.only = {"nonsense"};
		CHECK_THROWS_AS(reproduce(bad), InvalidParameters);
		CHECK(reproduce_sections().size() == 9);
	}

	TEST_CASE("nonexistence section restricts to the witness models") {
		ReproduceOptions opt;
		opt.only = {"nonexistence"};
		opt.deterministic = true;
		const ReproduceResult r = reproduce(opt);
		REQUIRE(r.sections.size() == 1);
		CHECK(r.sections[0].criterion == 7);
		CHECK(r.sections[0].pass);
		std::istringstream in(r.nonexistence_csv);
		std::string line;
		std::getline(in, line);
		std::size_t rows = 0;
		while (std::getline(in, line)) {
			++rows;
			CHECK(line.find("A,") != 0);
		}
		CHECK(rows == 36);
	}
}
