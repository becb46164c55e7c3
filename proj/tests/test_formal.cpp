#include "support.hpp"

#include <cmath>

using namespace cohom1;
using namespace testgen;

namespace {

ParamEnv bind(std::initializer_list<std::pair<const char*, Rational>> kv) {
	ParamEnv env;
	for (const auto& [k, v] : kv) { env[k] = v; }
	return env;
}

Rational qm(std::size_t m) { return Rational(static_cast<long>(m)); }

// Closed forms of det(L_m) at the printed endpoints.
Rational det_A0(std::size_t mm, const Rational& q) {
	const Rational m = qm(mm);
	return m * (m + 3) * (m + 2 * q + 2) * (m + 2 * q + 4) * (m + 4 * q + 2) / ((m + 2) * (m + 2));
}
Rational det_B1(std::size_t mm) {
	const Rational m = qm(mm);
	const Rational m2 = m + 2;
	return m * (m + 1) * (m + 3) * (m + 3) * (m + 3) * (m + 4) * (m + 4) * (m + 5) / (m2 * m2 * m2);
}
Rational det_C0(std::size_t mm) {
	const Rational m = qm(mm);
	return (m + 1) * (m + 3) * (m + 3);
}
Rational det_D1(std::size_t mm) {
	const Rational m = qm(mm);
	const Rational m2 = m + 2;
	return m * (m + 1) * (m + 3) * (m + 5) * (m + 5) * (m + 6) * (m + 7) * (m + 8) / (m2 * m2 * m2);
}
Rational det_E0(std::size_t mm) {
	const Rational m = qm(mm);
	const Rational m2 = m + 2;
	return m * m * (m + 1) * (m + 3) * (m + 10) * (m + 11) * (m + 12) * (m + 12) * (m + 18) / (m2 * m2 * m2 * m2);
}

// Recomputes the plain y coefficients from x' = 2y.
std::vector<QVector> kinematic_Y(const std::vector<QVector>& X) {
	std::vector<QVector> Y;
	for (std::size_t k = 0; k + 1 < X.size(); ++k) { Y.push_back(scaled(X[k + 1], Rational(static_cast<long>(k + 1), 2))); }
	return Y;
}

}  // namespace

TEST_SUITE("formal") {
	TEST_CASE("first-order conditions") {
		const ModelSpec A = get_model(ModelId::A, bind({{"p", 2}, {"q", 1}}));
		const ParamEnv envA = bind({{"lambda", 1}, {"zeta0sq", 1}});
		CHECK(check_first_order<Rational>(singular_ivp(A, 0), envA).pass);
		const ModelSpec E = model(ModelId::E);
		const ParamEnv envE = bind({{"lambda", 1}, {"zeta0sq", 1}});
		const auto& ivpE = singular_ivp(E, 0);
		CHECK(check_first_order<Rational>(ivpE, envE).pass);
		QVector x0 = initial_point<Rational>(ivpE, envE);
		x0[0] += 1;
		const auto bad = check_first_order_at<Rational>(ivpE, envE, x0);
		CHECK_FALSE(bad.pass);
		CHECK_FALSE(all_zero(bad.A_at_x0));
	}

	TEST_CASE("L_m reduces to (m+1) Id without linear terms") {
		Linearization<Rational> lin{QMatrix(4, 4), QMatrix(4, 4)};
		for (std::size_t m = 0; m < 6; ++m) { CHECK(compute_Lm(lin, m) == QMatrix::identity(4) * Rational(static_cast<long>(m + 1))); }
	}

	TEST_CASE("determinant closed forms at the printed endpoints") {
		Rng rng(601);
		for (long qq : {1L, 2L}) {
			const ModelSpec A = get_model(ModelId::A, bind({{"p", 3}, {"q", qq}}));
			const ParamEnv env = random_endpoint_env(rng, A, 0);
			for (std::size_t m = 0; m <= 20; ++m) { CHECK(det(compute_Lm<Rational>(singular_ivp(A, 0), env, m)) == det_A0(m, Rational(qq))); }
		}
		for (long n : {2L, 4L}) {
			const ModelSpec B = get_model(ModelId::B, bind({{"n", n}}));
			const ParamEnv env = random_endpoint_env(rng, B, 1);
			for (std::size_t m = 0; m <= 20; ++m) { CHECK(det(compute_Lm<Rational>(singular_ivp(B, 1), env, m)) == det_B1(m)); }
		}
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 5}}));
		const ModelSpec D = model(ModelId::D);
		const ModelSpec E = model(ModelId::E);
		const ParamEnv eC = random_endpoint_env(rng, C, 0), eD = random_endpoint_env(rng, D, 1), eE = random_endpoint_env(rng, E, 0);
		for (std::size_t m = 0; m <= 20; ++m) {
			CHECK(det(compute_Lm<Rational>(singular_ivp(C, 0), eC, m)) == det_C0(m));
			CHECK(det(compute_Lm<Rational>(singular_ivp(D, 1), eD, m)) == det_D1(m));
			CHECK(det(compute_Lm<Rational>(singular_ivp(E, 0), eE, m)) == det_E0(m));
		}
	}

	TEST_CASE("determinant formula verification") {
		const ModelSpec D = model(ModelId::D);
		const ParamEnv eD = bind({{"lambda", 2}, {"zeta1sq", q(3, 2)}, {"xi1sq", q(1, 3)}});
		const auto rows = verify_det_formula(singular_ivp(D, 1), eD, 1, 20);
		CHECK(rows.size() == 20);
		for (const auto& r : rows) { CHECK(r.equal); }

		const ModelSpec E = model(ModelId::E);
		const auto e0 = verify_det_formula(singular_ivp(E, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 0, 0);
		CHECK(e0.at(0).computed == 0);
		CHECK(e0.at(0).formula == 0);

		const ModelSpec B = model(ModelId::B);
		const auto b0 = verify_det_formula(singular_ivp(B, 1), bind({{"lambda", 1}, {"zeta1sq", 1}, {"xi1sq", 1}}), 0, 0);
		CHECK(b0.at(0).computed == 0);
		CHECK(b0.at(0).formula == 0);

		const ModelSpec A = model(ModelId::A);
		CHECK_THROWS_AS(verify_det_formula(singular_ivp(A, 1), bind({{"lambda", 1}, {"zeta1sq", 1}}), 0, 3), FormulaUnavailable);
	}

	TEST_CASE("first recursion step vanishes and order-two data of Model A") {
		const long p = 3, qq = 2;
		const ModelSpec A = get_model(ModelId::A, bind({{"p", p}, {"q", qq}}));
		const Rational lambda = q(5, 3), z = q(7, 4);
		const ParamEnv env = bind({{"lambda", lambda}, {"zeta0sq", z}});
		const auto sol = formal_solution<Rational>(singular_ivp(A, 0), env, 6, qv({q(1, 2)}));
		CHECK(all_zero(sol.factorial_coefficient(1)));
		CHECK(sol.D.at(0) == qv({-2 * lambda, 4 * (p + 1) - 2 * lambda * z, -2 * lambda}));
		const Rational w = 2 * (p + 1) - lambda * z;
		const QVector x2 = qv({-2 * lambda / 3, w / (qq + 1), -p * w / (3 * qq * z * (qq + 1))});
		CHECK(in_span(sol.x2_particular - x2, {qv({-2 * qq, 0, 1})}));
		CHECK(same_span(sol.kernel, {qv({-2 * qq, 0, 1})}));
		// (x^2)_2 does not depend on the kernel parameter
		for (const Rational s : {q(-1), q(0), q(2)}) {
			const auto other = formal_solution<Rational>(singular_ivp(A, 0), env, 4, qv({s}));
			CHECK(other.factorial_coefficient(2)[1] == w / (qq + 1));
		}
	}

	TEST_CASE("order-two data of Model E") {
		const ModelSpec E = model(ModelId::E);
		const Rational lambda = q(2), z = q(3, 5);
		const ParamEnv env = bind({{"lambda", lambda}, {"zeta0sq", z}});
		const auto sol = formal_solution<Rational>(singular_ivp(E, 0), env, 4, qv({0, 0}));
		const QVector x2 = qv({(32 * lambda * z - 2048) / (3 * z), 0, 16 - lambda * z / 2, 0, 0});
		CHECK(in_span(sol.x2_particular - x2, sol.kernel));
		CHECK(same_span(sol.kernel, {qv({-64, 1, 0, 0, 0}), qv({0, 0, q(-3, 2), 1, 1})}));
		CHECK(sol.free_names == std::vector<std::string>{"s", "r"});
	}

	TEST_CASE("Model C has a unique series and Model D a one-dimensional family") {
		const ModelSpec C = model(ModelId::C);
		const auto solC = formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 8, {});
		CHECK(solC.kernel.empty());
		CHECK(solC.free_names.empty());
		CHECK_THROWS(formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 8, qv({1})));

		const ModelSpec D = model(ModelId::D);
		const auto solD = formal_solution<Rational>(singular_ivp(D, 1), bind({{"lambda", 1}, {"zeta1sq", 2}, {"xi1sq", 1}}), 6, qv({1}));
		CHECK(same_span(solD.kernel, {qv({-4, 0, 1, 0, 0})}));
	}

	TEST_CASE("residual certificates") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const auto solC = formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 12, {});
		CHECK(solC.certificate.cleared_order >= 11);

		const ModelSpec B = model(ModelId::B);
		for (const Rational s : {q(-1), q(0), q(2)}) {
			const auto solB = formal_solution<Rational>(singular_ivp(B, 1), bind({{"lambda", 1}, {"zeta1sq", 2}, {"xi1sq", 1}}), 12, qv({s}));
			CHECK(solB.certificate.cleared_order >= 11);
		}

		auto X = solC.X;
		X[4][0] += q(1, 24);  // x^4 = 4! X_4 shifted by one
		const auto cert = series_residual<Rational>(solC.ivp, solC.env, X, kinematic_Y(X));
		CHECK(cert.uncleared_order == 2);
		CHECK(cert.cleared_order == 4);

		auto Y = solC.Y;
		Y[2][1] += 1;
		CHECK(series_residual<Rational>(solC.ivp, solC.env, solC.X, Y).kinematic_order == 2);
	}

	TEST_CASE("swap symmetry of the series") {
		const ModelSpec B = model(ModelId::B);
		const auto P = *symmetry_map(B);
		for (const Rational s : {q(-1), q(0), q(2)}) {
			const auto sol = formal_solution<Rational>(singular_ivp(B, 1), bind({{"lambda", 1}, {"zeta1sq", 2}, {"xi1sq", q(1, 2)}}), 12, qv({s}));
			CHECK(p_symmetry_check(sol, P));
		}
		const ModelSpec E = model(ModelId::E);
		const auto solE = formal_solution<Rational>(singular_ivp(E, 0), bind({{"lambda", 1}, {"zeta0sq", 2}}), 10, qv({q(1, 2), -1}));
		CHECK(p_symmetry_check(solE, P));
		std::vector<QVector> X(5, QVector(5, 0));
		X[3][3] = q(1, 6);
		CHECK_FALSE(p_symmetry_check(X, P));
	}

	TEST_CASE("Model A compatibility identity") {
		struct Case {
			long p, qq;
			Rational zeta, lambda;
		};
		for (const Case c : {Case{2, 1, 1, 3}, Case{3, 2, 2, q(1, 2)}}) {
			const ModelSpec A = get_model(ModelId::A, bind({{"p", c.p}, {"q", c.qq}}));
			const auto sol0 = formal_solution<Rational>(singular_ivp(A, 0), bind({{"lambda", c.lambda}, {"zeta0sq", c.zeta * c.zeta}}), 4, qv({1}));
			CHECK(compatibility_lambda_A(sol0) == c.lambda);
			const auto sol1 = formal_solution<Rational>(singular_ivp(A, 1), bind({{"lambda", c.lambda}, {"zeta1sq", c.zeta * c.zeta}}), 4, qv({1}));
			CHECK(compatibility_lambda_A(sol1) == c.lambda);
		}
		const ModelSpec C = model(ModelId::C);
		const auto solC = formal_solution<Rational>(singular_ivp(C, 0), bind({{"lambda", 1}, {"zeta0sq", 1}}), 4, {});
		CHECK_THROWS(compatibility_lambda_A(solC));
	}

	TEST_CASE("Model C reduced system") {
		const ModelSpec C = get_model(ModelId::C, bind({{"n", 3}}));
		const auto rep = reduced_subsystem_C(C, bind({{"lambda", 1}, {"zeta0sq", 1}}), 10);
		CHECK(rep.lift_equal);
		REQUIRE_FALSE(rep.det_rows.empty());
		CHECK(rep.det_rows.at(0).computed == 6);
		for (const auto& r : rep.det_rows) { CHECK(r.equal); }
		CHECK(rep.reduced.factorial_coefficient(1) == qv({0, 0}));
		CHECK_THROWS_AS(reduced_subsystem_C(model(ModelId::B), bind({{"lambda", 1}, {"zeta0sq", 1}}), 4), InvalidParameters);
	}

	TEST_CASE("property: kernel dimensions at every endpoint") {
		Rng rng(602);
		const std::map<std::string, std::size_t> printed{{"A@0", 1}, {"B@1", 1}, {"C@0", 0}, {"D@1", 1}, {"E@0", 2}};
		for (const auto& ec : all_endpoints()) {
			CAPTURE(ec.label);
			const ModelSpec spec = get_model(ec.id, random_integers(rng, ec.id));
			const ParamEnv env = random_endpoint_env(rng, spec, ec.endpoint);
			const std::size_t k = kernel_dimension(singular_ivp(spec, ec.endpoint), env);
			if (printed.count(ec.label) != 0) { CHECK(k == printed.at(ec.label)); }
			const auto sol = formal_solution<Rational>(singular_ivp(spec, ec.endpoint), env, 3, QVector(k, 0));
			CHECK(sol.kernel.size() == k);
			CHECK(sol.free_names == free_parameter_names(k));
		}
	}

	TEST_CASE("property: residual order at least M-1 at every endpoint") {
		Rng rng(603);
		const std::vector<Rational> samples{q(-1), q(0), q(1, 2), q(2)};
		for (const auto& ec : all_endpoints()) {
			CAPTURE(ec.label);
			for (int trial = 0; trial < 2; ++trial) {
				const ModelSpec spec = get_model(ec.id, random_integers(rng, ec.id));
				const auto& ivp = singular_ivp(spec, ec.endpoint);
				const ParamEnv env = random_endpoint_env(rng, spec, ec.endpoint);
				QVector free(kernel_dimension(ivp, env));
				for (auto& v : free) { v = samples[static_cast<std::size_t>(uniform_int(rng, 0, 3))]; }
				const std::size_t M = 10;
				const auto sol = formal_solution<Rational>(ivp, env, M, free);
				CHECK(sol.certificate.cleared_order + 1 >= M);
				CHECK(sol.certificate.kinematic_order == M);
				CHECK(initial_point<Rational>(ivp, env) == sol.X[0]);
			}
		}
	}

	TEST_CASE("property: coefficients are polynomial in each kernel parameter") {
		// x^2 is affine in each kernel parameter and x^m has degree at most m/2: the
		// (m/2 + 1)-th finite difference over equally spaced samples vanishes.
		Rng rng(604);
		const std::size_t M = 7;
		for (const auto& ec : all_endpoints()) {
			CAPTURE(ec.label);
			const ModelSpec spec = model(ec.id);
			const auto& ivp = singular_ivp(spec, ec.endpoint);
			const ParamEnv env = random_endpoint_env(rng, spec, ec.endpoint);
			const std::size_t k = kernel_dimension(ivp, env);
			for (std::size_t j = 0; j < k; ++j) {
				std::vector<SeriesSolution<Rational>> sols;
				for (long s = 0; s <= static_cast<long>(M / 2 + 1); ++s) {
					QVector free(k, q(1, 3));
					free[j] = q(s, 2);
					sols.push_back(formal_solution<Rational>(ivp, env, M, free));
				}
				CHECK(sols[2].X[2] - sols[0].X[2] == scaled(sols[1].X[2] - sols[0].X[2], Rational(2)));
				for (std::size_t m = 0; m <= M; ++m) {
					CAPTURE(m);
					const std::size_t order = m / 2 + 1;
					std::vector<QVector> diff;
					for (std::size_t i = 0; i <= order; ++i) { diff.push_back(sols[i].X[m]); }
					for (std::size_t r = 0; r < order; ++r) {
						for (std::size_t i = 0; i + 1 < diff.size() - r; ++i) { diff[i] = diff[i + 1] - diff[i]; }
					}
					CHECK(all_zero(diff[0]));
				}
			}
		}
	}

	TEST_CASE("property: symmetric series at the symmetric endpoints") {
		Rng rng(605);
		const std::vector<Rational> samples{q(-1), q(0), q(1, 2), q(2)};
		for (const auto& [id, e] : std::vector<std::pair<ModelId, int>>{{ModelId::B, 1}, {ModelId::D, 1}, {ModelId::E, 0}, {ModelId::C, 0}}) {
			const ModelSpec spec = get_model(id, random_integers(rng, id));
			const auto& ivp = singular_ivp(spec, e);
			const ParamEnv env = random_endpoint_env(rng, spec, e);
			QVector free(kernel_dimension(ivp, env));
			for (auto& v : free) { v = samples[static_cast<std::size_t>(uniform_int(rng, 0, 3))]; }
			const auto sol = formal_solution<Rational>(ivp, env, 9, free);
			CHECK(p_symmetry_check(sol, *symmetry_map(spec)));
			if (id == ModelId::C) {
				for (const auto& x : sol.X) { CHECK(x[1] == x[2]); }
			}
		}
	}

	TEST_CASE("property: compatibility identity over random parameters") {
		Rng rng(606);
		for (int trial = 0; trial < 20; ++trial) {
			const ParamEnv ints = random_integers(rng, ModelId::A);
			const ModelSpec A = get_model(ModelId::A, ints);
			for (int e = 0; e < 2; ++e) {
				const ParamEnv env = random_endpoint_env(rng, A, e);
				const auto sol = formal_solution<Rational>(singular_ivp(A, e), env, 3, qv({random_rational(rng, -2, 2)}));
				CHECK(compatibility_lambda_A(sol) == env.at("lambda"));
				const double zsq = to_double(env.at(e == 0 ? "zeta0sq" : "zeta1sq"));
				const double x2 = to_double(sol.factorial_coefficient(2)[e == 0 ? 1 : 2]);
				CHECK(compatibility_lambda_A(ModelId::A, e, ints, zsq, x2) == doctest::Approx(to_double(env.at("lambda"))).epsilon(1e-12));
			}
		}
	}

	TEST_CASE("property: floating-point recursion tracks the exact one") {
		Rng rng(607);
		for (const auto& ec : all_endpoints()) {
			CAPTURE(ec.label);
			const ModelSpec spec = model(ec.id);
			const auto& ivp = singular_ivp(spec, ec.endpoint);
			const ParamEnv env = random_endpoint_env(rng, spec, ec.endpoint);
			QVector free(kernel_dimension(ivp, env));
			for (auto& v : free) { v = random_rational(rng, -1, 1, 2); }
			const std::size_t M = 12;
			const auto exact = formal_solution<Rational>(ivp, env, M, free);
			std::vector<double> fd;
			for (const auto& v : free) { fd.push_back(to_double(v)); }
			const auto approx = formal_solution<double>(ivp, to_double_env(env), M, fd);
			for (std::size_t m = 0; m <= M; ++m) {
				double scale = 0.0;
				for (const auto& v : exact.X[m]) { scale = std::max(scale, magnitude(v)); }
				for (std::size_t i = 0; i < ivp.dim; ++i) {
					const double b = to_double(exact.X[m][i]);
					CHECK(std::fabs(approx.X[m][i] - b) <= 1e-10 * std::max({std::fabs(b), scale, 1e-300}));
				}
			}
		}
	}
}
