#include "support.hpp"

using namespace cohom1;
using namespace testgen;

namespace {

// Cofactor expansion along the first row; exponential but independent of elimination.
Rational cofactor_det(const QMatrix& m) {
	const std::size_t n = m.rows();
	if (n == 0) { return 1; }
	if (n == 1) { return m(0, 0); }
	Rational acc = 0;
	for (std::size_t j = 0; j < n; ++j) {
		QMatrix minor(n - 1, n - 1);
		for (std::size_t i = 1; i < n; ++i) {
			std::size_t c = 0;
			for (std::size_t k = 0; k < n; ++k) {
				if (k == j) { continue; }
				minor(i - 1, c++) = m(i, k);
			}
		}
		const Rational term = m(0, j) * cofactor_det(minor);
		acc += (j % 2 == 0) ? term : Rational(-term);
	}
	return acc;
}

ParamEnv env_of(std::initializer_list<std::pair<const char*, Rational>> kv) {
	ParamEnv env;
	for (const auto& [k, v] : kv) { env[k] = v; }
	return env;
}

}  // namespace

TEST_SUITE("algebra") {
	TEST_CASE("rational parsing accepts fractions and rejects decimals by default") {
		CHECK(parse_rational("3/2") == q(3, 2));
		CHECK(parse_rational("-4") == q(-4));
		CHECK(parse_rational("6/4") == q(3, 2));
		CHECK_THROWS_AS(parse_rational("0.5"), Error);
		CHECK(parse_rational("0.5", true) == q(1, 2));
		CHECK(parse_rational("1e-3", true) == q(1, 1000));
		CHECK_THROWS_AS(parse_rational("1/0"), Error);
		CHECK_FALSE(try_parse_rational("abc").has_value());
		CHECK(to_string(q(-6, 4)) == "-3/2");
		CHECK(to_string(q(5)) == "5");
	}

	TEST_CASE("solve_affine on an invertible diagonal system") {
		QMatrix L = QMatrix::identity(3) * Rational(2);
		auto s = solve_affine(L, qv({2, 4, 6}));
		REQUIRE(s.has_value());
		CHECK(s->particular == qv({1, 2, 3}));
		CHECK(s->kernel_basis.empty());
	}

	TEST_CASE("solve_affine reports inconsistency") {
		QMatrix L(2, 2, {1, 1, 2, 2});
		CHECK_FALSE(solve_affine(L, qv({1, 3})).has_value());
		CHECK(solve_affine(L, qv({1, 2})).has_value());
		CHECK_THROWS_AS(solve_unique(L, qv({1, 2})), Error);
		CHECK_THROWS_AS(solve_affine(L, qv({1, 2, 3})), DimensionMismatch);
	}

	TEST_CASE("Model A L_0 kernel spans (-2q, 0, 1)") {
		const ModelSpec spec = get_model(ModelId::A, env_of({{"p", 2}, {"q", 1}}));
		const ParamEnv env = env_of({{"lambda", 1}, {"zeta0sq", 1}});
		const auto& ivp = singular_ivp(spec, 0);
		const QMatrix L0 = compute_Lm<Rational>(ivp, env, 0);
		const QVector D0 = qv({-2, 4 * 3 - 2, -2});
		auto s = solve_affine(L0, D0);
		REQUIRE(s.has_value());
		CHECK(same_span(s->kernel_basis, {qv({-2, 0, 1})}));
		CHECK(L0 * s->particular == D0);
	}

	TEST_CASE("Model E L_0 kernel has dimension two") {
		const ModelSpec spec = model(ModelId::E);
		const Rational lambda = q(3, 2), z = q(5, 2);
		const ParamEnv env = env_of({{"lambda", lambda}, {"zeta0sq", z}});
		const QMatrix L0 = compute_Lm<Rational>(singular_ivp(spec, 0), env, 0);
		const QVector D0 = qv({-32 * lambda, -4 * lambda, 64 - 2 * lambda * z, 64 - 2 * lambda * z, 64 - 2 * lambda * z});
		auto s = solve_affine(L0, D0);
		REQUIRE(s.has_value());
		CHECK(s->kernel_basis.size() == 2);
		CHECK(same_span(s->kernel_basis, {qv({-64, 1, 0, 0, 0}), qv({0, 0, q(-3, 2), 1, 1})}));
	}

	TEST_CASE("determinant examples") {
		CHECK(det(QMatrix::identity(5)) == 1);
		const ModelSpec C = get_model(ModelId::C, env_of({{"n", 3}}));
		const ParamEnv envC = env_of({{"lambda", 1}, {"zeta0sq", q(7, 3)}});
		CHECK(det(compute_Lm<Rational>(singular_ivp(C, 0), envC, 2)) == 75);
		const ModelSpec B = get_model(ModelId::B, env_of({{"n", 2}}));
		const ParamEnv envB = env_of({{"lambda", 1}, {"zeta1sq", q(2, 3)}, {"xi1sq", q(5, 4)}});
		// m(m+1)(m+3)^3(m+4)^2(m+5)/(m+2)^3 at m = 1
		const Rational expected = q(1 * 2 * 64 * 25 * 6, 27);
		CHECK(expected == q(6400, 9));
		CHECK(det(compute_Lm<Rational>(singular_ivp(B, 1), envB, 1)) == expected);
	}

	TEST_CASE("property: Bareiss determinant agrees with cofactor expansion") {
		Rng rng(101);
		for (int trial = 0; trial < 60; ++trial) {
			const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 5));
			const QMatrix m = random_matrix(rng, n, n);
			CHECK(det(m) == cofactor_det(m));
		}
	}

	TEST_CASE("property: determinant is multiplicative") {
		Rng rng(102);
		for (int trial = 0; trial < 40; ++trial) {
			const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 5));
			const QMatrix a = random_matrix(rng, n, n), b = random_matrix(rng, n, n);
			CHECK(det(a * b) == det(a) * det(b));
		}
	}

	TEST_CASE("property: solve_affine particular and kernel satisfy the system") {
		Rng rng(103);
		for (int trial = 0; trial < 60; ++trial) {
			const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 5));
			const std::size_t r = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(n)));
			const QMatrix L = random_rank_matrix(rng, n, r);
			const QVector d = L * random_vector(rng, n);
			auto s = solve_affine(L, d);
			REQUIRE(s.has_value());
			CHECK(L * s->particular == d);
			CHECK(s->kernel_basis.size() == n - rank(L));
			for (const auto& k : s->kernel_basis) { CHECK(all_zero(L * k)); }
			CHECK((det(L) == 0) == !s->kernel_basis.empty());
		}
	}

	TEST_CASE("property: rank and span tests") {
		Rng rng(104);
		for (int trial = 0; trial < 40; ++trial) {
			const std::size_t n = 4;
			std::vector<QVector> basis{random_vector(rng, n), random_vector(rng, n)};
			const QVector combo = scaled(basis[0], random_rational(rng, -3, 3)) + scaled(basis[1], random_rational(rng, -3, 3));
			CHECK(in_span(combo, basis));
			CHECK(same_span(basis, {basis[0] + basis[1], basis[0] - basis[1]}));
		}
		CHECK_FALSE(in_span(qv({0, 0, 1}), {qv({1, 0, 0}), qv({0, 1, 0})}));
		CHECK_FALSE(same_span({qv({1, 0})}, {qv({0, 1})}));
	}

	TEST_CASE("property: rationals stay canonical under arithmetic") {
		Rng rng(105);
		for (int trial = 0; trial < 200; ++trial) {
			Rational a = random_rational(rng, -9, 9, 12), b = random_rational(rng, -9, 9, 12);
			Rational c = a * b + a / (b == 0 ? Rational(1) : b) - b;
			CHECK(c.get_den() > 0);
			Integer g;
			mpz_gcd(g.get_mpz_t(), c.get_num().get_mpz_t(), c.get_den().get_mpz_t());
			CHECK(g == 1);
		}
	}
}
