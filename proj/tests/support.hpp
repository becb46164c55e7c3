#pragma once

#include "cohom1/einstein.hpp"
#include "cohom1/formal.hpp"
#include "cohom1/models.hpp"
#include "cohom1/random.hpp"

#include <doctest.h>

#include <string>
#include <utility>
#include <vector>

namespace testgen {

using namespace cohom1;

inline Rational q(long a, long b = 1) {
	Rational r(a, b);
	r.canonicalize();
	return r;
}

inline QVector qv(std::initializer_list<Rational> xs) { return QVector(xs); }

inline QMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c, long lo = -5, long hi = 5) {
	QMatrix m(r, c);
	for (std::size_t i = 0; i < r; ++i) {
		for (std::size_t j = 0; j < c; ++j) { m(i, j) = random_rational(rng, lo, hi, 4); }
	}
	return m;
}

inline QVector random_vector(Rng& rng, std::size_t n, long lo = -5, long hi = 5) {
	QVector v(n);
	for (auto& x : v) { x = random_rational(rng, lo, hi, 4); }
	return v;
}

inline QVector random_positive_vector(Rng& rng, std::size_t n, long hi = 4) {
	QVector v(n);
	for (auto& x : v) { x = random_positive(rng, hi, 5); }
	return v;
}

// Square matrix of prescribed rank as a product of random n x r and r x n factors.
inline QMatrix random_rank_matrix(Rng& rng, std::size_t n, std::size_t r) {
	if (r == 0) { return QMatrix(n, n); }
	return random_matrix(rng, n, r) * random_matrix(rng, r, n);
}

inline RationalSeries random_series(Rng& rng, std::size_t order) {
	RationalSeries s(order);
	for (std::size_t k = 0; k <= order; ++k) { s[k] = random_rational(rng, -4, 4, 5); }
	return s;
}

inline RationalSeries random_unit_series(Rng& rng, std::size_t order) {
	RationalSeries s = random_series(rng, order);
	while (is_zero(s[0])) { s[0] = random_rational(rng, -4, 4, 5); }
	return s;
}

// lambda and every slot of the endpoint drawn positive.
inline ParamEnv random_endpoint_env(Rng& rng, const ModelSpec& spec, int endpoint) {
	ParamEnv env;
	env["lambda"] = random_positive(rng, 4, 5);
	for (const auto& slot : boundary_conditions(spec, endpoint).slots()) { env[slot] = random_positive(rng, 3, 5); }
	return env;
}

// Integer parameters sampled from the admissible range of each family.
inline ParamEnv random_integers(Rng& rng, ModelId id) {
	ParamEnv p;
	switch (id) {
		case ModelId::A: {
			const long b = uniform_int(rng, 1, 4);
			p["q"] = Rational(b);
			p["p"] = Rational(uniform_int(rng, std::max(b, 2L), 6));
			break;
		}
		case ModelId::B:
			p["n"] = Rational(uniform_int(rng, 2, 7));
			break;
		case ModelId::C:
			p["n"] = Rational(uniform_int(rng, 3, 8));
			break;
		default:
			break;
	}
	return p;
}

struct EndpointCase {
	ModelId id;
	int endpoint;
	std::string label;
};

inline std::vector<EndpointCase> all_endpoints() {
	std::vector<EndpointCase> out;
	for (ModelId id : all_models()) {
		for (int e = 0; e < 2; ++e) { out.push_back({id, e, std::string(1, model_letter(id)) + "@" + std::to_string(e)}); }
	}
	return out;
}

inline ModelSpec model(ModelId id) { return get_model(id, default_integers(id)); }

}  // namespace testgen
