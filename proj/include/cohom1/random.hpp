#pragma once

#include "cohom1/algebra.hpp"

#include <cstdint>
#include <random>

namespace cohom1 {

using Rng = std::mt19937_64;

inline long uniform_int(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

// Rational a/b with b in [1, max_den] and a/b in [lo, hi].
inline Rational random_rational(Rng& rng, long lo, long hi, long max_den = 7) {
	const long b = uniform_int(rng, 1, max_den);
	const long a = uniform_int(rng, lo * b, hi * b);
	Rational r(a, b);
	r.canonicalize();
	return r;
}

// Strictly positive rational in (0, hi].
inline Rational random_positive(Rng& rng, long hi, long max_den = 7) {
	const long b = uniform_int(rng, 1, max_den);
	const long a = uniform_int(rng, 1, hi * b);
	Rational r(a, b);
	r.canonicalize();
	return r;
}

}  // namespace cohom1
