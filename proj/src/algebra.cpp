#include "cohom1/algebra.hpp"

#include <cctype>

namespace cohom1 {

namespace {

bool all_digits(std::string_view s) {
	if (s.empty()) { return false; }
	for (char c : s) {
		if (!std::isdigit(static_cast<unsigned char>(c))) { return false; }
	}
	return true;
}

std::optional<Integer> parse_int(std::string_view s) {
	bool neg = false;
	if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
		neg = s[0] == '-';
		s.remove_prefix(1);
	}
	if (!all_digits(s)) { return std::nullopt; }
	Integer v(std::string(s), 10);
	return neg ? Integer(-v) : v;
}

std::optional<Rational> parse_decimal(std::string_view s) {
	bool neg = false;
	if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
		neg = s[0] == '-';
		s.remove_prefix(1);
	}
	long exp10 = 0;
	if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
		auto ev = parse_int(s.substr(e + 1));
		if (!ev || !ev->fits_slong_p()) { return std::nullopt; }
		exp10 = ev->get_si();
		s = s.substr(0, e);
	}
	std::string digits;
	if (auto dot = s.find('.'); dot != std::string_view::npos) {
		auto ip = s.substr(0, dot), fp = s.substr(dot + 1);
		if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) || (ip.empty() && fp.empty())) {
			return std::nullopt;
		}
		digits = std::string(ip) + std::string(fp);
		exp10 -= static_cast<long>(fp.size());
	} else {
		if (!all_digits(s)) { return std::nullopt; }
		digits = std::string(s);
	}
	if (exp10 > 4000 || exp10 < -4000) { return std::nullopt; }
	Rational r(Integer(digits, 10));
	Integer p;
	mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
	if (exp10 >= 0) {
		r *= p;
	} else {
		r /= p;
	}
	if (neg) { r = -r; }
	return r;
}

}  // namespace

std::optional<Rational> try_parse_rational(std::string_view s, bool allow_decimal) {
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) { s.remove_prefix(1); }
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) { s.remove_suffix(1); }
	if (s.empty()) { return std::nullopt; }
	if (auto slash = s.find('/'); slash != std::string_view::npos) {
		auto n = parse_int(s.substr(0, slash));
		auto d = parse_int(s.substr(slash + 1));
		if (!n || !d || sgn(*d) == 0) { return std::nullopt; }
		Rational r(*n, *d);
		r.canonicalize();
		return r;
	}
	if (auto n = parse_int(s)) { return Rational(*n); }
	if (allow_decimal) { return parse_decimal(s); }
	return std::nullopt;
}

Rational parse_rational(std::string_view s, bool allow_decimal) {
	auto r = try_parse_rational(s, allow_decimal);
	if (!r) {
		throw Error("not an exact rational: '" + std::string(s) + "'" +
		            (allow_decimal ? "" : " (use a/b notation)"));
	}
	return *r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational det(const QMatrix& L) {
	if (!L.square()) { throw DimensionMismatch("determinant of a non-square matrix"); }
	const std::size_t n = L.rows();
	if (n == 0) { return Rational(1); }
	std::vector<Integer> a(n * n);
	Rational scale(1);
	for (std::size_t i = 0; i < n; ++i) {
		Integer l(1);
		for (std::size_t j = 0; j < n; ++j) { mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), L(i, j).get_den_mpz_t()); }
		for (std::size_t j = 0; j < n; ++j) { a[i * n + j] = L(i, j).get_num() * (l / L(i, j).get_den()); }
		scale *= l;
	}
	auto at = [&](std::size_t i, std::size_t j) -> Integer& { return a[i * n + j]; };
	Integer prev(1);
	int sign = 1;
	for (std::size_t k = 0; k + 1 < n; ++k) {
		if (sgn(at(k, k)) == 0) {
			std::size_t p = k + 1;
			while (p < n && sgn(at(p, k)) == 0) { ++p; }
			if (p == n) { return Rational(0); }
			for (std::size_t j = 0; j < n; ++j) { std::swap(at(k, j), at(p, j)); }
			sign = -sign;
		}
		for (std::size_t i = k + 1; i < n; ++i) {
			for (std::size_t j = k + 1; j < n; ++j) {
				Integer v = at(i, j) * at(k, k) - at(i, k) * at(k, j);
				mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
				at(i, j) = v;
			}
			at(i, k) = 0;
		}
		prev = at(k, k);
	}
	Rational d(at(n - 1, n - 1) * sign);
	d /= scale;
	d.canonicalize();
	return d;
}

double det(const Matrix<double>& L) {
	if (!L.square()) { throw DimensionMismatch("determinant of a non-square matrix"); }
	Matrix<double> m = L;
	const std::size_t n = m.rows();
	double d = 1.0;
	for (std::size_t k = 0; k < n; ++k) {
		std::size_t p = k;
		for (std::size_t i = k + 1; i < n; ++i) {
			if (std::fabs(m(i, k)) > std::fabs(m(p, k))) { p = i; }
		}
		if (m(p, k) == 0.0) { return 0.0; }
		if (p != k) {
			for (std::size_t j = 0; j < n; ++j) { std::swap(m(k, j), m(p, j)); }
			d = -d;
		}
		d *= m(k, k);
		for (std::size_t i = k + 1; i < n; ++i) {
			double f = m(i, k) / m(k, k);
			for (std::size_t j = k; j < n; ++j) { m(i, j) -= f * m(k, j); }
		}
	}
	return d;
}

std::size_t rank(const QMatrix& m) { return rref(m).pivots.size(); }

namespace {
QMatrix stack(const std::vector<QVector>& vs, std::size_t n) {
	QMatrix m(vs.size(), n);
	for (std::size_t i = 0; i < vs.size(); ++i) {
		if (vs[i].size() != n) { throw DimensionMismatch("vectors of different lengths"); }
		for (std::size_t j = 0; j < n; ++j) { m(i, j) = vs[i][j]; }
	}
	return m;
}
}  // namespace

bool same_span(const std::vector<QVector>& a, const std::vector<QVector>& b) {
	std::size_t n = !a.empty() ? a[0].size() : (!b.empty() ? b[0].size() : 0);
	std::size_t ra = a.empty() ? 0 : rank(stack(a, n));
	std::size_t rb = b.empty() ? 0 : rank(stack(b, n));
	if (ra != rb) { return false; }
	if (ra == 0) { return true; }
	std::vector<QVector> both = a;
	both.insert(both.end(), b.begin(), b.end());
	return rank(stack(both, n)) == ra;
}

bool in_span(const QVector& v, const std::vector<QVector>& basis) {
	if (all_zero(v)) { return true; }
	if (basis.empty()) { return false; }
	std::vector<QVector> both = basis;
	both.push_back(v);
	return rank(stack(both, v.size())) == rank(stack(basis, v.size()));
}

}  // namespace cohom1
