#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace cohom1 {

using Rational = mpq_class;
using Integer = mpz_class;

class Error : public std::runtime_error {
   public:
	using std::runtime_error::runtime_error;
};

class DivisionByZero : public Error {
   public:
	DivisionByZero() : Error("division by zero") {}
	explicit DivisionByZero(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
   public:
	using Error::Error;
};

// Accepts "a", "-a", "a/b". Decimal notation is rejected unless allow_decimal is set,
// in which case "1.25" and "1e-3" are converted exactly.
Rational parse_rational(std::string_view s, bool allow_decimal = false);
std::optional<Rational> try_parse_rational(std::string_view s, bool allow_decimal = false);
std::string to_string(const Rational& r);

// Scalar helpers shared by the exact and floating-point code paths.
inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double v) { return v; }

template <class T>
T from_rational(const Rational& r);
template <>
inline Rational from_rational<Rational>(const Rational& r) { return r; }
template <>
inline double from_rational<double>(const Rational& r) { return r.get_d(); }

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }
inline bool is_zero(double v) { return v == 0.0; }
inline double magnitude(const Rational& r) { return std::fabs(r.get_d()); }
inline double magnitude(double v) { return std::fabs(v); }

template <class T>
using Vector = std::vector<T>;
using QVector = Vector<Rational>;

template <class T>
class Matrix {
	std::size_t r_ = 0, c_ = 0;
	std::vector<T> a_;

   public:
	Matrix() = default;
	Matrix(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), a_(rows * cols, T(0)) {}
	Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries) : r_(rows), c_(cols), a_(std::move(entries)) {
		if (a_.size() != r_ * c_) { throw DimensionMismatch("matrix entry count does not match shape"); }
	}

	static Matrix identity(std::size_t n) {
		Matrix m(n, n);
		for (std::size_t i = 0; i < n; ++i) { m(i, i) = T(1); }
		return m;
	}

	[[nodiscard]] std::size_t rows() const { return r_; }
	[[nodiscard]] std::size_t cols() const { return c_; }
	[[nodiscard]] bool square() const { return r_ == c_; }

	T& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
	const T& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

	[[nodiscard]] Vector<T> row(std::size_t i) const { return Vector<T>(a_.begin() + i * c_, a_.begin() + (i + 1) * c_); }

	Matrix& operator+=(const Matrix& o) {
		check_same(o);
		for (std::size_t k = 0; k < a_.size(); ++k) { a_[k] += o.a_[k]; }
		return *this;
	}
	Matrix& operator-=(const Matrix& o) {
		check_same(o);
		for (std::size_t k = 0; k < a_.size(); ++k) { a_[k] -= o.a_[k]; }
		return *this;
	}
	Matrix& operator*=(const T& s) {
		for (auto& v : a_) { v *= s; }
		return *this;
	}
	friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
	friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
	friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
	friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

	friend Matrix operator*(const Matrix& a, const Matrix& b) {
		if (a.c_ != b.r_) { throw DimensionMismatch("matrix product shape mismatch"); }
		Matrix m(a.r_, b.c_);
		for (std::size_t i = 0; i < a.r_; ++i) {
			for (std::size_t k = 0; k < a.c_; ++k) {
				if (is_zero(a(i, k))) { continue; }
				for (std::size_t j = 0; j < b.c_; ++j) { m(i, j) += a(i, k) * b(k, j); }
			}
		}
		return m;
	}

	friend Vector<T> operator*(const Matrix& a, const Vector<T>& v) {
		if (a.c_ != v.size()) { throw DimensionMismatch("matrix-vector shape mismatch"); }
		Vector<T> out(a.r_, T(0));
		for (std::size_t i = 0; i < a.r_; ++i) {
			for (std::size_t j = 0; j < a.c_; ++j) { out[i] += a(i, j) * v[j]; }
		}
		return out;
	}

	friend bool operator==(const Matrix& a, const Matrix& b) { return a.r_ == b.r_ && a.c_ == b.c_ && a.a_ == b.a_; }

   private:
	void check_same(const Matrix& o) const {
		if (r_ != o.r_ || c_ != o.c_) { throw DimensionMismatch("matrix shapes differ"); }
	}
};

using QMatrix = Matrix<Rational>;

template <class T>
Vector<T> operator+(Vector<T> a, const Vector<T>& b) {
	if (a.size() != b.size()) { throw DimensionMismatch("vector lengths differ"); }
	for (std::size_t i = 0; i < a.size(); ++i) { a[i] += b[i]; }
	return a;
}
template <class T>
Vector<T> operator-(Vector<T> a, const Vector<T>& b) {
	if (a.size() != b.size()) { throw DimensionMismatch("vector lengths differ"); }
	for (std::size_t i = 0; i < a.size(); ++i) { a[i] -= b[i]; }
	return a;
}
template <class T>
Vector<T> scaled(Vector<T> a, const std::type_identity_t<T>& s) {
	for (auto& v : a) { v *= s; }
	return a;
}
template <class T>
bool all_zero(const Vector<T>& v) {
	for (const auto& x : v) {
		if (!is_zero(x)) { return false; }
	}
	return true;
}

// Reduced row echelon form. For floating point input an entry counts as zero when its
// magnitude is below rel_tol times the largest entry of its column at the start.
template <class T>
struct Echelon {
	Matrix<T> r;
	std::vector<std::size_t> pivots;
};

template <class T>
Echelon<T> rref(Matrix<T> m, double rel_tol = 1e-12) {
	const std::size_t rows = m.rows(), cols = m.cols();
	std::vector<double> colscale(cols, 0.0);
	for (std::size_t j = 0; j < cols; ++j) {
		for (std::size_t i = 0; i < rows; ++i) { colscale[j] = std::max(colscale[j], magnitude(m(i, j))); }
	}
	auto negligible = [&](const T& v, std::size_t j) {
		if constexpr (std::is_same_v<T, Rational>) {
			return is_zero(v);
		} else {
			return magnitude(v) <= rel_tol * std::max(colscale[j], 1e-300);
		}
	};
	Echelon<T> e;
	std::size_t lead = 0;
	for (std::size_t j = 0; j < cols && lead < rows; ++j) {
		std::size_t best = rows;
		double bestmag = -1.0;
		for (std::size_t i = lead; i < rows; ++i) {
			if (negligible(m(i, j), j)) { continue; }
			if constexpr (std::is_same_v<T, Rational>) {
				best = i;
				break;
			} else {
				if (magnitude(m(i, j)) > bestmag) {
					bestmag = magnitude(m(i, j));
					best = i;
				}
			}
		}
		if (best == rows) {
			for (std::size_t i = lead; i < rows; ++i) { m(i, j) = T(0); }
			continue;
		}
		if (best != lead) {
			for (std::size_t k = 0; k < cols; ++k) { std::swap(m(best, k), m(lead, k)); }
		}
		T piv = m(lead, j);
		for (std::size_t k = j; k < cols; ++k) { m(lead, k) /= piv; }
		for (std::size_t i = 0; i < rows; ++i) {
			if (i == lead || is_zero(m(i, j))) { continue; }
			T f = m(i, j);
			for (std::size_t k = j; k < cols; ++k) { m(i, k) -= f * m(lead, k); }
			m(i, j) = T(0);
		}
		e.pivots.push_back(j);
		++lead;
	}
	e.r = std::move(m);
	return e;
}

template <class T>
struct AffineSolution {
	Vector<T> particular;
	std::vector<Vector<T>> kernel_basis;
};

// Solves L v = d. Free variables are set to zero in the particular solution and the
// kernel basis has a 1 in one free column and 0 in the others (reduced echelon basis).
// Returns nullopt when d is outside the range of L.
template <class T>
std::optional<AffineSolution<T>> solve_affine(const Matrix<T>& L, const Vector<T>& d, double rel_tol = 1e-12) {
	if (!L.square()) { throw DimensionMismatch("solve_affine expects a square matrix"); }
	if (d.size() != L.rows()) { throw DimensionMismatch("right-hand side length mismatch"); }
	const std::size_t n = L.rows();
	Matrix<T> aug(n, n + 1);
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = 0; j < n; ++j) { aug(i, j) = L(i, j); }
		aug(i, n) = d[i];
	}
	auto e = rref(aug, rel_tol);
	if (!e.pivots.empty() && e.pivots.back() == n) { return std::nullopt; }
	if constexpr (!std::is_same_v<T, Rational>) {
		double scale = 0.0;
		for (const auto& v : d) { scale = std::max(scale, magnitude(v)); }
		for (std::size_t i = e.pivots.size(); i < n; ++i) {
			if (magnitude(e.r(i, n)) > 1e-9 * std::max(scale, 1.0)) { return std::nullopt; }
		}
	}
	AffineSolution<T> out;
	out.particular.assign(n, T(0));
	std::vector<bool> is_pivot(n, false);
	for (std::size_t k = 0; k < e.pivots.size(); ++k) {
		is_pivot[e.pivots[k]] = true;
		out.particular[e.pivots[k]] = e.r(k, n);
	}
	for (std::size_t j = 0; j < n; ++j) {
		if (is_pivot[j]) { continue; }
		Vector<T> k(n, T(0));
		k[j] = T(1);
		for (std::size_t r = 0; r < e.pivots.size(); ++r) { k[e.pivots[r]] = -e.r(r, j); }
		out.kernel_basis.push_back(std::move(k));
	}
	return out;
}

// Unique solution of an invertible system; throws when L is singular.
template <class T>
Vector<T> solve_unique(const Matrix<T>& L, const Vector<T>& d, double rel_tol = 1e-12) {
	auto s = solve_affine(L, d, rel_tol);
	if (!s || !s->kernel_basis.empty()) { throw Error("singular linear operator"); }
	return s->particular;
}

// Exact determinant by fraction-free (Bareiss) elimination after clearing row denominators.
Rational det(const QMatrix& L);
double det(const Matrix<double>& L);

std::size_t rank(const QMatrix& m);
// Exact test that two families of vectors span the same subspace.
bool same_span(const std::vector<QVector>& a, const std::vector<QVector>& b);
bool in_span(const QVector& v, const std::vector<QVector>& basis);

}  // namespace cohom1
