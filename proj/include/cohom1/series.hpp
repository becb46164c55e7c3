#pragma once

#include "cohom1/algebra.hpp"

#include <cstddef>
#include <vector>

namespace cohom1 {

class OrderMismatch : public Error {
   public:
	OrderMismatch() : Error("series truncation orders differ") {}
};

class DivisionBySingularSeries : public Error {
   public:
	DivisionBySingularSeries() : Error("division by a series with vanishing constant term") {}
};

// Truncated power series sum_{k<=M} c_k t^k in plain coefficients.
template <class T>
class Series {
	std::vector<T> c_;

   public:
	Series() : c_(1, T(0)) {}
	explicit Series(std::size_t order) : c_(order + 1, T(0)) {}
	Series(std::size_t order, const T& constant) : c_(order + 1, T(0)) { c_[0] = constant; }
	explicit Series(std::vector<T> coeffs) : c_(std::move(coeffs)) {
		if (c_.empty()) { c_.push_back(T(0)); }
	}

	static Series variable(std::size_t order) {
		Series s(order);
		if (order >= 1) { s.c_[1] = T(1); }
		return s;
	}

	[[nodiscard]] std::size_t order() const { return c_.size() - 1; }
	[[nodiscard]] const std::vector<T>& coeffs() const { return c_; }
	T& operator[](std::size_t k) { return c_[k]; }
	const T& operator[](std::size_t k) const { return c_[k]; }

	[[nodiscard]] Series truncated(std::size_t order) const {
		std::vector<T> c(order + 1, T(0));
		for (std::size_t k = 0; k <= order && k < c_.size(); ++k) { c[k] = c_[k]; }
		return Series(std::move(c));
	}

	Series& operator+=(const Series& o) {
		same(o);
		for (std::size_t k = 0; k < c_.size(); ++k) { c_[k] += o.c_[k]; }
		return *this;
	}
	Series& operator-=(const Series& o) {
		same(o);
		for (std::size_t k = 0; k < c_.size(); ++k) { c_[k] -= o.c_[k]; }
		return *this;
	}
	Series& operator*=(const T& s) {
		for (auto& v : c_) { v *= s; }
		return *this;
	}
	Series operator-() const {
		Series r = *this;
		for (auto& v : r.c_) { v = -v; }
		return r;
	}

	friend Series operator+(Series a, const Series& b) { return a += b; }
	friend Series operator-(Series a, const Series& b) { return a -= b; }
	friend Series operator*(Series a, const T& s) { return a *= s; }
	friend Series operator*(const T& s, Series a) { return a *= s; }

	friend Series operator*(const Series& a, const Series& b) {
		a.same(b);
		const std::size_t n = a.c_.size();
		Series r(n - 1);
		for (std::size_t i = 0; i < n; ++i) {
			if (is_zero(a.c_[i])) { continue; }
			for (std::size_t j = 0; i + j < n; ++j) { r.c_[i + j] += a.c_[i] * b.c_[j]; }
		}
		return r;
	}

	// q with q*b = a through the truncation order.
	friend Series operator/(const Series& a, const Series& b) {
		a.same(b);
		if (is_zero(b.c_[0])) { throw DivisionBySingularSeries(); }
		const std::size_t n = a.c_.size();
		Series q(n - 1);
		for (std::size_t k = 0; k < n; ++k) {
			T acc = a.c_[k];
			for (std::size_t j = 1; j <= k; ++j) { acc -= b.c_[j] * q.c_[k - j]; }
			q.c_[k] = acc / b.c_[0];
		}
		return q;
	}

	friend bool operator==(const Series& a, const Series& b) { return a.c_ == b.c_; }

	// d/dt, keeping the truncation order (top coefficient becomes zero).
	[[nodiscard]] Series derivative() const {
		Series r(order());
		for (std::size_t k = 1; k < c_.size(); ++k) { r.c_[k - 1] = c_[k] * T(static_cast<long>(k)); }
		return r;
	}

	[[nodiscard]] T evaluate(const T& t) const {
		T acc(0);
		for (std::size_t k = c_.size(); k-- > 0;) { acc = acc * t + c_[k]; }
		return acc;
	}

   private:
	void same(const Series& o) const {
		if (o.c_.size() != c_.size()) { throw OrderMismatch(); }
	}
};

using RationalSeries = Series<Rational>;

template <class T>
Series<T> series_add(const Series<T>& a, const Series<T>& b) { return a + b; }
template <class T>
Series<T> series_mul(const Series<T>& a, const Series<T>& b) { return a * b; }
template <class T>
Series<T> series_div(const Series<T>& a, const Series<T>& b) { return a / b; }

}  // namespace cohom1
