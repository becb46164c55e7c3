#pragma once

#include "cohom1/algebra.hpp"
#include "cohom1/series.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cohom1 {

// t, x_i, y_i as in the singular IVP; z_i stands for a second derivative f_i'' in the
// Einstein residuals (there x_i = f_i and y_i = f_i').
enum class VarKind { T, X, Y, Z };
enum class Op { Const, Param, Var, Add, Sub, Mul, Div, Neg, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
	Op op = Op::Const;
	Rational value;
	std::string name;
	VarKind kind = VarKind::T;
	int index = 0;  // 0-based coordinate for X, Y, Z
	int exponent = 1;
	NodePtr a, b;
};

template <class T>
using Env = std::map<std::string, T>;
using ParamEnv = Env<Rational>;

Env<double> to_double_env(const ParamEnv& env);

class UnboundParameter : public Error {
   public:
	explicit UnboundParameter(const std::string& name) : Error("unbound parameter '" + name + "'") {}
};

class Expr {
	NodePtr n_;

   public:
	Expr();
	explicit Expr(NodePtr n) : n_(std::move(n)) {}
	Expr(const Rational& c);  // NOLINT(google-explicit-constructor)
	Expr(long c);             // NOLINT(google-explicit-constructor)

	static Expr constant(const Rational& c);
	static Expr param(const std::string& name);
	static Expr var(VarKind k, int index = 0);
	static Expr t() { return var(VarKind::T); }
	static Expr x(int i) { return var(VarKind::X, i); }
	static Expr y(int i) { return var(VarKind::Y, i); }
	static Expr z(int i) { return var(VarKind::Z, i); }

	[[nodiscard]] const Node& node() const { return *n_; }
	[[nodiscard]] const NodePtr& ptr() const { return n_; }
	[[nodiscard]] bool is_constant() const { return n_->op == Op::Const; }
	[[nodiscard]] bool is_zero() const { return n_->op == Op::Const && sgn(n_->value) == 0; }

	friend Expr operator+(const Expr& a, const Expr& b);
	friend Expr operator-(const Expr& a, const Expr& b);
	friend Expr operator*(const Expr& a, const Expr& b);
	friend Expr operator/(const Expr& a, const Expr& b);
	friend Expr operator-(const Expr& a);
	friend Expr pow(const Expr& a, int e);

	Expr& operator+=(const Expr& o) { return *this = *this + o; }
	Expr& operator-=(const Expr& o) { return *this = *this - o; }
	Expr& operator*=(const Expr& o) { return *this = *this * o; }
};

std::string to_string(const Expr& e);
std::set<std::string> parameters(const Expr& e);
bool depends_on(const Expr& e, VarKind k, int index = -1);

// Replaces every parameter bound in env by its value and folds constant subtrees.
Expr substitute(const Expr& e, const ParamEnv& env);
// Replaces one variable by an expression.
Expr substitute(const Expr& e, VarKind k, int index, const Expr& replacement);

// Expansion of a parameter-free expression whose divisors are single monomials. Keys are
// exponent vectors ordered (t, x_1..x_s, y_1..y_s, z_1..z_s); zero coefficients are
// dropped. Returns nullopt when a divisor is not a monomial or a parameter occurs.
using LaurentPoly = std::map<std::vector<int>, Rational>;
std::optional<LaurentPoly> to_laurent(const Expr& e, int summands);

class ParseError : public Error {
   public:
	ParseError(std::size_t pos, const std::string& msg);
	std::size_t position;
};

struct ParseOptions {
	int summands = 5;      // valid coordinate indices 1..summands
	bool allow_z = false;  // accept z1..zs
};

Expr parse_expr(std::string_view src, const ParseOptions& opts = {});

// ---------------------------------------------------------------------------
// Generic evaluation. Leaf returns values for Const, Param and Var nodes; interior
// nodes use the arithmetic of V.

inline void check_divisor(const Rational& v) {
	if (is_zero(v)) { throw DivisionByZero(); }
}
inline void check_divisor(double) {}
template <class T>
void check_divisor(const Series<T>&) {}

template <class V, class Leaf>
V evaluate(const Node& n, Leaf& leaf) {
	switch (n.op) {
		case Op::Const:
		case Op::Param:
		case Op::Var:
			return leaf(n);
		case Op::Add: {
			V l = evaluate<V>(*n.a, leaf);
			V r = evaluate<V>(*n.b, leaf);
			return V(l + r);
		}
		case Op::Sub: {
			V l = evaluate<V>(*n.a, leaf);
			V r = evaluate<V>(*n.b, leaf);
			return V(l - r);
		}
		case Op::Mul: {
			V l = evaluate<V>(*n.a, leaf);
			V r = evaluate<V>(*n.b, leaf);
			return V(l * r);
		}
		case Op::Div: {
			V l = evaluate<V>(*n.a, leaf);
			V r = evaluate<V>(*n.b, leaf);
			check_divisor(r);
			return V(l / r);
		}
		case Op::Neg: {
			V l = evaluate<V>(*n.a, leaf);
			return V(-l);
		}
		case Op::Pow: {
			V base = evaluate<V>(*n.a, leaf);
			V acc = base;
			for (int k = 1; k < n.exponent; ++k) { acc = V(acc * base); }
			return acc;
		}
	}
	throw Error("corrupt expression node");
}

template <class T>
const T& lookup_param(const Env<T>& env, const std::string& name) {
	auto it = env.find(name);
	if (it == env.end()) { throw UnboundParameter(name); }
	return it->second;
}

// Point evaluation over T in {Rational, double}.
template <class T>
T eval_point(const Expr& e, const Env<T>& env, const T& t, const Vector<T>& x, const Vector<T>& y,
             const Vector<T>* z = nullptr) {
	auto leaf = [&](const Node& n) -> T {
		switch (n.op) {
			case Op::Const:
				return from_rational<T>(n.value);
			case Op::Param:
				return lookup_param(env, n.name);
			default:
				break;
		}
		switch (n.kind) {
			case VarKind::T:
				return t;
			case VarKind::X:
				return x.at(static_cast<std::size_t>(n.index));
			case VarKind::Y:
				return y.at(static_cast<std::size_t>(n.index));
			case VarKind::Z:
				if (z == nullptr) { throw Error("expression refers to z but no values were supplied"); }
				return z->at(static_cast<std::size_t>(n.index));
		}
		throw Error("corrupt variable node");
	};
	return evaluate<T>(e.node(), leaf);
}

// Composition with truncated series; all series share one truncation order.
template <class T>
Series<T> eval_series(const Expr& e, const Env<T>& env, const std::vector<Series<T>>& x,
                      const std::vector<Series<T>>& y, const Series<T>& t) {
	const std::size_t M = t.order();
	auto leaf = [&](const Node& n) -> Series<T> {
		switch (n.op) {
			case Op::Const:
				return Series<T>(M, from_rational<T>(n.value));
			case Op::Param:
				return Series<T>(M, lookup_param(env, n.name));
			default:
				break;
		}
		switch (n.kind) {
			case VarKind::T:
				return t;
			case VarKind::X:
				return x.at(static_cast<std::size_t>(n.index));
			case VarKind::Y:
				return y.at(static_cast<std::size_t>(n.index));
			case VarKind::Z:
				throw Error("z variables cannot be composed with series");
		}
		throw Error("corrupt variable node");
	};
	return evaluate<Series<T>>(e.node(), leaf);
}

// Forward-mode value/derivative pair with a dense tangent vector.
template <class T>
struct Dual {
	T v;
	std::vector<T> d;

	Dual() : v(0) {}
	Dual(T value, std::size_t n) : v(std::move(value)), d(n, T(0)) {}

	friend Dual operator+(const Dual& a, const Dual& b) {
		Dual r(a.v + b.v, a.d.size());
		for (std::size_t i = 0; i < r.d.size(); ++i) { r.d[i] = a.d[i] + b.d[i]; }
		return r;
	}
	friend Dual operator-(const Dual& a, const Dual& b) {
		Dual r(a.v - b.v, a.d.size());
		for (std::size_t i = 0; i < r.d.size(); ++i) { r.d[i] = a.d[i] - b.d[i]; }
		return r;
	}
	friend Dual operator*(const Dual& a, const Dual& b) {
		Dual r(a.v * b.v, a.d.size());
		for (std::size_t i = 0; i < r.d.size(); ++i) { r.d[i] = a.d[i] * b.v + a.v * b.d[i]; }
		return r;
	}
	friend Dual operator/(const Dual& a, const Dual& b) {
		T q = a.v / b.v;
		Dual r(q, a.d.size());
		for (std::size_t i = 0; i < r.d.size(); ++i) { r.d[i] = (a.d[i] - q * b.d[i]) / b.v; }
		return r;
	}
	Dual operator-() const {
		Dual r(-v, d.size());
		for (std::size_t i = 0; i < d.size(); ++i) { r.d[i] = -d[i]; }
		return r;
	}
};

template <class T>
void check_divisor(const Dual<T>& v) {
	check_divisor(v.v);
}

enum class Block { X, Y };

// Matrix of first partials d e_i / d(x_j or y_j) at a point, by forward differentiation.
template <class T>
Matrix<T> jacobian_at(const std::vector<Expr>& es, Block wrt, const Env<T>& env, const T& t, const Vector<T>& x,
                      const Vector<T>& y) {
	const std::size_t n = wrt == Block::X ? x.size() : y.size();
	auto leaf = [&](const Node& nd) -> Dual<T> {
		switch (nd.op) {
			case Op::Const:
				return Dual<T>(from_rational<T>(nd.value), n);
			case Op::Param:
				return Dual<T>(lookup_param(env, nd.name), n);
			default:
				break;
		}
		const auto i = static_cast<std::size_t>(nd.index);
		switch (nd.kind) {
			case VarKind::T:
				return Dual<T>(t, n);
			case VarKind::X: {
				Dual<T> r(x.at(i), n);
				if (wrt == Block::X) { r.d[i] = T(1); }
				return r;
			}
			case VarKind::Y: {
				Dual<T> r(y.at(i), n);
				if (wrt == Block::Y) { r.d[i] = T(1); }
				return r;
			}
			case VarKind::Z:
				throw Error("z variables are not supported in Jacobians");
		}
		throw Error("corrupt variable node");
	};
	Matrix<T> J(es.size(), n);
	for (std::size_t i = 0; i < es.size(); ++i) {
		Dual<T> r = evaluate<Dual<T>>(es[i].node(), leaf);
		for (std::size_t j = 0; j < n; ++j) { J(i, j) = r.d[j]; }
	}
	return J;
}

// Flattened register program for repeated double evaluation of several expressions.
// Parameters are bound at compile time. Not safe for concurrent use of one instance
// with a shared scratch buffer; each caller supplies its own scratch.
class Program {
   public:
	Program() = default;
	Program(const std::vector<Expr>& outputs, const Env<double>& env);

	void run(double t, const double* x, const double* y, const double* z, double* out,
	         std::vector<double>& scratch) const;
	[[nodiscard]] std::size_t outputs() const { return outs_.size(); }

   private:
	struct Ins {
		Op op;
		VarKind kind;
		int index;
		int exponent;
		int a, b;
		double value;
	};
	std::vector<Ins> code_;
	std::vector<int> outs_;
	int compile(const NodePtr& n, const Env<double>& env, std::map<const Node*, int>& memo);
};

}  // namespace cohom1
