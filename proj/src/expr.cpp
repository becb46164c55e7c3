#include "cohom1/expr.hpp"

#include <cctype>
#include <sstream>

namespace cohom1 {

Env<double> to_double_env(const ParamEnv& env) {
	Env<double> out;
	for (const auto& [k, v] : env) { out[k] = v.get_d(); }
	return out;
}

namespace {

NodePtr make_const(const Rational& c) {
	auto n = std::make_shared<Node>();
	n->op = Op::Const;
	n->value = c;
	return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
	auto n = std::make_shared<Node>();
	n->op = op;
	n->a = std::move(a);
	n->b = std::move(b);
	return n;
}

bool is_const(const NodePtr& n, long v) { return n->op == Op::Const && n->value == v; }

}  // namespace

Expr::Expr() : n_(make_const(Rational(0))) {}
Expr::Expr(const Rational& c) : n_(make_const(c)) {}
Expr::Expr(long c) : n_(make_const(Rational(c))) {}

Expr Expr::constant(const Rational& c) { return Expr(make_const(c)); }

Expr Expr::param(const std::string& name) {
	auto n = std::make_shared<Node>();
	n->op = Op::Param;
	n->name = name;
	return Expr(n);
}

Expr Expr::var(VarKind k, int index) {
	auto n = std::make_shared<Node>();
	n->op = Op::Var;
	n->kind = k;
	n->index = k == VarKind::T ? 0 : index;
	return Expr(n);
}

Expr operator+(const Expr& a, const Expr& b) {
	if (a.is_constant() && b.is_constant()) { return Expr::constant(a.node().value + b.node().value); }
	if (a.is_zero()) { return b; }
	if (b.is_zero()) { return a; }
	return Expr(make_binary(Op::Add, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a, const Expr& b) {
	if (a.is_constant() && b.is_constant()) { return Expr::constant(a.node().value - b.node().value); }
	if (b.is_zero()) { return a; }
	if (a.is_zero()) { return -b; }
	return Expr(make_binary(Op::Sub, a.ptr(), b.ptr()));
}

Expr operator*(const Expr& a, const Expr& b) {
	if (a.is_constant() && b.is_constant()) { return Expr::constant(a.node().value * b.node().value); }
	if (a.is_zero() || b.is_zero()) { return Expr(0L); }
	if (is_const(a.ptr(), 1)) { return b; }
	if (is_const(b.ptr(), 1)) { return a; }
	return Expr(make_binary(Op::Mul, a.ptr(), b.ptr()));
}

Expr operator/(const Expr& a, const Expr& b) {
	if (b.is_zero()) { throw DivisionByZero("division by the zero expression"); }
	if (a.is_constant() && b.is_constant()) { return Expr::constant(a.node().value / b.node().value); }
	if (a.is_zero()) { return Expr(0L); }
	if (is_const(b.ptr(), 1)) { return a; }
	return Expr(make_binary(Op::Div, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a) {
	if (a.is_constant()) { return Expr::constant(-a.node().value); }
	if (a.node().op == Op::Neg) { return Expr(a.node().a); }
	auto n = std::make_shared<Node>();
	n->op = Op::Neg;
	n->a = a.ptr();
	return Expr(n);
}

Expr pow(const Expr& a, int e) {
	if (e < 0) { throw Error("negative exponents are not supported"); }
	if (e == 0) { return Expr(1L); }
	if (e == 1) { return a; }
	if (a.is_constant()) {
		Rational r(1);
		for (int k = 0; k < e; ++k) { r *= a.node().value; }
		return Expr::constant(r);
	}
	auto n = std::make_shared<Node>();
	n->op = Op::Pow;
	n->a = a.ptr();
	n->exponent = e;
	return Expr(n);
}

namespace {

int precedence(const Node& n) {
	switch (n.op) {
		case Op::Add:
		case Op::Sub:
			return 1;
		case Op::Mul:
		case Op::Div:
			return 2;
		case Op::Neg:
			return 3;
		case Op::Pow:
			return 4;
		case Op::Const:
			if (sgn(n.value) < 0) { return 3; }
			return n.value.get_den() == 1 ? 5 : 2;
		default:
			return 5;
	}
}

void print(std::ostream& os, const Node& n, int min_prec);

void print_child(std::ostream& os, const Node& n, int min_prec) {
	if (precedence(n) < min_prec) {
		os << '(';
		print(os, n, 0);
		os << ')';
	} else {
		print(os, n, min_prec);
	}
}

void print(std::ostream& os, const Node& n, int) {
	switch (n.op) {
		case Op::Const:
			os << n.value.get_str();
			return;
		case Op::Param:
			os << n.name;
			return;
		case Op::Var:
			switch (n.kind) {
				case VarKind::T:
					os << 't';
					return;
				case VarKind::X:
					os << 'x' << n.index + 1;
					return;
				case VarKind::Y:
					os << 'y' << n.index + 1;
					return;
				case VarKind::Z:
					os << 'z' << n.index + 1;
					return;
			}
			return;
		case Op::Add:
			print_child(os, *n.a, 1);
			os << " + ";
			print_child(os, *n.b, 1);
			return;
		case Op::Sub:
			print_child(os, *n.a, 1);
			os << " - ";
			print_child(os, *n.b, 2);
			return;
		case Op::Mul:
			print_child(os, *n.a, 2);
			os << '*';
			print_child(os, *n.b, 3);
			return;
		case Op::Div:
			print_child(os, *n.a, 2);
			os << '/';
			print_child(os, *n.b, 3);
			return;
		case Op::Neg:
			os << '-';
			print_child(os, *n.a, 3);
			return;
		case Op::Pow:
			print_child(os, *n.a, 5);
			os << '^' << n.exponent;
			return;
	}
}

void collect_params(const Node& n, std::set<std::string>& out) {
	if (n.op == Op::Param) { out.insert(n.name); }
	if (n.a) { collect_params(*n.a, out); }
	if (n.b) { collect_params(*n.b, out); }
}

bool has_var(const Node& n, VarKind k, int index) {
	if (n.op == Op::Var && n.kind == k && (index < 0 || n.index == index)) { return true; }
	return (n.a && has_var(*n.a, k, index)) || (n.b && has_var(*n.b, k, index));
}

template <class F>
Expr rebuild(const Expr& e, F& leaf) {
	const Node& n = e.node();
	switch (n.op) {
		case Op::Const:
		case Op::Param:
		case Op::Var:
			return leaf(e);
		case Op::Add:
			return rebuild(Expr(n.a), leaf) + rebuild(Expr(n.b), leaf);
		case Op::Sub:
			return rebuild(Expr(n.a), leaf) - rebuild(Expr(n.b), leaf);
		case Op::Mul:
			return rebuild(Expr(n.a), leaf) * rebuild(Expr(n.b), leaf);
		case Op::Div:
			return rebuild(Expr(n.a), leaf) / rebuild(Expr(n.b), leaf);
		case Op::Neg:
			return -rebuild(Expr(n.a), leaf);
		case Op::Pow:
			return pow(rebuild(Expr(n.a), leaf), n.exponent);
	}
	throw Error("corrupt expression node");
}

}  // namespace

std::string to_string(const Expr& e) {
	std::ostringstream os;
	print(os, e.node(), 0);
	return os.str();
}

std::set<std::string> parameters(const Expr& e) {
	std::set<std::string> out;
	collect_params(e.node(), out);
	return out;
}

bool depends_on(const Expr& e, VarKind k, int index) { return has_var(e.node(), k, index); }

Expr substitute(const Expr& e, const ParamEnv& env) {
	auto leaf = [&](const Expr& l) -> Expr {
		if (l.node().op == Op::Param) {
			if (auto it = env.find(l.node().name); it != env.end()) { return Expr::constant(it->second); }
		}
		return l;
	};
	return rebuild(e, leaf);
}

Expr substitute(const Expr& e, VarKind k, int index, const Expr& replacement) {
	auto leaf = [&](const Expr& l) -> Expr {
		const Node& n = l.node();
		if (n.op == Op::Var && n.kind == k && (k == VarKind::T || n.index == index)) { return replacement; }
		return l;
	};
	return rebuild(e, leaf);
}

// ---------------------------------------------------------------------------

ParseError::ParseError(std::size_t pos, const std::string& msg)
    : Error("parse error at position " + std::to_string(pos) + ": " + msg), position(pos) {}

namespace {

class Parser {
	std::string_view s_;
	std::size_t p_ = 0;
	ParseOptions o_;

   public:
	Parser(std::string_view s, const ParseOptions& o) : s_(s), o_(o) {}

	Expr parse() {
		Expr e = expression();
		skip();
		if (p_ != s_.size()) { throw ParseError(p_, std::string("unexpected '") + s_[p_] + "'"); }
		return e;
	}

   private:
	void skip() {
		while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) { ++p_; }
	}
	bool accept(char c) {
		skip();
		if (p_ < s_.size() && s_[p_] == c) {
			++p_;
			return true;
		}
		return false;
	}

	Expr expression() {
		Expr e = term();
		for (;;) {
			if (accept('+')) {
				e = e + term();
			} else if (accept('-')) {
				e = e - term();
			} else {
				return e;
			}
		}
	}

	Expr term() {
		Expr e = unary();
		for (;;) {
			if (accept('*')) {
				e = e * unary();
			} else if (accept('/')) {
				std::size_t at = p_;
				Expr d = unary();
				if (d.is_zero()) { throw ParseError(at, "division by zero"); }
				e = e / d;
			} else {
				return e;
			}
		}
	}

	Expr unary() {
		if (accept('-')) { return -unary(); }
		if (accept('+')) { return unary(); }
		return power();
	}

	Expr power() {
		Expr base = primary();
		if (accept('^')) {
			skip();
			bool paren = accept('(');
			skip();
			std::size_t start = p_;
			while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) { ++p_; }
			if (start == p_) { throw ParseError(start, "exponent must be a non-negative integer literal"); }
			int e = std::stoi(std::string(s_.substr(start, p_ - start)));
			if (paren && !accept(')')) { throw ParseError(p_, "expected ')'"); }
			return pow(base, e);
		}
		return base;
	}

	Expr primary() {
		skip();
		if (p_ >= s_.size()) { throw ParseError(p_, "unexpected end of expression"); }
		char c = s_[p_];
		if (c == '(') {
			++p_;
			Expr e = expression();
			if (!accept(')')) { throw ParseError(p_, "expected ')'"); }
			return e;
		}
		if (std::isdigit(static_cast<unsigned char>(c))) {
			std::size_t start = p_;
			while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) { ++p_; }
			if (p_ < s_.size() && (s_[p_] == '.' || s_[p_] == 'e' || s_[p_] == 'E')) {
				throw ParseError(p_, "decimal literals are not allowed; write a/b");
			}
			return Expr::constant(Rational(Integer(std::string(s_.substr(start, p_ - start)), 10)));
		}
		if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
			std::size_t start = p_;
			while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) { ++p_; }
			std::string id(s_.substr(start, p_ - start));
			return identifier(id, start);
		}
		throw ParseError(p_, std::string("unexpected '") + c + "'");
	}

	Expr identifier(const std::string& id, std::size_t at) {
		if (id == "t") { return Expr::t(); }
		if (id.size() >= 2 && (id[0] == 'x' || id[0] == 'y' || id[0] == 'z')) {
			bool digits = true;
			for (std::size_t k = 1; k < id.size(); ++k) { digits = digits && std::isdigit(static_cast<unsigned char>(id[k])); }
			if (digits) {
				int i = std::stoi(id.substr(1));
				if (i < 1 || i > o_.summands) {
					throw ParseError(at, "coordinate index out of range in '" + id + "'");
				}
				if (id[0] == 'z' && !o_.allow_z) { throw ParseError(at, "second-derivative variable '" + id + "' not allowed here"); }
				VarKind k = id[0] == 'x' ? VarKind::X : (id[0] == 'y' ? VarKind::Y : VarKind::Z);
				return Expr::var(k, i - 1);
			}
		}
		return Expr::param(id);
	}
};

}  // namespace

Expr parse_expr(std::string_view src, const ParseOptions& opts) { return Parser(src, opts).parse(); }

// ---------------------------------------------------------------------------

Program::Program(const std::vector<Expr>& outputs, const Env<double>& env) {
	std::map<const Node*, int> memo;
	for (const auto& e : outputs) { outs_.push_back(compile(e.ptr(), env, memo)); }
}

int Program::compile(const NodePtr& n, const Env<double>& env, std::map<const Node*, int>& memo) {
	if (auto it = memo.find(n.get()); it != memo.end()) { return it->second; }
	Ins ins{n->op, n->kind, n->index, n->exponent, -1, -1, 0.0};
	switch (n->op) {
		case Op::Const:
			ins.value = n->value.get_d();
			break;
		case Op::Param:
			ins.op = Op::Const;
			ins.value = lookup_param(env, n->name);
			break;
		case Op::Var:
			break;
		default:
			ins.a = compile(n->a, env, memo);
			if (n->b) { ins.b = compile(n->b, env, memo); }
			break;
	}
	code_.push_back(ins);
	int slot = static_cast<int>(code_.size()) - 1;
	memo[n.get()] = slot;
	return slot;
}

void Program::run(double t, const double* x, const double* y, const double* z, double* out,
                  std::vector<double>& r) const {
	r.resize(code_.size());
	for (std::size_t k = 0; k < code_.size(); ++k) {
		const Ins& c = code_[k];
		switch (c.op) {
			case Op::Const:
				r[k] = c.value;
				break;
			case Op::Var:
				switch (c.kind) {
					case VarKind::T:
						r[k] = t;
						break;
					case VarKind::X:
						r[k] = x[c.index];
						break;
					case VarKind::Y:
						r[k] = y[c.index];
						break;
					case VarKind::Z:
						r[k] = z[c.index];
						break;
				}
				break;
			case Op::Add:
				r[k] = r[c.a] + r[c.b];
				break;
			case Op::Sub:
				r[k] = r[c.a] - r[c.b];
				break;
			case Op::Mul:
				r[k] = r[c.a] * r[c.b];
				break;
			case Op::Div:
				r[k] = r[c.a] / r[c.b];
				break;
			case Op::Neg:
				r[k] = -r[c.a];
				break;
			case Op::Pow: {
				double b = r[c.a], acc = b;
				for (int e = 1; e < c.exponent; ++e) { acc *= b; }
				r[k] = acc;
				break;
			}
			case Op::Param:
				break;
		}
	}
	for (std::size_t i = 0; i < outs_.size(); ++i) { out[i] = r[static_cast<std::size_t>(outs_[i])]; }
}

}  // namespace cohom1

namespace cohom1 {

namespace {

using Key = std::vector<int>;

LaurentPoly laurent_mul(const LaurentPoly& a, const LaurentPoly& b) {
	LaurentPoly out;
	for (const auto& [ka, ca] : a) {
		for (const auto& [kb, cb] : b) {
			Key k(ka.size());
			for (std::size_t i = 0; i < k.size(); ++i) { k[i] = ka[i] + kb[i]; }
			out[k] += ca * cb;
		}
	}
	std::erase_if(out, [](const auto& kv) { return sgn(kv.second) == 0; });
	return out;
}

std::optional<LaurentPoly> laurent(const Node& n, int s) {
	const std::size_t width = 1 + 3 * static_cast<std::size_t>(s);
	switch (n.op) {
		case Op::Const: {
			LaurentPoly p;
			if (sgn(n.value) != 0) { p[Key(width, 0)] = n.value; }
			return p;
		}
		case Op::Param:
			return std::nullopt;
		case Op::Var: {
			Key k(width, 0);
			const std::size_t base = n.kind == VarKind::T   ? 0
			                         : n.kind == VarKind::X ? 1
			                         : n.kind == VarKind::Y ? 1 + static_cast<std::size_t>(s)
			                                                : 1 + 2 * static_cast<std::size_t>(s);
			k[n.kind == VarKind::T ? 0 : base + static_cast<std::size_t>(n.index)] = 1;
			return LaurentPoly{{k, Rational(1)}};
		}
		case Op::Add:
		case Op::Sub: {
			auto a = laurent(*n.a, s), b = laurent(*n.b, s);
			if (!a || !b) { return std::nullopt; }
			for (const auto& [k, c] : *b) { (*a)[k] += n.op == Op::Add ? c : Rational(-c); }
			std::erase_if(*a, [](const auto& kv) { return sgn(kv.second) == 0; });
			return a;
		}
		case Op::Neg: {
			auto a = laurent(*n.a, s);
			if (!a) { return std::nullopt; }
			for (auto& [k, c] : *a) { c = -c; }
			return a;
		}
		case Op::Mul: {
			auto a = laurent(*n.a, s), b = laurent(*n.b, s);
			if (!a || !b) { return std::nullopt; }
			return laurent_mul(*a, *b);
		}
		case Op::Div: {
			auto a = laurent(*n.a, s), b = laurent(*n.b, s);
			if (!a || !b || b->size() != 1) { return std::nullopt; }
			const auto& [kb, cb] = *b->begin();
			Key inv(kb.size());
			for (std::size_t i = 0; i < inv.size(); ++i) { inv[i] = -kb[i]; }
			return laurent_mul(*a, LaurentPoly{{inv, Rational(1) / cb}});
		}
		case Op::Pow: {
			auto a = laurent(*n.a, s);
			if (!a) { return std::nullopt; }
			LaurentPoly acc = *a;
			for (int k = 1; k < n.exponent; ++k) { acc = laurent_mul(acc, *a); }
			return acc;
		}
	}
	return std::nullopt;
}

}  // namespace

std::optional<LaurentPoly> to_laurent(const Expr& e, int summands) { return laurent(e.node(), summands); }

}  // namespace cohom1
