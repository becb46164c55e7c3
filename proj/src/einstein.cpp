#include "cohom1/einstein.hpp"

#include "cohom1/random.hpp"

namespace cohom1 {

namespace {

Expr x(std::size_t i) { return Expr::x(static_cast<int>(i)); }
Expr y(std::size_t i) { return Expr::y(static_cast<int>(i)); }
Expr z(std::size_t i) { return Expr::z(static_cast<int>(i)); }

// f_i'' = -f_i (lambda + R_i|_{z=0}), valid because R_i = z_i/x_i + (terms free of z).
std::vector<Expr> solve_for_second_derivatives(const std::vector<Expr>& R) {
	std::vector<Expr> F;
	for (std::size_t i = 0; i < R.size(); ++i) {
		Expr rest = R[i];
		for (std::size_t j = 0; j < R.size(); ++j) { rest = substitute(rest, VarKind::Z, static_cast<int>(j), Expr(0L)); }
		F.push_back(-x(i) * (Expr::param("lambda") + rest));
	}
	return F;
}

EinsteinSystem finish(const ModelSpec& spec, std::vector<Expr> R) {
	EinsteinSystem sys;
	sys.model = spec.id;
	sys.s = spec.s;
	sys.dims = spec.dims;
	sys.R = std::move(R);
	sys.F = solve_for_second_derivatives(sys.R);
	sys.nondiagonal = spec.nondiagonal;
	sys.einstein3 = spec.einstein3;
	return sys;
}

QVector random_positive_vector(Rng& rng, std::size_t n) {
	QVector v;
	for (std::size_t i = 0; i < n; ++i) { v.push_back(random_positive(rng, 4)); }
	return v;
}

QVector random_vector(Rng& rng, std::size_t n) {
	QVector v;
	for (std::size_t i = 0; i < n; ++i) { v.push_back(random_rational(rng, -3, 3)); }
	return v;
}

}  // namespace

EinsteinSystem build_generic(const ModelSpec& spec) {
	const std::size_t s = spec.s;
	// Generic functions G_i = rescale_i * f_i expressed through the stored variables.
	std::vector<Expr> G, Gp, Gpp;
	for (std::size_t i = 0; i < s; ++i) {
		G.push_back(Expr(spec.rescale[i]) * x(i));
		Gp.push_back(Expr(spec.rescale[i]) * y(i));
		Gpp.push_back(Expr(spec.rescale[i]) * z(i));
	}
	std::vector<Expr> R;
	for (std::size_t i = 0; i < s; ++i) {
		const int ii = static_cast<int>(i) + 1;
		Expr r = Gpp[i] / G[i] - Expr(spec.killing[i]) / (Expr(2L) * pow(G[i], 2));
		Expr brackets;
		for (std::size_t k = 0; k < s; ++k) {
			for (std::size_t l = 0; l < s; ++l) {
				Rational c = triple_bracket(spec, ii, static_cast<int>(k) + 1, static_cast<int>(l) + 1);
				if (sgn(c) == 0) { continue; }
				brackets += Expr(c) * (pow(G[i], 4) - Expr(2L) * pow(G[k], 4)) /
				            (Expr(4L) * pow(G[i], 2) * pow(G[k], 2) * pow(G[l], 2));
			}
		}
		r -= Expr(Rational(1) / spec.dims[i]) * brackets;
		r += Expr(spec.dims[i] - 1) * pow(Gp[i], 2) / pow(G[i], 2);
		for (std::size_t k = 0; k < s; ++k) {
			if (k == i) { continue; }
			r += Expr(spec.dims[k]) * Gp[i] * Gp[k] / (G[i] * G[k]);
		}
		R.push_back(r);
	}
	return finish(spec, std::move(R));
}

EinsteinSystem printed_system(const ModelSpec& spec) { return finish(spec, spec.einstein); }

Rational inverse_square_coefficient(const EinsteinSystem& sys, std::size_t i) {
	auto lp = to_laurent(sys.R.at(i), static_cast<int>(sys.s));
	if (!lp) { throw Error("residual is not a Laurent polynomial"); }
	std::vector<int> key(1 + 3 * sys.s, 0);
	key[1 + i] = -2;
	auto it = lp->find(key);
	return it == lp->end() ? Rational(0) : it->second;
}

EquivalenceReport equivalence_check(const ModelSpec& spec, std::size_t trials, std::uint64_t seed) {
	const EinsteinSystem gen = build_generic(spec);
	const EinsteinSystem pr = printed_system(spec);
	Rng rng(seed);
	EquivalenceReport rep;
	rep.trials = trials;
	rep.max_difference = 0;
	for (std::size_t t = 0; t < trials; ++t) {
		QVector f = random_positive_vector(rng, spec.s);
		QVector fp = random_vector(rng, spec.s);
		Rational lambda = random_rational(rng, -4, 4);
		QVector a = solved_second_derivatives(gen, f, fp, lambda);
		QVector b = solved_second_derivatives(pr, f, fp, lambda);
		for (std::size_t i = 0; i < spec.s; ++i) {
			Rational d = abs(a[i] - b[i]);
			if (d > rep.max_difference) { rep.max_difference = d; }
			if (sgn(d) != 0 && rep.failures.size() < 8) {
				rep.failures.push_back("F_" + std::to_string(i + 1) + " differs by " + to_string(d));
			}
		}
	}
	return rep;
}

bool residuals_affine_in_second_derivative(const EinsteinSystem& sys, std::size_t trials, std::uint64_t seed) {
	Rng rng(seed);
	const ParamEnv env;
	for (std::size_t t = 0; t < trials; ++t) {
		QVector f = random_positive_vector(rng, sys.s);
		QVector fp = random_vector(rng, sys.s);
		QVector zv = random_vector(rng, sys.s);
		for (std::size_t i = 0; i < sys.s; ++i) {
			const Rational base = eval_point<Rational>(sys.R[i], env, Rational(0), f, fp, &zv);
			for (std::size_t j = 0; j < sys.s; ++j) {
				QVector z2 = zv;
				z2[j] += 1;
				const Rational moved = eval_point<Rational>(sys.R[i], env, Rational(0), f, fp, &z2);
				const Rational expect = i == j ? Rational(1) / f[i] : Rational(0);
				if (moved - base != expect) { return false; }
			}
		}
	}
	return true;
}

Rational trace_residual(const EinsteinSystem& sys, const QVector& f, const QVector& fpp, const Rational& lambda) {
	Rational acc = lambda;
	for (std::size_t i = 0; i < sys.s; ++i) {
		if (is_zero(f.at(i))) { throw DivisionByZero("trace residual at f_" + std::to_string(i + 1) + " = 0"); }
		acc += sys.dims[i] * fpp.at(i) / f[i];
	}
	return acc;
}

double trace_residual(const EinsteinSystem& sys, const Vector<double>& f, const Vector<double>& fpp, double lambda) {
	double acc = lambda;
	for (std::size_t i = 0; i < sys.s; ++i) { acc += to_double(sys.dims[i]) * fpp.at(i) / f.at(i); }
	return acc;
}

QVector solved_second_derivatives(const EinsteinSystem& sys, const QVector& f, const QVector& fp,
                                  const Rational& lambda) {
	const ParamEnv env{{"lambda", lambda}};
	QVector out;
	for (const auto& e : sys.F) { out.push_back(eval_point<Rational>(e, env, Rational(0), f, fp)); }
	return out;
}

namespace {
const Expr& model_b_constraint() {
	static const Expr e = *get_model(ModelId::B).nondiagonal;
	return e;
}
}  // namespace

Rational nondiagonal_residual_B(const QVector& f) {
	if (f.size() != 5) { throw DimensionMismatch("Model B has five summands"); }
	return eval_point<Rational>(model_b_constraint(), ParamEnv{}, Rational(0), f, {});
}

double nondiagonal_residual_B(const Vector<double>& f) {
	if (f.size() != 5) { throw DimensionMismatch("Model B has five summands"); }
	return eval_point<double>(model_b_constraint(), Env<double>{}, 0.0, f, {});
}

}  // namespace cohom1
