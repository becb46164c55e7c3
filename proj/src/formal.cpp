#include "cohom1/formal.hpp"

#include <cmath>

namespace cohom1 {

namespace {

template <class T>
T factorial(std::size_t k) {
	T f(1);
	for (std::size_t i = 2; i <= k; ++i) { f *= T(static_cast<long>(i)); }
	return f;
}

template <class T>
bool negligible(const T& v, double tol) {
	if constexpr (std::is_same_v<T, Rational>) {
		(void)tol;
		return is_zero(v);
	} else {
		return std::fabs(v) <= tol;
	}
}

// Series of each coordinate from the coefficient lists, padded with zeros to order N.
template <class T>
std::vector<Series<T>> coordinate_series(const std::vector<Vector<T>>& coeffs, std::size_t dim, std::size_t N) {
	std::vector<Series<T>> out;
	for (std::size_t i = 0; i < dim; ++i) {
		std::vector<T> c(N + 1, T(0));
		for (std::size_t k = 0; k <= N && k < coeffs.size(); ++k) { c[k] = coeffs[k][i]; }
		out.emplace_back(std::move(c));
	}
	return out;
}

// Y_k = (k+1) X_{k+1} / 2 for k = 0..N-1 from X_0..X_N.
template <class T>
std::vector<Vector<T>> velocity_coefficients(const std::vector<Vector<T>>& X) {
	std::vector<Vector<T>> Y;
	for (std::size_t k = 0; k + 1 < X.size(); ++k) {
		Y.push_back(scaled(X[k + 1], T(static_cast<long>(k + 1)) / T(2)));
	}
	return Y;
}

template <class T>
struct Evaluated {
	std::vector<Series<T>> A, B, C;
};

template <class T>
Evaluated<T> evaluate_fields(const SingularIVP& ivp, const Env<T>& env, const std::vector<Vector<T>>& X,
                             const std::vector<Vector<T>>& Y, std::size_t N) {
	auto xs = coordinate_series(X, ivp.dim, N);
	auto ys = coordinate_series(Y, ivp.dim, N);
	const Series<T> t = Series<T>::variable(N);
	Evaluated<T> out;
	for (std::size_t i = 0; i < ivp.dim; ++i) {
		out.A.push_back(eval_series<T>(ivp.A[i], env, xs, ys, t));
		out.B.push_back(eval_series<T>(ivp.B[i], env, xs, ys, t));
		out.C.push_back(eval_series<T>(ivp.C[i], env, xs, ys, t));
	}
	return out;
}

// [A]_{m+2} + [B]_{m+1} + [C]_m with X_{m+2} = v.
template <class T>
Vector<T> order_rhs(const SingularIVP& ivp, const Env<T>& env, std::vector<Vector<T>> X, std::size_t m,
                    const Vector<T>& v) {
	const std::size_t N = m + 2;
	X.resize(N + 1, Vector<T>(ivp.dim, T(0)));
	X[N] = v;
	auto Y = velocity_coefficients(X);
	auto ev = evaluate_fields(ivp, env, X, Y, N);
	Vector<T> r(ivp.dim, T(0));
	for (std::size_t i = 0; i < ivp.dim; ++i) { r[i] = ev.A[i][N] + ev.B[i][N - 1] + ev.C[i][N - 2]; }
	return r;
}

template <class T>
double max_magnitude(const Vector<T>& v) {
	double m = 0.0;
	for (const auto& x : v) { m = std::max(m, magnitude(x)); }
	return m;
}

}  // namespace

template <class T>
FirstOrderReport<T> check_first_order_at(const SingularIVP& ivp, const Env<T>& env, const Vector<T>& x0) {
	FirstOrderReport<T> rep;
	const Vector<T> y0(ivp.dim, T(0));
	rep.pass = true;
	for (std::size_t i = 0; i < ivp.dim; ++i) {
		rep.A_at_x0.push_back(eval_point<T>(ivp.A[i], env, T(0), x0, y0));
	}
	// 2 (dA)_{x0}(y0) vanishes because y0 = 0; it is kept for the record.
	Matrix<T> dA = jacobian_at<T>(ivp.A, Block::X, env, T(0), x0, y0);
	Vector<T> dAy = dA * y0;
	for (std::size_t i = 0; i < ivp.dim; ++i) {
		rep.B_at_x0.push_back(T(2) * dAy[i] + eval_point<T>(ivp.B[i], env, T(0), x0, y0));
	}
	rep.pass = all_zero(rep.A_at_x0) && all_zero(rep.B_at_x0);
	return rep;
}

template <class T>
FirstOrderReport<T> check_first_order(const SingularIVP& ivp, const Env<T>& env) {
	return check_first_order_at(ivp, env, initial_point<T>(ivp, env));
}

template <class T>
Linearization<T> linearize(const SingularIVP& ivp, const Env<T>& env) {
	const Vector<T> x0 = initial_point<T>(ivp, env);
	const Vector<T> y0(ivp.dim, T(0));
	return {jacobian_at<T>(ivp.A, Block::X, env, T(0), x0, y0), jacobian_at<T>(ivp.B, Block::Y, env, T(0), x0, y0)};
}

template <class T>
Matrix<T> compute_Lm(const Linearization<T>& lin, std::size_t m) {
	const std::size_t n = lin.dA.rows();
	const T mm(static_cast<long>(m));
	Matrix<T> L = Matrix<T>::identity(n) * (mm + T(1));
	L -= lin.dA * (T(2) / (mm + T(2)));
	L -= lin.dyB;
	return L;
}

template <class T>
Matrix<T> compute_Lm(const SingularIVP& ivp, const Env<T>& env, std::size_t m) {
	return compute_Lm(linearize(ivp, env), m);
}

std::vector<DetRow> verify_det_formula(const SingularIVP& ivp, const ParamEnv& env, std::size_t m_lo,
                                       std::size_t m_hi) {
	if (!ivp.reference.det) { throw FormulaUnavailable("no determinant closed form for " + ivp.name); }
	const auto lin = linearize<Rational>(ivp, env);
	std::vector<DetRow> rows;
	for (std::size_t m = m_lo; m <= m_hi; ++m) {
		DetRow r;
		r.m = m;
		r.computed = det(compute_Lm(lin, m));
		r.formula = eval_point<Rational>(*ivp.reference.det, ParamEnv{{"m", Rational(static_cast<long>(m))}},
		                                 Rational(0), {}, {});
		r.equal = r.computed == r.formula;
		rows.push_back(r);
	}
	return rows;
}

template <class T>
RecursionStep<T> recursion_step(const SingularIVP& ivp, const Env<T>& env, const Linearization<T>& lin,
                                const std::vector<Vector<T>>& X, std::size_t m) {
	if (X.size() < m + 2) { throw DimensionMismatch("recursion step needs X_0..X_{m+1}"); }
	const std::size_t n = ivp.dim;
	std::vector<Vector<T>> known(X.begin(), X.begin() + static_cast<std::ptrdiff_t>(m + 2));
	const Vector<T> zero(n, T(0));
	const Vector<T> r0 = order_rhs(ivp, env, known, m, zero);

	// The unknown enters [A]_{m+2} as dA v and [B]_{m+1} as (m+2)/2 d_yB v; confirm.
	Vector<T> trial(n);
	for (std::size_t i = 0; i < n; ++i) { trial[i] = T(static_cast<long>(i + 1)); }
	const Vector<T> r1 = order_rhs(ivp, env, known, m, trial);
	const Vector<T> expect = lin.dA * trial + scaled(lin.dyB * trial, T(static_cast<long>(m + 2)) / T(2));
	const Vector<T> diff = (r1 - r0) - expect;
	if constexpr (std::is_same_v<T, Rational>) {
		if (!all_zero(diff)) { throw Error("order " + std::to_string(m + 2) + " coefficient is not linear in x^{m+2}"); }
	} else {
		if (max_magnitude(diff) > 1e-8 * (1.0 + max_magnitude(r1) + max_magnitude(r0))) {
			throw Error("order " + std::to_string(m + 2) + " coefficient is not linear in x^{m+2}");
		}
	}

	RecursionStep<T> step;
	step.m = m;
	step.L = compute_Lm(lin, m);
	step.D = scaled(r0, T(2) * factorial<T>(m + 1));
	auto sol = solve_affine(step.L, step.D);
	if (!sol) {
		if (m == 0) { throw InconsistentData("D_0 is not in the range of L_0 for " + ivp.name); }
		throw SingularOperator(m);
	}
	if (m > 0 && !sol->kernel_basis.empty()) { throw SingularOperator(m); }
	step.solution = std::move(*sol);
	return step;
}

std::vector<std::string> free_parameter_names(std::size_t count) {
	static const char* const names[] = {"s", "r", "u", "v", "w"};
	std::vector<std::string> out;
	for (std::size_t i = 0; i < count; ++i) {
		out.push_back(i < 5 ? names[i] : "k" + std::to_string(i + 1));
	}
	return out;
}

template <class T>
Vector<T> SeriesSolution<T>::factorial_coefficient(std::size_t m) const {
	return scaled(X.at(m), factorial<T>(m));
}

template <class T>
SeriesSolution<T> formal_solution(const SingularIVP& ivp, const Env<T>& env, std::size_t M,
                                  const Vector<T>& free_values, double tol) {
	if (M < 2) { throw InvalidParameters("series order must be at least 2"); }
	SeriesSolution<T> sol;
	sol.ivp = ivp;
	sol.env = env;
	sol.order = M;
	const std::size_t n = ivp.dim;
	const Vector<T> x0 = initial_point<T>(ivp, env);
	auto fo = check_first_order_at(ivp, env, x0);
	bool first_order_ok = fo.pass;
	if constexpr (!std::is_same_v<T, Rational>) {
		first_order_ok = max_magnitude(fo.A_at_x0) <= 1e-9 && max_magnitude(fo.B_at_x0) <= 1e-9;
	}
	if (!first_order_ok) { throw InconsistentData("first-order conditions fail at x(0) for " + ivp.name); }
	const auto lin = linearize(ivp, env);
	sol.X.push_back(x0);
	sol.X.push_back(Vector<T>(n, T(0)));  // x^1 = 2 y(0) = 0
	for (std::size_t m = 0; m + 2 <= M; ++m) {
		auto step = recursion_step(ivp, env, lin, sol.X, m);
		sol.D.push_back(step.D);
		Vector<T> next = step.solution.particular;
		if (m == 0) {
			sol.kernel = step.solution.kernel_basis;
			sol.x2_particular = step.solution.particular;
			if (free_values.size() != sol.kernel.size()) {
				throw InvalidParameters(ivp.name + " has " + std::to_string(sol.kernel.size()) +
				                        " free parameter(s), " + std::to_string(free_values.size()) + " supplied");
			}
			sol.free_names = free_parameter_names(sol.kernel.size());
			sol.free_values = free_values;
			for (std::size_t k = 0; k < sol.kernel.size(); ++k) { next = next + scaled(sol.kernel[k], free_values[k]); }
		}
		sol.X.push_back(scaled(next, T(1) / factorial<T>(m + 2)));
	}
	sol.Y = velocity_coefficients(sol.X);
	sol.certificate = series_residual(sol, tol);
	return sol;
}

std::size_t kernel_dimension(const SingularIVP& ivp, const ParamEnv& env) {
	return ivp.dim - rank(compute_Lm<Rational>(ivp, env, 0));
}

template <class T>
ResidualCertificate<T> series_residual(const SingularIVP& ivp, const Env<T>& env, const std::vector<Vector<T>>& X,
                                       const std::vector<Vector<T>>& Y, double tol) {
	const std::size_t M = X.size() - 1;
	auto ev = evaluate_fields(ivp, env, X, Y, M);
	ResidualCertificate<T> cert;
	cert.cleared_order = M + 1;
	for (std::size_t j = 0; j <= M && cert.cleared_order == M + 1; ++j) {
		for (std::size_t i = 0; i < ivp.dim; ++i) {
			T r = -ev.A[i][j];
			if (j >= 1) {
				const T yj = j - 1 < Y.size() ? Y[j - 1][i] : T(0);
				r += T(static_cast<long>(j) - 1) * yj - ev.B[i][j - 1];
			}
			if (j >= 2) { r -= ev.C[i][j - 2]; }
			cert.max_abs = std::max(cert.max_abs, magnitude(r));
			if (!negligible(r, tol)) {
				cert.cleared_order = j;
				break;
			}
		}
	}
	cert.uncleared_order = static_cast<long>(cert.cleared_order) - 2;
	cert.kinematic_order = M;
	for (std::size_t k = 0; k + 1 <= M && cert.kinematic_order == M; ++k) {
		for (std::size_t i = 0; i < ivp.dim; ++i) {
			const T yk = k < Y.size() ? Y[k][i] : T(0);
			T r = T(static_cast<long>(k + 1)) * X[k + 1][i] - T(2) * yk;
			if (!negligible(r, tol)) {
				cert.kinematic_order = k;
				break;
			}
		}
	}
	return cert;
}

template <class T>
ResidualCertificate<T> series_residual(const SeriesSolution<T>& sol, double tol) {
	return series_residual(sol.ivp, sol.env, sol.X, sol.Y, tol);
}

bool p_symmetry_check(const std::vector<QVector>& X, const std::vector<int>& P) {
	for (const auto& x : X) {
		if (apply_permutation(P, x) != x) { return false; }
	}
	return true;
}

bool p_symmetry_check(const SeriesSolution<Rational>& sol, const std::vector<int>& P) {
	return p_symmetry_check(sol.X, P);
}

namespace {

struct CompatibilityInputs {
	Rational own, other;  // (p+1, q+1) at endpoint 0 and (q+1, p+1) at endpoint 1
	std::size_t coord;    // coordinate whose second coefficient enters
	const char* slot;
};

CompatibilityInputs compatibility_inputs(ModelId model, int endpoint, const ParamEnv& integers) {
	if (model != ModelId::A) { throw InvalidParameters("the compatibility identity applies to Model A only"); }
	const Rational p = integers.at("p"), q = integers.at("q");
	if (endpoint == 0) { return {p + 1, q + 1, 1, "zeta0sq"}; }
	return {q + 1, p + 1, 2, "zeta1sq"};
}

}  // namespace

Rational compatibility_lambda_A(const SeriesSolution<Rational>& sol) {
	const auto in = compatibility_inputs(sol.ivp.model, sol.ivp.endpoint, sol.ivp.integers);
	const Rational zsq = sol.env.at(in.slot);
	// x = f^2 with f'(0) = 0 gives (x^2)_i = 2 zeta f_i''(0).
	const Rational x2 = sol.factorial_coefficient(2)[in.coord];
	return 2 * in.own / zsq - in.other * x2 / zsq;
}

double compatibility_lambda_A(ModelId model, int endpoint, const ParamEnv& integers, double zeta_sq,
                              double x2_coefficient) {
	const auto in = compatibility_inputs(model, endpoint, integers);
	return 2.0 * to_double(in.own) / zeta_sq - to_double(in.other) * x2_coefficient / zeta_sq;
}

ReducedReport reduced_subsystem_C(const ModelSpec& spec, const ParamEnv& env, std::size_t M) {
	if (spec.id != ModelId::C || !spec.reduced) { throw InvalidParameters("the reduced system exists for Model C only"); }
	ReducedReport rep{formal_solution<Rational>(*spec.reduced, env, M, {}),
	                  formal_solution<Rational>(singular_ivp(spec, 0), env, M, {}), false, {}};
	rep.lift_equal = true;
	for (std::size_t k = 0; k <= M; ++k) {
		const QVector& r = rep.reduced.X[k];
		const QVector lift{r[0], r[1], r[1]};
		if (lift != rep.full.X[k]) { rep.lift_equal = false; }
	}
	rep.det_rows = verify_det_formula(*spec.reduced, env, 0, 20);
	return rep;
}

#define COHOM1_INSTANTIATE(T)                                                                                      \
	template FirstOrderReport<T> check_first_order(const SingularIVP&, const Env<T>&);                             \
	template FirstOrderReport<T> check_first_order_at(const SingularIVP&, const Env<T>&, const Vector<T>&);        \
	template Linearization<T> linearize(const SingularIVP&, const Env<T>&);                                        \
	template Matrix<T> compute_Lm(const Linearization<T>&, std::size_t);                                           \
	template Matrix<T> compute_Lm(const SingularIVP&, const Env<T>&, std::size_t);                                 \
	template RecursionStep<T> recursion_step(const SingularIVP&, const Env<T>&, const Linearization<T>&,           \
	                                         const std::vector<Vector<T>>&, std::size_t);                          \
	template struct SeriesSolution<T>;                                                                             \
	template SeriesSolution<T> formal_solution(const SingularIVP&, const Env<T>&, std::size_t, const Vector<T>&,   \
	                                           double);                                                            \
	template ResidualCertificate<T> series_residual(const SingularIVP&, const Env<T>&,                             \
	                                                const std::vector<Vector<T>>&, const std::vector<Vector<T>>&,  \
	                                                double);                                                       \
	template ResidualCertificate<T> series_residual(const SeriesSolution<T>&, double);

COHOM1_INSTANTIATE(Rational)
COHOM1_INSTANTIATE(double)

#undef COHOM1_INSTANTIATE

}  // namespace cohom1
