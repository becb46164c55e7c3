#pragma once

#include "cohom1/models.hpp"

#include <optional>

namespace cohom1 {

class SingularOperator : public Error {
   public:
	explicit SingularOperator(std::size_t m) : Error("L_" + std::to_string(m) + " is singular"), m(m) {}
	std::size_t m;
};

class InconsistentData : public Error {
   public:
	using Error::Error;
};

class FormulaUnavailable : public Error {
   public:
	using Error::Error;
};

template <class T>
struct FirstOrderReport {
	bool pass = false;
	Vector<T> A_at_x0;  // A(x(0))
	Vector<T> B_at_x0;  // 2 (dA)(y(0)) + B(x(0), y(0)), with y(0) = 0
};

template <class T>
FirstOrderReport<T> check_first_order(const SingularIVP& ivp, const Env<T>& env);
template <class T>
FirstOrderReport<T> check_first_order_at(const SingularIVP& ivp, const Env<T>& env, const Vector<T>& x0);

// (dA)_{x(0)} and (d_y B)_{(x(0), 0)}.
template <class T>
struct Linearization {
	Matrix<T> dA, dyB;
};
template <class T>
Linearization<T> linearize(const SingularIVP& ivp, const Env<T>& env);

// L_m = (m+1) Id - 2/(m+2) dA - d_y B.
template <class T>
Matrix<T> compute_Lm(const Linearization<T>& lin, std::size_t m);
template <class T>
Matrix<T> compute_Lm(const SingularIVP& ivp, const Env<T>& env, std::size_t m);

struct DetRow {
	std::size_t m;
	Rational computed, formula;
	bool equal;
};
// Throws FormulaUnavailable when the endpoint carries no closed form.
std::vector<DetRow> verify_det_formula(const SingularIVP& ivp, const ParamEnv& env, std::size_t m_lo,
                                       std::size_t m_hi);

// One step of the recursion in the factorial convention x^m = m! X_m, where X_m are the
// plain Taylor coefficients: L_m x^{m+2} = D_m.
template <class T>
struct RecursionStep {
	std::size_t m = 0;
	Matrix<T> L;
	Vector<T> D;
	AffineSolution<T> solution;  // factorial convention
};

// X holds plain coefficients X_0..X_{m+1}.
template <class T>
RecursionStep<T> recursion_step(const SingularIVP& ivp, const Env<T>& env, const Linearization<T>& lin,
                                const std::vector<Vector<T>>& X, std::size_t m);

template <class T>
struct ResidualCertificate {
	// Lowest j with a nonzero coefficient of t^2 y' - A - t B - t^2 C, or order+1 when
	// every coefficient through the truncation order vanishes.
	std::size_t cleared_order = 0;
	// Same in the uncleared form y' - A/t^2 - B/t - C (cleared_order - 2).
	long uncleared_order = 0;
	// Lowest k with a nonzero coefficient of x' - 2y, or order when none.
	std::size_t kinematic_order = 0;
	double max_abs = 0.0;  // largest coefficient magnitude inspected
};

template <class T>
struct SeriesSolution {
	SingularIVP ivp;
	Env<T> env;
	std::size_t order = 0;
	std::vector<Vector<T>> X;  // plain coefficients X_0..X_M
	std::vector<Vector<T>> Y;  // plain coefficients Y_0..Y_{M-1}
	std::vector<std::string> free_names;
	Vector<T> free_values;
	Vector<T> x2_particular;                // factorial convention, free values zero
	std::vector<Vector<T>> kernel;          // basis of ker L_0
	std::vector<Vector<T>> D;               // D_0..D_{M-2}
	ResidualCertificate<T> certificate;

	// x^m = m! X_m.
	[[nodiscard]] Vector<T> factorial_coefficient(std::size_t m) const;
};

// Names of the free parameters injected at m = 0: s, r, u, v, ...
std::vector<std::string> free_parameter_names(std::size_t count);

template <class T>
SeriesSolution<T> formal_solution(const SingularIVP& ivp, const Env<T>& env, std::size_t M,
                                  const Vector<T>& free_values, double tol = 1e-12);

// Dimension of ker L_0 for the bound parameters.
std::size_t kernel_dimension(const SingularIVP& ivp, const ParamEnv& env);

template <class T>
ResidualCertificate<T> series_residual(const SingularIVP& ivp, const Env<T>& env, const std::vector<Vector<T>>& X,
                                       const std::vector<Vector<T>>& Y, double tol = 0.0);
template <class T>
ResidualCertificate<T> series_residual(const SeriesSolution<T>& sol, double tol = 0.0);

bool p_symmetry_check(const std::vector<QVector>& X, const std::vector<int>& P);
bool p_symmetry_check(const SeriesSolution<Rational>& sol, const std::vector<int>& P);

// Model A only. At endpoint 0 returns 2(p+1)/zeta0^2 - 2(q+1) f_2''(0)/zeta0, at
// endpoint 1 returns 2(q+1)/zeta1^2 - 2(p+1) f_3''(1)/zeta1; both expressed through
// the squared parameters and the second Taylor coefficient of the series.
Rational compatibility_lambda_A(const SeriesSolution<Rational>& sol);
double compatibility_lambda_A(ModelId model, int endpoint, const ParamEnv& integers, double zeta_sq,
                              double x2_coefficient);

struct ReducedReport {
	SeriesSolution<Rational> reduced;
	SeriesSolution<Rational> full;
	bool lift_equal = false;
	std::vector<DetRow> det_rows;  // det((m+1) Id - d_y B~) against the closed form
};

// Model C at endpoint 0: solves the two-dimensional system and compares its lift
// (x1, x2, x2) with the full series.
ReducedReport reduced_subsystem_C(const ModelSpec& spec, const ParamEnv& env, std::size_t M);

}  // namespace cohom1
