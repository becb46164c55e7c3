#pragma once

#include "cohom1/models.hpp"

namespace cohom1 {

// Residuals in the f-variables: x_i = f_i, y_i = f_i', z_i = f_i''. Each R_i equals
// -lambda on a solution.
struct EinsteinSystem {
	ModelId model = ModelId::A;
	std::size_t s = 0;
	std::vector<Rational> dims;
	std::vector<Expr> R;
	std::vector<Expr> F;  // f_i'' = F_i(f, f'; lambda)
	std::optional<Expr> nondiagonal;
	Einstein3Kind einstein3 = Einstein3Kind::None;
};

// Assembled from dimensions, Killing constants and triple brackets, expressed in the
// stored (possibly rescaled) variables of the model.
EinsteinSystem build_generic(const ModelSpec& spec);
// The model's transcribed equations.
EinsteinSystem printed_system(const ModelSpec& spec);

// Coefficient of the monomial 1/f_i^2 in R_i after expanding R_i as a Laurent polynomial.
Rational inverse_square_coefficient(const EinsteinSystem& sys, std::size_t i);

struct EquivalenceReport {
	std::size_t trials = 0;
	Rational max_difference;
	std::vector<std::string> failures;
};

// Compares the solved forms of the generic and printed systems at random points with
// f_i > 0. Integer model parameters are those of spec.
EquivalenceReport equivalence_check(const ModelSpec& spec, std::size_t trials, std::uint64_t seed = 1);

// Checks that R_i is affine in z with dR_i/dz_j = delta_ij / x_i at random points.
bool residuals_affine_in_second_derivative(const EinsteinSystem& sys, std::size_t trials, std::uint64_t seed = 2);

Rational trace_residual(const EinsteinSystem& sys, const QVector& f, const QVector& fpp, const Rational& lambda);
double trace_residual(const EinsteinSystem& sys, const Vector<double>& f, const Vector<double>& fpp, double lambda);

// Evaluates the solved form at a point.
QVector solved_second_derivatives(const EinsteinSystem& sys, const QVector& f, const QVector& fp,
                                  const Rational& lambda);

// Model B off-diagonal condition; its value vanishes on solutions.
Rational nondiagonal_residual_B(const QVector& f);
double nondiagonal_residual_B(const Vector<double>& f);

}  // namespace cohom1
