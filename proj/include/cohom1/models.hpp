#pragma once

#include "cohom1/algebra.hpp"
#include "cohom1/expr.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohom1 {

enum class ModelId { A, B, C, D, E };

char model_letter(ModelId id);
ModelId parse_model_id(std::string_view s);  // throws InvalidParameters
const std::vector<ModelId>& all_models();

class InvalidParameters : public Error {
   public:
	using Error::Error;
};

class ModelDataError : public Error {
   public:
	ModelDataError(int line, const std::string& msg);
	int line;
};

enum class Einstein3Kind { None, Printed, Automatic };

// Coordinates that share one free value at a non-collapsing endpoint. The slot names
// the squared parameter (zeta0sq, zeta1sq, xi1sq).
struct Group {
	std::string slot;
	std::vector<int> members;  // 0-based
};

struct BoundaryData {
	int endpoint = 0;
	std::vector<int> collapsing;      // J_+, 0-based
	std::vector<Rational> c_squared;  // slope squares in the stored convention
	std::vector<Rational> rescale;    // stored f_i times rescale_i is the generic f_i
	std::vector<Group> groups;        // partition of J_-
	Rational sphere_dim;

	// f_i' = slope_sign * c_i at the endpoint for i in J_+.
	[[nodiscard]] int slope_sign() const { return endpoint == 0 ? 1 : -1; }
	[[nodiscard]] bool is_collapsing(int i) const;
	[[nodiscard]] const Group* group_of(int i) const;
	[[nodiscard]] std::optional<Rational> c_squared_of(int i) const;
	// c_i^2 in the generic (unrescaled) convention.
	[[nodiscard]] std::optional<Rational> generic_c_squared_of(int i) const;
	[[nodiscard]] std::vector<std::string> slots() const;
};

// Reference data printed alongside an endpoint system: determinant closed form in m,
// kernel of L_0, D_0 and one solution x^2 of L_0 x^2 = D_0.
struct ReferenceData {
	std::optional<Expr> det;
	std::vector<std::vector<Expr>> kernel;
	std::vector<Expr> D0;
	std::vector<Expr> x2;
};

// x' = 2y, y' = A/t^2 + B/t + C with x(0) given and y(0) = 0.
struct SingularIVP {
	ModelId model = ModelId::A;
	int endpoint = 0;
	std::size_t dim = 0;
	bool printed = false;
	std::vector<Expr> A, B, C;
	std::vector<Expr> x0;          // in the slot parameters
	std::vector<bool> collapsing;  // x_i = f_i^2/t^2 when true, x_i = f_i^2 otherwise
	ReferenceData reference;
	std::string name;
	ParamEnv integers;  // already substituted into the expressions
};

struct ModelSpec {
	ModelId id = ModelId::A;
	std::string title;
	ParamEnv integers;
	std::vector<std::string> warnings;
	std::size_t s = 0;
	std::vector<Rational> dims, killing, rescale;
	std::map<std::array<int, 3>, Rational> brackets;  // sorted 0-based keys
	std::optional<std::vector<int>> symmetry;         // 0-based permutation
	Einstein3Kind einstein3 = Einstein3Kind::None;
	std::vector<Expr> einstein;  // printed R_i with x = f, y = f', z = f''
	std::optional<Expr> nondiagonal;
	std::array<BoundaryData, 2> boundary;
	std::array<SingularIVP, 2> ivp;
	std::optional<SingularIVP> reduced;  // Model C at 0 restricted to {x2 = x3, y2 = y3}
};

// Raw text of the shipped model file.
std::string_view embedded_model_text(ModelId id);

// Parses a model file and instantiates it for the given integer parameters.
ModelSpec load_model(std::string_view text, const ParamEnv& integers);

ModelSpec get_model(ModelId id, const ParamEnv& integers = {});
std::vector<std::string> integer_parameter_names(ModelId id);
// Sample integer parameters used when none are supplied.
ParamEnv default_integers(ModelId id);

Rational triple_bracket(const ModelSpec& spec, int i, int j, int k);  // 1-based
const BoundaryData& boundary_conditions(const ModelSpec& spec, int endpoint);
const SingularIVP& singular_ivp(const ModelSpec& spec, int endpoint);
std::optional<std::vector<int>> symmetry_map(const ModelSpec& spec);

// Numerical x(0) for bound slot parameters.
template <class T>
Vector<T> initial_point(const SingularIVP& ivp, const Env<T>& env) {
	Vector<T> x;
	x.reserve(ivp.dim);
	for (const auto& e : ivp.x0) { x.push_back(eval_point<T>(e, env, T(0), {}, {})); }
	return x;
}

// Throws InvalidParameters unless lambda and every slot parameter of the endpoint are
// bound, and every slot parameter is positive.
void check_endpoint_env(const ModelSpec& spec, int endpoint, const ParamEnv& env);

template <class T>
Vector<T> apply_permutation(const std::vector<int>& P, const Vector<T>& v) {
	Vector<T> out(v.size());
	for (std::size_t i = 0; i < v.size(); ++i) { out[i] = v[static_cast<std::size_t>(P[i])]; }
	return out;
}

}  // namespace cohom1
