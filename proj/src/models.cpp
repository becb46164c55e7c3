#include "cohom1/models.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace cohom1 {

namespace {

const char* const kSlotNames[] = {"zeta0sq", "zeta1sq", "xi1sq"};

bool is_slot_name(const std::string& s) {
	return std::find(std::begin(kSlotNames), std::end(kSlotNames), s) != std::end(kSlotNames);
}

std::string trim(std::string_view s) {
	std::size_t a = 0, b = s.size();
	while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) { ++a; }
	while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) { --b; }
	return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& s, char sep) {
	std::vector<std::string> out;
	std::string cur;
	for (char c : s) {
		if (c == sep) {
			out.push_back(trim(cur));
			cur.clear();
		} else {
			cur += c;
		}
	}
	out.push_back(trim(cur));
	return out;
}

std::vector<std::string> words(const std::string& s) {
	std::istringstream is(s);
	std::vector<std::string> out;
	std::string w;
	while (is >> w) { out.push_back(w); }
	return out;
}

struct Line {
	int number;
	std::string text;
};

std::vector<Line> logical_lines(std::string_view text) {
	std::vector<Line> out;
	std::istringstream is{std::string(text)};
	std::string raw, acc;
	int n = 0, start = 0;
	while (std::getline(is, raw)) {
		++n;
		if (auto h = raw.find('#'); h != std::string::npos) { raw.erase(h); }
		std::string t = trim(raw);
		if (acc.empty()) { start = n; }
		if (!t.empty() && t.back() == '\\') {
			t.pop_back();
			acc += t + " ";
			continue;
		}
		acc += t;
		if (!trim(acc).empty()) { out.push_back({start, trim(acc)}); }
		acc.clear();
	}
	if (!trim(acc).empty()) { throw ModelDataError(start, "dangling line continuation"); }
	return out;
}

struct RawEndpoint {
	int endpoint = -1;
	int line = 0;
	std::string sphere;
	std::vector<std::pair<int, std::string>> collapse;
	std::vector<std::pair<std::string, std::vector<int>>> groups;
	std::string source;
	std::map<char, std::map<int, std::string>> abc;
	std::string det;
	std::vector<std::string> kernel;
	std::string D0, x2;
	int reduced_dim = 0;
	std::map<char, std::map<int, std::string>> reduced_abc;
	std::string reduced_det;
	std::map<std::string, int> lines;
};

struct RawModel {
	std::string model, title;
	std::vector<std::string> integers;
	std::vector<std::pair<int, std::string>> valid, warn;
	int summands = 0;
	std::string dims, killing, rescale;
	std::vector<std::pair<std::array<int, 3>, std::string>> brackets;
	std::vector<int> symmetry;
	std::string einstein3 = "none";
	std::map<int, std::string> einstein;
	std::string nondiagonal;
	std::vector<RawEndpoint> endpoints;
	std::map<std::string, int> lines;
};

int parse_index(const std::string& s, int line, int max) {
	int v = 0;
	try {
		std::size_t used = 0;
		v = std::stoi(s, &used);
		if (used != s.size()) { throw std::invalid_argument(s); }
	} catch (const std::exception&) {
		throw ModelDataError(line, "expected an index, found '" + s + "'");
	}
	if (v < 1 || (max > 0 && v > max)) { throw ModelDataError(line, "index out of range: " + s); }
	return v;
}

// "key i = expr" -> (i, expr)
std::pair<int, std::string> indexed_assignment(const std::string& rest, int line, int max) {
	auto eq = rest.find('=');
	if (eq == std::string::npos) { throw ModelDataError(line, "expected '='"); }
	return {parse_index(trim(rest.substr(0, eq)), line, max), trim(rest.substr(eq + 1))};
}

RawModel parse_raw(std::string_view text) {
	RawModel m;
	RawEndpoint* ep = nullptr;
	bool seen_format = false;
	for (const auto& [ln, t] : logical_lines(text)) {
		auto sp = t.find_first_of(" \t");
		std::string key = t.substr(0, sp);
		std::string rest = sp == std::string::npos ? "" : trim(t.substr(sp));
		if (!seen_format) {
			if (key != "format" || words(rest) != std::vector<std::string>{"cohom1-model", "1"}) {
				throw ModelDataError(ln, "missing 'format cohom1-model 1' header");
			}
			seen_format = true;
			continue;
		}
		if (ep != nullptr) {
			ep->lines[key] = ln;
			if (key == "end") {
				ep = nullptr;
			} else if (key == "sphere") {
				ep->sphere = rest;
			} else if (key == "collapse") {
				ep->collapse.push_back(indexed_assignment(rest, ln, m.summands));
			} else if (key == "group") {
				auto eq = rest.find('=');
				if (eq == std::string::npos) { throw ModelDataError(ln, "expected '='"); }
				std::vector<int> mem;
				for (const auto& w : words(rest.substr(eq + 1))) { mem.push_back(parse_index(w, ln, m.summands)); }
				ep->groups.emplace_back(trim(rest.substr(0, eq)), mem);
			} else if (key == "source") {
				ep->source = rest;
			} else if (key == "A" || key == "B" || key == "C") {
				auto [i, e] = indexed_assignment(rest, ln, m.summands);
				ep->abc[key[0]][i] = e;
			} else if (key == "det") {
				ep->det = rest;
			} else if (key == "kernel") {
				ep->kernel.push_back(rest);
			} else if (key == "D0") {
				ep->D0 = rest;
			} else if (key == "x2") {
				ep->x2 = rest;
			} else if (key == "reduced") {
				auto w = words(rest);
				if (w.size() == 1) {
					ep->reduced_dim = parse_index(w[0], ln, m.summands);
				} else if (!w.empty() && (w[0] == "B" || w[0] == "C")) {
					auto [i, e] = indexed_assignment(trim(rest.substr(1)), ln, m.summands);
					ep->reduced_abc[w[0][0]][i] = e;
				} else if (!w.empty() && w[0] == "det") {
					ep->reduced_det = trim(rest.substr(3));
				} else {
					throw ModelDataError(ln, "malformed 'reduced' line");
				}
			} else {
				throw ModelDataError(ln, "unknown endpoint key '" + key + "'");
			}
			continue;
		}
		m.lines[key] = ln;
		if (key == "model") {
			m.model = rest;
		} else if (key == "title") {
			m.title = rest;
		} else if (key == "integer") {
			m.integers = words(rest);
		} else if (key == "valid") {
			m.valid.emplace_back(ln, rest);
		} else if (key == "warn") {
			m.warn.emplace_back(ln, rest);
		} else if (key == "summands") {
			m.summands = parse_index(rest, ln, 0);
		} else if (key == "dims") {
			m.dims = rest;
		} else if (key == "killing") {
			m.killing = rest;
		} else if (key == "rescale") {
			m.rescale = rest;
		} else if (key == "bracket") {
			auto eq = rest.find('=');
			auto w = words(rest.substr(0, eq == std::string::npos ? rest.size() : eq));
			if (eq == std::string::npos || w.size() != 3) { throw ModelDataError(ln, "expected 'bracket i j k = value'"); }
			m.brackets.push_back({{parse_index(w[0], ln, m.summands), parse_index(w[1], ln, m.summands),
			                       parse_index(w[2], ln, m.summands)},
			                      trim(rest.substr(eq + 1))});
		} else if (key == "symmetry") {
			for (const auto& w : words(rest)) { m.symmetry.push_back(parse_index(w, ln, m.summands)); }
		} else if (key == "einstein3") {
			m.einstein3 = rest;
		} else if (key == "einstein") {
			auto [i, e] = indexed_assignment(rest, ln, m.summands);
			m.einstein[i] = e;
		} else if (key == "nondiagonal") {
			auto eq = rest.find('=');
			if (eq == std::string::npos) { throw ModelDataError(ln, "expected '='"); }
			m.nondiagonal = trim(rest.substr(eq + 1));
		} else if (key == "endpoint") {
			RawEndpoint e;
			if (rest != "0" && rest != "1") { throw ModelDataError(ln, "endpoint must be 0 or 1"); }
			e.endpoint = rest == "0" ? 0 : 1;
			e.line = ln;
			m.endpoints.push_back(e);
			ep = &m.endpoints.back();
		} else {
			throw ModelDataError(ln, "unknown key '" + key + "'");
		}
	}
	if (ep != nullptr) { throw ModelDataError(ep->line, "endpoint block without 'end'"); }
	return m;
}

class Instantiator {
   public:
	Instantiator(const RawModel& raw, ParamEnv ints) : raw_(raw), ints_(std::move(ints)) {}

	Expr expr(const std::string& src, int line, bool allow_z = false) const {
		ParseOptions opts;
		opts.summands = raw_.summands;
		opts.allow_z = allow_z;
		try {
			return substitute(parse_expr(src, opts), ints_);
		} catch (const ParseError& e) {
			throw ModelDataError(line, std::string(e.what()));
		}
	}

	Rational constant(const std::string& src, int line) const {
		Expr e = expr(src, line);
		if (!e.is_constant()) { throw ModelDataError(line, "expected a constant, found '" + src + "'"); }
		return e.node().value;
	}

	std::vector<Rational> constants(const std::string& src, int line, std::size_t n) const {
		auto parts = split(src, ';');
		if (parts.size() != n) { throw ModelDataError(line, "expected " + std::to_string(n) + " entries"); }
		std::vector<Rational> out;
		for (const auto& p : parts) { out.push_back(constant(p, line)); }
		return out;
	}

	std::vector<Expr> exprs(const std::string& src, int line, std::size_t n) const {
		auto parts = split(src, ';');
		if (parts.size() != n) { throw ModelDataError(line, "expected " + std::to_string(n) + " entries"); }
		std::vector<Expr> out;
		for (const auto& p : parts) { out.push_back(expr(p, line)); }
		return out;
	}

	[[nodiscard]] int line(const std::string& key) const {
		auto it = raw_.lines.find(key);
		return it == raw_.lines.end() ? 0 : it->second;
	}

   private:
	const RawModel& raw_;
	ParamEnv ints_;
};

void require_params(const Expr& e, const std::set<std::string>& allowed, int line) {
	for (const auto& p : parameters(e)) {
		if (allowed.count(p) == 0) { throw ModelDataError(line, "unexpected parameter '" + p + "'"); }
	}
}

std::vector<Expr> indexed_block(const Instantiator& in, const std::map<int, std::string>& src, std::size_t n, int line,
                                const char* what) {
	std::vector<Expr> out;
	for (std::size_t i = 1; i <= n; ++i) {
		auto it = src.find(static_cast<int>(i));
		if (it == src.end()) {
			throw ModelDataError(line, std::string("missing component ") + what + " " + std::to_string(i));
		}
		out.push_back(in.expr(it->second, line));
	}
	return out;
}

void build_endpoint(const RawEndpoint& re, const Instantiator& in, ModelSpec& spec) {
	const int e = re.endpoint;
	const std::size_t s = spec.s;
	BoundaryData bd;
	bd.endpoint = e;
	bd.rescale = spec.rescale;
	bd.sphere_dim = in.constant(re.sphere, re.line);
	std::vector<int> owner(s, 0);
	for (const auto& [i, src] : re.collapse) {
		Rational csq = in.constant(src, re.line);
		if (sgn(csq) <= 0) { throw ModelDataError(re.line, "collapse slope must be positive"); }
		const auto k = static_cast<std::size_t>(i - 1);
		bd.collapsing.push_back(i - 1);
		bd.c_squared.push_back(csq / (spec.rescale[k] * spec.rescale[k]));
		++owner[k];
	}
	for (const auto& [slot, mem] : re.groups) {
		if (!is_slot_name(slot)) { throw ModelDataError(re.line, "unknown slot '" + slot + "'"); }
		Group g{slot, {}};
		for (int i : mem) {
			g.members.push_back(i - 1);
			++owner[static_cast<std::size_t>(i - 1)];
		}
		bd.groups.push_back(g);
	}
	for (std::size_t i = 0; i < s; ++i) {
		if (owner[i] != 1) {
			throw ModelDataError(re.line, "coordinate " + std::to_string(i + 1) +
			                                  " must be either collapsing or in exactly one group");
		}
	}

	SingularIVP ivp;
	ivp.model = spec.id;
	ivp.endpoint = e;
	ivp.dim = s;
	ivp.name = std::string(1, model_letter(spec.id)) + "@" + std::to_string(e);
	ivp.integers = spec.integers;
	if (re.source != "printed" && re.source != "derived") {
		throw ModelDataError(re.line, "source must be 'printed' or 'derived'");
	}
	ivp.printed = re.source == "printed";
	const std::set<std::string> lam{"lambda"};
	ivp.A = indexed_block(in, re.abc.count('A') ? re.abc.at('A') : std::map<int, std::string>{}, s, re.line, "A");
	ivp.B = indexed_block(in, re.abc.count('B') ? re.abc.at('B') : std::map<int, std::string>{}, s, re.line, "B");
	ivp.C = indexed_block(in, re.abc.count('C') ? re.abc.at('C') : std::map<int, std::string>{}, s, re.line, "C");
	for (std::size_t i = 0; i < s; ++i) {
		require_params(ivp.A[i], {}, re.line);
		require_params(ivp.B[i], {}, re.line);
		require_params(ivp.C[i], lam, re.line);
		if (depends_on(ivp.A[i], VarKind::Y) || depends_on(ivp.A[i], VarKind::T)) {
			throw ModelDataError(re.line, "A may depend on x only");
		}
		if (depends_on(ivp.B[i], VarKind::T)) { throw ModelDataError(re.line, "B may not depend on t"); }
	}
	ivp.collapsing.assign(s, false);
	ivp.x0.assign(s, Expr());
	for (std::size_t k = 0; k < bd.collapsing.size(); ++k) {
		const auto i = static_cast<std::size_t>(bd.collapsing[k]);
		ivp.collapsing[i] = true;
		ivp.x0[i] = Expr::constant(bd.c_squared[k]);
	}
	for (const auto& g : bd.groups) {
		for (int i : g.members) { ivp.x0[static_cast<std::size_t>(i)] = Expr::param(g.slot); }
	}

	std::set<std::string> refparams{"lambda"};
	for (const auto& g : bd.groups) { refparams.insert(g.slot); }
	if (!re.det.empty()) {
		ivp.reference.det = in.expr(re.det, re.line);
		require_params(*ivp.reference.det, {"m"}, re.line);
	}
	for (const auto& k : re.kernel) {
		auto v = in.exprs(k, re.line, s);
		for (const auto& x : v) { require_params(x, {}, re.line); }
		ivp.reference.kernel.push_back(v);
	}
	if (!re.D0.empty()) { ivp.reference.D0 = in.exprs(re.D0, re.line, s); }
	if (!re.x2.empty()) { ivp.reference.x2 = in.exprs(re.x2, re.line, s); }
	for (const auto& x : ivp.reference.D0) { require_params(x, refparams, re.line); }
	for (const auto& x : ivp.reference.x2) { require_params(x, refparams, re.line); }

	if (re.reduced_dim > 0) {
		const auto r = static_cast<std::size_t>(re.reduced_dim);
		SingularIVP red;
		red.model = spec.id;
		red.endpoint = e;
		red.dim = r;
		red.printed = true;
		red.name = ivp.name + "/reduced";
		red.integers = spec.integers;
		red.A.assign(r, Expr());
		red.B = indexed_block(in, re.reduced_abc.count('B') ? re.reduced_abc.at('B') : std::map<int, std::string>{}, r,
		                      re.line, "reduced B");
		red.C = indexed_block(in, re.reduced_abc.count('C') ? re.reduced_abc.at('C') : std::map<int, std::string>{}, r,
		                      re.line, "reduced C");
		for (std::size_t i = 0; i < r; ++i) {
			require_params(red.B[i], {}, re.line);
			require_params(red.C[i], lam, re.line);
			for (std::size_t j = r; j < s; ++j) {
				if (depends_on(red.B[i], VarKind::X, static_cast<int>(j)) ||
				    depends_on(red.C[i], VarKind::X, static_cast<int>(j)) ||
				    depends_on(red.B[i], VarKind::Y, static_cast<int>(j)) ||
				    depends_on(red.C[i], VarKind::Y, static_cast<int>(j))) {
					throw ModelDataError(re.line, "reduced system refers to a dropped coordinate");
				}
			}
		}
		red.x0.assign(ivp.x0.begin(), ivp.x0.begin() + static_cast<std::ptrdiff_t>(r));
		red.collapsing.assign(ivp.collapsing.begin(), ivp.collapsing.begin() + static_cast<std::ptrdiff_t>(r));
		if (!re.reduced_det.empty()) {
			red.reference.det = in.expr(re.reduced_det, re.line);
			require_params(*red.reference.det, {"m"}, re.line);
		}
		spec.reduced = red;
	}

	spec.boundary[static_cast<std::size_t>(e)] = bd;
	spec.ivp[static_cast<std::size_t>(e)] = ivp;
}

bool check_relation(const Instantiator& in, const std::string& rel, int line) {
	auto ge = rel.find(">=");
	if (ge == std::string::npos) { throw ModelDataError(line, "expected 'lhs >= rhs'"); }
	Rational lhs = in.constant(rel.substr(0, ge), line);
	Rational rhs = in.constant(rel.substr(ge + 2), line);
	return lhs >= rhs;
}

}  // namespace

ModelDataError::ModelDataError(int l, const std::string& msg)
    : Error("model data line " + std::to_string(l) + ": " + msg), line(l) {}

char model_letter(ModelId id) { return static_cast<char>('A' + static_cast<int>(id)); }

ModelId parse_model_id(std::string_view s) {
	if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'E') { return static_cast<ModelId>(s[0] - 'A'); }
	if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'e') { return static_cast<ModelId>(s[0] - 'a'); }
	throw InvalidParameters("unknown model '" + std::string(s) + "' (expected one of A, B, C, D, E)");
}

const std::vector<ModelId>& all_models() {
	static const std::vector<ModelId> ids{ModelId::A, ModelId::B, ModelId::C, ModelId::D, ModelId::E};
	return ids;
}

bool BoundaryData::is_collapsing(int i) const {
	return std::find(collapsing.begin(), collapsing.end(), i) != collapsing.end();
}

const Group* BoundaryData::group_of(int i) const {
	for (const auto& g : groups) {
		if (std::find(g.members.begin(), g.members.end(), i) != g.members.end()) { return &g; }
	}
	return nullptr;
}

std::optional<Rational> BoundaryData::c_squared_of(int i) const {
	for (std::size_t k = 0; k < collapsing.size(); ++k) {
		if (collapsing[k] == i) { return c_squared[k]; }
	}
	return std::nullopt;
}

std::optional<Rational> BoundaryData::generic_c_squared_of(int i) const {
	auto c = c_squared_of(i);
	if (!c) { return c; }
	const Rational& r = rescale[static_cast<std::size_t>(i)];
	return *c * r * r;
}

std::vector<std::string> BoundaryData::slots() const {
	std::vector<std::string> out;
	for (const auto& g : groups) { out.push_back(g.slot); }
	return out;
}

std::vector<std::string> integer_parameter_names(ModelId id) {
	switch (id) {
		case ModelId::A:
			return {"p", "q"};
		case ModelId::B:
		case ModelId::C:
			return {"n"};
		default:
			return {};
	}
}

ParamEnv default_integers(ModelId id) {
	switch (id) {
		case ModelId::A:
			return {{"p", Rational(2)}, {"q", Rational(1)}};
		case ModelId::B:
			return {{"n", Rational(2)}};
		case ModelId::C:
			return {{"n", Rational(3)}};
		default:
			return {};
	}
}

ModelSpec load_model(std::string_view text, const ParamEnv& integers) {
	RawModel raw = parse_raw(text);
	ModelSpec spec;
	spec.id = parse_model_id(raw.model);
	spec.title = raw.title;
	for (const auto& name : raw.integers) {
		auto it = integers.find(name);
		if (it == integers.end()) { throw InvalidParameters("missing integer parameter '" + name + "'"); }
		if (it->second.get_den() != 1) {
			throw InvalidParameters("parameter '" + name + "' must be an integer, got " + to_string(it->second));
		}
		spec.integers[name] = it->second;
	}
	for (const auto& [name, v] : integers) {
		if (spec.integers.count(name) == 0) {
			throw InvalidParameters("model " + raw.model + " has no integer parameter '" + name + "'");
		}
	}
	Instantiator in(raw, spec.integers);
	for (const auto& [ln, rel] : raw.valid) {
		if (!check_relation(in, rel, ln)) {
			throw InvalidParameters("model " + raw.model + " requires " + rel);
		}
	}
	for (const auto& [ln, rel] : raw.warn) {
		if (!check_relation(in, rel, ln)) {
			spec.warnings.push_back("model " + raw.model + " is tabulated for " + rel + "; continuing");
		}
	}
	if (raw.summands <= 0) { throw ModelDataError(in.line("summands"), "missing summand count"); }
	spec.s = static_cast<std::size_t>(raw.summands);
	spec.dims = in.constants(raw.dims, in.line("dims"), spec.s);
	spec.killing = in.constants(raw.killing, in.line("killing"), spec.s);
	spec.rescale = in.constants(raw.rescale, in.line("rescale"), spec.s);
	for (std::size_t i = 0; i < spec.s; ++i) {
		if (sgn(spec.dims[i]) <= 0 || sgn(spec.killing[i]) <= 0 || sgn(spec.rescale[i]) <= 0) {
			throw ModelDataError(in.line("dims"), "dimensions, Killing constants and rescalings must be positive");
		}
	}
	for (const auto& [idx, src] : raw.brackets) {
		std::array<int, 3> k{idx[0] - 1, idx[1] - 1, idx[2] - 1};
		std::sort(k.begin(), k.end());
		if (spec.brackets.count(k) != 0) { throw ModelDataError(in.line("bracket"), "duplicate bracket"); }
		spec.brackets[k] = in.constant(src, in.line("bracket"));
	}
	if (!raw.symmetry.empty()) {
		if (raw.symmetry.size() != spec.s) { throw ModelDataError(in.line("symmetry"), "permutation length"); }
		std::vector<int> P;
		for (int v : raw.symmetry) { P.push_back(v - 1); }
		auto sorted = P;
		std::sort(sorted.begin(), sorted.end());
		for (std::size_t i = 0; i < spec.s; ++i) {
			if (sorted[i] != static_cast<int>(i)) { throw ModelDataError(in.line("symmetry"), "not a permutation"); }
		}
		spec.symmetry = P;
	}
	if (raw.einstein3 == "none") {
		spec.einstein3 = Einstein3Kind::None;
	} else if (raw.einstein3 == "printed") {
		spec.einstein3 = Einstein3Kind::Printed;
	} else if (raw.einstein3 == "automatic") {
		spec.einstein3 = Einstein3Kind::Automatic;
	} else {
		throw ModelDataError(in.line("einstein3"), "einstein3 must be none, printed or automatic");
	}
	for (std::size_t i = 1; i <= spec.s; ++i) {
		auto it = raw.einstein.find(static_cast<int>(i));
		if (it == raw.einstein.end()) {
			throw ModelDataError(in.line("einstein"), "missing einstein " + std::to_string(i));
		}
		Expr e = in.expr(it->second, in.line("einstein"), true);
		require_params(e, {}, in.line("einstein"));
		spec.einstein.push_back(e);
	}
	if (!raw.nondiagonal.empty()) {
		spec.nondiagonal = in.expr(raw.nondiagonal, in.line("nondiagonal"));
		require_params(*spec.nondiagonal, {}, in.line("nondiagonal"));
	}
	if (spec.nondiagonal.has_value() != (spec.einstein3 == Einstein3Kind::Printed)) {
		throw ModelDataError(in.line("einstein3"), "'einstein3 printed' requires a nondiagonal line and vice versa");
	}
	bool have[2] = {false, false};
	for (const auto& re : raw.endpoints) {
		if (have[re.endpoint]) { throw ModelDataError(re.line, "duplicate endpoint"); }
		have[re.endpoint] = true;
		build_endpoint(re, in, spec);
	}
	if (!have[0] || !have[1]) { throw ModelDataError(0, "both endpoints must be described"); }
	return spec;
}

ModelSpec get_model(ModelId id, const ParamEnv& integers) {
	ParamEnv ints = integers;
	if (ints.empty()) { ints = default_integers(id); }
	return load_model(embedded_model_text(id), ints);
}

Rational triple_bracket(const ModelSpec& spec, int i, int j, int k) {
	const int s = static_cast<int>(spec.s);
	for (int v : {i, j, k}) {
		if (v < 1 || v > s) { throw InvalidParameters("bracket index out of range"); }
	}
	std::array<int, 3> key{i - 1, j - 1, k - 1};
	std::sort(key.begin(), key.end());
	auto it = spec.brackets.find(key);
	return it == spec.brackets.end() ? Rational(0) : it->second;
}

const BoundaryData& boundary_conditions(const ModelSpec& spec, int endpoint) {
	if (endpoint != 0 && endpoint != 1) { throw InvalidParameters("endpoint must be 0 or 1"); }
	return spec.boundary[static_cast<std::size_t>(endpoint)];
}

const SingularIVP& singular_ivp(const ModelSpec& spec, int endpoint) {
	if (endpoint != 0 && endpoint != 1) { throw InvalidParameters("endpoint must be 0 or 1"); }
	return spec.ivp[static_cast<std::size_t>(endpoint)];
}

std::optional<std::vector<int>> symmetry_map(const ModelSpec& spec) { return spec.symmetry; }

void check_endpoint_env(const ModelSpec& spec, int endpoint, const ParamEnv& env) {
	if (env.count("lambda") == 0) { throw InvalidParameters("parameter 'lambda' is not bound"); }
	for (const auto& slot : boundary_conditions(spec, endpoint).slots()) {
		auto it = env.find(slot);
		if (it == env.end()) { throw InvalidParameters("parameter '" + slot + "' is not bound"); }
		if (sgn(it->second) <= 0) { throw InvalidParameters("parameter '" + slot + "' must be positive"); }
	}
}

}  // namespace cohom1
