#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fg {

namespace {

std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string at(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void only_keys(const Json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(at(ptr, key), "unknown key");
}

const Json& require(const Json& obj, const std::string& ptr, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(at(ptr, key), "required key is missing");
  return obj.at(key);
}

bool state_symbol(const std::string& name, std::size_t n) {
  if (name.size() < 2 || name[0] != 'x') return false;
  std::size_t k = 0;
  const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
  return res.ec == std::errc() && res.ptr == name.data() + name.size() && k >= 1 && k <= n;
}

// `state_dim` > 0 admits x1..x_n.
std::string expression_text(const Json& j, const std::string& ptr, const ParamMap& params, std::size_t state_dim,
                            bool allow_time = true) {
  std::string text;
  if (j.is_number())
    text = shortest(j.get<double>());
  else if (j.is_string())
    text = j.get<std::string>();
  else
    throw ConfigError(ptr, "expected an expression string");
  Expression e;
  try {
    e = parse(text);
  } catch (const ParseError& err) {
    throw ConfigError(ptr, "cannot parse '" + text + "' at offset " + std::to_string(err.offset()) + ": " +
                               err.what());
  }
  for (const auto& sym : free_symbols(e)) {
    if (sym == "t" && allow_time) continue;
    if (params.contains(sym)) continue;
    if (state_dim > 0 && state_symbol(sym, state_dim)) continue;
    throw ConfigError(ptr, "unknown symbol '" + sym + "' in '" + text + "'");
  }
  return text;
}

double scalar(const Json& j, const std::string& ptr, const ParamMap& params) {
  double v = 0.0;
  if (j.is_number()) {
    v = j.get<double>();
  } else if (j.is_string()) {
    const std::string text = expression_text(j, ptr, params, 0, false);
    v = eval(fg::bind(parse(text), params), Environment{});
  } else {
    throw ConfigError(ptr, "expected a number or a constant expression string");
  }
  if (!std::isfinite(v)) throw ConfigError(ptr, "value is not finite");
  return v;
}

// n = 0 infers the size from the row count.
std::vector<const Json*> matrix_cells(const Json& j, const std::string& ptr, std::size_t& n) {
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a non-empty array of rows");
  if (n == 0) n = j.size();
  if (j.size() != n) throw ConfigError(ptr, "expected " + std::to_string(n) + " rows, found " + std::to_string(j.size()));
  std::vector<const Json*> cells;
  for (std::size_t i = 0; i < n; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != n)
      throw ConfigError(at(ptr, i), "expected a row of " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) cells.push_back(&row[k]);
  }
  return cells;
}

std::vector<std::string> expression_matrix(const Json& j, const std::string& ptr, std::size_t& n,
                                           const ParamMap& params) {
  const auto cells = matrix_cells(j, ptr, n);
  std::vector<std::string> out;
  for (std::size_t k = 0; k < cells.size(); ++k)
    out.push_back(expression_text(*cells[k], at(at(ptr, k / n), k % n), params, 0));
  return out;
}

SquareMatrix number_matrix(const Json& j, const std::string& ptr, std::size_t& n, const ParamMap& params) {
  const auto cells = matrix_cells(j, ptr, n);
  SquareMatrix m(n);
  for (std::size_t k = 0; k < cells.size(); ++k) m(k / n, k % n) = scalar(*cells[k], at(at(ptr, k / n), k % n), params);
  return m;
}

ParamMap parse_params(const Json& j) {
  if (!j.is_object()) throw ConfigError("/params", "expected an object of name: number");
  ParamMap out;
  for (const auto& [key, value] : j.items()) {
    const std::string ptr = at("/params", key);
    Expression e;
    try {
      e = parse(key);
    } catch (const ParseError&) {
      throw ConfigError(ptr, "not a valid parameter name");
    }
    const auto* sym = std::get_if<ast::Symbol>(&e.node());
    if (!sym || sym->kind != ast::Symbol::Kind::Param || sym->name != key)
      throw ConfigError(ptr, "reserved or invalid parameter name");
    if (!value.is_number()) throw ConfigError(ptr, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw ConfigError(ptr, "value is not finite");
    out[key] = v;
  }
  return out;
}

double positive(const Json& j, const std::string& ptr, const ParamMap& params) {
  const double v = scalar(j, ptr, params);
  if (!(v > 0.0)) throw ConfigError(ptr, "must be positive");
  return v;
}

IntegratorOverrides parse_integrator(const Json& j, const ParamMap& params) {
  const std::string ptr = "/integrator";
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  only_keys(j, ptr, {"abs_tol", "rel_tol", "max_step", "step", "max_steps", "method"});
  IntegratorOverrides o;
  if (j.contains("abs_tol")) o.abs_tol = positive(j["abs_tol"], at(ptr, "abs_tol"), params);
  if (j.contains("rel_tol")) o.rel_tol = positive(j["rel_tol"], at(ptr, "rel_tol"), params);
  if (j.contains("max_step")) o.max_step = positive(j["max_step"], at(ptr, "max_step"), params);
  if (j.contains("step")) o.step = positive(j["step"], at(ptr, "step"), params);
  if (j.contains("max_steps")) {
    const Json& v = j["max_steps"];
    if (!v.is_number_integer() || v.get<long long>() <= 0)
      throw ConfigError(at(ptr, "max_steps"), "expected a positive integer");
    o.max_steps = v.get<std::size_t>();
  }
  if (j.contains("method")) {
    const Json& v = j["method"];
    const std::string m = v.is_string() ? v.get<std::string>() : "";
    if (m == "rk45")
      o.method = IntegratorOptions::Method::RK45;
    else if (m == "rk4")
      o.method = IntegratorOptions::Method::RK4;
    else
      throw ConfigError(at(ptr, "method"), "expected \"rk45\" or \"rk4\"");
  }
  return o;
}

RiccatiConfig parse_riccati(const Json& j, std::size_t& n, const ParamMap& params) {
  const std::string ptr = "/riccati";
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  RiccatiConfig r;
  r.matrix = j.contains("m11") || j.contains("m12") || j.contains("m21") || j.contains("m22") || j.contains("Y0");
  if (r.matrix) {
    only_keys(j, ptr, {"m11", "m12", "m21", "m22", "Y0"});
    const char* names[4] = {"m11", "m12", "m21", "m22"};
    for (int b = 0; b < 4; ++b) r.blocks[b] = expression_matrix(require(j, ptr, names[b]), at(ptr, names[b]), n, params);
    r.y0_matrix = number_matrix(require(j, ptr, "Y0"), at(ptr, "Y0"), n, params);
    return r;
  }
  only_keys(j, ptr, {"f", "g", "h", "y0", "alpha"});
  r.f = expression_text(require(j, ptr, "f"), at(ptr, "f"), params, 0);
  r.g = expression_text(require(j, ptr, "g"), at(ptr, "g"), params, 0);
  r.h = expression_text(require(j, ptr, "h"), at(ptr, "h"), params, 0);
  r.y0 = scalar(require(j, ptr, "y0"), at(ptr, "y0"), params);
  if (j.contains("alpha")) {
    const Json& a = j["alpha"];
    if (!a.is_array() || a.empty()) throw ConfigError(at(ptr, "alpha"), "expected a non-empty array of expressions");
    for (std::size_t i = 0; i < a.size(); ++i)
      r.alphas.push_back(expression_text(a[i], at(at(ptr, "alpha"), i), params, 0));
  }
  return r;
}

}  // namespace

IntegratorOptions IntegratorOverrides::apply(IntegratorOptions base) const {
  if (abs_tol) base.abs_tol = *abs_tol;
  if (rel_tol) base.rel_tol = *rel_tol;
  if (max_step) base.max_step = *max_step;
  if (step) base.step = *step;
  if (max_steps) base.max_steps = *max_steps;
  if (method) base.method = *method;
  return base;
}

std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
    throw ConfigError("/params", "expected name=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

SystemConfig parse_config(const Json& input, const std::vector<std::string>& overrides) {
  if (!input.is_object()) throw ConfigError("", "expected a JSON object");
  Json doc = input;
  only_keys(doc, "", {"schema", "name", "description", "dimension", "matrix", "nonlinear", "period", "params", "span",
                      "integrator", "gauge", "target_B", "P0", "x0", "riccati"});
  if (doc.contains("schema") && doc["schema"] != kConfigSchema)
    throw ConfigError("/schema", std::string("expected \"") + kConfigSchema + "\"");

  SystemConfig c;
  if (doc.contains("params")) c.params = parse_params(doc["params"]);
  for (const auto& kv : overrides) {
    const auto [key, value] = split_assignment(kv);
    if (!c.params.contains(key)) throw ConfigError(at("/params", key), "override of an undeclared parameter");
    c.params[key] = scalar(Json(value), at("/params", key), c.params);
  }

  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("/name", "expected a string");
    c.name = doc["name"].get<std::string>();
  }
  if (doc.contains("dimension")) {
    const Json& d = doc["dimension"];
    if (!d.is_number_integer() || d.get<long long>() < 1 || d.get<long long>() > 64)
      throw ConfigError("/dimension", "expected an integer between 1 and 64");
    c.dimension = d.get<std::size_t>();
  }
  std::size_t& n = c.dimension;
  if (doc.contains("matrix")) c.matrix = expression_matrix(doc["matrix"], "/matrix", n, c.params);
  if (doc.contains("riccati")) c.riccati = parse_riccati(doc["riccati"], n, c.params);
  if (doc.contains("nonlinear")) {
    const Json& j = doc["nonlinear"];
    if (n == 0) throw ConfigError("/nonlinear", "needs /dimension or /matrix");
    if (!j.is_array() || j.size() != n)
      throw ConfigError("/nonlinear", "expected an array of " + std::to_string(n) + " expressions");
    std::vector<std::string> comps;
    for (std::size_t i = 0; i < n; ++i) comps.push_back(expression_text(j[i], at("/nonlinear", i), c.params, n));
    c.nonlinear = std::move(comps);
  }
  if (doc.contains("period")) c.period = positive(doc["period"], "/period", c.params);
  if (doc.contains("span")) {
    const Json& j = doc["span"];
    if (!j.is_array() || j.size() != 2) throw ConfigError("/span", "expected [t0, t1]");
    const double t0 = scalar(j[0], "/span/0", c.params);
    const double t1 = scalar(j[1], "/span/1", c.params);
    if (t0 == t1) throw ConfigError("/span", "t0 and t1 must differ");
    c.span = std::array<double, 2>{t0, t1};
  }
  if (doc.contains("integrator")) {
    c.integrator = parse_integrator(doc["integrator"], c.params);
    try {
      c.integrator.apply({}).validate();
    } catch (const Error& e) {
      throw ConfigError("/integrator", e.what());
    }
  }
  if (doc.contains("gauge")) {
    const Json& g = doc["gauge"];
    if (!g.is_object()) throw ConfigError("/gauge", "expected an object with key P");
    only_keys(g, "/gauge", {"P"});
    c.gauge_p = expression_matrix(require(g, "/gauge", "P"), "/gauge/P", n, c.params);
  }
  if (doc.contains("target_B")) c.target_b = number_matrix(doc["target_B"], "/target_B", n, c.params);
  if (doc.contains("P0")) c.p0 = number_matrix(doc["P0"], "/P0", n, c.params);
  if (doc.contains("x0")) {
    const Json& j = doc["x0"];
    if (n == 0) throw ConfigError("/x0", "needs /dimension or /matrix");
    if (!j.is_array() || j.size() != n) throw ConfigError("/x0", "expected " + std::to_string(n) + " numbers");
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(scalar(j[i], at("/x0", i), c.params));
    c.x0 = std::move(x);
  }
  if (c.riccati && !c.riccati->matrix && doc.contains("dimension") && n != 1)
    throw ConfigError("/dimension", "a scalar Riccati config has dimension 1");
  return c;
}

SystemConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, overrides);
}

TimeMatrix SystemConfig::system_matrix() const {
  if (matrix.empty()) throw ConfigError("/matrix", "required key is missing");
  return TimeMatrix::parse(dimension, matrix, params);
}

TimeMatrix SystemConfig::gauge_matrix() const {
  if (!gauge_p) throw ConfigError("/gauge/P", "required key is missing");
  return TimeMatrix::parse(dimension, *gauge_p, params);
}

NonlinearTerm SystemConfig::nonlinear_term() const {
  if (!nonlinear) return NonlinearTerm::zero(dimension);
  return NonlinearTerm::parse(*nonlinear, params);
}

ScalarRiccati SystemConfig::scalar_riccati() const {
  if (!riccati || riccati->matrix) throw ConfigError("/riccati", "expected keys f, g, h, y0");
  return ScalarRiccati::parse(riccati->f, riccati->g, riccati->h, riccati->y0, params);
}

MatrixRiccati SystemConfig::matrix_riccati() const {
  if (!riccati || !riccati->matrix) throw ConfigError("/riccati", "expected keys m11, m12, m21, m22, Y0");
  MatrixRiccati r;
  r.m11 = TimeMatrix::parse(dimension, riccati->blocks[0], params);
  r.m12 = TimeMatrix::parse(dimension, riccati->blocks[1], params);
  r.m21 = TimeMatrix::parse(dimension, riccati->blocks[2], params);
  r.m22 = TimeMatrix::parse(dimension, riccati->blocks[3], params);
  r.y0 = riccati->y0_matrix;
  return r;
}

std::vector<Expression> SystemConfig::alpha_expressions() const {
  std::vector<Expression> out;
  if (riccati)
    for (const auto& a : riccati->alphas) out.push_back(fg::bind(parse(a), params));
  return out;
}

}  // namespace fg
