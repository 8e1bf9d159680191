#pragma once

/**
 * Configuration loading, command dispatch, and byte-stable report emission.
 *
 * Configs and reports are JSON; polynomials travel as strings in the input
 * grammar, series are objects keyed "nu^0", "nu^1", ..., and operators are
 * term lists with explicit exponent vectors. Reports serialize with sorted
 * containers and insertion-ordered objects only, so identical inputs produce
 * byte-identical output.
 *
 * Exit-code convention used by the driver: 0 all checks passed, 1 a
 * mathematical check failed (including module errors raised mid-command),
 * 2 the input was unusable (malformed JSON, schema violation, geometry
 * invariant failure, unknown command).
 */

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fedosov/cochain.hpp"
#include "fedosov/engine.hpp"
#include "fedosov/geometry.hpp"
#include "fedosov/moment.hpp"
#include "fedosov/parse.hpp"
#include "fedosov/report.hpp"

namespace fedosov {
namespace cli {

using Json = nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

/** Unusable input: malformed JSON, schema violation, invalid geometry. */
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- Schema helpers -----------------------------------------------------------

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where + "/" + key, "missing required field");
  return *it;
}

inline int require_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

inline std::string require_string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

/** "nu^k" -> k, rejecting anything else. */
inline int nu_key(const std::string& key, const std::string& where) {
  if (key.size() < 4 || key.size() > 8 || key.compare(0, 3, "nu^") != 0)
    fail(where, "keys must look like \"nu^k\"");
  for (std::size_t i = 3; i < key.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(key[i])))
      fail(where, "keys must look like \"nu^k\"");
  return std::stoi(key.substr(3));
}

inline std::string nu_label(int k) { return "nu^" + std::to_string(k); }

/**
 * Replace custom coordinate names by the parser's x1..xn. Identifier tokens
 * ([A-Za-z_][A-Za-z0-9_]*) are matched whole, so one name can not capture a
 * prefix of another.
 */
inline std::string rename_coordinates(const std::string& text,
                                      const std::vector<std::string>& names) {
  std::string out;
  std::size_t i = 0;
  const auto is_head = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  };
  const auto is_body = [&](char c) {
    return is_head(c) || std::isdigit(static_cast<unsigned char>(c));
  };
  while (i < text.size()) {
    if (!is_head(text[i])) {
      out += text[i++];
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && is_body(text[j])) ++j;
    const std::string token = text.substr(i, j - i);
    const auto it = std::find(names.begin(), names.end(), token);
    out += it == names.end()
               ? token
               : "x" + std::to_string(std::distance(names.begin(), it) + 1);
    i = j;
  }
  return out;
}

}  // namespace detail

// --- Job configuration --------------------------------------------------------

struct JobConfig {
  int dim;
  std::vector<std::string> coordinates;  // names as written in the config
  ChartGeometry geometry;
  Truncation truncation;
  Json raw;  // full document; command blocks are read on dispatch
};

/** Parse one polynomial string, mapping names and decorating parse errors. */
inline Poly config_poly(const JobConfig& cfg, const std::string& text, const std::string& where) {
  try {
    return parse_poly(detail::rename_coordinates(text, cfg.coordinates), cfg.dim);
  } catch (const ParseError& e) {
    detail::fail(where, std::string("\"") + text + "\" does not parse: " + e.what());
  }
}

namespace detail {

inline Matrix config_matrix(const JobConfig& cfg, const Json& j, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != cfg.dim)
    fail(where, "expected " + std::to_string(cfg.dim) + " rows");
  Matrix m = make_matrix(cfg.dim);
  for (int i = 0; i < cfg.dim; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    const std::string rw = where + "/" + std::to_string(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cfg.dim)
      fail(rw, "expected " + std::to_string(cfg.dim) + " entries");
    for (int k = 0; k < cfg.dim; ++k)
      m[i][k] = config_poly(cfg, require_string(row[static_cast<std::size_t>(k)],
                                                rw + "/" + std::to_string(k)),
                            rw + "/" + std::to_string(k));
  }
  return m;
}

}  // namespace detail

/** Load and fully validate a config file (geometry validation included). */
inline JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": not valid JSON: " + e.what());
  }

  const int dim = detail::require_int(detail::require(doc, "dimension", ""), "/dimension");
  if (dim < 2 || dim > Monomial::kMaxVars || dim % 2 != 0)
    detail::fail("/dimension", "chart dimension must be even and between 2 and 8");

  std::vector<std::string> names;
  if (doc.contains("coordinates")) {
    const Json& c = doc["coordinates"];
    if (!c.is_array() || static_cast<int>(c.size()) != dim)
      detail::fail("/coordinates", "expected one name per coordinate");
    for (std::size_t i = 0; i < c.size(); ++i)
      names.push_back(
          detail::require_string(c[i], "/coordinates/" + std::to_string(i)));
  } else {
    for (int v = 1; v <= dim; ++v) names.push_back("x" + std::to_string(v));
  }

  const Json& tj = detail::require(doc, "truncation", "");
  const int order =
      detail::require_int(detail::require(tj, "nu_order", "/truncation"), "/truncation/nu_order");
  Truncation trunc = tj.contains("degree_cap")
                         ? Truncation(order, detail::require_int(tj["degree_cap"],
                                                                 "/truncation/degree_cap"))
                         : Truncation(order);

  // Geometry entries parse against a provisional config carrying dim + names.
  JobConfig proto{dim, names, ChartGeometry::flat(dim), trunc, doc};
  Matrix omega = detail::config_matrix(proto, detail::require(doc, "omega", ""), "/omega");
  Matrix lambda;
  if (doc.contains("lambda")) {
    lambda = detail::config_matrix(proto, doc["lambda"], "/lambda");
  } else {
    try {
      lambda = symplectic_inverse(omega);
    } catch (const std::invalid_argument& e) {
      detail::fail("/omega", std::string("no polynomial inverse: ") + e.what());
    }
  }
  Tensor3 gamma = make_tensor3(dim);
  if (doc.contains("gamma")) {
    const Json& gj = doc["gamma"];
    if (!gj.is_array() || static_cast<int>(gj.size()) != dim)
      detail::fail("/gamma", "expected one matrix per upper index");
    for (int l = 0; l < dim; ++l)
      gamma[l] = detail::config_matrix(proto, gj[static_cast<std::size_t>(l)],
                                       "/gamma/" + std::to_string(l));
  }
  std::map<int, Matrix> center;
  if (doc.contains("center")) {
    const Json& cj = doc["center"];
    if (!cj.is_object()) detail::fail("/center", "expected an object keyed \"nu^k\"");
    for (const auto& [key, form] : cj.items()) {
      const int k = detail::nu_key(key, "/center");
      if (k < 1) detail::fail("/center/" + key, "central forms start at nu^1");
      center[k] = detail::config_matrix(proto, form, "/center/" + key);
    }
  }

  JobConfig cfg{dim, std::move(names), ChartGeometry::flat(dim), trunc, std::move(doc)};
  try {
    cfg.geometry =
        ChartGeometry(std::move(omega), std::move(lambda), std::move(gamma), std::move(center));
  } catch (const std::invalid_argument& e) {
    detail::fail("/omega", e.what());
  }
  const ValidationReport rep = validate_geometry(cfg.geometry);
  if (!rep.pass()) {
    for (const auto& c : rep.checks)
      if (!c.pass)
        detail::fail("/geometry", c.name + (c.detail.empty() ? "" : ": " + c.detail));
  }
  return cfg;
}

// --- Canonical JSON builders ----------------------------------------------------

namespace detail {

inline Json checks_json(const ValidationReport& rep) {
  Json out = Json::array();
  for (const auto& c : rep.checks)
    out.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return out;
}

inline Json series_json(const FormalFunction& f) {
  Json out = Json::object();
  for (int k = 0; k <= f.order(); ++k) out[nu_label(k)] = f.at(k).to_string();
  return out;
}

inline Json exponents_json(const Monomial& m, int dim) {
  Json out = Json::array();
  for (int v = 0; v < dim; ++v) out.push_back(m.exponent(v));
  return out;
}

inline Json operator_json(const DiffOperator& e, int dim) {
  Json out = Json::array();
  for (const auto& [alpha, c] : e.table())
    out.push_back(Json{{"exponents", exponents_json(alpha, dim)}, {"value", c.to_string()}});
  return out;
}

inline Json table_json(const BidiffOperator& b, int dim) {
  Json out = Json::array();
  for (const auto& [key, c] : b.table())
    out.push_back(Json{{"du", exponents_json(key.first, dim)},
                       {"dv", exponents_json(key.second, dim)},
                       {"value", c.to_string()}});
  return out;
}

inline Json tables_json(const StarProduct& s) {
  Json out = Json::object();
  for (int r = 0; r <= s.nu_order; ++r) out[nu_label(r)] = table_json(s.at(r), s.dim);
  return out;
}

inline Json tensor3_json(const Tensor3& t) {
  Json out = Json::array();
  for (const auto& m : t) {
    Json mj = Json::array();
    for (const auto& row : m) {
      Json rj = Json::array();
      for (const auto& p : row) rj.push_back(p.to_string());
      mj.push_back(std::move(rj));
    }
    out.push_back(std::move(mj));
  }
  return out;
}

}  // namespace detail

// --- Report ---------------------------------------------------------------------

struct Report {
  Json doc;
  bool pass = false;

  /** Canonical serialization: two-space indent, one trailing newline. */
  std::string to_string() const { return doc.dump(2) + "\n"; }
};

// --- Command-block readers --------------------------------------------------------

namespace detail {

inline const Json& command_block(const JobConfig& cfg, const std::string& name) {
  if (!cfg.raw.contains(name))
    fail("/" + name, "command needs this configuration block");
  return cfg.raw.at(name);
}

/** A series input: either a plain polynomial string or {"nu^k": "..."}; padded to `order`. */
inline FormalFunction config_series(const JobConfig& cfg, const Json& j, int order,
                                    const std::string& where) {
  if (j.is_string())
    return FormalFunction::from_poly(config_poly(cfg, j.get<std::string>(), where), order);
  if (!j.is_object()) fail(where, "expected a polynomial string or an object keyed \"nu^k\"");
  FormalFunction f(cfg.dim, order);
  for (const auto& [key, value] : j.items()) {
    const int k = nu_key(key, where);
    if (k > order) fail(where + "/" + key, "order exceeds truncation.nu_order");
    f.at(k) = config_poly(cfg, require_string(value, where + "/" + key), where + "/" + key);
  }
  return f;
}

inline VectorField config_vector_field(const JobConfig& cfg, const Json& j,
                                       const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != cfg.dim)
    fail(where, "expected one component per coordinate");
  VectorField x;
  for (std::size_t i = 0; i < j.size(); ++i)
    x.push_back(config_poly(cfg, require_string(j[i], where + "/" + std::to_string(i)),
                            where + "/" + std::to_string(i)));
  return x;
}

inline std::vector<Poly> config_map(const JobConfig& cfg, const Json& j,
                                    const std::string& where) {
  return config_vector_field(cfg, j, where);  // same shape: one polynomial per coordinate
}

inline EquivalenceSeries config_equivalence(const JobConfig& cfg, const Json& j,
                                            const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object keyed \"nu^k\"");
  EquivalenceSeries e(cfg.dim, cfg.truncation.nu_order);
  for (const auto& [key, terms] : j.items()) {
    const int r = nu_key(key, where);
    if (r < 1 || r > cfg.truncation.nu_order)
      fail(where + "/" + key, "generators run from nu^1 to nu^N");
    if (!terms.is_array()) fail(where + "/" + key, "expected a list of terms");
    DiffOperator op(cfg.dim);
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tw = where + "/" + key + "/" + std::to_string(t);
      const Json& term = terms[t];
      const Json& ej = require(term, "exponents", tw);
      if (!ej.is_array() || static_cast<int>(ej.size()) != cfg.dim)
        fail(tw + "/exponents", "expected one exponent per coordinate");
      std::vector<unsigned> exps;
      for (std::size_t v = 0; v < ej.size(); ++v) {
        const int exp = require_int(ej[v], tw + "/exponents/" + std::to_string(v));
        if (exp < 0) fail(tw + "/exponents", "exponents are nonnegative");
        exps.push_back(static_cast<unsigned>(exp));
      }
      op.add(Monomial::from_exponents(exps),
             config_poly(cfg, require_string(require(term, "value", tw), tw + "/value"),
                         tw + "/value"));
    }
    e.generator(r) = op;
  }
  try {
    e.check_admissible();
  } catch (const std::invalid_argument& err) {
    fail(where, err.what());
  }
  return e;
}

/** Test functions for the moment commands: configured list or a default basis. */
inline std::vector<FormalFunction> config_test_functions(const JobConfig& cfg, const Json& block,
                                                         const std::string& where) {
  std::vector<FormalFunction> tests;
  const int order = cfg.truncation.nu_order;
  if (block.is_object() && block.contains("test_functions")) {
    const Json& list = block.at("test_functions");
    if (!list.is_array() || list.empty()) fail(where + "/test_functions", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      tests.push_back(
          config_series(cfg, list[i], order, where + "/test_functions/" + std::to_string(i)));
    return tests;
  }
  for (const Monomial& m : monomials_up_to(cfg.dim, 2))
    tests.push_back(FormalFunction::from_poly(Poly::monomial(cfg.dim, m, Rational(1)), order));
  return tests;
}

}  // namespace detail

// --- Command handlers --------------------------------------------------------------

namespace detail {

inline Report finish(Json doc, bool pass) {
  doc["pass"] = pass;
  return Report{std::move(doc), pass};
}

inline Json header(const JobConfig& cfg, const std::string& command) {
  Json doc = Json::object();
  doc["command"] = command;
  doc["dimension"] = cfg.dim;
  doc["truncation"] =
      Json{{"nu_order", cfg.truncation.nu_order}, {"degree_cap", cfg.truncation.degree_cap}};
  return doc;
}

inline Report cmd_validate(const JobConfig& cfg, Json doc) {
  const ValidationReport rep = validate_geometry(cfg.geometry);
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_build(const JobConfig& cfg, Json doc) {
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const ValidationReport rep = flatness_check(fd);
  doc["lowest_r_degree"] = fd.lowest_r_degree;
  doc["r"] = fd.r.to_string();
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_star(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "star");
  const int order = cfg.truncation.nu_order;
  const FormalFunction u = config_series(cfg, require(block, "u", "/star"), order, "/star/u");
  const FormalFunction v = config_series(cfg, require(block, "v", "/star"), order, "/star/v");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  doc["series"] = series_json(star_multiply(fd, u, v));
  return finish(std::move(doc), true);
}

inline Report cmd_cochains(const JobConfig& cfg, Json doc) {
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  doc["tables"] = tables_json(extract_cochains(fd, cfg.truncation.nu_order));
  return finish(std::move(doc), true);
}

inline Report cmd_assoc_check(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "associativity");
  const Json& tj = require(block, "triples", "/associativity");
  if (!tj.is_array() || tj.empty()) fail("/associativity/triples", "expected a list of triples");
  const int order = cfg.truncation.nu_order;
  std::vector<std::array<FormalFunction, 3>> triples;
  for (std::size_t i = 0; i < tj.size(); ++i) {
    const std::string where = "/associativity/triples/" + std::to_string(i);
    const Json& t = tj[i];
    if (!t.is_array() || t.size() != 3) fail(where, "expected [u, v, w]");
    triples.push_back({config_series(cfg, t[0], order, where + "/0"),
                       config_series(cfg, t[1], order, where + "/1"),
                       config_series(cfg, t[2], order, where + "/2")});
  }
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const ValidationReport rep = check_associativity(fd, triples);
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_naturality(const JobConfig& cfg, Json doc) {
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const ValidationReport rep = naturality_check(extract_cochains(fd, cfg.truncation.nu_order));
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_extract_connection(const JobConfig& cfg, Json doc) {
  if (cfg.truncation.nu_order < 2)
    fail("/truncation/nu_order", "extract-connection needs nu_order >= 2");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const StarProduct s = extract_cochains(fd, cfg.truncation.nu_order);
  const ConnectionExtraction ex =
      extract_connection(s, cfg.geometry.omega, cfg.geometry.lambda);
  doc["gamma"] = tensor3_json(ex.gamma);
  doc["e1"] = operator_json(ex.e1, cfg.dim);
  doc["remainder"] = table_json(ex.remainder, cfg.dim);
  doc["checks"] = checks_json(ex.diagnostics);
  return finish(std::move(doc), ex.diagnostics.pass());
}

inline Report cmd_equiv_apply(const JobConfig& cfg, Json doc) {
  const EquivalenceSeries e =
      config_equivalence(cfg, command_block(cfg, "equivalence"), "/equivalence");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const StarProduct s2 =
      apply_equivalence(extract_cochains(fd, cfg.truncation.nu_order), e);
  doc["tables"] = tables_json(s2);
  return finish(std::move(doc), true);
}

inline Report cmd_equiv_construct(const JobConfig& cfg, Json doc) {
  const EquivalenceSeries e =
      config_equivalence(cfg, command_block(cfg, "equivalence"), "/equivalence");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const StarProduct s = extract_cochains(fd, cfg.truncation.nu_order);
  const StarProduct s2 = apply_equivalence(s, e);
  const EquivalenceSeries rec = construct_equivalence(s, s2);
  Json gens = Json::object();
  for (int r = 1; r <= rec.nu_order; ++r)
    gens[nu_label(r)] = operator_json(rec.generator(r), cfg.dim);
  doc["generators"] = gens;
  const bool round_trip = apply_equivalence(s, rec) == s2;
  doc["checks"] = Json::array(
      {Json{{"name", "round_trip"}, {"pass", round_trip}, {"detail", ""}}});
  return finish(std::move(doc), round_trip);
}

inline Report cmd_derivation_check(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "symmetry");
  const VectorField x =
      config_vector_field(cfg, require(block, "vector_field", "/symmetry"),
                          "/symmetry/vector_field");
  const DerivationReport rep = check_derivation(x, cfg.geometry);
  doc["checks"] = checks_json(rep.diagnostics);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_moment_map(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "symmetry");
  const VectorField x =
      config_vector_field(cfg, require(block, "vector_field", "/symmetry"),
                          "/symmetry/vector_field");
  const DerivationReport gate = check_derivation(x, cfg.geometry);
  if (!gate.pass()) {
    doc["checks"] = checks_json(gate.diagnostics);
    return finish(std::move(doc), false);
  }
  const MomentResult m = hamiltonian_lambda(x, cfg.geometry, cfg.truncation.nu_order);
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  ValidationReport rep = gate.diagnostics;
  for (const auto& c : m.diagnostics.checks) rep.add(c.name, c.pass, c.detail);
  const ValidationReport inner =
      verify_inner(x, m.lambda, fd, config_test_functions(cfg, block, "/symmetry"));
  for (const auto& c : inner.checks) rep.add(c.name, c.pass, c.detail);
  doc["lambda"] = series_json(m.lambda);
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_cartan_check(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "symmetry");
  const VectorField x =
      config_vector_field(cfg, require(block, "vector_field", "/symmetry"),
                          "/symmetry/vector_field");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const WeylSection t = t_of_x(x, fd);
  auto probes = fedosov::detail::flatness_probes(cfg.dim, fd.truncation);
  WeylSection quad(cfg.dim, fd.truncation);
  quad.add_term(0, Monomial::variable(0) * Monomial::variable(cfg.dim - 1), 0, Poly(cfg.dim, 1));
  probes.push_back(quad);
  const ValidationReport rep = cartan_residual_with(x, fd, t, probes);
  doc["t"] = t.to_string();
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_invariance_check(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "invariance");
  const std::vector<Poly> tau =
      config_map(cfg, require(block, "map", "/invariance"), "/invariance/map");
  const std::vector<Poly> inv =
      config_map(cfg, require(block, "inverse", "/invariance"), "/invariance/inverse");
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const ValidationReport rep =
      check_invariance(extract_cochains(fd, cfg.truncation.nu_order), tau, inv);
  doc["checks"] = checks_json(rep);
  return finish(std::move(doc), rep.pass());
}

inline Report cmd_transport(const JobConfig& cfg, Json doc) {
  const Json& block = command_block(cfg, "symmetry");
  const VectorField x =
      config_vector_field(cfg, require(block, "vector_field", "/symmetry"),
                          "/symmetry/vector_field");
  const EquivalenceSeries e =
      config_equivalence(cfg, command_block(cfg, "equivalence"), "/equivalence");
  const DerivationReport gate = check_derivation(x, cfg.geometry);
  if (!gate.pass()) {
    doc["checks"] = checks_json(gate.diagnostics);
    return finish(std::move(doc), false);
  }
  const MomentResult m = hamiltonian_lambda(x, cfg.geometry, cfg.truncation.nu_order);
  const FedosovData fd = solve_r(cfg.geometry, cfg.truncation);
  const StarProduct s2 =
      apply_equivalence(extract_cochains(fd, cfg.truncation.nu_order), e);
  const FormalFunction mu =
      transport_moment(e, m.lambda, s2, x, config_test_functions(cfg, block, "/symmetry"));
  doc["lambda"] = series_json(m.lambda);
  doc["mu"] = series_json(mu);
  return finish(std::move(doc), true);
}

}  // namespace detail

// --- Dispatch -----------------------------------------------------------------------

/**
 * Run one command against a loaded config. Configuration problems discovered
 * here (missing blocks, unknown command) raise ConfigError; mathematical
 * failures raised by the modules are caught and become a failing report with
 * the message surfaced verbatim.
 */
inline Report run_command(const JobConfig& cfg, const std::string& command) {
  using Handler = Report (*)(const JobConfig&, Json);
  static const std::map<std::string, Handler> handlers = {
      {"validate", detail::cmd_validate},
      {"build", detail::cmd_build},
      {"star", detail::cmd_star},
      {"cochains", detail::cmd_cochains},
      {"assoc-check", detail::cmd_assoc_check},
      {"naturality", detail::cmd_naturality},
      {"extract-connection", detail::cmd_extract_connection},
      {"equiv-apply", detail::cmd_equiv_apply},
      {"equiv-construct", detail::cmd_equiv_construct},
      {"derivation-check", detail::cmd_derivation_check},
      {"moment-map", detail::cmd_moment_map},
      {"cartan-check", detail::cmd_cartan_check},
      {"invariance-check", detail::cmd_invariance_check},
      {"transport", detail::cmd_transport},
  };
  const auto it = handlers.find(command);
  if (it == handlers.end()) throw ConfigError("unknown command \"" + command + "\"");
  Json doc = detail::header(cfg, command);
  try {
    return it->second(cfg, std::move(doc));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    Json failed = detail::header(cfg, command);
    failed["checks"] = Json::array(
        {Json{{"name", "error"}, {"pass", false}, {"detail", e.what()}}});
    return detail::finish(std::move(failed), false);
  }
}

}  // namespace cli
}  // namespace fedosov
