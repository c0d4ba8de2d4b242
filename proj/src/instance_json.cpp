#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plopt/apps.hpp"
#include "plopt/errors.hpp"

namespace plopt::apps {

namespace {

using nlohmann::json;

void reject_floats(const json& j) {
  if (j.is_number_float()) throw ParseError("floating-point numbers are not accepted");
  if (j.is_object())
    for (const auto& [k, v] : j.items()) reject_floats(v);
  if (j.is_array())
    for (const auto& v : j) reject_floats(v);
}

Rational rat_field(const json& j, const std::string& what) {
  if (!j.is_string()) throw ParseError(what + " must be a rational string like \"1/2\"");
  return parse_rational(j.get<std::string>());
}

RatVec rat_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array");
  RatVec v;
  for (const auto& e : j) v.push_back(rat_field(e, what + " entry"));
  return v;
}

RatMat rat_matrix(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of arrays");
  RatMat m;
  for (const auto& row : j) m.push_back(rat_vector(row, what + " row"));
  return m;
}

std::size_t count_field(const json& j, const std::string& what) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    throw ParseError(what + " must be an integer");
  long long v = j.get<long long>();
  if (v < 0) throw ParseError(what + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

json matrix_to_json(const RatMat& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const Rational& q : row) r.push_back(rational_to_string(q));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vector_to_json(const RatVec& v) {
  json r = json::array();
  for (const Rational& q : v) r.push_back(rational_to_string(q));
  return r;
}

}  // namespace

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  reject_floats(j);
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ParseError("instance must be an object with a \"kind\" tag");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "bimatrix" || kind == "eps_proper") {
    BimatrixGame g;
    g.a1 = rat_matrix(j.at("a1"), "a1");
    g.a2 = rat_matrix(j.at("a2"), "a2");
    g.m1 = g.a1.size();
    g.m2 = g.m1 ? g.a1[0].size() : 0;
    g.validate();
    if (kind == "bimatrix") return g;
    EpsProperInstance inst;
    inst.game = std::move(g);
    inst.eps = rat_field(j.at("eps"), "eps");
    inst.validate();
    return inst;
  }
  if (kind == "threshold") {
    ThresholdGame g;
    g.n = count_field(j.at("n"), "n");
    g.t = rat_field(j.at("t"), "t");
    g.in_neighbors.assign(g.n, {});
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("edges must be [from, to] pairs");
      std::size_t from = count_field(e[0], "edge endpoint");
      std::size_t to = count_field(e[1], "edge endpoint");
      if (from >= g.n || to >= g.n) throw ParseError("edge endpoint out of range");
      g.in_neighbors[to].push_back(from);
    }
    g.validate();
    return g;
  }
  if (kind == "exchange_market") {
    ExchangeMarket mkt;
    mkt.endowments = rat_matrix(j.at("endowments"), "endowments");
    mkt.utilities = rat_matrix(j.at("utilities"), "utilities");
    mkt.n = mkt.endowments.size();
    mkt.m = mkt.n ? mkt.endowments[0].size() : 0;
    mkt.validate();
    return mkt;
  }
  if (kind == "pacing") {
    PacingGame g;
    g.values = rat_matrix(j.at("values"), "values");
    g.budgets = rat_vector(j.at("budgets"), "budgets");
    g.n = g.values.size();
    g.m = g.n ? g.values[0].size() : 0;
    g.validate();
    return g;
  }
  if (kind == "cake" || kind == "rental") {
    DivisionInstance base;
    base.n = count_field(j.at("n"), "n");
    const json& vals = j.at("valuations");
    if (!vals.is_array() || vals.size() != base.n)
      throw ParseError("valuations must be an n x n array of circuit strings");
    for (const auto& row : vals) {
      if (!row.is_array() || row.size() != base.n)
        throw ParseError("valuations must be an n x n array of circuit strings");
      std::vector<Circuit> circuits;
      for (const auto& cell : row) {
        if (!cell.is_string()) throw ParseError("valuation cells must be circuit text strings");
        circuits.push_back(circuit_from_text(cell.get<std::string>()));
      }
      base.valuations.push_back(std::move(circuits));
    }
    base.validate();
    if (kind == "cake") {
      CakeInstance inst;
      static_cast<DivisionInstance&>(inst) = std::move(base);
      return inst;
    }
    RentalInstance inst;
    static_cast<DivisionInstance&>(inst) = std::move(base);
    return inst;
  }
  throw ParseError("unknown instance kind '" + kind + "'");
}

std::string instance_to_json(const Instance& instance) {
  json j;
  if (const auto* g = std::get_if<BimatrixGame>(&instance)) {
    j["kind"] = "bimatrix";
    j["a1"] = matrix_to_json(g->a1);
    j["a2"] = matrix_to_json(g->a2);
  } else if (const auto* g = std::get_if<EpsProperInstance>(&instance)) {
    j["kind"] = "eps_proper";
    j["a1"] = matrix_to_json(g->game.a1);
    j["a2"] = matrix_to_json(g->game.a2);
    j["eps"] = rational_to_string(g->eps);
  } else if (const auto* g = std::get_if<ThresholdGame>(&instance)) {
    j["kind"] = "threshold";
    j["n"] = g->n;
    j["t"] = rational_to_string(g->t);
    json edges = json::array();
    for (std::size_t to = 0; to < g->n; ++to)
      for (std::size_t from : g->in_neighbors[to]) edges.push_back(json::array({from, to}));
    j["edges"] = std::move(edges);
  } else if (const auto* g = std::get_if<ExchangeMarket>(&instance)) {
    j["kind"] = "exchange_market";
    j["endowments"] = matrix_to_json(g->endowments);
    j["utilities"] = matrix_to_json(g->utilities);
  } else if (const auto* g = std::get_if<PacingGame>(&instance)) {
    j["kind"] = "pacing";
    j["values"] = matrix_to_json(g->values);
    j["budgets"] = vector_to_json(g->budgets);
  } else if (const auto* g = std::get_if<CakeInstance>(&instance)) {
    j["kind"] = "cake";
    j["n"] = g->n;
    json rows = json::array();
    for (const auto& row : g->valuations) {
      json r = json::array();
      for (const Circuit& c : row) r.push_back(circuit_to_text(c));
      rows.push_back(std::move(r));
    }
    j["valuations"] = std::move(rows);
  } else if (const auto* g = std::get_if<RentalInstance>(&instance)) {
    j["kind"] = "rental";
    j["n"] = g->n;
    json rows = json::array();
    for (const auto& row : g->valuations) {
      json r = json::array();
      for (const Circuit& c : row) r.push_back(circuit_to_text(c));
      rows.push_back(std::move(r));
    }
    j["valuations"] = std::move(rows);
  } else {
    throw ContractError("instance_to_json: unknown kind");
  }
  return j.dump(2) + "\n";
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

}  // namespace plopt::apps
