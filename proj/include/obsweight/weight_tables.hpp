#pragma once

// M and N weight tables, expert questionnaires, and the pipeline that turns
// questionnaires into tables. A signal's weight is M[component][quantity] x
// N[quantity][component].

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/ahp.hpp"
#include "obsweight/error.hpp"
#include "obsweight/taxonomy.hpp"

namespace obsweight {

struct WeightTables {
  // Quantity importance within each component.
  std::map<ComponentKind, std::map<QuantityKind, double>> m_table;
  // Component importance within each quantity.
  std::map<QuantityKind, std::map<ComponentKind, double>> n_table;

  friend bool operator==(const WeightTables&, const WeightTables&) = default;
};

/// Checks coverage against the applicability map, positivity, and that every
/// column sums to 100 within `column_tolerance`.
inline void validate_tables(const WeightTables& t, double column_tolerance) {
  auto check_column = [&](const std::string& name, double sum) {
    if (std::abs(sum - 100.0) > column_tolerance) {
      throw Error(ErrorKind::Validation, "column " + name + " sums to " + std::to_string(sum) +
                                             ", expected 100 +/- " +
                                             std::to_string(column_tolerance));
    }
  };
  for (ComponentKind c : kAllComponents) {
    auto it = t.m_table.find(c);
    if (it == t.m_table.end()) {
      throw Error(ErrorKind::Validation, "m_table lacks component " + std::string(to_string(c)));
    }
    double sum = 0.0;
    for (QuantityKind q : applicable_quantities(c)) {
      auto cell = it->second.find(q);
      if (cell == it->second.end()) {
        throw Error(ErrorKind::Validation, "m_table[" + std::string(to_string(c)) + "] lacks " +
                                               std::string(to_string(q)));
      }
      if (!(cell->second > 0.0) || !std::isfinite(cell->second)) {
        throw Error(ErrorKind::Validation, "m_table[" + std::string(to_string(c)) + "][" +
                                               std::string(to_string(q)) + "] must be positive");
      }
      sum += cell->second;
    }
    if (it->second.size() != applicable_quantities(c).size()) {
      throw Error(ErrorKind::Validation,
                  "m_table[" + std::string(to_string(c)) + "] has non-applicable quantities");
    }
    check_column("m_table[" + std::string(to_string(c)) + "]", sum);
  }
  if (t.m_table.size() != kAllComponents.size()) {
    throw Error(ErrorKind::Validation, "m_table has unexpected components");
  }
  for (QuantityKind q : kAllQuantities) {
    auto it = t.n_table.find(q);
    if (it == t.n_table.end()) {
      throw Error(ErrorKind::Validation, "n_table lacks quantity " + std::string(to_string(q)));
    }
    const auto components = applicable_components(q);
    double sum = 0.0;
    for (ComponentKind c : components) {
      auto cell = it->second.find(c);
      if (cell == it->second.end()) {
        throw Error(ErrorKind::Validation, "n_table[" + std::string(to_string(q)) + "] lacks " +
                                               std::string(to_string(c)));
      }
      if (!(cell->second > 0.0) || !std::isfinite(cell->second)) {
        throw Error(ErrorKind::Validation, "n_table[" + std::string(to_string(q)) + "][" +
                                               std::string(to_string(c)) + "] must be positive");
      }
      sum += cell->second;
    }
    if (it->second.size() != components.size()) {
      throw Error(ErrorKind::Validation,
                  "n_table[" + std::string(to_string(q)) + "] has non-applicable components");
    }
    check_column("n_table[" + std::string(to_string(q)) + "]", sum);
  }
  if (t.n_table.size() != kAllQuantities.size()) {
    throw Error(ErrorKind::Validation, "n_table has unexpected quantities");
  }
}

/// M x N weight of a (component, quantity) signal.
inline double signal_weight(ComponentKind component, QuantityKind quantity,
                            const WeightTables& tables) {
  auto lookup_error = [&](const char* table) {
    return Error(ErrorKind::Lookup, std::string("no ") + table + " cell for (" +
                                        std::string(to_string(component)) + ", " +
                                        std::string(to_string(quantity)) + ")");
  };
  auto m_col = tables.m_table.find(component);
  if (m_col == tables.m_table.end()) throw lookup_error("m_table");
  auto m = m_col->second.find(quantity);
  if (m == m_col->second.end()) throw lookup_error("m_table");
  auto n_col = tables.n_table.find(quantity);
  if (n_col == tables.n_table.end()) throw lookup_error("n_table");
  auto n = n_col->second.find(component);
  if (n == n_col->second.end()) throw lookup_error("n_table");
  return m->second * n->second;
}

inline double signal_weight(const SignalDescriptor& s, const WeightTables& tables) {
  return signal_weight(s.component, s.quantity, tables);
}

/// Every table cell multiplied by `factor`.
inline WeightTables scaled(WeightTables t, double factor) {
  for (auto& [c, col] : t.m_table) {
    for (auto& [q, v] : col) v *= factor;
  }
  for (auto& [q, col] : t.n_table) {
    for (auto& [c, v] : col) v *= factor;
  }
  return t;
}

/// Tables with one constant in every applicable cell.
inline WeightTables uniform_tables(double value) {
  WeightTables t;
  for (auto [c, q] : applicability_pairs()) {
    t.m_table[c][q] = value;
    t.n_table[q][c] = value;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Questionnaires

enum class ContextKind { QuantitiesWithinComponent, ComponentsWithinQuantity };

/// Which table column a matrix feeds: one component (M) or one quantity (N).
struct ComparisonContext {
  ContextKind kind = ContextKind::QuantitiesWithinComponent;
  ComponentKind component = ComponentKind::BUSBAR;
  QuantityKind quantity = QuantityKind::KV;

  static ComparisonContext of(ComponentKind c) {
    return {ContextKind::QuantitiesWithinComponent, c, QuantityKind::KV};
  }
  static ComparisonContext of(QuantityKind q) {
    return {ContextKind::ComponentsWithinQuantity, ComponentKind::BUSBAR, q};
  }

  std::string label() const {
    return kind == ContextKind::QuantitiesWithinComponent
               ? "quantities_within_component:" + std::string(to_string(component))
               : "components_within_quantity:" + std::string(to_string(quantity));
  }

  /// Canonical item tokens compared in this context.
  std::vector<std::string> canonical_items() const {
    std::vector<std::string> out;
    if (kind == ContextKind::QuantitiesWithinComponent) {
      for (QuantityKind q : applicable_quantities(component)) out.emplace_back(to_string(q));
    } else {
      for (ComponentKind c : applicable_components(quantity)) out.emplace_back(to_string(c));
    }
    return out;
  }

  friend bool operator==(const ComparisonContext& a, const ComparisonContext& b) {
    return a.label() == b.label();
  }
  friend bool operator<(const ComparisonContext& a, const ComparisonContext& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.kind == ContextKind::QuantitiesWithinComponent ? a.component < b.component
                                                            : a.quantity < b.quantity;
  }
};

/// The eleven contexts every expert answers: one per component (M columns),
/// then one per quantity (N columns).
inline std::vector<ComparisonContext> required_contexts() {
  std::vector<ComparisonContext> out;
  for (ComponentKind c : kAllComponents) out.push_back(ComparisonContext::of(c));
  for (QuantityKind q : kAllQuantities) out.push_back(ComparisonContext::of(q));
  return out;
}

struct ContextMatrix {
  ComparisonContext context;
  ahp::ComparisonMatrix matrix;
};

/// One expert's completed questionnaire.
struct Questionnaire {
  std::string expert_id;
  std::vector<ContextMatrix> matrices;
};

struct BuildOptions {
  ahp::PriorityMethod method = ahp::PriorityMethod::GeometricMean;
  enum class Aggregation { Priorities, Judgments } aggregation = Aggregation::Priorities;
  double cr_threshold = ahp::kDefaultCrThreshold;
};

/// Consistency of one matrix. `expert_id` is empty for matrices aggregated
/// across experts.
struct ContextConsistency {
  std::string expert_id;
  std::string context;
  std::size_t size = 0;
  ahp::ConsistencyReport report;
};

struct WeightDerivation {
  WeightTables tables;
  std::vector<ContextConsistency> consistency;
  std::vector<std::string> warnings;
};

namespace detail {

// Item tokens of `m` parsed and reordered into the context's canonical order.
inline ahp::ComparisonMatrix canonicalize(const ContextMatrix& cm) {
  const auto canonical = cm.context.canonical_items();
  const auto& items = cm.matrix.items();
  std::vector<std::string> parsed;
  for (const auto& token : items) {
    parsed.emplace_back(cm.context.kind == ContextKind::QuantitiesWithinComponent
                            ? to_string(parse_quantity(token))
                            : to_string(parse_component(token)));
  }
  std::vector<std::string> sorted_parsed = parsed;
  std::vector<std::string> sorted_canonical = canonical;
  std::sort(sorted_parsed.begin(), sorted_parsed.end());
  std::sort(sorted_canonical.begin(), sorted_canonical.end());
  if (sorted_parsed != sorted_canonical) {
    std::string expected;
    for (const auto& s : canonical) expected += (expected.empty() ? "" : ", ") + s;
    throw Error(ErrorKind::Validation,
                "context " + cm.context.label() + " must compare exactly: " + expected);
  }
  std::vector<std::size_t> order;
  for (const auto& want : canonical) {
    order.push_back(static_cast<std::size_t>(
        std::find(parsed.begin(), parsed.end(), want) - parsed.begin()));
  }
  auto permuted = cm.matrix.permuted(order);
  std::vector<double> entries;
  for (std::size_t r = 0; r < permuted.size(); ++r) {
    for (double v : permuted.row(r)) entries.push_back(v);
  }
  return ahp::ComparisonMatrix(canonical, std::move(entries));
}

inline void place(WeightTables& tables, const ComparisonContext& ctx,
                  const ahp::PriorityVector& pv) {
  for (std::size_t i = 0; i < pv.items.size(); ++i) {
    if (ctx.kind == ContextKind::QuantitiesWithinComponent) {
      tables.m_table[ctx.component][parse_quantity(pv.items[i])] = pv.weights[i];
    } else {
      tables.n_table[ctx.quantity][parse_component(pv.items[i])] = pv.weights[i];
    }
  }
}

}  // namespace detail

/// Derives per-expert priorities for every context, aggregates them across
/// experts and assembles the M and N tables. Inconsistent matrices produce
/// warnings, not errors.
inline WeightDerivation build_weight_tables(const std::vector<Questionnaire>& questionnaires,
                                            const BuildOptions& options = {}) {
  if (questionnaires.empty()) {
    throw Error(ErrorKind::IncompleteQuestionnaire, "no questionnaires given");
  }
  const auto contexts = required_contexts();

  // context -> per-expert canonical matrix
  std::map<ComparisonContext, std::vector<std::pair<std::string, ahp::ComparisonMatrix>>> by_context;
  std::vector<std::string> gaps;
  std::set<std::string> experts;
  for (const auto& q : questionnaires) {
    if (!experts.insert(q.expert_id).second) {
      throw Error(ErrorKind::Validation, "duplicate expert_id '" + q.expert_id + "'");
    }
    std::set<ComparisonContext> seen;
    for (const auto& cm : q.matrices) {
      if (!seen.insert(cm.context).second) {
        throw Error(ErrorKind::Validation,
                    "expert " + q.expert_id + " answers " + cm.context.label() + " twice");
      }
      by_context[cm.context].emplace_back(q.expert_id, detail::canonicalize(cm));
    }
    for (const auto& ctx : contexts) {
      if (!seen.count(ctx)) gaps.push_back("expert " + q.expert_id + " lacks " + ctx.label());
    }
  }
  if (!gaps.empty()) {
    throw ListError(ErrorKind::IncompleteQuestionnaire, "incomplete questionnaires", gaps);
  }

  WeightDerivation out;
  auto record = [&](const std::string& expert, const ComparisonContext& ctx,
                    const ahp::ComparisonMatrix& m, const ahp::PriorityVector& pv) {
    ContextConsistency cc{expert, ctx.label(), m.size(),
                          ahp::consistency(m, pv, options.cr_threshold)};
    if (!cc.report.acceptable) {
      out.warnings.push_back((expert.empty() ? std::string("aggregate") : "expert " + expert) +
                             " " + ctx.label() + ": consistency ratio " +
                             std::to_string(cc.report.consistency_ratio) + " exceeds " +
                             std::to_string(options.cr_threshold));
    }
    out.consistency.push_back(std::move(cc));
  };

  for (const auto& ctx : contexts) {
    const auto& answers = by_context.at(ctx);
    ahp::PriorityVector aggregated;
    if (options.aggregation == BuildOptions::Aggregation::Priorities) {
      std::vector<ahp::PriorityVector> per_expert;
      for (const auto& [expert, m] : answers) {
        per_expert.push_back(ahp::derive_priorities(m, options.method));
        record(expert, ctx, m, per_expert.back());
      }
      aggregated = ahp::aggregate_experts(per_expert);
    } else {
      std::vector<ahp::ComparisonMatrix> matrices;
      for (const auto& [expert, m] : answers) matrices.push_back(m);
      const auto combined = ahp::aggregate_judgments(matrices);
      aggregated = ahp::derive_priorities(combined, options.method);
      record("", ctx, combined, aggregated);
    }
    detail::place(out.tables, ctx, aggregated);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::Parse, where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

inline double require_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorKind::Parse, where + ": expected a number");
  return j.get<double>();
}

inline std::size_t require_index(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorKind::Parse, where + ": expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline std::string require_string(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) throw Error(ErrorKind::Parse, where + ": expected a string");
  return j.get<std::string>();
}

}  // namespace detail

inline nlohmann::json tables_to_json(const WeightTables& t) {
  nlohmann::json j;
  j["m_table"] = nlohmann::json::object();
  j["n_table"] = nlohmann::json::object();
  for (const auto& [c, col] : t.m_table) {
    auto& out = j["m_table"][std::string(to_string(c))];
    out = nlohmann::json::object();
    for (const auto& [q, v] : col) out[std::string(to_string(q))] = v;
  }
  for (const auto& [q, col] : t.n_table) {
    auto& out = j["n_table"][std::string(to_string(q))];
    out = nlohmann::json::object();
    for (const auto& [c, v] : col) out[std::string(to_string(c))] = v;
  }
  return j;
}

/// Parses WeightTables JSON. Structure is checked here; call validate_tables
/// for coverage and column sums.
inline WeightTables tables_from_json(const nlohmann::json& j) {
  WeightTables t;
  const auto& m = detail::require_field(j, "m_table", "weight tables");
  const auto& n = detail::require_field(j, "n_table", "weight tables");
  if (!m.is_object() || !n.is_object()) {
    throw Error(ErrorKind::Parse, "weight tables: m_table and n_table must be objects");
  }
  for (const auto& [ck, col] : m.items()) {
    const ComponentKind c = parse_component(ck);
    if (!col.is_object()) throw Error(ErrorKind::Parse, "m_table." + ck + " must be an object");
    for (const auto& [qk, v] : col.items()) {
      const QuantityKind q = parse_quantity(qk);
      require_pair(c, q);
      t.m_table[c][q] = detail::require_number(v, "m_table." + ck + "." + qk);
    }
  }
  for (const auto& [qk, col] : n.items()) {
    const QuantityKind q = parse_quantity(qk);
    if (!col.is_object()) throw Error(ErrorKind::Parse, "n_table." + qk + " must be an object");
    for (const auto& [ck, v] : col.items()) {
      const ComponentKind c = parse_component(ck);
      require_pair(c, q);
      t.n_table[q][c] = detail::require_number(v, "n_table." + qk + "." + ck);
    }
  }
  return t;
}

inline nlohmann::json context_to_json(const ComparisonContext& ctx) {
  if (ctx.kind == ContextKind::QuantitiesWithinComponent) {
    return {{"kind", "quantities_within_component"},
            {"component", std::string(to_string(ctx.component))}};
  }
  return {{"kind", "components_within_quantity"}, {"quantity", std::string(to_string(ctx.quantity))}};
}

inline ComparisonContext context_from_json(const nlohmann::json& j, const std::string& where) {
  const std::string kind = detail::require_string(detail::require_field(j, "kind", where), where + ".kind");
  if (kind == "quantities_within_component") {
    return ComparisonContext::of(parse_component(
        detail::require_string(detail::require_field(j, "component", where), where + ".component")));
  }
  if (kind == "components_within_quantity") {
    return ComparisonContext::of(parse_quantity(
        detail::require_string(detail::require_field(j, "quantity", where), where + ".quantity")));
  }
  throw Error(ErrorKind::Parse, where + ".kind: unknown context kind '" + kind + "'");
}

inline nlohmann::json judgments_to_json(const ahp::ComparisonMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& j : m.upper_triangle()) {
    out.push_back({{"row", j.row}, {"col", j.col}, {"value", j.value}});
  }
  return out;
}

/// Parses {items:[...], judgments:[{row,col,value}...]} into a matrix.
inline ahp::ComparisonMatrix matrix_from_json(const nlohmann::json& j, const std::string& where) {
  const auto& items_json = detail::require_field(j, "items", where);
  if (!items_json.is_array()) throw Error(ErrorKind::Parse, where + ".items: expected an array");
  std::vector<std::string> items;
  for (std::size_t i = 0; i < items_json.size(); ++i) {
    items.push_back(detail::require_string(items_json[i], where + ".items[" + std::to_string(i) + "]"));
  }
  if (items.size() > ahp::kMaxItems) {
    throw Error(ErrorKind::UnsupportedSize,
                where + ": at most 10 items per matrix, got " + std::to_string(items.size()));
  }
  const auto& judgments_json = detail::require_field(j, "judgments", where);
  if (!judgments_json.is_array()) {
    throw Error(ErrorKind::Parse, where + ".judgments: expected an array");
  }
  std::vector<ahp::Judgment> judgments;
  for (std::size_t i = 0; i < judgments_json.size(); ++i) {
    const std::string w = where + ".judgments[" + std::to_string(i) + "]";
    const auto& jj = judgments_json[i];
    judgments.push_back({detail::require_index(detail::require_field(jj, "row", w), w + ".row"),
                         detail::require_index(detail::require_field(jj, "col", w), w + ".col"),
                         detail::require_number(detail::require_field(jj, "value", w), w + ".value")});
  }
  try {
    return ahp::ComparisonMatrix::from_judgments(std::move(items), judgments);
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

inline nlohmann::json questionnaire_to_json(const Questionnaire& q) {
  nlohmann::json matrices = nlohmann::json::array();
  for (const auto& cm : q.matrices) {
    matrices.push_back({{"context", context_to_json(cm.context)},
                        {"items", cm.matrix.items()},
                        {"judgments", judgments_to_json(cm.matrix)}});
  }
  return {{"expert_id", q.expert_id}, {"matrices", std::move(matrices)}};
}

inline Questionnaire questionnaire_from_json(const nlohmann::json& j) {
  Questionnaire q;
  q.expert_id = detail::require_string(detail::require_field(j, "expert_id", "questionnaire"),
                                       "questionnaire.expert_id");
  if (q.expert_id.empty()) throw Error(ErrorKind::Parse, "questionnaire.expert_id is empty");
  const auto& matrices = detail::require_field(j, "matrices", "questionnaire");
  if (!matrices.is_array()) throw Error(ErrorKind::Parse, "questionnaire.matrices: expected an array");
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const std::string where = "questionnaire.matrices[" + std::to_string(i) + "]";
    ComparisonContext ctx =
        context_from_json(detail::require_field(matrices[i], "context", where), where + ".context");
    q.matrices.push_back({ctx, matrix_from_json(matrices[i], where)});
  }
  return q;
}

}  // namespace obsweight
