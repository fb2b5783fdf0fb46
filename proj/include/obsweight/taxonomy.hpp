#pragma once

// Closed vocabularies for telemetry signals: measured quantity, source
// component, validity tag, and which quantities each component carries.

#include <algorithm>
#include <array>
#include <cctype>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obsweight/error.hpp"

namespace obsweight {

enum class QuantityKind { MW, MVAR, KV, TAP, STATUS };

enum class ComponentKind {
  UNIT_LOAD_TRANSFORMER,
  TRANSMISSION_TRANSFORMER,
  GENERATOR,
  TRANSMISSION_LINE,
  REACTOR_CAPACITOR,
  BUSBAR,
};

enum class ValidityTag { FAULTY, NON_CURRENT, VALID, INVALID, MANUAL };

inline constexpr std::array<QuantityKind, 5> kAllQuantities = {
    QuantityKind::MW, QuantityKind::MVAR, QuantityKind::KV, QuantityKind::TAP,
    QuantityKind::STATUS};

inline constexpr std::array<ComponentKind, 6> kAllComponents = {
    ComponentKind::UNIT_LOAD_TRANSFORMER, ComponentKind::TRANSMISSION_TRANSFORMER,
    ComponentKind::GENERATOR,             ComponentKind::TRANSMISSION_LINE,
    ComponentKind::REACTOR_CAPACITOR,     ComponentKind::BUSBAR};

inline constexpr std::array<ValidityTag, 5> kAllTags = {
    ValidityTag::FAULTY, ValidityTag::NON_CURRENT, ValidityTag::VALID, ValidityTag::INVALID,
    ValidityTag::MANUAL};

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

inline constexpr std::array<QuantityKind, 4> kTransformerQuantities = {
    QuantityKind::MW, QuantityKind::MVAR, QuantityKind::TAP, QuantityKind::STATUS};
inline constexpr std::array<QuantityKind, 4> kRotatingAndLineQuantities = {
    QuantityKind::MW, QuantityKind::MVAR, QuantityKind::KV, QuantityKind::STATUS};
inline constexpr std::array<QuantityKind, 2> kShuntQuantities = {QuantityKind::MVAR,
                                                                 QuantityKind::STATUS};
inline constexpr std::array<QuantityKind, 2> kBusbarQuantities = {QuantityKind::KV,
                                                                  QuantityKind::STATUS};

}  // namespace detail

inline constexpr std::string_view to_string(QuantityKind q) {
  switch (q) {
    case QuantityKind::MW: return "MW";
    case QuantityKind::MVAR: return "MVAR";
    case QuantityKind::KV: return "KV";
    case QuantityKind::TAP: return "TAP";
    case QuantityKind::STATUS: return "STATUS";
  }
  return "?";
}

inline constexpr std::string_view to_string(ComponentKind c) {
  switch (c) {
    case ComponentKind::UNIT_LOAD_TRANSFORMER: return "UNIT_LOAD_TRANSFORMER";
    case ComponentKind::TRANSMISSION_TRANSFORMER: return "TRANSMISSION_TRANSFORMER";
    case ComponentKind::GENERATOR: return "GENERATOR";
    case ComponentKind::TRANSMISSION_LINE: return "TRANSMISSION_LINE";
    case ComponentKind::REACTOR_CAPACITOR: return "REACTOR_CAPACITOR";
    case ComponentKind::BUSBAR: return "BUSBAR";
  }
  return "?";
}

inline constexpr std::string_view to_string(ValidityTag t) {
  switch (t) {
    case ValidityTag::FAULTY: return "FAULTY";
    case ValidityTag::NON_CURRENT: return "NON_CURRENT";
    case ValidityTag::VALID: return "VALID";
    case ValidityTag::INVALID: return "INVALID";
    case ValidityTag::MANUAL: return "MANUAL";
  }
  return "?";
}

/// Single-letter wire code of a tag (F, N, V, I, M).
inline constexpr char tag_code(ValidityTag t) {
  switch (t) {
    case ValidityTag::FAULTY: return 'F';
    case ValidityTag::NON_CURRENT: return 'N';
    case ValidityTag::VALID: return 'V';
    case ValidityTag::INVALID: return 'I';
    case ValidityTag::MANUAL: return 'M';
  }
  return '?';
}

/// Parses a quantity token, case-insensitively. "MV" is accepted as MVAR.
inline QuantityKind parse_quantity(std::string_view token) {
  const std::string u = detail::upper(token);
  if (u == "MV") return QuantityKind::MVAR;
  for (QuantityKind q : kAllQuantities) {
    if (u == to_string(q)) return q;
  }
  throw Error(ErrorKind::Parse, "unknown quantity kind '" + std::string(token) + "'");
}

inline ComponentKind parse_component(std::string_view token) {
  const std::string u = detail::upper(token);
  for (ComponentKind c : kAllComponents) {
    if (u == to_string(c)) return c;
  }
  throw Error(ErrorKind::Parse, "unknown component kind '" + std::string(token) + "'");
}

/// Parses a validity tag from its one-letter code (F, N, V, I, M), any case.
inline ValidityTag parse_tag(std::string_view code) {
  if (code.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(code[0])));
    for (ValidityTag t : kAllTags) {
      if (c == tag_code(t)) return t;
    }
  }
  throw Error(ErrorKind::Parse, "unknown validity tag '" + std::string(code) + "'");
}

/// Quantities a component reports, in canonical quantity order.
inline constexpr std::span<const QuantityKind> applicable_quantities(ComponentKind c) {
  switch (c) {
    case ComponentKind::UNIT_LOAD_TRANSFORMER:
    case ComponentKind::TRANSMISSION_TRANSFORMER:
      return detail::kTransformerQuantities;
    case ComponentKind::GENERATOR:
    case ComponentKind::TRANSMISSION_LINE:
      return detail::kRotatingAndLineQuantities;
    case ComponentKind::REACTOR_CAPACITOR:
      return detail::kShuntQuantities;
    case ComponentKind::BUSBAR:
      return detail::kBusbarQuantities;
  }
  return {};
}

inline constexpr bool validate_pair(ComponentKind c, QuantityKind q) {
  for (QuantityKind candidate : applicable_quantities(c)) {
    if (candidate == q) return true;
  }
  return false;
}

/// Components that report a quantity, in canonical component order.
inline std::vector<ComponentKind> applicable_components(QuantityKind q) {
  std::vector<ComponentKind> out;
  for (ComponentKind c : kAllComponents) {
    if (validate_pair(c, q)) out.push_back(c);
  }
  return out;
}

struct SignalPair {
  ComponentKind component;
  QuantityKind quantity;

  friend bool operator==(const SignalPair&, const SignalPair&) = default;
};

inline constexpr std::size_t kApplicablePairCount = 20;

/// Every valid (component, quantity) pair, component-major.
inline constexpr std::array<SignalPair, kApplicablePairCount> applicability_pairs() {
  std::array<SignalPair, kApplicablePairCount> out{};
  std::size_t i = 0;
  for (ComponentKind c : kAllComponents) {
    for (QuantityKind q : applicable_quantities(c)) out[i++] = {c, q};
  }
  return out;
}

/// Throws a taxonomy error if the pair is not applicable.
inline void require_pair(ComponentKind c, QuantityKind q) {
  if (validate_pair(c, q)) return;
  std::string allowed;
  for (QuantityKind a : applicable_quantities(c)) {
    if (!allowed.empty()) allowed += ", ";
    allowed += to_string(a);
  }
  throw Error(ErrorKind::Taxonomy, std::string(to_string(c)) + " does not report " +
                                       std::string(to_string(q)) + " (applicable: " + allowed +
                                       ")");
}

/// One telemetry point of an inventory.
struct SignalDescriptor {
  std::string signal_id;
  std::string area;
  std::string station;
  ComponentKind component = ComponentKind::BUSBAR;
  QuantityKind quantity = QuantityKind::KV;
  bool in_instruction = false;
  bool weighted_scope = true;

  friend bool operator==(const SignalDescriptor&, const SignalDescriptor&) = default;
};

}  // namespace obsweight
