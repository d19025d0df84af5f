#pragma once

// Structural rule checks with phase gating.
//
//   every Goal binds its three slots                  E-UNDERSPECIFIED-GOAL (always an error)
//   every Goal has a Context, interim onwards         E-MISSING-CONTEXT
//   evidential supports links carry a warrant        W/E-MISSING-WARRANT (error when operational)
//   evidential claims are evidenced or assumed        W/E-UNEVIDENCED (error from interim)
//   property claims lead to some Goal                 W/E-ORPHAN (error when operational)
//   at least one Goal exists, interim onwards         E-NO-GOAL

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "eac/model.hpp"
#include "eac/status.hpp"

namespace eac {

enum class Severity { Error, Warning };
template <>
struct EnumNames<Severity> {
  static constexpr std::array<std::string_view, 2> names{"error", "warning"};
};

struct Finding {
  std::string code;
  std::string target_id;
  Severity severity = Severity::Error;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  Phase phase = Phase::Preliminary;
  std::vector<Finding> findings;
  StatusMap statuses;

  std::size_t count(Severity s) const {
    return std::count_if(findings.begin(), findings.end(), [s](const Finding& f) { return f.severity == s; });
  }
  std::size_t errors() const { return count(Severity::Error); }
  std::size_t warnings() const { return count(Severity::Warning); }
  bool has(std::string_view code) const {
    return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
  }
};

namespace finding_codes {
inline constexpr std::string_view underspecified_goal = "UNDERSPECIFIED-GOAL";
inline constexpr std::string_view missing_context = "MISSING-CONTEXT";
inline constexpr std::string_view missing_warrant = "MISSING-WARRANT";
inline constexpr std::string_view unevidenced = "UNEVIDENCED";
inline constexpr std::string_view orphan = "ORPHAN";
inline constexpr std::string_view no_goal = "NO-GOAL";
inline constexpr std::string_view cycle = "CYCLE";
}  // namespace finding_codes

namespace detail {

inline Finding make_finding(Severity sev, std::string_view code, std::string target, std::string message) {
  std::string full = sev == Severity::Error ? "E-" : "W-";
  full += code;
  return {std::move(full), std::move(target), sev, std::move(message)};
}

// True when a Goal is reachable from `start` by following supports links.
inline bool reaches_goal(const Case& c, const GraphIndex& index, const ElementId& start) {
  std::set<ElementId> seen{start};
  std::vector<ElementId> stack{start};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    const Element* e = c.element(cur);
    if (e && e->kind == ElementKind::Goal) return true;
    for (const Link* l : index.out(cur))
      if (l->kind == LinkKind::Supports && seen.insert(l->to).second) stack.push_back(l->to);
  }
  return false;
}

}  // namespace detail

// Validates at `phase`, or at the case's own phase when none is given.
inline ValidationReport validate(const Case& c, std::optional<Phase> phase = std::nullopt) {
  using detail::make_finding;
  ValidationReport report;
  report.phase = phase.value_or(c.phase);
  const Phase p = report.phase;
  const auto at_least = [p](Phase q) { return p >= q; };
  const GraphIndex index(c);
  auto& out = report.findings;

  std::size_t goals = 0;
  for (const auto& [id, e] : c.elements) {
    switch (e.kind) {
      case ElementKind::Goal: {
        ++goals;
        if (!e.slots)
          out.push_back(make_finding(Severity::Error, finding_codes::underspecified_goal, id,
                                     "goal does not bind its {system}, {context} and {goal} slots"));
        if (at_least(Phase::Interim)) {
          bool has_context = std::any_of(index.in(id).begin(), index.in(id).end(),
                                         [](const Link* l) { return l->kind == LinkKind::ContextOf; });
          if (!has_context)
            out.push_back(make_finding(Severity::Error, finding_codes::missing_context, id,
                                       "goal has no context element"));
        }
        break;
      }
      case ElementKind::EvidentialClaim: {
        bool covered = std::any_of(index.in(id).begin(), index.in(id).end(), [&](const Link* l) {
          if (l->kind == LinkKind::Evidences) return true;
          const Element* src = c.element(l->from);
          return l->kind == LinkKind::Supports && src && src->kind == ElementKind::Assumption;
        });
        if (!covered) {
          auto sev = at_least(Phase::Interim) ? Severity::Error : Severity::Warning;
          out.push_back(make_finding(sev, finding_codes::unevidenced, id,
                                     "evidential claim has no evidence and no covering assumption"));
        }
        break;
      }
      case ElementKind::PropertyClaim:
        if (!detail::reaches_goal(c, index, id)) {
          auto sev = at_least(Phase::Operational) ? Severity::Error : Severity::Warning;
          out.push_back(make_finding(sev, finding_codes::orphan, id, "property claim does not lead to any goal"));
        }
        break;
      default:
        break;
    }
  }

  for (const auto& [id, l] : c.links) {
    if (!detail::StatusEngine::needs_warrant(c, l)) continue;
    if (index.warrants_of(id).empty()) {
      auto sev = at_least(Phase::Operational) ? Severity::Error : Severity::Warning;
      out.push_back(make_finding(sev, finding_codes::missing_warrant, id,
                                 "supports link from evidential claim " + l.from + " to " + l.to + " has no warrant"));
    }
  }

  if (goals == 0 && at_least(Phase::Interim))
    out.push_back(make_finding(Severity::Error, finding_codes::no_goal, c.id, "case has no goal"));

  try {
    report.statuses = compute_status(c);
  } catch (const Error& err) {
    out.push_back(make_finding(Severity::Error, finding_codes::cycle, c.id, err.what()));
  }

  std::sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.severity, a.target_id, a.code) < std::tie(b.severity, b.target_id, b.code);
  });
  return report;
}

}  // namespace eac
