#pragma once

// Evidence appraisal (relevance, materiality, admissibility plus a probative
// value) and the three-level sufficiency assessment built on it.
//
// Effective value of an evidence artefact: 0 when any verdict is negative,
// the probative value otherwise, unassessed when nothing has been recorded.
// An evidential claim takes the best of its alternative evidence; claims and
// goals take the weakest of their supporting obligations; the case value is
// the weakest root goal. Anything whose status is Defeated counts as 0.
// Assumptions neither add value nor count as unassessed.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "eac/model.hpp"
#include "eac/status.hpp"

namespace eac {

inline void check_appraisal(const Case& c, const AppraisalRecord& r) {
  const Element* e = c.element(r.evidence_id);
  if (!e || e->kind != ElementKind::Evidence) throw Error(ErrorCode::NotEvidence, r.evidence_id);
  if (!std::isfinite(r.probative_value) || r.probative_value < 0.0 || r.probative_value > 1.0)
    throw Error(ErrorCode::ValueOutOfRange, text::format_number(r.probative_value), {r.evidence_id});
  if (text::blank(r.assessor)) throw Error(ErrorCode::KindInvariantViolation, "assessor-empty", {r.evidence_id});
  if (!r.date.ok()) throw Error(ErrorCode::KindInvariantViolation, "date-invalid", {r.evidence_id});
  for (const auto* s : {&r.assessor, &r.relevance.note, &r.materiality.note, &r.admissibility.note})
    if (!text::single_line(*s)) throw Error(ErrorCode::KindInvariantViolation, "line-break", {r.evidence_id});
}

// Latest record wins. A replaced record is appended to `superseded` when given.
inline Case record_appraisal(const Case& c, AppraisalRecord r, std::vector<AppraisalRecord>* superseded = nullptr) {
  check_appraisal(c, r);
  Case next = c;
  auto it = next.appraisals.find(r.evidence_id);
  if (it != next.appraisals.end()) {
    if (superseded) superseded->push_back(it->second);
    it->second = std::move(r);
  } else {
    auto id = r.evidence_id;
    next.appraisals.emplace(std::move(id), std::move(r));
  }
  return next;
}

inline double effective_value(const AppraisalRecord& r) { return r.triad_positive() ? r.probative_value : 0.0; }

enum class SufficiencyVerdict { Sufficient, Insufficient, Unassessed };
template <>
struct EnumNames<SufficiencyVerdict> {
  static constexpr std::array<std::string_view, 3> names{"sufficient", "insufficient", "unassessed"};
};

struct AssessedValue {
  std::optional<double> value;
  SufficiencyVerdict verdict = SufficiencyVerdict::Unassessed;
  bool operator==(const AssessedValue&) const = default;
};

struct SufficiencyReport {
  double threshold = 0.5;
  std::map<ElementId, std::optional<double>> per_evidence;
  std::map<ElementId, AssessedValue> per_claim;  // goals, property claims, evidential claims
  AssessedValue case_value;
  std::vector<ElementId> root_goals;
  bool operator==(const SufficiencyReport&) const = default;
};

inline constexpr double default_threshold = 0.5;

namespace detail {

struct Partial {
  std::optional<double> value;
  bool complete = false;
};

inline AssessedValue judge(const Partial& p, double threshold) {
  if (!p.value || !p.complete) return {p.value, SufficiencyVerdict::Unassessed};
  return {p.value, *p.value >= threshold ? SufficiencyVerdict::Sufficient : SufficiencyVerdict::Insufficient};
}

}  // namespace detail

// Throws NoGoal when the case has no Goal and ValueOutOfRange for a threshold outside [0,1].
inline SufficiencyReport sufficiency(const Case& c, double threshold = default_threshold) {
  if (!std::isfinite(threshold) || threshold < 0.0 || threshold > 1.0)
    throw Error(ErrorCode::ValueOutOfRange, text::format_number(threshold));
  const auto statuses = compute_status(c);
  const GraphIndex index(c);

  SufficiencyReport report;
  report.threshold = threshold;
  std::map<ElementId, detail::Partial> partial;

  for (const auto& [id, e] : c.elements) {
    if (e.kind != ElementKind::Evidence) continue;
    detail::Partial p;
    if (statuses.at(id) == Status::Defeated) {
      p = {0.0, true};
    } else if (auto it = c.appraisals.find(id); it != c.appraisals.end()) {
      p = {effective_value(it->second), true};
    }
    partial[id] = p;
    report.per_evidence[id] = p.value;
  }

  bool any_goal = false;
  for (const auto& id : supports_topological_order(c)) {
    const Element& e = c.elements.at(id);
    if (e.kind == ElementKind::Goal) any_goal = true;
    if (e.kind != ElementKind::Goal && e.kind != ElementKind::PropertyClaim && e.kind != ElementKind::EvidentialClaim)
      continue;

    const bool alternatives = e.kind == ElementKind::EvidentialClaim;
    detail::Partial p;
    bool constituents = false, complete = true;
    for (const Link* l : index.in(id)) {
      if (l->kind != LinkKind::Supports && l->kind != LinkKind::Evidences) continue;
      if (c.elements.at(l->from).kind == ElementKind::Assumption) continue;
      constituents = true;
      const auto& child = partial.at(l->from);
      complete = complete && child.complete;
      if (!child.value) continue;
      if (!p.value)
        p.value = child.value;
      else
        p.value = alternatives ? std::max(*p.value, *child.value) : std::min(*p.value, *child.value);
    }
    p.complete = constituents && complete;
    if (statuses.at(id) == Status::Defeated) p = {0.0, true};
    partial[id] = p;
    report.per_claim[id] = detail::judge(p, threshold);

    if (e.kind == ElementKind::Goal) {
      bool root = true;
      for (const Link* l : index.out(id))
        if (l->kind == LinkKind::Supports) root = false;
      if (root) report.root_goals.push_back(id);
    }
  }
  if (!any_goal) throw Error(ErrorCode::NoGoal, c.id);

  detail::Partial total;
  total.complete = true;
  for (const auto& g : report.root_goals) {
    const auto& p = partial.at(g);
    total.complete = total.complete && p.complete;
    if (p.value) total.value = total.value ? std::min(*total.value, *p.value) : *p.value;
  }
  report.case_value = detail::judge(total, threshold);
  return report;
}

}  // namespace eac
