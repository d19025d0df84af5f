#pragma once

// Audience-tiered views of a case: visibility filtering, Graphviz DOT and a
// markdown review report.
//
// An element is visible when its tier does not exceed the viewer's tier, it
// lies on a path to a selected goal (when goals are filtered) and it matches
// the stage filter (when stages are filtered). Stage-tagged elements match on
// their own tag; untagged elements inherit from tagged matches above or below
// them, and contexts follow the element they frame. Only tier-hidden elements
// count as redactions; the other filters merely narrow the view.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eac/appraisal.hpp"
#include "eac/lifecycle.hpp"
#include "eac/model.hpp"
#include "eac/status.hpp"

namespace eac {

struct TierFilter {
  AudienceTier viewer = AudienceTier::Auditor;
  std::optional<std::set<ElementId>> goals;
  std::optional<std::set<LifecycleStage>> stages;
};

struct Visibility {
  std::set<ElementId> elements;
  std::set<LinkId> links;
  std::set<ChallengeId> challenges;
  std::vector<ElementId> redacted;  // hidden by tier, in id order

  bool shows(const std::string& id) const { return elements.count(id) || links.count(id) || challenges.count(id); }
};

namespace detail {

// Elements reachable from `start` following `step`, start included.
template <class Step>
std::set<ElementId> closure(const std::set<ElementId>& start, Step step) {
  std::set<ElementId> seen = start;
  std::vector<ElementId> stack(start.begin(), start.end());
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& next : step(cur))
      if (seen.insert(next).second) stack.push_back(next);
  }
  return seen;
}

// Parents: what an element argues for. A warrant's parent is the target of the link it licenses.
inline std::vector<ElementId> parents(const Case& c, const GraphIndex& ix, const ElementId& id) {
  std::vector<ElementId> out;
  for (const Link* l : ix.out(id)) {
    if (l->kind != LinkKind::Warrants) {
      out.push_back(l->to);
    } else if (const Link* t = c.link(l->to)) {
      out.push_back(t->to);
    }
  }
  return out;
}

inline std::vector<ElementId> children(const GraphIndex& ix, const ElementId& id) {
  std::vector<ElementId> out;
  for (const Link* l : ix.in(id)) {
    out.push_back(l->from);
    for (const Link* w : ix.warrants_of(l->id)) out.push_back(w->from);
  }
  return out;
}

}  // namespace detail

inline Visibility visibility(const Case& c, const TierFilter& f) {
  const GraphIndex ix(c);
  auto up = [&](const ElementId& id) { return detail::parents(c, ix, id); };
  auto down = [&](const ElementId& id) { return detail::children(ix, id); };

  std::set<ElementId> candidates;
  Visibility v;
  for (const auto& [id, e] : c.elements) {
    if (e.tier > f.viewer)
      v.redacted.push_back(id);
    else
      candidates.insert(id);
  }

  if (f.goals) {
    std::set<ElementId> selected;
    for (const auto& g : *f.goals)
      if (const Element* e = c.element(g); e && e->kind == ElementKind::Goal) selected.insert(g);
    auto reach = detail::closure(selected, down);
    std::set<ElementId> kept;
    for (const auto& id : candidates)
      if (reach.count(id)) kept.insert(id);
    candidates = std::move(kept);
  }

  if (f.stages) {
    std::set<ElementId> matched;
    for (const auto& [id, e] : c.elements)
      if (e.stage && f.stages->count(*e.stage)) matched.insert(id);
    auto above = detail::closure(matched, up);
    // descend only through untagged elements so that a nested claim of another stage stays hidden
    auto below = detail::closure(matched, [&](const ElementId& id) {
      std::vector<ElementId> out;
      for (auto& ch : down(id))
        if (!c.elements.at(ch).stage) out.push_back(ch);
      return out;
    });
    std::set<ElementId> kept;
    for (const auto& id : candidates) {
      const Element& e = c.elements.at(id);
      bool ok = e.stage ? matched.count(id) > 0 : (above.count(id) || below.count(id));
      if (ok) kept.insert(id);
    }
    for (const auto& id : candidates) {
      const Element& e = c.elements.at(id);
      if (e.kind != ElementKind::Context || e.stage || kept.count(id)) continue;
      for (const auto& p : up(id))
        if (kept.count(p)) kept.insert(id);
    }
    candidates = std::move(kept);
  }

  v.elements = std::move(candidates);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& [id, l] : c.links) {
      if ((l.kind == LinkKind::Warrants) != (pass == 1)) continue;
      bool target = l.kind == LinkKind::Warrants ? v.links.count(l.to) > 0 : v.elements.count(l.to) > 0;
      if (v.elements.count(l.from) && target) v.links.insert(id);
    }
  for (const auto& [id, ch] : c.challenges)
    if (v.elements.count(ch.target) || v.links.count(ch.target)) v.challenges.insert(id);
  return v;
}

// The visible part of a case, still a valid Case.
inline Case redact(const Case& c, const Visibility& v) {
  Case out;
  out.id = c.id;
  out.title = c.title;
  out.phase = c.phase;
  out.created = c.created;
  out.modified = c.modified;
  for (const auto& [id, e] : c.elements)
    if (v.elements.count(id)) out.elements.emplace(id, e);
  for (const auto& [id, l] : c.links)
    if (v.links.count(id)) out.links.emplace(id, l);
  for (const auto& [id, ch] : c.challenges)
    if (v.challenges.count(id)) out.challenges.emplace(id, ch);
  for (const auto& [id, r] : c.appraisals)
    if (v.elements.count(id)) out.appraisals.emplace(id, r);
  return out;
}

inline Case redact(const Case& c, const TierFilter& f) { return redact(c, visibility(c, f)); }

// Hidden evidence plus every claim whose sufficiency depends on it. Their
// values are reported as "withheld" below the evidence's tier.
inline std::set<ElementId> withheld_values(const Case& c, const Visibility& v) {
  const GraphIndex ix(c);
  std::set<ElementId> hidden;
  for (const auto& id : v.redacted)
    if (c.elements.at(id).kind == ElementKind::Evidence) hidden.insert(id);
  return detail::closure(hidden, [&](const ElementId& id) {
    std::vector<ElementId> out;
    for (const Link* l : ix.out(id))
      if (l->kind == LinkKind::Supports || l->kind == LinkKind::Evidences) out.push_back(l->to);
    return out;
  });
}

inline std::string redaction_notice(std::size_t n) {
  return std::to_string(n) + (n == 1 ? " element redacted" : " elements redacted");
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

inline const char* status_fill(Status s) {
  switch (s) {
    case Status::Supported:
      return "#d9f2d9";
    case Status::Assumed:
      return "#eeeeee";
    case Status::Undeveloped:
      return "#ffffff";
    case Status::Contested:
      return "#ffe0a3";
    case Status::Defeated:
      return "#f7c6c6";
  }
  return "#ffffff";
}

inline std::string node_attrs(ElementKind k) {
  switch (k) {
    case ElementKind::Goal:
      return "shape=box, style=filled";
    case ElementKind::PropertyClaim:
      return "shape=box, style=\"rounded,filled\"";
    case ElementKind::EvidentialClaim:
      return "shape=parallelogram, style=filled";
    case ElementKind::Evidence:
      return "shape=ellipse, style=filled";
    case ElementKind::Warrant:
      return "shape=note, style=filled";
    case ElementKind::Context:
      return "shape=box, style=\"dashed,filled\"";
    case ElementKind::Assumption:
      return "shape=ellipse, style=\"dashed,filled\"";
  }
  return "shape=box";
}

}  // namespace detail

// Edges point from the supporting element to what it supports. A supports
// link that carries warrants or challenges is drawn through a point junction
// so that those can attach to the edge itself.
inline std::string to_dot(const Case& c, const TierFilter& f = {}) {
  using detail::dot_escape;
  const Visibility v = visibility(c, f);
  const auto statuses = compute_status(c);
  const GraphIndex ix(c);

  std::ostringstream os;
  std::string label = c.title;
  if (!v.redacted.empty()) label += "\n" + redaction_notice(v.redacted.size());
  os << "digraph " << dot_escape(c.id.empty() ? "case" : c.id) << " {\n";
  os << "  graph [rankdir=BT, labelloc=t, label=" << dot_escape(label) << "];\n";
  os << "  node [fontname=\"Helvetica\", fontsize=10];\n";
  os << "  edge [fontname=\"Helvetica\", fontsize=9];\n";

  for (const auto& id : v.elements) {
    const Element& e = c.elements.at(id);
    const Status s = statuses.at(id);
    os << "  " << dot_escape(id) << " [" << detail::node_attrs(e.kind) << ", fillcolor=\"" << detail::status_fill(s)
       << "\", label=" << dot_escape(id + "\n" + e.text) << ", tooltip=" << dot_escape(std::string(to_string(s)))
       << "];\n";
  }

  std::set<LinkId> junctions;
  for (const auto& id : v.links) {
    const Link& l = c.links.at(id);
    if (l.kind == LinkKind::Warrants) {
      junctions.insert(l.to);
      continue;
    }
    for (const Challenge* ch : ix.on(id))
      if (v.challenges.count(ch->id)) junctions.insert(id);
  }

  for (const auto& id : v.links) {
    const Link& l = c.links.at(id);
    if (l.kind == LinkKind::Warrants) continue;
    std::string attrs = "tooltip=" + dot_escape(id);
    if (l.kind != LinkKind::Supports) attrs += ", style=dashed, label=" + dot_escape(std::string(to_string(l.kind)));
    if (l.qualifier) attrs += ", label=" + dot_escape(std::string(to_string(l.qualifier->label)));
    if (junctions.count(id)) {
      const std::string j = id + "__junction";
      os << "  " << dot_escape(j) << " [shape=point, width=0.08, tooltip=" << dot_escape(id) << "];\n";
      os << "  " << dot_escape(l.from) << " -> " << dot_escape(j) << " [arrowhead=none, " << attrs << "];\n";
      os << "  " << dot_escape(j) << " -> " << dot_escape(l.to) << " [" << attrs << "];\n";
    } else {
      os << "  " << dot_escape(l.from) << " -> " << dot_escape(l.to) << " [" << attrs << "];\n";
    }
  }
  for (const auto& id : v.links) {
    const Link& l = c.links.at(id);
    if (l.kind == LinkKind::Warrants)
      os << "  " << dot_escape(l.from) << " -> " << dot_escape(l.to + "__junction")
         << " [style=dotted, arrowhead=none, tooltip=" << dot_escape(id) << "];\n";
  }

  for (const auto& id : v.challenges) {
    const Challenge& ch = c.challenges.at(id);
    const std::string target = c.link(ch.target) ? ch.target + "__junction" : ch.target;
    os << "  " << dot_escape(id) << " [shape=octagon, color=red, penwidth=2, label="
       << dot_escape(id + " (" + std::string(to_string(ch.state)) + ")\n" + ch.text) << "];\n";
    os << "  " << dot_escape(id) << " -> " << dot_escape(target) << " [color=red, style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Markdown report

namespace detail {

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|') out += '\\';
    out += ch;
  }
  return out;
}

inline std::string value_cell(const std::optional<double>& v) { return v ? text::format_number(*v) : "unassessed"; }

}  // namespace detail

inline std::string to_report(const Case& c, const TierFilter& f = {}, double threshold = default_threshold) {
  using detail::md_cell;
  const Visibility v = visibility(c, f);
  const auto statuses = compute_status(c);
  std::optional<SufficiencyReport> suff;
  try {
    suff = sufficiency(c, threshold);
  } catch (const Error&) {
  }

  std::set<ElementId> hidden_evidence;
  for (const auto& id : v.redacted)
    if (c.elements.at(id).kind == ElementKind::Evidence) hidden_evidence.insert(id);
  const auto withheld = withheld_values(c, v);
  auto claim_value = [&](const ElementId& id) -> std::string {
    if (withheld.count(id)) return "withheld";
    if (!suff || !suff->per_claim.count(id)) return "n/a";
    const auto& a = suff->per_claim.at(id);
    return detail::value_cell(a.value) + " (" + std::string(to_string(a.verdict)) + ")";
  };

  std::ostringstream os;
  os << "# " << c.title << "\n\n";
  if (!c.id.empty()) os << "Case: `" << c.id << "`  \n";
  os << "Phase: " << to_string(c.phase) << "  \n";
  os << "Viewer tier: " << to_string(f.viewer) << "\n";

  os << "\n## Goals\n\n";
  std::size_t goals = 0;
  for (const auto& id : v.elements) {
    const Element& e = c.elements.at(id);
    if (e.kind != ElementKind::Goal) continue;
    ++goals;
    os << "- **" << id << "** (" << to_string(statuses.at(id)) << "): ";
    if (e.slots)
      os << "The use of the **" << e.slots->system << "** by **" << e.slots->context << "** can help advance **"
         << e.slots->goal << "**.\n";
    else
      os << e.text << "\n";
  }
  if (goals == 0) os << "No goals visible.\n";

  const Case shown = redact(c, v);
  const auto cov = coverage(shown);
  os << "\n## Lifecycle coverage\n\n";
  os << "| Stage | Phase | Claims |\n|---|---|---|\n";
  for (const auto& [stage, n] : cov.counts)
    os << "| " << to_string(stage) << " | " << to_string(macro_stage(stage)) << " | " << n << " |\n";
  os << "\n" << cov.covered() << " of " << cov.counts.size() << " stages covered";
  if (cov.untagged) os << "; " << cov.untagged << " untagged claim" << (cov.untagged == 1 ? "" : "s");
  os << ".\n";

  os << "\n## Claims by stage\n";
  std::map<std::string, std::vector<const Element*>> groups;
  std::vector<std::string> order;
  for (auto s : enum_values<LifecycleStage>()) order.emplace_back(to_string(s));
  order.emplace_back("untagged");
  for (const auto& id : v.elements) {
    const Element& e = c.elements.at(id);
    if (e.kind != ElementKind::PropertyClaim && e.kind != ElementKind::EvidentialClaim) continue;
    groups[e.stage ? std::string(to_string(*e.stage)) : "untagged"].push_back(&e);
  }
  if (groups.empty()) os << "\nNo claims visible.\n";
  for (const auto& name : order) {
    auto it = groups.find(name);
    if (it == groups.end()) continue;
    os << "\n### " << name << "\n\n| Claim | Kind | Scope | Text | Status | Sufficiency |\n|---|---|---|---|---|---|\n";
    for (const Element* e : it->second)
      os << "| " << e->id << " | " << to_string(e->kind) << " | " << (e->scope ? to_string(*e->scope) : "")
         << " | " << md_cell(e->text) << " | " << to_string(statuses.at(e->id)) << " | " << claim_value(e->id)
         << " |\n";
  }

  os << "\n## Evidence\n\n";
  std::size_t evidence_rows = 0;
  std::ostringstream rows;
  for (const auto& [id, e] : c.elements) {
    if (e.kind != ElementKind::Evidence) continue;
    if (v.elements.count(id)) {
      std::string value = suff && suff->per_evidence.count(id) ? detail::value_cell(suff->per_evidence.at(id)) : "n/a";
      rows << "| " << id << " | " << md_cell(e.text) << " | " << md_cell(e.locator->str()) << " | " << value
           << " |\n";
      ++evidence_rows;
    } else if (hidden_evidence.count(id)) {
      rows << "| " << id << " | (redacted) | (redacted) | withheld |\n";
      ++evidence_rows;
    }
  }
  if (evidence_rows == 0)
    os << "No evidence visible.\n";
  else
    os << "| Evidence | Text | Locator | Value |\n|---|---|---|---|\n" << rows.str();

  os << "\n## Challenge log\n\n";
  if (v.challenges.empty()) {
    os << "No challenges.\n";
  } else {
    os << "| Challenge | Target | Author | State | Text | Resolution |\n|---|---|---|---|---|---|\n";
    for (const auto& id : v.challenges) {
      const Challenge& ch = c.challenges.at(id);
      os << "| " << id << " | " << ch.target << " | " << md_cell(ch.author) << " | " << to_string(ch.state) << " | "
         << md_cell(ch.text) << " | " << md_cell(ch.resolution_note.value_or("")) << " |\n";
    }
  }

  os << "\n## Redactions\n\n";
  if (v.redacted.empty()) {
    os << "0 elements redacted.\n";
  } else {
    os << redaction_notice(v.redacted.size()) << " at tier " << to_string(f.viewer) << ".\n\n";
    for (const auto& id : v.redacted) {
      const Element& e = c.elements.at(id);
      os << "- " << id << ": " << to_string(e.kind) << " withheld (requires " << to_string(e.tier) << " tier)\n";
    }
  }
  return os.str();
}

}  // namespace eac
