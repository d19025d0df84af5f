#pragma once

// The case graph: elements, links, challenges and appraisal records, plus the
// persistent-update operations that keep every local invariant intact. A Case
// is a plain value; each operation returns a new Case and leaves its input alone.

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eac/enums.hpp"
#include "eac/text.hpp"

namespace eac {

// Elements, links and challenges share one identifier namespace.
using ElementId = std::string;
using LinkId = std::string;
using ChallengeId = std::string;

enum class ErrorCode {
  InvalidId,
  EmptySlot,
  BraceInSlot,
  DuplicateId,
  KindInvariantViolation,
  DanglingEndpoint,
  IncompatibleKinds,
  CycleIntroduced,
  DanglingTarget,
  NotFound,
  AlreadyClosed,
  MissingNote,
  InvalidOutcome,
  NotEvidence,
  ValueOutOfRange,
  CycleDetected,
  NoGoal,
  MissingBinding,
  UnknownSlot,
  InvalidBinding,
  InvalidPattern,
  ParseFailure,
  UnknownFixture,
};
template <>
struct EnumNames<ErrorCode> {
  static constexpr std::array<std::string_view, 23> names{
      "InvalidId",       "EmptySlot",       "BraceInSlot",    "DuplicateId",    "KindInvariantViolation",
      "DanglingEndpoint", "IncompatibleKinds", "CycleIntroduced", "DanglingTarget", "NotFound",
      "AlreadyClosed",   "MissingNote",     "InvalidOutcome", "NotEvidence",    "ValueOutOfRange",
      "CycleDetected",   "NoGoal",          "MissingBinding", "UnknownSlot",    "InvalidBinding",
      "InvalidPattern",  "ParseFailure",    "UnknownFixture"};
};

// `detail` names the offending slot, rule or id; `items` carries lists such as
// a cycle path or a set of unbound slots.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::vector<std::string> items = {})
      : std::runtime_error(compose(code, detail, items)),
        code_(code),
        detail_(std::move(detail)),
        items_(std::move(items)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string compose(ErrorCode code, const std::string& detail, const std::vector<std::string>& items) {
    std::string msg{to_string(code)};
    if (!detail.empty()) msg += ": " + detail;
    if (!items.empty()) {
      msg += " [";
      for (std::size_t i = 0; i < items.size(); ++i) msg += (i ? ", " : "") + items[i];
      msg += "]";
    }
    return msg;
  }

  ErrorCode code_;
  std::string detail_;
  std::vector<std::string> items_;
};

struct GoalSlots {
  std::string system;
  std::string context;
  std::string goal;
  bool operator==(const GoalSlots&) const = default;
};

// Relative file path or URL, with an optional section reference written after '#'.
struct Locator {
  std::string target;
  std::optional<std::string> section;
  bool operator==(const Locator&) const = default;

  std::string str() const { return section ? target + "#" + *section : target; }

  static Locator from_string(std::string_view s) {
    auto pos = s.find('#');
    if (pos == std::string_view::npos) return {std::string(s), std::nullopt};
    return {std::string(s.substr(0, pos)), std::string(s.substr(pos + 1))};
  }
};

struct Element {
  ElementId id;
  ElementKind kind = ElementKind::PropertyClaim;
  std::string text;
  std::optional<LifecycleStage> stage;
  std::optional<ClaimScope> scope;  // PropertyClaim only
  std::optional<GoalSlots> slots;   // Goal only
  std::optional<Locator> locator;   // Evidence only
  AudienceTier tier = AudienceTier::Public;
  bool operator==(const Element&) const = default;
};

struct Qualifier {
  QualifierLabel label = QualifierLabel::Likely;
  std::optional<std::string> note;
  bool operator==(const Qualifier&) const = default;
};

// `to` names an element, except for warrants links where it names a supports link.
struct Link {
  LinkId id;
  LinkKind kind = LinkKind::Supports;
  ElementId from;
  std::string to;
  std::optional<Qualifier> qualifier;
  bool operator==(const Link&) const = default;
};

struct Challenge {
  ChallengeId id;
  std::string target;
  std::string author;
  std::string text;
  ChallengeState state = ChallengeState::Open;
  std::optional<std::string> resolution_note;
  bool operator==(const Challenge&) const = default;
};

template <class V>
struct Verdict {
  V value{};
  std::string note;
  bool operator==(const Verdict&) const = default;
};

struct AppraisalRecord {
  ElementId evidence_id;
  Verdict<Relevance> relevance;
  Verdict<Materiality> materiality;
  Verdict<Admissibility> admissibility;
  double probative_value = 0.0;
  std::string assessor;
  std::chrono::year_month_day date{std::chrono::year{1970}, std::chrono::month{1}, std::chrono::day{1}};
  bool operator==(const AppraisalRecord&) const = default;

  bool triad_positive() const {
    return relevance.value == Relevance::Relevant && materiality.value == Materiality::Material &&
           admissibility.value == Admissibility::Admissible;
  }
};

struct Case {
  std::string id;
  std::string title;
  Phase phase = Phase::Preliminary;
  std::map<ElementId, Element> elements;
  std::map<LinkId, Link> links;
  std::map<ChallengeId, Challenge> challenges;
  std::map<ElementId, AppraisalRecord> appraisals;
  std::optional<Timestamp> created;
  std::optional<Timestamp> modified;
  bool operator==(const Case&) const = default;

  const Element* element(std::string_view id) const {
    auto it = elements.find(std::string(id));
    return it == elements.end() ? nullptr : &it->second;
  }
  const Link* link(std::string_view id) const {
    auto it = links.find(std::string(id));
    return it == links.end() ? nullptr : &it->second;
  }
  const Challenge* challenge(std::string_view id) const {
    auto it = challenges.find(std::string(id));
    return it == challenges.end() ? nullptr : &it->second;
  }
  bool has_id(std::string_view id) const { return element(id) || link(id) || challenge(id); }
};

// Relaxations used when admitting elements from authored sources. Strict by default.
struct Admission {
  // Goals written as a bare statement are kept so that validation can report them.
  bool allow_unslotted_goal = false;
  // Pattern skeletons carry {slot} placeholders inside goal slot values.
  bool allow_template_slots = false;
};

// ---------------------------------------------------------------------------
// Goal template

inline std::string render_goal_text(const GoalSlots& s) {
  return "The use of the {" + s.system + "} by {" + s.context + "} can help advance {" + s.goal + "}.";
}

// Inverse of render_goal_text; nullopt when the text does not follow the frame.
inline std::optional<GoalSlots> extract_goal_slots(std::string_view text) {
  constexpr std::string_view head = "The use of the {", mid1 = "} by {", mid2 = "} can help advance {", tail = "}.";
  if (!text.starts_with(head) || !text.ends_with(tail)) return std::nullopt;
  auto body = text.substr(head.size(), text.size() - head.size() - tail.size());
  auto p1 = body.find(mid1);
  if (p1 == std::string_view::npos) return std::nullopt;
  auto p2 = body.find(mid2, p1 + mid1.size());
  if (p2 == std::string_view::npos) return std::nullopt;
  GoalSlots s{std::string(body.substr(0, p1)), std::string(body.substr(p1 + mid1.size(), p2 - p1 - mid1.size())),
              std::string(body.substr(p2 + mid2.size()))};
  if (render_goal_text(s) != text) return std::nullopt;
  return s;
}

namespace detail {
inline void check_slot(std::string_view name, std::string_view value, bool allow_braces) {
  if (text::blank(value)) throw Error(ErrorCode::EmptySlot, std::string(name));
  if (!allow_braces && text::has_brace(value)) throw Error(ErrorCode::BraceInSlot, std::string(name));
}
inline void check_slots(const GoalSlots& s, bool allow_braces) {
  check_slot("system", s.system, allow_braces);
  check_slot("context", s.context, allow_braces);
  check_slot("goal", s.goal, allow_braces);
}
}  // namespace detail

inline Element goal_from_template(ElementId id, std::string_view system, std::string_view context,
                                  std::string_view goal, AudienceTier tier = AudienceTier::Public) {
  GoalSlots slots{std::string(system), std::string(context), std::string(goal)};
  detail::check_slots(slots, false);
  Element e;
  e.id = std::move(id);
  e.kind = ElementKind::Goal;
  e.text = render_goal_text(slots);
  e.slots = std::move(slots);
  e.tier = tier;
  return e;
}

// ---------------------------------------------------------------------------
// Local invariants

inline void check_element(const Element& e, const Admission& admission = {}) {
  auto violation = [&](const char* rule) { throw Error(ErrorCode::KindInvariantViolation, rule, {e.id}); };
  if (!text::is_identifier(e.id)) throw Error(ErrorCode::InvalidId, e.id);
  if (text::blank(e.text)) violation("text-empty");
  if (!text::single_line(e.text) || (e.locator && !text::single_line(e.locator->str())) ||
      (e.slots && !(text::single_line(e.slots->system) && text::single_line(e.slots->context) &&
                    text::single_line(e.slots->goal))))
    violation("line-break");

  const bool goal = e.kind == ElementKind::Goal;
  if (goal && !e.slots && !admission.allow_unslotted_goal) violation("slots-missing");
  if (!goal && e.slots) violation("slots-not-permitted");
  if (e.slots) {
    detail::check_slots(*e.slots, admission.allow_template_slots);
    if (e.text != render_goal_text(*e.slots)) violation("goal-text-mismatch");
  }

  const bool claim = e.kind == ElementKind::PropertyClaim;
  if (claim && !e.scope) violation("scope-missing");
  if (!claim && e.scope) violation("scope-not-permitted");

  const bool evidence = e.kind == ElementKind::Evidence;
  if (evidence && !e.locator) violation("locator-missing");
  if (!evidence && e.locator) violation("locator-not-permitted");
  if (e.locator && (text::blank(e.locator->target) || e.locator->target.find('#') != std::string::npos ||
                    (e.locator->section && text::blank(*e.locator->section))))
    violation("locator-invalid");
}

// Link compatibility for links whose target is an element. Assumptions may
// support claims and cover evidential claims.
constexpr bool link_compatible(LinkKind link, ElementKind from, ElementKind to) {
  using K = ElementKind;
  switch (link) {
    case LinkKind::Supports:
      if (from == K::Assumption) return to == K::PropertyClaim || to == K::Goal || to == K::EvidentialClaim;
      return (from == K::PropertyClaim || from == K::EvidentialClaim || from == K::Goal) &&
             (to == K::PropertyClaim || to == K::Goal);
    case LinkKind::ContextOf:
      return from == K::Context && (to == K::Goal || to == K::PropertyClaim);
    case LinkKind::Evidences:
      return from == K::Evidence && to == K::EvidentialClaim;
    case LinkKind::Warrants:
      return false;  // targets a link, see warrant_compatible
  }
  return false;
}

// A warrant licenses the step from an evidential claim to the claim it supports.
inline bool warrant_compatible(const Case& c, const Element& from, const Link& target) {
  if (from.kind != ElementKind::Warrant || target.kind != LinkKind::Supports) return false;
  const Element* src = c.element(target.from);
  return src && src->kind == ElementKind::EvidentialClaim;
}

// ---------------------------------------------------------------------------
// Supports-subgraph helpers

// Path of supports links from `start` to `goal` (inclusive), or empty.
inline std::vector<ElementId> supports_path(const Case& c, const ElementId& start, const ElementId& goal) {
  std::map<ElementId, std::vector<ElementId>> out;
  for (const auto& [id, l] : c.links)
    if (l.kind == LinkKind::Supports) out[l.from].push_back(l.to);
  std::map<ElementId, ElementId> parent;
  std::set<ElementId> seen{start};
  std::vector<ElementId> stack{start};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (cur == goal) {
      std::vector<ElementId> path{cur};
      while (path.back() != start) path.push_back(parent.at(path.back()));
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const auto& next : out[cur])
      if (seen.insert(next).second) {
        parent[next] = cur;
        stack.push_back(next);
      }
  }
  return {};
}

// Rotates a closed cycle [a, b, ..., a] so that it starts at its smallest id.
inline std::vector<ElementId> canonical_cycle(std::vector<ElementId> cycle) {
  if (cycle.size() < 2) return cycle;
  cycle.pop_back();
  auto smallest = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), smallest, cycle.end());
  cycle.push_back(cycle.front());
  return cycle;
}

// Elements ordered so that every supports source precedes its target.
// Throws CycleDetected when the supports subgraph is cyclic.
inline std::vector<ElementId> supports_topological_order(const Case& c) {
  std::map<ElementId, int> indegree;
  std::map<ElementId, std::vector<ElementId>> out;
  for (const auto& [id, e] : c.elements) indegree[id] = 0;
  for (const auto& [id, l] : c.links)
    if (l.kind == LinkKind::Supports && indegree.count(l.from) && indegree.count(l.to)) {
      out[l.from].push_back(l.to);
      ++indegree[l.to];
    }
  std::set<ElementId> ready;
  std::vector<ElementId> order;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.insert(id);
  while (!ready.empty()) {
    auto cur = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(cur);
    for (const auto& next : out[cur])
      if (--indegree[next] == 0) ready.insert(next);
  }
  if (order.size() != c.elements.size()) {
    std::vector<ElementId> stuck;
    for (const auto& [id, d] : indegree)
      if (d > 0) stuck.push_back(id);
    throw Error(ErrorCode::CycleDetected, "supports subgraph is cyclic", stuck);
  }
  return order;
}

// ---------------------------------------------------------------------------
// Persistent updates

inline Case add_element(const Case& c, Element e, const Admission& admission = {}) {
  check_element(e, admission);
  if (c.has_id(e.id)) throw Error(ErrorCode::DuplicateId, e.id);
  Case next = c;
  auto id = e.id;
  next.elements.emplace(std::move(id), std::move(e));
  return next;
}

inline Case add_link(const Case& c, Link l) {
  if (!text::is_identifier(l.id)) throw Error(ErrorCode::InvalidId, l.id);
  if (c.has_id(l.id)) throw Error(ErrorCode::DuplicateId, l.id);
  if (l.qualifier && l.kind != LinkKind::Supports)
    throw Error(ErrorCode::KindInvariantViolation, "qualifier-not-permitted", {l.id});
  if (l.qualifier && l.qualifier->note &&
      (text::blank(*l.qualifier->note) || !text::single_line(*l.qualifier->note)))
    throw Error(ErrorCode::KindInvariantViolation, "qualifier-note-invalid", {l.id});

  const Element* from = c.element(l.from);
  if (!from) throw Error(ErrorCode::DanglingEndpoint, l.from, {l.id});

  if (l.kind == LinkKind::Warrants) {
    const Link* target = c.link(l.to);
    if (!target) throw Error(ErrorCode::DanglingEndpoint, l.to, {l.id});
    if (!warrant_compatible(c, *from, *target))
      throw Error(ErrorCode::IncompatibleKinds,
                  std::string(to_string(from->kind)) + " -warrants-> " + std::string(to_string(target->kind)) + " link",
                  {l.id});
  } else {
    const Element* to = c.element(l.to);
    if (!to) throw Error(ErrorCode::DanglingEndpoint, l.to, {l.id});
    if (!link_compatible(l.kind, from->kind, to->kind))
      throw Error(ErrorCode::IncompatibleKinds,
                  std::string(to_string(from->kind)) + " -" + std::string(to_string(l.kind)) + "-> " +
                      std::string(to_string(to->kind)),
                  {l.id});
    if (l.kind == LinkKind::Supports) {
      auto back = supports_path(c, l.to, l.from);
      if (!back.empty()) {
        std::vector<ElementId> cycle{l.from};
        cycle.insert(cycle.end(), back.begin(), back.end());
        throw Error(ErrorCode::CycleIntroduced, l.id, canonical_cycle(std::move(cycle)));
      }
    }
  }
  Case next = c;
  auto id = l.id;
  next.links.emplace(std::move(id), std::move(l));
  return next;
}

inline Case attach_challenge(const Case& c, Challenge ch) {
  if (!text::is_identifier(ch.id)) throw Error(ErrorCode::InvalidId, ch.id);
  if (c.has_id(ch.id)) throw Error(ErrorCode::DuplicateId, ch.id);
  if (!c.element(ch.target) && !c.link(ch.target)) throw Error(ErrorCode::DanglingTarget, ch.target, {ch.id});
  if (ch.state != ChallengeState::Open)
    throw Error(ErrorCode::KindInvariantViolation, "challenge-must-open", {ch.id});
  if (text::blank(ch.text)) throw Error(ErrorCode::KindInvariantViolation, "text-empty", {ch.id});
  if (text::blank(ch.author)) throw Error(ErrorCode::KindInvariantViolation, "author-empty", {ch.id});
  if (!text::single_line(ch.text) || !text::single_line(ch.author))
    throw Error(ErrorCode::KindInvariantViolation, "line-break", {ch.id});
  if (ch.resolution_note) throw Error(ErrorCode::KindInvariantViolation, "note-on-open-challenge", {ch.id});
  Case next = c;
  auto id = ch.id;
  next.challenges.emplace(std::move(id), std::move(ch));
  return next;
}

// A note is mandatory for sustained and resolved outcomes and optional for withdrawals.
inline Case resolve_challenge(const Case& c, const ChallengeId& id, ChallengeState outcome, std::string_view note) {
  const Challenge* ch = c.challenge(id);
  if (!ch) throw Error(ErrorCode::NotFound, id);
  if (outcome == ChallengeState::Open) throw Error(ErrorCode::InvalidOutcome, "open", {id});
  if (ch->state != ChallengeState::Open) throw Error(ErrorCode::AlreadyClosed, id);
  const bool blank = text::blank(note);
  if (!text::single_line(note)) throw Error(ErrorCode::KindInvariantViolation, "line-break", {id});
  if (blank && outcome != ChallengeState::Withdrawn) throw Error(ErrorCode::MissingNote, id);
  Case next = c;
  auto& target = next.challenges.at(id);
  target.state = outcome;
  target.resolution_note = blank ? std::nullopt : std::optional<std::string>(std::string(note));
  return next;
}

// ---------------------------------------------------------------------------
// Read-side index over one case

struct GraphIndex {
  std::map<ElementId, std::vector<const Link*>> incoming;   // element-targeted links by target
  std::map<ElementId, std::vector<const Link*>> outgoing;   // all links by source
  std::map<LinkId, std::vector<const Link*>> warrants;      // warrants links by the link they target
  std::map<std::string, std::vector<const Challenge*>> challenges_on;

  explicit GraphIndex(const Case& c) {
    for (const auto& [id, l] : c.links) {
      outgoing[l.from].push_back(&l);
      if (l.kind == LinkKind::Warrants)
        warrants[l.to].push_back(&l);
      else
        incoming[l.to].push_back(&l);
    }
    for (const auto& [id, ch] : c.challenges) challenges_on[ch.target].push_back(&ch);
  }

  template <class M>
  static const typename M::mapped_type& lookup(const M& m, const std::string& key) {
    static const typename M::mapped_type empty;
    auto it = m.find(key);
    return it == m.end() ? empty : it->second;
  }

  const std::vector<const Link*>& in(const ElementId& id) const { return lookup(incoming, id); }
  const std::vector<const Link*>& out(const ElementId& id) const { return lookup(outgoing, id); }
  const std::vector<const Link*>& warrants_of(const LinkId& id) const { return lookup(warrants, id); }
  const std::vector<const Challenge*>& on(const std::string& id) const { return lookup(challenges_on, id); }
};

}  // namespace eac
