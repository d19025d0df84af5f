#pragma once

// Defeasible status of every element.
//
// Leaves: Evidence, Warrant and Context elements are Supported, Assumptions are
// Assumed. Goals and claims with nothing supporting them are Undeveloped.
// Otherwise a node takes the minimum over what each incoming supports or
// evidences link contributes. A supports link leaving an evidential claim
// contributes at most Undeveloped without a warrant, and at most the best
// of its warrants when it has some. Open challenges on a node or on any link
// into it cap the node at Contested, sustained ones at Defeated. Withdrawn and
// resolved challenges are ignored.

#include <map>
#include <string>
#include <vector>

#include "eac/model.hpp"

namespace eac {

using StatusMap = std::map<ElementId, Status>;

inline Status min_status(Status a, Status b) { return a < b ? a : b; }
inline Status max_status(Status a, Status b) { return a < b ? b : a; }

inline Status challenge_cap(ChallengeState s) {
  switch (s) {
    case ChallengeState::Open:
      return Status::Contested;
    case ChallengeState::Sustained:
      return Status::Defeated;
    default:
      return Status::Supported;
  }
}

namespace detail {

struct StatusEngine {
  const Case& c;
  GraphIndex index;
  StatusMap statuses;

  explicit StatusEngine(const Case& cs) : c(cs), index(cs) {}

  // Weakest challenge on `id`, with the challenge responsible.
  std::pair<Status, const Challenge*> cap_of(const std::string& id) const {
    std::pair<Status, const Challenge*> best{Status::Supported, nullptr};
    for (const Challenge* ch : index.on(id)) {
      Status s = challenge_cap(ch->state);
      if (s < best.first) best = {s, ch};
    }
    return best;
  }

  // Cap from the node itself and every link pointing at it.
  std::pair<Status, const Challenge*> node_cap(const Element& e) const {
    auto best = cap_of(e.id);
    for (const Link* l : index.in(e.id)) {
      auto lc = cap_of(l->id);
      if (lc.first < best.first) best = lc;
    }
    return best;
  }

  static bool is_leaf_kind(ElementKind k) {
    return k == ElementKind::Evidence || k == ElementKind::Warrant || k == ElementKind::Context ||
           k == ElementKind::Assumption;
  }

  static bool needs_warrant(const Case& c, const Link& l) {
    if (l.kind != LinkKind::Supports) return false;
    const Element* src = c.element(l.from);
    return src && src->kind == ElementKind::EvidentialClaim;
  }

  static bool is_child_link(const Link& l) { return l.kind == LinkKind::Supports || l.kind == LinkKind::Evidences; }

  // Best warrant for a link that needs one; Undeveloped when none is attached.
  std::pair<Status, const Link*> warrant_term(const Link& l) const {
    const auto& ws = index.warrants_of(l.id);
    if (ws.empty()) return {Status::Undeveloped, nullptr};
    std::pair<Status, const Link*> best{Status::Defeated, nullptr};
    for (const Link* w : ws) {
      Status s = min_status(statuses.at(w->from), cap_of(w->id).first);
      if (!best.second || best.first < s) best = {s, w};
    }
    return best;
  }

  Status contribution(const Link& l) const {
    Status s = statuses.at(l.from);
    if (needs_warrant(c, l)) s = min_status(s, warrant_term(l).first);
    return s;
  }

  Status base_of(const Element& e) const {
    switch (e.kind) {
      case ElementKind::Evidence:
      case ElementKind::Warrant:
      case ElementKind::Context:
        return Status::Supported;
      case ElementKind::Assumption:
        return Status::Assumed;
      default:
        break;
    }
    bool any = false;
    Status s = Status::Supported;
    for (const Link* l : index.in(e.id)) {
      if (!is_child_link(*l)) continue;
      any = true;
      s = min_status(s, contribution(*l));
    }
    return any ? s : Status::Undeveloped;
  }

  void run() {
    for (const auto& [id, e] : c.elements)
      if (is_leaf_kind(e.kind)) statuses[id] = min_status(base_of(e), node_cap(e).first);
    for (const auto& id : supports_topological_order(c)) {
      const Element& e = c.elements.at(id);
      if (is_leaf_kind(e.kind)) continue;
      statuses[id] = min_status(base_of(e), node_cap(e).first);
    }
  }
};

}  // namespace detail

// Throws Error(CycleDetected) if the supports subgraph is cyclic, which a case
// built through the model operations never is.
inline StatusMap compute_status(const Case& c) {
  detail::StatusEngine engine(c);
  engine.run();
  return std::move(engine.statuses);
}

// One step of a status derivation: the rule that fixed this element's status
// and, through `via`, the link or challenge it came from.
struct Explanation {
  ElementId id;
  Status status = Status::Undeveloped;
  std::string rule;
  std::string via;
  std::vector<Explanation> children;
  bool operator==(const Explanation&) const = default;
};

namespace rules {
inline constexpr const char* evidence = "evidence";
inline constexpr const char* warrant = "warrant";
inline constexpr const char* context = "context";
inline constexpr const char* assumption = "assumption";
inline constexpr const char* no_support = "no support";
inline constexpr const char* weakest_child = "weakest child";
inline constexpr const char* missing_warrant = "missing warrant";
inline constexpr const char* weak_warrant = "weak warrant";
inline constexpr const char* challenged_warrant_link = "challenged warrant link";
inline constexpr const char* open_challenge = "open challenge";
inline constexpr const char* sustained_challenge = "sustained challenge";
}  // namespace rules

namespace detail {

inline const char* challenge_rule(const Challenge& ch) {
  return ch.state == ChallengeState::Sustained ? rules::sustained_challenge : rules::open_challenge;
}

inline Explanation explain(const StatusEngine& eng, const ElementId& id) {
  const Element& e = eng.c.elements.at(id);
  Explanation out{id, eng.statuses.at(id), "", "", {}};
  Status base = eng.base_of(e);
  auto [cap, challenge] = eng.node_cap(e);

  if (challenge && cap <= base) {
    out.rule = challenge_rule(*challenge);
    out.via = challenge->id;
    return out;
  }
  switch (e.kind) {
    case ElementKind::Evidence:
      out.rule = rules::evidence;
      return out;
    case ElementKind::Warrant:
      out.rule = rules::warrant;
      return out;
    case ElementKind::Context:
      out.rule = rules::context;
      return out;
    case ElementKind::Assumption:
      out.rule = rules::assumption;
      return out;
    default:
      break;
  }

  const Link* weakest = nullptr;
  Status weakest_value = Status::Supported;
  for (const Link* l : eng.index.in(id)) {
    if (!StatusEngine::is_child_link(*l)) continue;
    Status v = eng.contribution(*l);
    if (!weakest || v < weakest_value) {
      weakest = l;
      weakest_value = v;
    }
  }
  if (!weakest) {
    out.rule = rules::no_support;
    return out;
  }

  out.via = weakest->id;
  if (eng.statuses.at(weakest->from) == weakest_value) {
    out.rule = rules::weakest_child;
    out.children.push_back(explain(eng, weakest->from));
    return out;
  }
  auto [wstatus, wlink] = eng.warrant_term(*weakest);
  if (!wlink) {
    out.rule = rules::missing_warrant;
    return out;
  }
  auto [wcap, wchallenge] = eng.cap_of(wlink->id);
  if (wchallenge && wcap <= eng.statuses.at(wlink->from)) {
    out.rule = rules::challenged_warrant_link;
    out.via = wchallenge->id;
    return out;
  }
  out.rule = rules::weak_warrant;
  out.via = wlink->id;
  out.children.push_back(explain(eng, wlink->from));
  return out;
}

}  // namespace detail

// Throws Error(NotFound) for an unknown element id.
inline Explanation explain_status(const Case& c, const ElementId& id) {
  if (!c.element(id)) throw Error(ErrorCode::NotFound, id);
  detail::StatusEngine engine(c);
  engine.run();
  return detail::explain(engine, id);
}

}  // namespace eac
