#pragma once

// Argument patterns: slotted case skeletons with intent, applicability and
// risk metadata. Patterns are instantiated into case fragments and can be
// derived bottom-up from concrete cases by structural anti-unification.
//
// Pattern files (.eap) use the case grammar with a different header block:
//
//   pattern <id>
//   intent "<text>"
//   applicability "<text>"
//   risk "<text>"                      (repeatable)
//   slot <name>|"<name>" : <type>      (free-text|system|context|goal|stage)
//   ... element and link statements whose texts may contain {name} ...

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "eac/dsl.hpp"
#include "eac/model.hpp"

namespace eac {

enum class SlotType { FreeText, System, Context, Goal, Stage };
template <>
struct EnumNames<SlotType> {
  static constexpr std::array<std::string_view, 5> names{"free-text", "system", "context", "goal", "stage"};
};

using Bindings = std::map<std::string, std::string>;

struct Pattern {
  std::string id;
  std::string intent;
  std::string applicability;
  std::vector<std::string> risks;
  Case skeleton;  // elements and links only
  std::map<std::string, SlotType> slot_types;
  bool operator==(const Pattern&) const = default;
};

// ---------------------------------------------------------------------------
// Slot text helpers

// Names written as {name} in s. A name is non-empty and contains no brace.
inline std::vector<std::string> slot_names(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = s.find('{', pos)) != std::string_view::npos) {
    auto close = s.find('}', pos + 1);
    if (close == std::string_view::npos) break;
    auto name = s.substr(pos + 1, close - pos - 1);
    if (!name.empty() && name.find('{') == std::string_view::npos) {
      out.emplace_back(name);
      pos = close + 1;
    } else {
      ++pos;
    }
  }
  return out;
}

// Replaces every {name} bound in b; unbound occurrences are left as written.
inline std::string substitute(std::string_view s, const Bindings& b) {
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto open = s.find('{', pos);
    if (open == std::string_view::npos) break;
    auto close = s.find('}', open + 1);
    if (close == std::string_view::npos) break;
    auto name = std::string(s.substr(open + 1, close - open - 1));
    auto it = b.find(name);
    if (name.empty() || name.find('{') != std::string::npos || it == b.end()) {
      out.append(s.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    out.append(s.substr(pos, open - pos));
    out += it->second;
    pos = close + 1;
  }
  out.append(s.substr(std::min(pos, s.size())));
  return out;
}

namespace detail {

// Templated text fields of an element: the three goal slots for slotted
// goals, the text otherwise, plus the locator string for evidence.
inline std::vector<std::string> template_fields(const Element& e) {
  std::vector<std::string> f;
  if (e.slots)
    f = {e.slots->system, e.slots->context, e.slots->goal};
  else
    f = {e.text};
  if (e.locator) f.push_back(e.locator->str());
  return f;
}

}  // namespace detail

inline std::set<std::string> slots_used(const Case& skeleton) {
  std::set<std::string> used;
  for (const auto& [id, e] : skeleton.elements)
    for (const auto& f : detail::template_fields(e))
      for (auto& n : slot_names(f)) used.insert(std::move(n));
  return used;
}

// ---------------------------------------------------------------------------
// Instantiation

// Throws MissingBinding (items list the unbound slots), UnknownSlot (items
// list the unknown names), InvalidBinding (detail names the slot) and
// InvalidId for a bad prefix. The fragment passes every core-model invariant.
inline Case instantiate(const Pattern& p, const Bindings& bindings, std::string_view prefix = "") {
  if (!text::is_identifier_prefix(prefix)) throw Error(ErrorCode::InvalidId, std::string(prefix));
  std::vector<std::string> missing, unknown;
  for (const auto& [name, type] : p.slot_types)
    if (!bindings.count(name)) missing.push_back(name);
  if (!missing.empty()) throw Error(ErrorCode::MissingBinding, p.id, missing);
  for (const auto& [name, value] : bindings)
    if (!p.slot_types.count(name)) unknown.push_back(name);
  if (!unknown.empty()) throw Error(ErrorCode::UnknownSlot, unknown.front(), unknown);
  for (const auto& [name, value] : bindings) {
    if (text::blank(value) || text::has_brace(value) || !text::single_line(value))
      throw Error(ErrorCode::InvalidBinding, name);
    if (p.slot_types.at(name) == SlotType::Stage && !enum_from_string<LifecycleStage>(value))
      throw Error(ErrorCode::InvalidBinding, name, {value});
  }

  const std::string pre(prefix);
  Case out;
  out.title = p.id;
  Admission admission;
  admission.allow_unslotted_goal = true;
  for (const auto& [id, e] : p.skeleton.elements) {
    Element x = e;
    x.id = pre + id;
    if (x.slots) {
      x.slots->system = substitute(x.slots->system, bindings);
      x.slots->context = substitute(x.slots->context, bindings);
      x.slots->goal = substitute(x.slots->goal, bindings);
      x.text = render_goal_text(*x.slots);
    } else {
      x.text = substitute(x.text, bindings);
    }
    if (x.locator) x.locator = Locator::from_string(substitute(x.locator->str(), bindings));
    out = add_element(out, std::move(x), admission);
  }
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& [id, l] : p.skeleton.links) {
      if ((l.kind == LinkKind::Warrants) != (pass == 1)) continue;
      Link x = l;
      x.id = pre + id;
      x.from = pre + l.from;
      x.to = pre + l.to;
      out = add_link(out, std::move(x));
    }
  return out;
}

// Adds a fragment's elements and links to a host case. Throws DuplicateId on collision.
inline Case merge(const Case& host, const Case& fragment) {
  Admission admission;
  admission.allow_unslotted_goal = true;
  Case out = host;
  for (const auto& [id, e] : fragment.elements) out = add_element(out, e, admission);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& [id, l] : fragment.links)
      if ((l.kind == LinkKind::Warrants) == (pass == 1)) out = add_link(out, l);
  return out;
}

// ---------------------------------------------------------------------------
// Derivation

enum class DeriveReason { TooFewCases, ShapeMismatch };
template <>
struct EnumNames<DeriveReason> {
  static constexpr std::array<std::string_view, 2> names{"TooFewCases", "ShapeMismatch"};
};

class DeriveFailure : public std::runtime_error {
 public:
  DeriveFailure(DeriveReason reason, const std::string& detail)
      : std::runtime_error("DeriveFailure(" + std::string(to_string(reason)) + "): " + detail), reason_(reason) {}
  DeriveReason reason() const noexcept { return reason_; }

 private:
  DeriveReason reason_;
};

struct Derivation {
  Pattern pattern;
  std::vector<Bindings> bindings;  // one per input case, in input order
};

namespace detail {

// Aligns k cases from their roots (elements with no outgoing link). Children
// of an element are the links into it; children of a supports link are the
// warrants on it. Children are sorted by a key and aligned by ordinal. The
// skeleton keeps the ids of the first case.
class Aligner {
 public:
  enum class Order { ById, ByContent };

  Aligner(const std::vector<const Case*>& cases, Order order) : cases_(cases), order_(order) {
    for (const Case* c : cases_) index_.emplace_back(*c);
    elem_map_.resize(cases_.size());
    link_map_.resize(cases_.size());
    bindings_.resize(cases_.size());
  }

  void run() {
    std::vector<std::vector<const Element*>> roots(cases_.size());
    for (std::size_t i = 0; i < cases_.size(); ++i) {
      for (const auto& [id, e] : cases_[i]->elements)
        if (index_[i].out(id).empty()) roots[i].push_back(&e);
      std::stable_sort(roots[i].begin(), roots[i].end(),
                       [&](const Element* a, const Element* b) { return element_key(*a) < element_key(*b); });
      if (roots[i].size() != roots[0].size()) mismatch("different number of root elements");
      if (cases_[i]->elements.size() != cases_[0]->elements.size()) mismatch("different element counts");
      if (cases_[i]->links.size() != cases_[0]->links.size()) mismatch("different link counts");
    }
    for (std::size_t r = 0; r < roots[0].size(); ++r) {
      std::vector<const Element*> tuple;
      for (auto& rs : roots) tuple.push_back(rs[r]);
      visit(tuple);
    }
    for (std::size_t i = 0; i < cases_.size(); ++i)
      if (elem_map_[i].size() != cases_[i]->elements.size() || link_map_[i].size() != cases_[i]->links.size())
        mismatch("unaligned elements remain");
  }

  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Link>& links() const { return links_; }
  const std::map<std::string, SlotType>& slot_types() const { return slot_types_; }
  const std::vector<Bindings>& bindings() const { return bindings_; }

 private:
  [[noreturn]] static void mismatch(const std::string& why) { throw DeriveFailure(DeriveReason::ShapeMismatch, why); }

  using Key = std::tuple<int, std::vector<std::string>, std::string>;

  Key element_key(const Element& e) const {
    std::vector<std::string> content;
    if (order_ == Order::ByContent) {
      content = template_fields(e);
      content.push_back(e.stage ? std::string(to_string(*e.stage)) : "");
      content.push_back(e.scope ? std::string(to_string(*e.scope)) : "");
      content.push_back(std::string(to_string(e.tier)));
    }
    return {int(e.kind), std::move(content), e.id};
  }

  std::tuple<int, Key> link_key(std::size_t i, const Link& l) const {
    return {int(l.kind), element_key(cases_[i]->elements.at(l.from))};
  }

  // Whole-field generalisation: equal values are kept, differing values
  // become a slot shared by every field with the same value tuple and type.
  std::string generalise(const std::vector<std::string>& values, SlotType type) {
    bool same = std::all_of(values.begin(), values.end(), [&](const std::string& v) { return v == values[0]; });
    if (same && !text::has_brace(values[0])) return values[0];
    for (const auto& v : values)
      if (text::has_brace(v) || text::blank(v)) mismatch("text cannot be generalised: " + quote(v));
    auto key = std::pair{type, values};
    auto it = slot_for_.find(key);
    if (it == slot_for_.end()) {
      std::string name = "s" + std::to_string(slot_for_.size() + 1);
      it = slot_for_.emplace(key, name).first;
      slot_types_[name] = type;
      for (std::size_t i = 0; i < values.size(); ++i) bindings_[i][name] = values[i];
    }
    return "{" + it->second + "}";
  }

  void visit(const std::vector<const Element*>& tuple) {
    std::size_t mapped = 0;
    for (std::size_t i = 0; i < tuple.size(); ++i) mapped += elem_map_[i].count(tuple[i]->id);
    if (mapped == tuple.size()) {
      for (std::size_t i = 1; i < tuple.size(); ++i)
        if (elem_map_[i].at(tuple[i]->id) != elem_map_[0].at(tuple[0]->id)) mismatch("inconsistent sharing");
      return;
    }
    if (mapped != 0) mismatch("inconsistent sharing at " + tuple[0]->id);

    const Element& first = *tuple[0];
    for (const Element* e : tuple)
      if (e->kind != first.kind || e->stage != first.stage || e->scope != first.scope || e->tier != first.tier ||
          e->slots.has_value() != first.slots.has_value())
        mismatch("element attributes differ at " + first.id);

    Element out = first;
    auto column = [&](std::size_t f) {
      std::vector<std::string> v;
      for (const Element* e : tuple) v.push_back(template_fields(*e)[f]);
      return v;
    };
    std::size_t f = 0;
    if (first.slots) {
      out.slots->system = generalise(column(f++), SlotType::System);
      out.slots->context = generalise(column(f++), SlotType::Context);
      out.slots->goal = generalise(column(f++), SlotType::Goal);
      out.text = render_goal_text(*out.slots);
    } else {
      out.text = generalise(column(f++), SlotType::FreeText);
    }
    if (first.locator) out.locator = Locator::from_string(generalise(column(f++), SlotType::FreeText));
    for (std::size_t i = 0; i < tuple.size(); ++i) elem_map_[i][tuple[i]->id] = first.id;
    elements_.push_back(std::move(out));

    std::vector<std::vector<const Link*>> in(tuple.size());
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      in[i] = index_[i].in(tuple[i]->id);
      std::stable_sort(in[i].begin(), in[i].end(),
                       [&](const Link* a, const Link* b) { return link_key(i, *a) < link_key(i, *b); });
      if (in[i].size() != in[0].size()) mismatch("different number of children under " + first.id);
    }
    for (std::size_t k = 0; k < in[0].size(); ++k) {
      std::vector<const Link*> links;
      for (auto& v : in) links.push_back(v[k]);
      visit_link(links);
    }
  }

  void visit_link(const std::vector<const Link*>& tuple) {
    const Link& first = *tuple[0];
    for (const Link* l : tuple)
      if (l->kind != first.kind || l->qualifier != first.qualifier) mismatch("link attributes differ at " + first.id);
    for (std::size_t i = 0; i < tuple.size(); ++i) link_map_[i][tuple[i]->id] = first.id;
    links_.push_back(first);

    std::vector<const Element*> sources;
    for (std::size_t i = 0; i < tuple.size(); ++i) sources.push_back(&cases_[i]->elements.at(tuple[i]->from));
    visit(sources);
    // the pattern link keeps case-0 endpoints; they are aligned by construction
    for (std::size_t i = 0; i < tuple.size(); ++i)
      if (elem_map_[i].at(tuple[i]->from) != elem_map_[0].at(first.from)) mismatch("inconsistent link source");

    if (first.kind != LinkKind::Supports) return;
    std::vector<std::vector<const Link*>> ws(tuple.size());
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      ws[i] = index_[i].warrants_of(tuple[i]->id);
      std::stable_sort(ws[i].begin(), ws[i].end(),
                       [&](const Link* a, const Link* b) { return link_key(i, *a) < link_key(i, *b); });
      if (ws[i].size() != ws[0].size()) mismatch("different number of warrants on " + first.id);
    }
    for (std::size_t k = 0; k < ws[0].size(); ++k) {
      std::vector<const Link*> w;
      for (auto& v : ws) w.push_back(v[k]);
      visit_link(w);
    }
  }

  std::vector<const Case*> cases_;
  Order order_;
  std::vector<GraphIndex> index_;
  std::vector<std::map<ElementId, ElementId>> elem_map_;
  std::vector<std::map<LinkId, LinkId>> link_map_;
  std::vector<Element> elements_;
  std::vector<Link> links_;
  std::map<std::pair<SlotType, std::vector<std::string>>, std::string> slot_for_;
  std::map<std::string, SlotType> slot_types_;
  std::vector<Bindings> bindings_;
};

inline std::string case_name(const Case& c) { return c.id.empty() ? quote(c.title) : c.id; }

}  // namespace detail

// Throws DeriveFailure(TooFewCases) for fewer than two cases and
// DeriveFailure(ShapeMismatch) when the kind-labelled shapes do not align.
inline Derivation derive_with_bindings(const std::vector<Case>& cases) {
  if (cases.size() < 2) throw DeriveFailure(DeriveReason::TooFewCases, "need at least two cases");
  std::vector<const Case*> ptrs;
  for (const auto& c : cases) ptrs.push_back(&c);
  detail::Aligner aligner(ptrs, detail::Aligner::Order::ById);
  aligner.run();

  std::string names;
  for (const auto& c : cases) names += (names.empty() ? "" : ", ") + detail::case_name(c);
  Derivation d;
  d.pattern.id = "derived";
  d.pattern.intent = "Derived from " + names + ". Describe the intent of this pattern.";
  d.pattern.applicability = "Observed in " + names + ". Describe where this pattern applies.";
  d.pattern.slot_types = aligner.slot_types();

  Admission admission;
  admission.allow_unslotted_goal = true;
  admission.allow_template_slots = true;
  Case skeleton;
  skeleton.title = d.pattern.id;
  for (const auto& e : aligner.elements()) skeleton = add_element(skeleton, e, admission);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& l : aligner.links())
      if ((l.kind == LinkKind::Warrants) == (pass == 1)) skeleton = add_link(skeleton, l);
  d.pattern.skeleton = std::move(skeleton);
  d.bindings = aligner.bindings();
  return d;
}

inline Pattern derive(const std::vector<Case>& cases) { return derive_with_bindings(cases).pattern; }

// True when some id renaming maps the elements and links of a onto those of b
// with every attribute equal. Case metadata, appraisals and challenges are
// ignored. Children are matched in content order, so the check can miss an
// isomorphism only between graphs with identically labelled siblings whose
// subtrees differ.
inline bool isomorphic(const Case& a, const Case& b) {
  try {
    detail::Aligner aligner({&a, &b}, detail::Aligner::Order::ByContent);
    aligner.run();
    return aligner.slot_types().empty();
  } catch (const DeriveFailure&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Applicability advisories

struct CaseMeta {
  std::string domain;
  std::set<LifecycleStage> stages;
};

enum class AdvisoryKind { Applicability, Risk, StageGap };
template <>
struct EnumNames<AdvisoryKind> {
  static constexpr std::array<std::string_view, 3> names{"applicability", "risk", "stage-gap"};
};

struct Advisory {
  AdvisoryKind kind;
  std::string message;
  bool operator==(const Advisory&) const = default;
};

// Never blocking: echoes applicability and risks, and flags skeleton stages
// that the target case does not cover.
inline std::vector<Advisory> check_applicability(const Pattern& p, const CaseMeta& meta) {
  std::vector<Advisory> out;
  std::string applicability = p.applicability.empty() ? "(no applicability stated)" : p.applicability;
  out.push_back({AdvisoryKind::Applicability,
                 "pattern '" + p.id + "' applicability: " + applicability +
                     (meta.domain.empty() ? "" : " (case domain: " + meta.domain + ")")});
  for (const auto& r : p.risks) out.push_back({AdvisoryKind::Risk, "pattern '" + p.id + "' risk: " + r});
  std::set<LifecycleStage> referenced;
  for (const auto& [id, e] : p.skeleton.elements)
    if (e.stage) referenced.insert(*e.stage);
  for (auto s : referenced)
    if (!meta.stages.count(s))
      out.push_back({AdvisoryKind::StageGap, "pattern '" + p.id + "' references stage " + std::string(to_string(s)) +
                                                 " which the case does not cover"});
  return out;
}

// ---------------------------------------------------------------------------
// Pattern files

namespace diag {
inline constexpr const char* undeclared_slot = "E-UNDECLARED-SLOT";
inline constexpr const char* bad_slot_type = "E-BAD-SLOT-TYPE";
inline constexpr const char* duplicate_slot = "E-DUPLICATE-SLOT";
}  // namespace diag

struct PatternParseResult {
  std::optional<Pattern> value;
  std::vector<ParseDiagnostic> diagnostics;
  std::map<std::string, SourceSpan> locations;

  bool ok() const { return value.has_value(); }
  bool has(std::string_view code) const {
    for (const auto& d : diagnostics)
      if (d.code == code) return true;
    return false;
  }
};

inline PatternParseResult parse_pattern(std::string_view source) {
  PatternParseResult result;
  auto& diags = result.diagnostics;
  auto doc = dsl::parse_document(source, dsl::DocumentKind::Pattern, diags);
  Pattern p;
  if (doc.pattern) p.id = doc.pattern->id;
  p.intent = doc.intent.value_or("");
  p.applicability = doc.applicability.value_or("");
  p.risks = doc.risks;
  for (const auto& s : doc.slots) {
    auto type = enum_from_string<SlotType>(s.type);
    if (!type) {
      dsl::error(diags, s.span, diag::bad_slot_type, "unknown slot type '" + s.type + "'");
    } else if (text::blank(s.name) || text::has_brace(s.name)) {
      dsl::error(diags, s.span, diag::bad_value, "invalid slot name " + quote(s.name));
    } else if (!p.slot_types.emplace(s.name, *type).second) {
      dsl::error(diags, s.span, diag::duplicate_slot, "slot '" + s.name + "' declared twice");
    }
  }
  Admission admission;
  admission.allow_unslotted_goal = true;
  admission.allow_template_slots = true;
  Case base;
  base.title = p.id;
  p.skeleton = dsl::assemble(std::move(base), doc, admission, diags, result.locations);
  for (const auto& st : doc.elements)
    for (const auto& f : detail::template_fields(st.element))
      for (const auto& name : slot_names(f))
        if (!p.slot_types.count(name))
          dsl::error(diags, st.span, diag::undeclared_slot, "slot '{" + name + "}' is not declared");
  dsl::sort_diagnostics(diags);
  bool errors = std::any_of(diags.begin(), diags.end(), [](const auto& d) { return d.severity == Severity::Error; });
  if (!errors && doc.pattern) result.value = std::move(p);
  return result;
}

inline std::string serialize_pattern(const Pattern& p) {
  std::ostringstream os;
  os << "pattern " << p.id << '\n';
  if (!p.intent.empty()) os << "  intent " << quote(p.intent) << '\n';
  if (!p.applicability.empty()) os << "  applicability " << quote(p.applicability) << '\n';
  for (const auto& r : p.risks) os << "  risk " << quote(r) << '\n';
  for (const auto& [name, type] : p.slot_types) os << "  slot " << quote(name) << " : " << to_string(type) << '\n';
  Case body;
  body.elements = p.skeleton.elements;
  body.links = p.skeleton.links;
  dsl::write_body(os, body);
  return os.str();
}

}  // namespace eac
