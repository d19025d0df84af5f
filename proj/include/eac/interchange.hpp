#pragma once

// JSON interchange document and the JSON views of reports used by the CLI's
// --json mode and by the review service.
//
// Interchange layout (keys sorted, arrays sorted by id, UTF-8, LF):
//   {"appraisals": [...], "case": {...}, "challenges": [...],
//    "elements": [...], "links": [...], "version": "1"}
// An optional "sufficiency" member carries a SufficiencyReport.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eac/appraisal.hpp"
#include "eac/lifecycle.hpp"
#include "eac/model.hpp"
#include "eac/status.hpp"
#include "eac/validation.hpp"

namespace eac {

using Json = nlohmann::json;

inline constexpr std::string_view interchange_version = "1";

inline std::string dump_json(const Json& j) { return j.dump(2, ' ', false) + "\n"; }

namespace detail {

template <class E>
Json enum_json(E e) {
  return std::string(to_string(e));
}

inline Json element_json(const Element& e) {
  Json j = {{"id", e.id}, {"kind", enum_json(e.kind)}, {"text", e.text}, {"tier", enum_json(e.tier)}};
  if (e.stage) j["stage"] = enum_json(*e.stage);
  if (e.scope) j["scope"] = enum_json(*e.scope);
  if (e.slots) j["slots"] = {{"system", e.slots->system}, {"context", e.slots->context}, {"goal", e.slots->goal}};
  if (e.locator) {
    j["locator"] = {{"target", e.locator->target}};
    if (e.locator->section) j["locator"]["section"] = *e.locator->section;
  }
  return j;
}

inline Json link_json(const Link& l) {
  Json j = {{"id", l.id}, {"kind", enum_json(l.kind)}, {"from", l.from}, {"to", l.to}};
  if (l.qualifier) {
    j["qualifier"] = {{"label", enum_json(l.qualifier->label)}};
    if (l.qualifier->note) j["qualifier"]["note"] = *l.qualifier->note;
  }
  return j;
}

inline Json challenge_json(const Challenge& c) {
  Json j = {{"id", c.id}, {"target", c.target}, {"author", c.author}, {"text", c.text}, {"state", enum_json(c.state)}};
  if (c.resolution_note) j["resolutionNote"] = *c.resolution_note;
  return j;
}

template <class V>
Json verdict_json(const Verdict<V>& v) {
  return {{"verdict", enum_json(v.value)}, {"note", v.note}};
}

inline Json appraisal_json(const AppraisalRecord& r) {
  return {{"evidenceId", r.evidence_id},
          {"relevance", verdict_json(r.relevance)},
          {"materiality", verdict_json(r.materiality)},
          {"admissibility", verdict_json(r.admissibility)},
          {"probativeValue", r.probative_value},
          {"assessor", r.assessor},
          {"date", text::format_date(r.date)}};
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const AssessedValue& v) {
  return {{"value", detail::optional_number(v.value)}, {"verdict", detail::enum_json(v.verdict)}};
}

inline Json to_json(const SufficiencyReport& r) {
  Json per_evidence = Json::object(), per_claim = Json::object();
  for (const auto& [id, v] : r.per_evidence) per_evidence[id] = detail::optional_number(v);
  for (const auto& [id, v] : r.per_claim) per_claim[id] = to_json(v);
  return {{"threshold", r.threshold},
          {"perEvidence", per_evidence},
          {"perClaim", per_claim},
          {"caseValue", to_json(r.case_value)},
          {"rootGoals", r.root_goals}};
}

inline Json interchange_json(const Case& c, const SufficiencyReport* sufficiency = nullptr) {
  Json doc;
  doc["version"] = std::string(interchange_version);
  doc["case"] = {{"id", c.id}, {"title", c.title}, {"phase", detail::enum_json(c.phase)}};
  if (c.created) doc["case"]["created"] = text::format_timestamp(*c.created);
  if (c.modified) doc["case"]["modified"] = text::format_timestamp(*c.modified);
  doc["elements"] = Json::array();
  doc["links"] = Json::array();
  doc["challenges"] = Json::array();
  doc["appraisals"] = Json::array();
  for (const auto& [id, e] : c.elements) doc["elements"].push_back(detail::element_json(e));
  for (const auto& [id, l] : c.links) doc["links"].push_back(detail::link_json(l));
  for (const auto& [id, ch] : c.challenges) doc["challenges"].push_back(detail::challenge_json(ch));
  for (const auto& [id, r] : c.appraisals) doc["appraisals"].push_back(detail::appraisal_json(r));
  if (sufficiency) doc["sufficiency"] = to_json(*sufficiency);
  return doc;
}

inline std::string to_interchange(const Case& c) { return dump_json(interchange_json(c)); }

inline std::string to_interchange(const Case& c, const SufficiencyReport& sufficiency) {
  return dump_json(interchange_json(c, &sufficiency));
}

// ---------------------------------------------------------------------------
// Reading

struct InterchangeDiagnostic {
  std::string pointer;  // JSON pointer into the document
  std::string code;
  std::string message;
  bool operator==(const InterchangeDiagnostic&) const = default;
};

namespace interchange_codes {
inline constexpr const char* invalid_json = "invalid-json";
inline constexpr const char* schema = "schema-violation";
inline constexpr const char* unknown_version = "unknown-version";
inline constexpr const char* dangling_reference = "dangling-reference";
inline constexpr const char* duplicate_id = "duplicate-id";
inline constexpr const char* kind_mismatch = "kind-mismatch";
inline constexpr const char* cycle = "cycle";
inline constexpr const char* invariant = "invariant-violation";
}  // namespace interchange_codes

struct InterchangeResult {
  std::optional<Case> value;
  std::vector<InterchangeDiagnostic> diagnostics;
  bool ok() const { return value.has_value(); }
  bool has(std::string_view code) const {
    for (const auto& d : diagnostics)
      if (d.code == code) return true;
    return false;
  }
};

namespace detail {

class JsonReader {
 public:
  explicit JsonReader(std::vector<InterchangeDiagnostic>& diags) : diags_(diags) {}

  void fail(std::string pointer, const char* code, std::string message) {
    diags_.push_back({std::move(pointer), code, std::move(message)});
  }

  const Json* member(const Json& obj, const std::string& ptr, const char* key, bool required = true) {
    if (!obj.is_object()) {
      fail(ptr, interchange_codes::schema, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(ptr + "/" + key, interchange_codes::schema, std::string("missing member '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string(const Json& obj, const std::string& ptr, const char* key, bool required = true) {
    const Json* v = member(obj, ptr, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(ptr + "/" + key, interchange_codes::schema, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  template <class E>
  std::optional<E> choice(const Json& obj, const std::string& ptr, const char* key, bool required = true) {
    auto s = string(obj, ptr, key, required);
    if (!s) return std::nullopt;
    auto e = enum_from_string<E>(*s);
    if (!e) fail(ptr + "/" + key, interchange_codes::schema, "unknown value '" + *s + "'");
    return e;
  }

  bool ok_since(std::size_t mark) const { return diags_.size() == mark; }
  std::size_t mark() const { return diags_.size(); }

 private:
  std::vector<InterchangeDiagnostic>& diags_;
};

inline const char* interchange_code(const Error& err) {
  switch (err.code()) {
    case ErrorCode::DanglingEndpoint:
    case ErrorCode::DanglingTarget:
    case ErrorCode::NotEvidence:
      return interchange_codes::dangling_reference;
    case ErrorCode::DuplicateId:
      return interchange_codes::duplicate_id;
    case ErrorCode::IncompatibleKinds:
      return interchange_codes::kind_mismatch;
    case ErrorCode::CycleIntroduced:
      return interchange_codes::cycle;
    default:
      return interchange_codes::invariant;
  }
}

template <class V>
std::optional<Verdict<V>> read_verdict(JsonReader& rd, const Json& obj, const std::string& ptr, const char* key) {
  const Json* v = rd.member(obj, ptr, key);
  if (!v) return std::nullopt;
  auto value = rd.choice<V>(*v, ptr + "/" + key, "verdict");
  auto note = rd.string(*v, ptr + "/" + key, "note", false);
  if (!value) return std::nullopt;
  return Verdict<V>{*value, note.value_or("")};
}

}  // namespace detail

inline InterchangeResult from_interchange(std::string_view bytes) {
  using detail::JsonReader;
  InterchangeResult result;
  auto& diags = result.diagnostics;
  Json doc = Json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) {
    diags.push_back({"", interchange_codes::invalid_json, "document is not valid JSON"});
    return result;
  }
  JsonReader rd(diags);
  if (!doc.is_object()) {
    rd.fail("", interchange_codes::schema, "document must be an object");
    return result;
  }
  auto version = rd.string(doc, "", "version");
  if (!version) return result;
  if (*version != interchange_version) {
    rd.fail("/version", interchange_codes::unknown_version, "unsupported interchange version '" + *version + "'");
    return result;
  }

  Case c;
  if (const Json* meta = rd.member(doc, "", "case")) {
    c.id = rd.string(*meta, "/case", "id").value_or("");
    c.title = rd.string(*meta, "/case", "title").value_or("");
    c.phase = rd.choice<Phase>(*meta, "/case", "phase").value_or(Phase::Preliminary);
    for (auto [key, field] : {std::pair{"created", &c.created}, std::pair{"modified", &c.modified}}) {
      if (auto s = rd.string(*meta, "/case", key, false)) {
        *field = text::parse_timestamp(*s);
        if (!*field) rd.fail(std::string("/case/") + key, interchange_codes::schema, "bad timestamp '" + *s + "'");
      }
    }
  }

  auto array = [&](const char* key) -> const Json* {
    const Json* a = rd.member(doc, "", key);
    if (a && !a->is_array()) {
      rd.fail(std::string("/") + key, interchange_codes::schema, "expected an array");
      return nullptr;
    }
    return a;
  };

  if (const Json* elements = array("elements")) {
    for (std::size_t i = 0; i < elements->size(); ++i) {
      const Json& j = (*elements)[i];
      const std::string ptr = "/elements/" + std::to_string(i);
      const auto mark = rd.mark();
      Element e;
      e.id = rd.string(j, ptr, "id").value_or("");
      e.kind = rd.choice<ElementKind>(j, ptr, "kind").value_or(ElementKind::PropertyClaim);
      e.text = rd.string(j, ptr, "text").value_or("");
      e.tier = rd.choice<AudienceTier>(j, ptr, "tier").value_or(AudienceTier::Public);
      if (j.is_object() && j.contains("stage")) e.stage = rd.choice<LifecycleStage>(j, ptr, "stage");
      if (j.is_object() && j.contains("scope")) e.scope = rd.choice<ClaimScope>(j, ptr, "scope");
      if (const Json* s = rd.member(j, ptr, "slots", false)) {
        GoalSlots slots;
        slots.system = rd.string(*s, ptr + "/slots", "system").value_or("");
        slots.context = rd.string(*s, ptr + "/slots", "context").value_or("");
        slots.goal = rd.string(*s, ptr + "/slots", "goal").value_or("");
        e.slots = std::move(slots);
      }
      if (const Json* l = rd.member(j, ptr, "locator", false)) {
        Locator loc;
        loc.target = rd.string(*l, ptr + "/locator", "target").value_or("");
        loc.section = rd.string(*l, ptr + "/locator", "section", false);
        e.locator = std::move(loc);
      }
      if (!rd.ok_since(mark)) continue;
      try {
        Admission admission;
        admission.allow_unslotted_goal = true;
        c = add_element(c, std::move(e), admission);
      } catch (const Error& err) {
        rd.fail(ptr, detail::interchange_code(err), err.what());
      }
    }
  }

  if (const Json* links = array("links")) {
    std::vector<std::pair<Link, std::string>> pending;
    for (std::size_t i = 0; i < links->size(); ++i) {
      const Json& j = (*links)[i];
      const std::string ptr = "/links/" + std::to_string(i);
      const auto mark = rd.mark();
      Link l;
      l.id = rd.string(j, ptr, "id").value_or("");
      l.kind = rd.choice<LinkKind>(j, ptr, "kind").value_or(LinkKind::Supports);
      l.from = rd.string(j, ptr, "from").value_or("");
      l.to = rd.string(j, ptr, "to").value_or("");
      if (const Json* q = rd.member(j, ptr, "qualifier", false)) {
        auto label = rd.choice<QualifierLabel>(*q, ptr + "/qualifier", "label");
        l.qualifier = Qualifier{label.value_or(QualifierLabel::Likely), rd.string(*q, ptr + "/qualifier", "note", false)};
      }
      if (rd.ok_since(mark)) pending.emplace_back(std::move(l), ptr);
    }
    for (int pass = 0; pass < 2; ++pass)
      for (auto& [l, ptr] : pending) {
        if ((l.kind == LinkKind::Warrants) != (pass == 1)) continue;
        try {
          c = add_link(c, l);
        } catch (const Error& err) {
          std::string where = ptr;
          if (err.code() == ErrorCode::DanglingEndpoint) where += err.detail() == l.from ? "/from" : "/to";
          rd.fail(where, detail::interchange_code(err), err.what());
        }
      }
  }

  if (const Json* appraisals = array("appraisals")) {
    for (std::size_t i = 0; i < appraisals->size(); ++i) {
      const Json& j = (*appraisals)[i];
      const std::string ptr = "/appraisals/" + std::to_string(i);
      const auto mark = rd.mark();
      AppraisalRecord r;
      r.evidence_id = rd.string(j, ptr, "evidenceId").value_or("");
      auto rel = detail::read_verdict<Relevance>(rd, j, ptr, "relevance");
      auto mat = detail::read_verdict<Materiality>(rd, j, ptr, "materiality");
      auto adm = detail::read_verdict<Admissibility>(rd, j, ptr, "admissibility");
      const Json* pv = rd.member(j, ptr, "probativeValue");
      if (pv && !pv->is_number()) rd.fail(ptr + "/probativeValue", interchange_codes::schema, "expected a number");
      r.assessor = rd.string(j, ptr, "assessor").value_or("");
      auto date = rd.string(j, ptr, "date");
      if (date && !text::parse_date(*date)) rd.fail(ptr + "/date", interchange_codes::schema, "bad date '" + *date + "'");
      if (!rd.ok_since(mark)) continue;
      r.relevance = *rel;
      r.materiality = *mat;
      r.admissibility = *adm;
      r.probative_value = pv->get<double>();
      r.date = *text::parse_date(*date);
      if (c.appraisals.count(r.evidence_id)) {
        rd.fail(ptr + "/evidenceId", interchange_codes::duplicate_id, "evidence appraised twice");
        continue;
      }
      try {
        c = record_appraisal(c, std::move(r));
      } catch (const Error& err) {
        rd.fail(ptr, detail::interchange_code(err), err.what());
      }
    }
  }

  if (const Json* challenges = array("challenges")) {
    for (std::size_t i = 0; i < challenges->size(); ++i) {
      const Json& j = (*challenges)[i];
      const std::string ptr = "/challenges/" + std::to_string(i);
      const auto mark = rd.mark();
      Challenge ch;
      ch.id = rd.string(j, ptr, "id").value_or("");
      ch.target = rd.string(j, ptr, "target").value_or("");
      ch.author = rd.string(j, ptr, "author").value_or("");
      ch.text = rd.string(j, ptr, "text").value_or("");
      auto state = rd.choice<ChallengeState>(j, ptr, "state");
      auto note = rd.string(j, ptr, "resolutionNote", false);
      if (!rd.ok_since(mark)) continue;
      try {
        Case next = attach_challenge(c, ch);
        if (*state != ChallengeState::Open)
          next = resolve_challenge(next, ch.id, *state, note.value_or(""));
        else if (note)
          throw Error(ErrorCode::KindInvariantViolation, "note-on-open-challenge", {ch.id});
        c = std::move(next);
      } catch (const Error& err) {
        std::string where = ptr;
        if (err.code() == ErrorCode::DanglingTarget) where += "/target";
        rd.fail(where, detail::interchange_code(err), err.what());
      }
    }
  }

  if (diags.empty()) result.value = std::move(c);
  return result;
}

// ---------------------------------------------------------------------------
// Report views

inline Json to_json(const StatusMap& statuses) {
  Json j = Json::object();
  for (const auto& [id, s] : statuses) j[id] = std::string(to_string(s));
  return j;
}

inline Json to_json(const Explanation& e) {
  Json children = Json::array();
  for (const auto& c : e.children) children.push_back(to_json(c));
  return {{"id", e.id}, {"status", std::string(to_string(e.status))}, {"rule", e.rule}, {"via", e.via},
          {"children", children}};
}

inline Json to_json(const Finding& f) {
  return {{"code", f.code}, {"target", f.target_id}, {"severity", std::string(to_string(f.severity))},
          {"message", f.message}};
}

inline Json to_json(const ValidationReport& r) {
  Json findings = Json::array();
  for (const auto& f : r.findings) findings.push_back(to_json(f));
  return {{"phase", std::string(to_string(r.phase))},
          {"findings", findings},
          {"errors", r.errors()},
          {"warnings", r.warnings()},
          {"statuses", to_json(r.statuses)}};
}

inline Json to_json(const CoverageReport& r) {
  Json counts = Json::object();
  for (const auto& [s, n] : r.counts) counts[std::string(to_string(s))] = n;
  Json uncovered = Json::array();
  for (auto s : r.uncovered) uncovered.push_back(std::string(to_string(s)));
  return {{"counts", counts}, {"untagged", r.untagged}, {"covered", r.covered()},
          {"total", enum_count<LifecycleStage>()}, {"uncovered", uncovered}};
}

inline Json to_json(const CollectionDiff& d) {
  Json modified = Json::array();
  for (const auto& m : d.modified) {
    Json fields = Json::array();
    for (const auto& f : m.fields) fields.push_back({{"field", f.field}, {"before", f.before}, {"after", f.after}});
    modified.push_back({{"id", m.id}, {"fields", fields}});
  }
  return {{"added", d.added}, {"removed", d.removed}, {"modified", modified}};
}

inline Json to_json(const ChangeSet& cs) {
  Json fields = Json::array();
  for (const auto& f : cs.case_fields) fields.push_back({{"field", f.field}, {"before", f.before}, {"after", f.after}});
  Json deltas = Json::object();
  for (const auto& [id, d] : cs.status_deltas)
    deltas[id] = {{"before", std::string(to_string(d.first))}, {"after", std::string(to_string(d.second))}};
  Json phase = nullptr;
  if (cs.phase_change)
    phase = {{"from", std::string(to_string(cs.phase_change->first))},
             {"to", std::string(to_string(cs.phase_change->second))}};
  return {{"empty", cs.empty()},
          {"caseFields", fields},
          {"phaseChange", phase},
          {"elements", to_json(cs.elements)},
          {"links", to_json(cs.links)},
          {"challenges", to_json(cs.challenges)},
          {"appraisals", to_json(cs.appraisals)},
          {"statusDeltas", deltas}};
}

}  // namespace eac
