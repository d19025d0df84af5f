#pragma once

// Lifecycle-stage coverage, frozen snapshots of a case and field-level diffs
// between snapshots.

#include <openssl/evp.h>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "eac/dsl.hpp"
#include "eac/model.hpp"
#include "eac/status.hpp"

namespace eac {

// ---------------------------------------------------------------------------
// Coverage

struct CoverageReport {
  std::map<LifecycleStage, std::size_t> counts;  // all 13 stages, zero included
  std::size_t untagged = 0;
  std::vector<LifecycleStage> uncovered;

  std::size_t covered() const { return enum_count<LifecycleStage>() - uncovered.size(); }
};

inline CoverageReport coverage(const Case& c) {
  CoverageReport r;
  for (auto s : enum_values<LifecycleStage>()) r.counts[s] = 0;
  for (const auto& [id, e] : c.elements) {
    if (e.kind != ElementKind::PropertyClaim) continue;
    if (e.stage)
      ++r.counts[*e.stage];
    else
      ++r.untagged;
  }
  for (const auto& [s, n] : r.counts)
    if (n == 0) r.uncovered.push_back(s);
  return r;
}

// ---------------------------------------------------------------------------
// Digest

inline constexpr std::string_view digest_algorithm = "sha256";

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots

struct Snapshot {
  std::string label;
  Timestamp taken_at;
  std::string frozen;  // canonical .eac text
  std::string digest;  // hex of sha256(frozen)
  bool operator==(const Snapshot&) const = default;
};

inline bool is_snapshot_label(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!text::is_alpha(c) && !text::is_digit(c) && c != '_' && c != '-' && c != '.') return false;
  return true;
}

inline Snapshot snapshot(const Case& c, std::string label, Timestamp taken_at = text::now()) {
  if (!is_snapshot_label(label)) throw Error(ErrorCode::InvalidId, label);
  std::string frozen = serialize(c);
  std::string digest = sha256_hex(frozen);
  return {std::move(label), taken_at, std::move(frozen), std::move(digest)};
}

// File form: one header line `eac-snapshot <label> <timestamp> sha256:<hex>` then the frozen text.
inline std::string write_snapshot(const Snapshot& s) {
  return "eac-snapshot " + s.label + " " + text::format_timestamp(s.taken_at) + " " + std::string(digest_algorithm) +
         ":" + s.digest + "\n" + s.frozen;
}

// Throws ParseFailure for a malformed header, an unknown algorithm or a digest
// that does not match the frozen text.
inline Snapshot read_snapshot(std::string_view file) {
  auto nl = file.find('\n');
  if (nl == std::string_view::npos) throw Error(ErrorCode::ParseFailure, "snapshot header missing");
  auto parts = text::split(file.substr(0, nl), ' ');
  if (parts.size() != 4 || parts[0] != "eac-snapshot")
    throw Error(ErrorCode::ParseFailure, "malformed snapshot header");
  Snapshot s;
  s.label = parts[1];
  if (!is_snapshot_label(s.label)) throw Error(ErrorCode::ParseFailure, "bad snapshot label", {parts[1]});
  auto ts = text::parse_timestamp(parts[2]);
  if (!ts) throw Error(ErrorCode::ParseFailure, "bad snapshot timestamp", {s.label});
  s.taken_at = *ts;
  auto colon = parts[3].find(':');
  if (colon == std::string::npos || parts[3].substr(0, colon) != digest_algorithm)
    throw Error(ErrorCode::ParseFailure, "unsupported digest algorithm", {s.label});
  s.digest = parts[3].substr(colon + 1);
  s.frozen = std::string(file.substr(nl + 1));
  if (sha256_hex(s.frozen) != s.digest) throw Error(ErrorCode::ParseFailure, "digest mismatch", {s.label});
  return s;
}

// ---------------------------------------------------------------------------
// Diff

struct FieldChange {
  std::string field;
  std::string before;
  std::string after;
  bool operator==(const FieldChange&) const = default;
};

struct EntryChange {
  std::string id;
  std::vector<FieldChange> fields;
  bool operator==(const EntryChange&) const = default;
};

struct CollectionDiff {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  std::vector<EntryChange> modified;
  bool empty() const { return added.empty() && removed.empty() && modified.empty(); }
  bool operator==(const CollectionDiff&) const = default;
};

struct ChangeSet {
  std::vector<FieldChange> case_fields;
  std::optional<std::pair<Phase, Phase>> phase_change;
  CollectionDiff elements;
  CollectionDiff links;
  CollectionDiff challenges;
  CollectionDiff appraisals;
  std::map<ElementId, std::pair<Status, Status>> status_deltas;

  bool empty() const {
    return case_fields.empty() && !phase_change && elements.empty() && links.empty() && challenges.empty() &&
           appraisals.empty() && status_deltas.empty();
  }
  bool operator==(const ChangeSet&) const = default;
};

namespace detail {

using Fields = std::vector<std::pair<std::string, std::string>>;

inline std::string opt(const std::optional<std::string>& s) { return s.value_or(""); }

template <class E>
inline std::string opt_enum(const std::optional<E>& e) {
  return e ? std::string(to_string(*e)) : std::string();
}

inline Fields fields_of(const Element& e) {
  return {{"kind", std::string(to_string(e.kind))},
          {"text", e.text},
          {"stage", opt_enum(e.stage)},
          {"scope", opt_enum(e.scope)},
          {"slots.system", e.slots ? e.slots->system : ""},
          {"slots.context", e.slots ? e.slots->context : ""},
          {"slots.goal", e.slots ? e.slots->goal : ""},
          {"locator", e.locator ? e.locator->str() : ""},
          {"tier", std::string(to_string(e.tier))}};
}

inline Fields fields_of(const Link& l) {
  return {{"kind", std::string(to_string(l.kind))},
          {"from", l.from},
          {"to", l.to},
          {"qualifier", l.qualifier ? std::string(to_string(l.qualifier->label)) : ""},
          {"qualifier.note", l.qualifier ? opt(l.qualifier->note) : ""}};
}

inline Fields fields_of(const Challenge& c) {
  return {{"target", c.target},
          {"author", c.author},
          {"text", c.text},
          {"state", std::string(to_string(c.state))},
          {"resolutionNote", opt(c.resolution_note)}};
}

inline Fields fields_of(const AppraisalRecord& r) {
  return {{"relevance", std::string(to_string(r.relevance.value))},
          {"relevance.note", r.relevance.note},
          {"materiality", std::string(to_string(r.materiality.value))},
          {"materiality.note", r.materiality.note},
          {"admissibility", std::string(to_string(r.admissibility.value))},
          {"admissibility.note", r.admissibility.note},
          {"probativeValue", text::format_number(r.probative_value)},
          {"assessor", r.assessor},
          {"date", text::format_date(r.date)}};
}

inline std::vector<FieldChange> compare(const Fields& a, const Fields& b) {
  std::vector<FieldChange> out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].second != b[i].second) out.push_back({a[i].first, a[i].second, b[i].second});
  return out;
}

template <class M>
inline CollectionDiff diff_collection(const M& a, const M& b) {
  CollectionDiff d;
  for (const auto& [id, v] : a) {
    auto it = b.find(id);
    if (it == b.end()) {
      d.removed.push_back(id);
      continue;
    }
    auto changes = compare(fields_of(v), fields_of(it->second));
    if (!changes.empty()) d.modified.push_back({id, std::move(changes)});
  }
  for (const auto& [id, v] : b)
    if (!a.count(id)) d.added.push_back(id);
  return d;
}

inline std::string opt_ts(const std::optional<Timestamp>& t) { return t ? text::format_timestamp(*t) : ""; }

}  // namespace detail

// Field-level diff between two cases, with status deltas for elements present in both.
inline ChangeSet diff_cases(const Case& a, const Case& b) {
  ChangeSet cs;
  cs.case_fields = detail::compare(
      {{"id", a.id}, {"title", a.title}, {"created", detail::opt_ts(a.created)}, {"modified", detail::opt_ts(a.modified)}},
      {{"id", b.id}, {"title", b.title}, {"created", detail::opt_ts(b.created)}, {"modified", detail::opt_ts(b.modified)}});
  if (a.phase != b.phase) cs.phase_change = std::pair{a.phase, b.phase};
  cs.elements = detail::diff_collection(a.elements, b.elements);
  cs.links = detail::diff_collection(a.links, b.links);
  cs.challenges = detail::diff_collection(a.challenges, b.challenges);
  cs.appraisals = detail::diff_collection(a.appraisals, b.appraisals);
  auto sa = compute_status(a), sb = compute_status(b);
  for (const auto& [id, s] : sa) {
    auto it = sb.find(id);
    if (it != sb.end() && it->second != s) cs.status_deltas[id] = {s, it->second};
  }
  return cs;
}

// Throws ParseFailure naming the snapshot whose frozen text does not parse.
inline Case thaw(const Snapshot& s) {
  auto r = parse(s.frozen);
  if (!r.ok()) {
    std::string first = r.diagnostics.empty() ? "" : r.diagnostics.front().message;
    throw Error(ErrorCode::ParseFailure, "snapshot '" + s.label + "' does not parse: " + first, {s.label});
  }
  return std::move(*r.value);
}

inline ChangeSet diff(const Snapshot& a, const Snapshot& b) { return diff_cases(thaw(a), thaw(b)); }

}  // namespace eac
