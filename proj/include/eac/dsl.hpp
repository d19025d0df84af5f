#pragma once

// The plain-text case language (.eac) and the shared statement grammar used by
// pattern files (.eap).
//
// One statement per line, `#` starts a comment, strings are double-quoted with
// \" and \\ as the only escapes.
//
//   case "<title>" phase <phase> [id <id>] [created <ts>] [modified <ts>]
//   goal <id> system "<s>" context "<c>" value "<g>" [stage <st>] [tier <t>]
//   goal <id> [stage <st>] [tier <t>] "<statement>"
//   context <id> [stage <st>] [tier <t>] "<text>"
//   claim <id> scope <system|project> [stage <st>] [tier <t>] "<text>"
//   eclaim <id> [stage <st>] [tier <t>] "<text>"
//   evidence <id> at "<locator>" [stage <st>] [tier <t>] "<text>"
//   warrant <id> [stage <st>] [tier <t>] "<text>"
//   assume <id> [stage <st>] [tier <t>] "<text>"
//   link <id> <supports|contextOf|evidences> <from> -> <to> [qualifier <label> [note "<n>"]]
//   link <id> warrants <warrantId> -> <linkId>
//   appraisal <evidenceId> relevance <r> ["<n>"] materiality <m> ["<n>"]
//             admissibility <a> ["<n>"] value <v> by "<assessor>" on <YYYY-MM-DD>
//   challenge <id> on <target> by "<author>" "<text>" [state <s> [note "<n>"]]

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eac/appraisal.hpp"
#include "eac/model.hpp"
#include "eac/validation.hpp"

namespace eac {

struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 1;
  bool operator==(const SourceSpan&) const = default;
};

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string code;
  std::string message;
  bool operator==(const ParseDiagnostic&) const = default;
};

// Diagnostic codes. Stable: tools and tests match on them.
namespace diag {
inline constexpr const char* syntax = "E-SYNTAX";
inline constexpr const char* unknown_keyword = "E-UNKNOWN-KEYWORD";
inline constexpr const char* unterminated_string = "E-UNTERMINATED-STRING";
inline constexpr const char* bad_escape = "E-BAD-ESCAPE";
inline constexpr const char* missing_header = "E-MISSING-HEADER";
inline constexpr const char* duplicate_header = "E-DUPLICATE-HEADER";
inline constexpr const char* goal_slots = "E-GOAL-SLOTS";
inline constexpr const char* empty_slot = "E-EMPTY-SLOT";
inline constexpr const char* brace_in_slot = "E-BRACE-IN-SLOT";
inline constexpr const char* bad_id = "E-BAD-ID";
inline constexpr const char* bad_value = "E-BAD-VALUE";
inline constexpr const char* duplicate_id = "E-DUPLICATE-ID";
inline constexpr const char* duplicate_appraisal = "E-DUPLICATE-APPRAISAL";
inline constexpr const char* dangling_ref = "E-DANGLING-REF";
inline constexpr const char* kind_mismatch = "E-KIND-MISMATCH";
inline constexpr const char* kind_invariant = "E-KIND-INVARIANT";
inline constexpr const char* cycle = "E-CYCLE";
inline constexpr const char* not_evidence = "E-NOT-EVIDENCE";
inline constexpr const char* value_range = "E-VALUE-RANGE";
inline constexpr const char* missing_note = "E-MISSING-NOTE";
inline constexpr const char* statement_not_allowed = "E-STATEMENT-NOT-ALLOWED";
}  // namespace diag

struct ParseResult {
  std::optional<Case> value;
  std::vector<ParseDiagnostic> diagnostics;
  // Where each element, link and challenge id was declared.
  std::map<std::string, SourceSpan> locations;

  bool ok() const { return value.has_value(); }
  std::size_t errors() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics) n += d.severity == Severity::Error;
    return n;
  }
  bool has(std::string_view code) const {
    for (const auto& d : diagnostics)
      if (d.code == code) return true;
    return false;
  }
};

inline std::string_view element_keyword(ElementKind k) {
  switch (k) {
    case ElementKind::Goal:
      return "goal";
    case ElementKind::Context:
      return "context";
    case ElementKind::PropertyClaim:
      return "claim";
    case ElementKind::EvidentialClaim:
      return "eclaim";
    case ElementKind::Evidence:
      return "evidence";
    case ElementKind::Warrant:
      return "warrant";
    case ElementKind::Assumption:
      return "assume";
  }
  return "";
}

inline std::optional<ElementKind> element_kind_from_keyword(std::string_view kw) {
  for (auto k : enum_values<ElementKind>())
    if (element_keyword(k) == kw) return k;
  return std::nullopt;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

namespace dsl {

// ---------------------------------------------------------------------------
// Lexing

struct Token {
  enum class Kind { Word, String };
  Kind kind = Kind::Word;
  std::string text;
  SourceSpan span;
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;
};

using Diagnostics = std::vector<ParseDiagnostic>;

inline void error(Diagnostics& out, SourceSpan span, const char* code, std::string message) {
  out.push_back({Severity::Error, span, code, std::move(message)});
}

// Splits one physical line into words and strings. Columns count code points.
inline Line lex_line(std::string_view raw, int number, Diagnostics& diags) {
  Line line{number, {}};
  std::size_t i = 0;
  auto column_of = [&](std::size_t byte) { return int(text::utf8_length(raw.substr(0, byte))) + 1; };
  while (i < raw.size()) {
    char c = raw[i];
    if (text::is_space(c)) {
      ++i;
      continue;
    }
    if (c == '#') break;
    const std::size_t start = i;
    if (c == '"') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < raw.size()) {
        char d = raw[i];
        if (d == '\\') {
          if (i + 1 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
            value += raw[i + 1];
            i += 2;
            continue;
          }
          error(diags, {number, column_of(i), 2}, diag::bad_escape, "only \\\" and \\\\ escapes are allowed");
          return line;
        }
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        value += d;
        ++i;
      }
      SourceSpan span{number, column_of(start), int(text::utf8_length(raw.substr(start, i - start)))};
      if (!closed) {
        error(diags, span, diag::unterminated_string, "string is not terminated before the end of the line");
        return line;
      }
      line.tokens.push_back({Token::Kind::String, std::move(value), span});
      continue;
    }
    while (i < raw.size() && !text::is_space(raw[i]) && raw[i] != '"' && raw[i] != '#') ++i;
    auto word = raw.substr(start, i - start);
    line.tokens.push_back(
        {Token::Kind::Word, std::string(word), {number, column_of(start), int(text::utf8_length(word))}});
  }
  return line;
}

// ---------------------------------------------------------------------------
// Statement-level cursor. Every method reports its own diagnostic and returns
// nullopt/false on failure; a statement stops at its first error.

class Cursor {
 public:
  Cursor(const Line& line, Diagnostics& diags) : line_(line), diags_(diags) {}

  bool at_end() const { return pos_ >= line_.tokens.size(); }
  const Token* peek() const { return at_end() ? nullptr : &line_.tokens[pos_]; }
  SourceSpan span() const { return at_end() ? last_span() : line_.tokens[pos_].span; }
  SourceSpan last_span() const { return line_.tokens.empty() ? SourceSpan{line_.number, 1, 1} : line_.tokens.back().span; }

  bool peek_word(std::string_view w) const {
    return !at_end() && line_.tokens[pos_].kind == Token::Kind::Word && line_.tokens[pos_].text == w;
  }
  bool peek_string() const { return !at_end() && line_.tokens[pos_].kind == Token::Kind::String; }

  bool accept(std::string_view w) {
    if (!peek_word(w)) return false;
    ++pos_;
    return true;
  }

  bool keyword(std::string_view w) {
    if (accept(w)) return true;
    fail(diag::syntax, "expected '" + std::string(w) + "'" + found());
    return false;
  }

  std::optional<Token> word(std::string_view what) {
    if (!at_end() && line_.tokens[pos_].kind == Token::Kind::Word) return line_.tokens[pos_++];
    fail(diag::syntax, "expected " + std::string(what) + found());
    return std::nullopt;
  }

  std::optional<Token> identifier(std::string_view what) {
    auto w = word(what);
    if (!w) return std::nullopt;
    if (!text::is_identifier(w->text)) {
      error(diags_, w->span, diag::bad_id, "'" + w->text + "' is not a valid identifier for " + std::string(what));
      return std::nullopt;
    }
    return w;
  }

  std::optional<Token> string(std::string_view what) {
    if (peek_string()) return line_.tokens[pos_++];
    fail(diag::syntax, "expected quoted " + std::string(what) + found());
    return std::nullopt;
  }

  template <class E>
  std::optional<E> choice(std::string_view what) {
    auto w = word(what);
    if (!w) return std::nullopt;
    if (auto v = enum_from_string<E>(w->text)) return v;
    std::string options;
    for (auto e : enum_values<E>()) options += (options.empty() ? "" : "|") + std::string(to_string(e));
    error(diags_, w->span, diag::bad_value, "unknown " + std::string(what) + " '" + w->text + "' (expected " + options + ")");
    return std::nullopt;
  }

  bool end() {
    if (at_end()) return true;
    const Token& t = line_.tokens[pos_];
    error(diags_, t.span, diag::syntax, "unexpected " + describe(t) + " at end of statement");
    return false;
  }

 private:
  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::String ? "string " + quote(t.text) : "'" + t.text + "'";
  }
  std::string found() const { return at_end() ? " at end of line" : ", found " + describe(line_.tokens[pos_]); }
  void fail(const char* code, std::string msg) { error(diags_, span(), code, std::move(msg)); }

  const Line& line_;
  Diagnostics& diags_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Statements

struct HeaderStmt {
  std::string title;
  Phase phase = Phase::Preliminary;
  std::string id;
  std::optional<Timestamp> created, modified;
};

struct PatternHeaderStmt {
  std::string id;
};

struct ElementStmt {
  Element element;
  SourceSpan span;
};

struct LinkStmt {
  Link link;
  SourceSpan span;
};

struct ChallengeStmt {
  Challenge challenge;  // carries its final state
  SourceSpan span;
};

struct AppraisalStmt {
  AppraisalRecord record;
  SourceSpan span;
};

struct SlotStmt {
  std::string name;
  std::string type;
  SourceSpan span;
};

enum class DocumentKind { Case, Pattern };

struct Document {
  DocumentKind kind = DocumentKind::Case;
  std::optional<HeaderStmt> header;
  std::optional<PatternHeaderStmt> pattern;
  std::optional<std::string> intent, applicability;
  std::vector<std::string> risks;
  std::vector<SlotStmt> slots;
  std::vector<ElementStmt> elements;
  std::vector<LinkStmt> links;
  std::vector<AppraisalStmt> appraisals;
  std::vector<ChallengeStmt> challenges;
  SourceSpan header_span;
};

inline bool parse_element_tail(Cursor& cur, Element& e, bool want_text) {
  while (true) {
    if (cur.accept("stage")) {
      auto s = cur.choice<LifecycleStage>("lifecycle stage");
      if (!s) return false;
      e.stage = *s;
    } else if (cur.accept("tier")) {
      auto t = cur.choice<AudienceTier>("audience tier");
      if (!t) return false;
      e.tier = *t;
    } else {
      break;
    }
  }
  if (want_text) {
    auto t = cur.string("text");
    if (!t) return false;
    e.text = t->text;
  }
  return cur.end();
}

inline std::optional<ElementStmt> parse_element(Cursor& cur, ElementKind kind, Diagnostics& diags) {
  auto id = cur.identifier("element id");
  if (!id) return std::nullopt;
  ElementStmt st;
  st.span = id->span;
  Element& e = st.element;
  e.id = id->text;
  e.kind = kind;

  switch (kind) {
    case ElementKind::Goal: {
      if (cur.peek_word("system")) {
        GoalSlots slots;
        for (auto [key, field] : {std::pair{"system", &slots.system}, std::pair{"context", &slots.context},
                                  std::pair{"value", &slots.goal}}) {
          if (!cur.peek_word(key)) {
            error(diags, cur.span(), diag::goal_slots, std::string("goal is missing its ") + key + " slot");
            return std::nullopt;
          }
          cur.accept(key);
          auto v = cur.string(std::string(key) + " slot value");
          if (!v) return std::nullopt;
          *field = v->text;
        }
        e.text = render_goal_text(slots);
        e.slots = std::move(slots);
        if (!parse_element_tail(cur, e, false)) return std::nullopt;
        return st;
      }
      const Token* next = cur.peek();
      if (!next || !(next->kind == Token::Kind::String || next->text == "stage" || next->text == "tier")) {
        error(diags, cur.at_end() ? id->span : cur.span(), diag::goal_slots,
              "goal needs system/context/value slots or a quoted statement");
        return std::nullopt;
      }
      break;
    }
    case ElementKind::PropertyClaim: {
      if (!cur.keyword("scope")) return std::nullopt;
      auto s = cur.choice<ClaimScope>("claim scope");
      if (!s) return std::nullopt;
      e.scope = *s;
      break;
    }
    case ElementKind::Evidence: {
      if (!cur.keyword("at")) return std::nullopt;
      auto loc = cur.string("locator");
      if (!loc) return std::nullopt;
      e.locator = Locator::from_string(loc->text);
      break;
    }
    default:
      break;
  }
  if (!parse_element_tail(cur, e, true)) return std::nullopt;
  return st;
}

inline std::optional<LinkStmt> parse_link(Cursor& cur) {
  auto id = cur.identifier("link id");
  if (!id) return std::nullopt;
  LinkStmt st;
  st.span = id->span;
  st.link.id = id->text;
  auto kind = cur.choice<LinkKind>("link kind");
  if (!kind) return std::nullopt;
  st.link.kind = *kind;
  auto from = cur.identifier("link source");
  if (!from || !cur.keyword("->")) return std::nullopt;
  auto to = cur.identifier("link target");
  if (!to) return std::nullopt;
  st.link.from = from->text;
  st.link.to = to->text;
  if (cur.accept("qualifier")) {
    auto label = cur.choice<QualifierLabel>("qualifier");
    if (!label) return std::nullopt;
    Qualifier q{*label, std::nullopt};
    if (cur.accept("note")) {
      auto n = cur.string("qualifier note");
      if (!n) return std::nullopt;
      q.note = n->text;
    }
    st.link.qualifier = std::move(q);
  }
  if (!cur.end()) return std::nullopt;
  return st;
}

inline std::optional<ChallengeStmt> parse_challenge(Cursor& cur) {
  auto id = cur.identifier("challenge id");
  if (!id) return std::nullopt;
  ChallengeStmt st;
  st.span = id->span;
  Challenge& ch = st.challenge;
  ch.id = id->text;
  if (!cur.keyword("on")) return std::nullopt;
  auto target = cur.identifier("challenge target");
  if (!target || !cur.keyword("by")) return std::nullopt;
  auto author = cur.string("author");
  if (!author) return std::nullopt;
  auto body = cur.string("challenge text");
  if (!body) return std::nullopt;
  ch.target = target->text;
  ch.author = author->text;
  ch.text = body->text;
  if (cur.accept("state")) {
    auto s = cur.choice<ChallengeState>("challenge state");
    if (!s) return std::nullopt;
    ch.state = *s;
    if (cur.accept("note")) {
      auto n = cur.string("resolution note");
      if (!n) return std::nullopt;
      ch.resolution_note = n->text;
    }
  }
  if (!cur.end()) return std::nullopt;
  return st;
}

template <class V>
inline std::optional<Verdict<V>> parse_verdict(Cursor& cur, std::string_view key) {
  if (!cur.keyword(key)) return std::nullopt;
  auto v = cur.choice<V>(key);
  if (!v) return std::nullopt;
  Verdict<V> out{*v, ""};
  if (cur.peek_string()) out.note = cur.string("note")->text;
  return out;
}

inline std::optional<AppraisalStmt> parse_appraisal(Cursor& cur, Diagnostics& diags) {
  auto id = cur.identifier("evidence id");
  if (!id) return std::nullopt;
  AppraisalStmt st;
  st.span = id->span;
  AppraisalRecord& r = st.record;
  r.evidence_id = id->text;
  auto rel = parse_verdict<Relevance>(cur, "relevance");
  if (!rel) return std::nullopt;
  auto mat = parse_verdict<Materiality>(cur, "materiality");
  if (!mat) return std::nullopt;
  auto adm = parse_verdict<Admissibility>(cur, "admissibility");
  if (!adm) return std::nullopt;
  r.relevance = *rel;
  r.materiality = *mat;
  r.admissibility = *adm;
  if (!cur.keyword("value")) return std::nullopt;
  auto v = cur.word("probative value");
  if (!v) return std::nullopt;
  auto num = text::parse_number(v->text);
  if (!num) {
    error(diags, v->span, diag::bad_value, "'" + v->text + "' is not a number");
    return std::nullopt;
  }
  r.probative_value = *num;
  if (!cur.keyword("by")) return std::nullopt;
  auto who = cur.string("assessor");
  if (!who || !cur.keyword("on")) return std::nullopt;
  r.assessor = who->text;
  auto d = cur.word("date");
  if (!d) return std::nullopt;
  auto date = text::parse_date(d->text);
  if (!date) {
    error(diags, d->span, diag::bad_value, "'" + d->text + "' is not a YYYY-MM-DD date");
    return std::nullopt;
  }
  r.date = *date;
  if (!cur.end()) return std::nullopt;
  return st;
}

inline std::optional<HeaderStmt> parse_header(Cursor& cur, Diagnostics& diags) {
  HeaderStmt h;
  auto title = cur.string("case title");
  if (!title || !cur.keyword("phase")) return std::nullopt;
  auto phase = cur.choice<Phase>("phase");
  if (!phase) return std::nullopt;
  h.title = title->text;
  h.phase = *phase;
  if (cur.accept("id")) {
    auto id = cur.identifier("case id");
    if (!id) return std::nullopt;
    h.id = id->text;
  }
  for (auto [key, field] : {std::pair{"created", &h.created}, std::pair{"modified", &h.modified}}) {
    if (!cur.accept(key)) continue;
    auto w = cur.word("timestamp");
    if (!w) return std::nullopt;
    auto ts = text::parse_timestamp(w->text);
    if (!ts) {
      error(diags, w->span, diag::bad_value, "'" + w->text + "' is not a YYYY-MM-DDTHH:MM:SSZ timestamp");
      return std::nullopt;
    }
    *field = *ts;
  }
  if (!cur.end()) return std::nullopt;
  return h;
}

inline std::optional<SlotStmt> parse_slot(Cursor& cur) {
  SlotStmt st;
  st.span = cur.span();
  if (cur.peek_string()) {
    st.name = cur.string("slot name")->text;
  } else {
    auto w = cur.word("slot name");
    if (!w) return std::nullopt;
    st.name = w->text;
  }
  if (!cur.keyword(":")) return std::nullopt;
  auto t = cur.word("slot type");
  if (!t || !cur.end()) return std::nullopt;
  st.type = t->text;
  return st;
}

inline Document parse_document(std::string_view source, DocumentKind kind, Diagnostics& diags) {
  Document doc;
  doc.kind = kind;
  const char* header_kw = kind == DocumentKind::Case ? "case" : "pattern";
  bool have_header = false;
  int number = 0;
  std::size_t start = 0;
  while (start <= source.size()) {
    auto nl = source.find('\n', start);
    auto raw = source.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto before = diags.size();
    Line line = lex_line(raw, number, diags);
    if (line.tokens.empty() || diags.size() != before) continue;
    Cursor cur(line, diags);
    const Token& head = line.tokens.front();
    if (head.kind != Token::Kind::Word) {
      error(diags, head.span, diag::syntax, "statement must start with a keyword");
      continue;
    }
    const std::string kw = head.text;
    cur.accept(kw);

    if (kw == header_kw) {
      if (have_header) {
        error(diags, head.span, diag::duplicate_header, std::string("a second '") + header_kw + "' header");
        continue;
      }
      have_header = true;
      doc.header_span = head.span;
      if (kind == DocumentKind::Case) {
        doc.header = parse_header(cur, diags);
      } else if (auto id = cur.identifier("pattern id"); id && cur.end()) {
        doc.pattern = PatternHeaderStmt{id->text};
      }
      continue;
    }
    if (!have_header) {
      error(diags, head.span, diag::missing_header,
            std::string("the first statement must be the '") + header_kw + "' header");
      have_header = true;  // report once
    }

    if (auto ek = element_kind_from_keyword(kw)) {
      if (auto st = parse_element(cur, *ek, diags)) doc.elements.push_back(std::move(*st));
    } else if (kw == "link") {
      if (auto st = parse_link(cur)) doc.links.push_back(std::move(*st));
    } else if (kind == DocumentKind::Case && kw == "challenge") {
      if (auto st = parse_challenge(cur)) doc.challenges.push_back(std::move(*st));
    } else if (kind == DocumentKind::Case && kw == "appraisal") {
      if (auto st = parse_appraisal(cur, diags)) doc.appraisals.push_back(std::move(*st));
    } else if (kind == DocumentKind::Pattern && (kw == "intent" || kw == "applicability" || kw == "risk")) {
      auto t = cur.string(kw + " text");
      if (!t || !cur.end()) continue;
      if (kw == "risk")
        doc.risks.push_back(t->text);
      else
        (kw == "intent" ? doc.intent : doc.applicability) = t->text;
    } else if (kind == DocumentKind::Pattern && kw == "slot") {
      if (auto st = parse_slot(cur)) doc.slots.push_back(std::move(*st));
    } else if (kw == "challenge" || kw == "appraisal" || kw == "case" || kw == "pattern" || kw == "intent" ||
               kw == "applicability" || kw == "risk" || kw == "slot") {
      error(diags, head.span, diag::statement_not_allowed,
            "'" + kw + "' is not allowed in a " + (kind == DocumentKind::Case ? "case" : "pattern") + " file");
    } else {
      error(diags, head.span, diag::unknown_keyword, "unknown keyword '" + kw + "'");
    }
  }
  if (!have_header) error(diags, {1, 1, 1}, diag::missing_header, std::string("missing '") + header_kw + "' header");
  return doc;
}

// Maps a model error raised while assembling the case onto a located diagnostic.
inline ParseDiagnostic to_diagnostic(const Error& err, SourceSpan span) {
  const char* code = diag::kind_invariant;
  std::string message = err.what();
  switch (err.code()) {
    case ErrorCode::DuplicateId:
      code = diag::duplicate_id;
      message = "duplicate id '" + err.detail() + "'";
      break;
    case ErrorCode::InvalidId:
      code = diag::bad_id;
      break;
    case ErrorCode::EmptySlot:
      code = diag::empty_slot;
      message = "goal slot '" + err.detail() + "' is empty";
      break;
    case ErrorCode::BraceInSlot:
      code = diag::brace_in_slot;
      message = "goal slot '" + err.detail() + "' contains a template brace";
      break;
    case ErrorCode::DanglingEndpoint:
    case ErrorCode::DanglingTarget:
      code = diag::dangling_ref;
      message = "reference to unknown id '" + err.detail() + "'";
      break;
    case ErrorCode::IncompatibleKinds:
      code = diag::kind_mismatch;
      message = "incompatible link: " + err.detail();
      break;
    case ErrorCode::CycleIntroduced: {
      code = diag::cycle;
      message = "supports cycle [";
      for (std::size_t i = 0; i < err.items().size(); ++i) message += (i ? ", " : "") + err.items()[i];
      message += "]";
      break;
    }
    case ErrorCode::NotEvidence:
      code = diag::not_evidence;
      message = "'" + err.detail() + "' is not an evidence element";
      break;
    case ErrorCode::ValueOutOfRange:
      code = diag::value_range;
      message = "probative value " + err.detail() + " is outside [0, 1]";
      break;
    case ErrorCode::MissingNote:
      code = diag::missing_note;
      message = "a sustained or resolved challenge needs a note";
      break;
    default:
      break;
  }
  return {Severity::Error, span, code, std::move(message)};
}

// Builds the document's statements into `base`, recording diagnostics and
// declaration spans. Warrants links are added after every other link so they
// may refer forward.
inline Case assemble(Case base, Document& doc, const Admission& admission, Diagnostics& diags,
                     std::map<std::string, SourceSpan>& locations) {
  for (auto& st : doc.elements) {
    try {
      base = add_element(base, st.element, admission);
      locations[st.element.id] = st.span;
    } catch (const Error& err) {
      diags.push_back(to_diagnostic(err, st.span));
    }
  }
  for (int pass = 0; pass < 2; ++pass)
    for (auto& st : doc.links) {
      if ((st.link.kind == LinkKind::Warrants) != (pass == 1)) continue;
      try {
        base = add_link(base, st.link);
        locations[st.link.id] = st.span;
      } catch (const Error& err) {
        diags.push_back(to_diagnostic(err, st.span));
      }
    }
  for (auto& st : doc.appraisals) {
    if (base.appraisals.count(st.record.evidence_id)) {
      error(diags, st.span, diag::duplicate_appraisal, "evidence '" + st.record.evidence_id + "' is appraised twice");
      continue;
    }
    try {
      base = record_appraisal(base, st.record);
    } catch (const Error& err) {
      diags.push_back(to_diagnostic(err, st.span));
    }
  }
  for (auto& st : doc.challenges) {
    try {
      Challenge open = st.challenge;
      open.state = ChallengeState::Open;
      open.resolution_note.reset();
      Case next = attach_challenge(base, open);
      if (st.challenge.state != ChallengeState::Open)
        next = resolve_challenge(next, open.id, st.challenge.state, st.challenge.resolution_note.value_or(""));
      else if (st.challenge.resolution_note)
        throw Error(ErrorCode::KindInvariantViolation, "note-on-open-challenge", {open.id});
      base = std::move(next);
      locations[open.id] = st.span;
    } catch (const Error& err) {
      diags.push_back(to_diagnostic(err, st.span));
    }
  }
  return base;
}

inline void sort_diagnostics(Diagnostics& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
    return std::tie(a.span.line, a.span.column) < std::tie(b.span.line, b.span.column);
  });
}

}  // namespace dsl

// Never throws for malformed input; problems come back as diagnostics and the
// case is present only when there are no errors.
inline ParseResult parse(std::string_view source) {
  ParseResult result;
  auto doc = dsl::parse_document(source, dsl::DocumentKind::Case, result.diagnostics);
  Case base;
  if (doc.header) {
    base.title = doc.header->title;
    base.phase = doc.header->phase;
    base.id = doc.header->id;
    base.created = doc.header->created;
    base.modified = doc.header->modified;
  }
  Admission admission;
  admission.allow_unslotted_goal = true;
  Case built = dsl::assemble(std::move(base), doc, admission, result.diagnostics, result.locations);
  dsl::sort_diagnostics(result.diagnostics);
  if (result.errors() == 0 && doc.header) result.value = std::move(built);
  return result;
}

namespace dsl {

inline void write_element(std::ostream& os, const Element& e) {
  os << "  " << element_keyword(e.kind) << ' ' << e.id;
  if (e.slots) {
    os << " system " << quote(e.slots->system) << " context " << quote(e.slots->context) << " value "
       << quote(e.slots->goal);
  }
  if (e.scope) os << " scope " << to_string(*e.scope);
  if (e.locator) os << " at " << quote(e.locator->str());
  if (e.stage) os << " stage " << to_string(*e.stage);
  if (e.tier != AudienceTier::Public) os << " tier " << to_string(e.tier);
  if (!e.slots) os << ' ' << quote(e.text);
  os << '\n';
}

inline void write_link(std::ostream& os, const Link& l) {
  os << "  link " << l.id << ' ' << to_string(l.kind) << ' ' << l.from << " -> " << l.to;
  if (l.qualifier) {
    os << " qualifier " << to_string(l.qualifier->label);
    if (l.qualifier->note) os << " note " << quote(*l.qualifier->note);
  }
  os << '\n';
}

template <class V>
inline void write_verdict(std::ostream& os, std::string_view key, const Verdict<V>& v) {
  os << ' ' << key << ' ' << to_string(v.value);
  if (!v.note.empty()) os << ' ' << quote(v.note);
}

inline void write_appraisal(std::ostream& os, const AppraisalRecord& r) {
  os << "  appraisal " << r.evidence_id;
  write_verdict(os, "relevance", r.relevance);
  write_verdict(os, "materiality", r.materiality);
  write_verdict(os, "admissibility", r.admissibility);
  os << " value " << text::format_number(r.probative_value) << " by " << quote(r.assessor) << " on "
     << text::format_date(r.date) << '\n';
}

inline void write_challenge(std::ostream& os, const Challenge& ch) {
  os << "  challenge " << ch.id << " on " << ch.target << " by " << quote(ch.author) << ' ' << quote(ch.text);
  if (ch.state != ChallengeState::Open) {
    os << " state " << to_string(ch.state);
    if (ch.resolution_note) os << " note " << quote(*ch.resolution_note);
  }
  os << '\n';
}

inline void write_body(std::ostream& os, const Case& c) {
  // maps iterate in id order
  if (!c.elements.empty()) os << '\n';
  for (const auto& [id, e] : c.elements) write_element(os, e);
  if (!c.links.empty()) os << '\n';
  for (const auto& [id, l] : c.links) write_link(os, l);
  if (!c.appraisals.empty()) os << '\n';
  for (const auto& [id, r] : c.appraisals) write_appraisal(os, r);
  if (!c.challenges.empty()) os << '\n';
  for (const auto& [id, ch] : c.challenges) write_challenge(os, ch);
}

}  // namespace dsl

// Canonical text: header, then elements, links, appraisals and challenges,
// each group in id order, two-space indentation, LF line endings.
inline std::string serialize(const Case& c) {
  std::ostringstream os;
  os << "case " << quote(c.title) << " phase " << to_string(c.phase);
  if (!c.id.empty()) os << " id " << c.id;
  if (c.created) os << " created " << text::format_timestamp(*c.created);
  if (c.modified) os << " modified " << text::format_timestamp(*c.modified);
  os << '\n';
  dsl::write_body(os, c);
  return os.str();
}

}  // namespace eac
