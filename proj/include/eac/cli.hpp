#pragma once

// The `eac` command line. run() is the whole program minus process setup so
// tests can drive it with in-memory streams.
//
// Exit codes: 0 success, 1 validation errors (or a negative result such as a
// failed derivation), 2 usage or parse error, 3 I/O error.
//
// Defaults for phase, tier and threshold may come from an `ea.toml` file of
// `key = value` lines next to the case file; flags win over the file.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eac/appraisal.hpp"
#include "eac/dsl.hpp"
#include "eac/interchange.hpp"
#include "eac/lifecycle.hpp"
#include "eac/patterns.hpp"
#include "eac/render.hpp"
#include "eac/service.hpp"
#include "eac/status.hpp"
#include "eac/validation.hpp"

namespace eac::cli {

enum Exit : int { Ok = 0, Findings = 1, Usage = 2, Io = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for bad input that should end the command with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::optional<Phase> phase;
  std::optional<AudienceTier> tier;
  std::optional<double> threshold;
};

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw IoError("cannot write " + p.string());
}

// Blank lines and `#` comments are ignored; values may be double-quoted.
inline Config load_config(const std::filesystem::path& dir) {
  Config cfg;
  auto path = dir / "ea.toml";
  if (!std::filesystem::exists(path)) return cfg;
  std::istringstream in(read_text(path));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto hash = line.find('#');
    std::string_view body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    auto where = path.string() + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw UsageError(where + ": expected key = value");
    std::string key(text::trim(body.substr(0, eq)));
    std::string value(text::trim(body.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key == "phase") {
      cfg.phase = enum_from_string<Phase>(value);
      if (!cfg.phase) throw UsageError(where + ": unknown phase '" + value + "'");
    } else if (key == "tier") {
      cfg.tier = enum_from_string<AudienceTier>(value);
      if (!cfg.tier) throw UsageError(where + ": unknown tier '" + value + "'");
    } else if (key == "threshold") {
      cfg.threshold = text::parse_number(value);
      if (!cfg.threshold || *cfg.threshold < 0 || *cfg.threshold > 1)
        throw UsageError(where + ": threshold must be a number in [0, 1]");
    } else {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline std::filesystem::path dir_of(const std::filesystem::path& file) {
  return file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
}

template <class E>
std::optional<E> parse_enum_flag(const std::string& value, const char* flag) {
  if (value.empty()) return std::nullopt;
  auto e = enum_from_string<E>(value);
  if (!e) throw UsageError(std::string("invalid value '") + value + "' for " + flag);
  return e;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = char(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string location(const std::string& file, const SourceSpan& s) {
  return file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column);
}

inline std::string summary(std::size_t errors, std::size_t warnings) {
  return std::to_string(errors) + (errors == 1 ? " error, " : " errors, ") + std::to_string(warnings) +
         (warnings == 1 ? " warning" : " warnings");
}

inline Json diagnostic_json(const ParseDiagnostic& d) {
  return {{"code", d.code},
          {"severity", std::string(to_string(d.severity))},
          {"line", d.span.line},
          {"column", d.span.column},
          {"message", d.message}};
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  // Reads and parses a case file; on parse errors prints them and returns nullopt.
  std::optional<ParseResult> load(const std::string& file) {
    auto r = parse(read_text(file));
    if (r.ok()) return r;
    print_parse_failure(file, r.diagnostics);
    return std::nullopt;
  }

  void print_parse_failure(const std::string& file, const std::vector<ParseDiagnostic>& diags) {
    std::size_t errors = 0, warnings = 0;
    for (const auto& d : diags) (d.severity == Severity::Error ? errors : warnings)++;
    if (json) {
      Json list = Json::array();
      for (const auto& d : diags) list.push_back(diagnostic_json(d));
      out_ << dump_json({{"file", file}, {"diagnostics", list}, {"errors", errors}, {"warnings", warnings}});
      return;
    }
    for (const auto& d : diags)
      out_ << upper(to_string(d.severity)) << ' ' << d.code << ' ' << location(file, d.span) << ' ' << d.message
           << '\n';
    out_ << summary(errors, warnings) << '\n';
  }

  void emit(const std::string& content, const std::string& path) {
    if (path.empty() || path == "-")
      out_ << content;
    else
      write_text(path, content);
  }

  // ---- subcommands -------------------------------------------------------

  int cmd_new(const std::string& title, const std::string& id, const std::string& output, bool force) {
    if (!id.empty() && !text::is_identifier(id)) throw UsageError("invalid case id '" + id + "'");
    if (text::blank(title) || !text::single_line(title)) throw UsageError("title must be a non-empty single line");
    Case c;
    c.title = title;
    c.id = id;
    c.created = text::now();
    c = add_element(c, goal_from_template("G1", "describe the system", "describe who uses it and where",
                                          "name the ethical goal"));
    Element ctx;
    ctx.id = "X1";
    ctx.kind = ElementKind::Context;
    ctx.text = "Describe the setting in which the system is deployed.";
    c = add_element(c, ctx);
    c = add_link(c, Link{"L1", LinkKind::ContextOf, "X1", "G1", std::nullopt});
    if (!output.empty() && output != "-" && std::filesystem::exists(output) && !force)
      throw IoError(output + " already exists (use --force to overwrite)");
    if (json) {
      out_ << to_interchange(c);
      if (!output.empty() && output != "-") write_text(output, serialize(c));
    } else {
      emit(serialize(c), output);
    }
    return Ok;
  }

  int cmd_validate(const std::string& file, const std::string& phase_flag, bool strict) {
    auto cfg = load_config(dir_of(file));
    auto phase = parse_enum_flag<Phase>(phase_flag, "--phase");
    if (!phase) phase = cfg.phase;
    auto r = load(file);
    if (!r) return Usage;
    auto report = validate(*r->value, phase);
    const std::size_t errors = report.errors(), warnings = report.warnings();
    auto span_of = [&](const std::string& id) {
      auto it = r->locations.find(id);
      return it == r->locations.end() ? SourceSpan{1, 1, 1} : it->second;
    };
    if (json) {
      Json list = Json::array();
      for (const auto& f : report.findings) {
        Json j = to_json(f);
        auto s = span_of(f.target_id);
        j["line"] = s.line;
        j["column"] = s.column;
        list.push_back(j);
      }
      out_ << dump_json({{"file", file},
                         {"phase", std::string(to_string(report.phase))},
                         {"findings", list},
                         {"errors", errors},
                         {"warnings", warnings},
                         {"strict", strict}});
    } else {
      for (const auto& f : report.findings)
        out_ << upper(to_string(f.severity)) << ' ' << f.code << ' ' << location(file, span_of(f.target_id)) << ' '
             << f.message << '\n';
      out_ << summary(errors, warnings) << '\n';
    }
    return errors > 0 || (strict && warnings > 0) ? Findings : Ok;
  }

  int cmd_status(const std::string& file, const std::string& explain) {
    auto r = load(file);
    if (!r) return Usage;
    const Case& c = *r->value;
    if (!explain.empty()) {
      if (!c.element(explain)) throw UsageError("no element '" + explain + "'");
      auto tree = explain_status(c, explain);
      if (json) {
        out_ << dump_json({{"file", file}, {"explanation", to_json(tree)}});
      } else {
        print_tree(tree, 0);
      }
      return Ok;
    }
    auto statuses = compute_status(c);
    if (json) {
      out_ << dump_json({{"file", file}, {"statuses", to_json(statuses)}});
      return Ok;
    }
    for (const auto& [id, s] : statuses)
      out_ << id << '\t' << to_string(c.elements.at(id).kind) << '\t' << to_string(s) << '\n';
    return Ok;
  }

  void print_tree(const Explanation& e, int depth) {
    out_ << std::string(std::size_t(depth) * 2, ' ') << e.id << ' ' << to_string(e.status) << " (" << e.rule;
    if (!e.via.empty()) out_ << " via " << e.via;
    out_ << ")\n";
    for (const auto& ch : e.children) print_tree(ch, depth + 1);
  }

  int cmd_render(const std::string& file, std::string format, const std::string& tier_flag,
                 const std::vector<std::string>& goals, const std::vector<std::string>& stages,
                 const std::string& output) {
    auto cfg = load_config(dir_of(file));
    if (json) format = "json";
    if (format != "dot" && format != "md" && format != "json")
      throw UsageError("--format must be dot, md or json");
    TierFilter f;
    f.viewer = parse_enum_flag<AudienceTier>(tier_flag, "--tier").value_or(cfg.tier.value_or(AudienceTier::Public));
    if (!goals.empty()) f.goals = std::set<ElementId>(goals.begin(), goals.end());
    if (!stages.empty()) {
      std::set<LifecycleStage> set;
      for (const auto& s : stages) set.insert(*parse_enum_flag<LifecycleStage>(s, "--stages"));
      f.stages = std::move(set);
    }
    auto r = load(file);
    if (!r) return Usage;
    const Case& c = *r->value;
    std::string content;
    if (format == "dot")
      content = to_dot(c, f);
    else if (format == "md")
      content = to_report(c, f, cfg.threshold.value_or(default_threshold));
    else
      content = to_interchange(redact(c, f));
    emit(content, output);
    return Ok;
  }

  int cmd_appraise(const std::string& file, const std::string& evidence, const std::string& relevance,
                   const std::string& materiality, const std::string& admissibility, double value,
                   const std::string& assessor, const std::string& date, const std::vector<std::string>& notes) {
    auto r = load(file);
    if (!r) return Usage;
    AppraisalRecord rec;
    rec.evidence_id = evidence;
    rec.relevance.value = *parse_enum_flag<Relevance>(relevance, "--relevance");
    rec.materiality.value = *parse_enum_flag<Materiality>(materiality, "--materiality");
    rec.admissibility.value = *parse_enum_flag<Admissibility>(admissibility, "--admissibility");
    if (notes.size() > 0) rec.relevance.note = notes[0];
    if (notes.size() > 1) rec.materiality.note = notes[1];
    if (notes.size() > 2) rec.admissibility.note = notes[2];
    rec.probative_value = value;
    rec.assessor = assessor;
    if (date.empty()) {
      rec.date = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(text::now())};
    } else if (auto d = text::parse_date(date)) {
      rec.date = *d;
    } else {
      throw UsageError("--date must be YYYY-MM-DD");
    }
    std::vector<AppraisalRecord> superseded;
    Case next = record_appraisal(*r->value, rec, &superseded);

    // Edit the file in place so comments and layout survive: replace the
    // evidence's appraisal line or append a new one.
    std::ostringstream line;
    dsl::write_appraisal(line, rec);
    std::string source = read_text(file);
    std::vector<std::string> lines = text::split(source, '\n');
    bool replaced = false;
    for (auto& l : lines) {
      std::istringstream words(l);
      std::string kw, id;
      words >> kw >> id;
      if (kw == "appraisal" && id == evidence) {
        std::string fresh = line.str();
        fresh.pop_back();
        l = fresh;
        replaced = true;
        break;
      }
    }
    std::string updated;
    for (std::size_t i = 0; i < lines.size(); ++i) updated += lines[i] + (i + 1 < lines.size() ? "\n" : "");
    if (!replaced) {
      if (!updated.empty() && updated.back() != '\n') updated += '\n';
      updated += line.str();
    }
    auto check = parse(updated);
    if (!check.ok() || *check.value != next) throw IoError("rewritten file does not round-trip; left unchanged");
    write_text(file, updated);

    if (json) {
      Json sup = Json::array();
      for (const auto& s : superseded) sup.push_back(detail::appraisal_json(s));
      out_ << dump_json({{"file", file},
                         {"appraisal", detail::appraisal_json(rec)},
                         {"effectiveValue", effective_value(rec)},
                         {"superseded", sup}});
    } else {
      for (const auto& s : superseded)
        out_ << "superseded appraisal of " << s.evidence_id << " by " << s.assessor << " on "
             << text::format_date(s.date) << " (value " << text::format_number(s.probative_value) << ")\n";
      out_ << "recorded appraisal of " << evidence << ", effective value " << text::format_number(effective_value(rec))
           << '\n';
    }
    return Ok;
  }

  int cmd_sufficiency(const std::string& file, std::optional<double> threshold) {
    auto cfg = load_config(dir_of(file));
    auto r = load(file);
    if (!r) return Usage;
    double t = threshold.value_or(cfg.threshold.value_or(default_threshold));
    SufficiencyReport rep;
    try {
      rep = sufficiency(*r->value, t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoGoal) throw;
      if (json)
        out_ << dump_json({{"file", file}, {"error", "NoGoal"}});
      else
        out_ << "ERROR E-NO-GOAL " << file << ":1:1 case has no goal\n";
      return Findings;
    }
    if (json) {
      Json j = to_json(rep);
      j["file"] = file;
      out_ << dump_json(j);
      return Ok;
    }
    auto cell = [](const std::optional<double>& v) { return v ? text::format_number(*v) : std::string("unassessed"); };
    for (const auto& [id, v] : rep.per_evidence) out_ << id << "\tevidence\t" << cell(v) << '\n';
    for (const auto& [id, v] : rep.per_claim)
      out_ << id << '\t' << to_string(r->value->elements.at(id).kind) << '\t' << cell(v.value) << '\t'
           << to_string(v.verdict) << '\n';
    out_ << "case value " << cell(rep.case_value.value) << " (" << to_string(rep.case_value.verdict)
         << ") at threshold " << text::format_number(t) << '\n';
    return Ok;
  }

  int cmd_coverage(const std::string& file) {
    auto r = load(file);
    if (!r) return Usage;
    auto cov = coverage(*r->value);
    if (json) {
      Json j = to_json(cov);
      j["file"] = file;
      out_ << dump_json(j);
      return Ok;
    }
    for (const auto& [s, n] : cov.counts) out_ << to_string(s) << '\t' << to_string(macro_stage(s)) << '\t' << n << '\n';
    out_ << cov.covered() << " of " << cov.counts.size() << " stages covered";
    if (cov.untagged) out_ << ", " << cov.untagged << " untagged";
    out_ << '\n';
    return Ok;
  }

  int cmd_instantiate(const std::string& file, const std::vector<std::string>& binds, const std::string& prefix,
                      const std::string& into, const std::string& output) {
    auto pr = parse_pattern(read_text(file));
    if (!pr.ok()) {
      print_parse_failure(file, pr.diagnostics);
      return Usage;
    }
    Bindings b;
    for (const auto& kv : binds) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--bind expects name=value, got '" + kv + "'");
      b[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    Case fragment = instantiate(*pr.value, b, prefix);
    CaseMeta meta;
    Case result = fragment;
    if (!into.empty()) {
      auto host = load(into);
      if (!host) return Usage;
      for (const auto& [id, e] : host->value->elements)
        if (e.stage) meta.stages.insert(*e.stage);
      result = merge(*host->value, fragment);
    } else {
      for (auto s : enum_values<LifecycleStage>()) meta.stages.insert(s);
    }
    auto advisories = check_applicability(*pr.value, meta);
    if (json) {
      Json adv = Json::array();
      for (const auto& a : advisories) adv.push_back({{"kind", std::string(to_string(a.kind))}, {"message", a.message}});
      out_ << dump_json({{"case", interchange_json(result)}, {"advisories", adv}});
      if (!output.empty() && output != "-") write_text(output, serialize(result));
    } else {
      for (const auto& a : advisories) err_ << "NOTE " << to_string(a.kind) << ' ' << a.message << '\n';
      emit(serialize(result), output);
    }
    return Ok;
  }

  int cmd_derive(const std::vector<std::string>& files, const std::string& output) {
    std::vector<Case> cases;
    for (const auto& f : files) {
      auto r = load(f);
      if (!r) return Usage;
      cases.push_back(std::move(*r->value));
    }
    Derivation d;
    try {
      d = derive_with_bindings(cases);
    } catch (const DeriveFailure& e) {
      if (json)
        out_ << dump_json({{"error", std::string(to_string(e.reason()))}, {"message", e.what()}});
      else
        err_ << e.what() << '\n';
      return Findings;
    }
    if (json) {
      Json slots = Json::object();
      for (const auto& [n, t] : d.pattern.slot_types) slots[n] = std::string(to_string(t));
      out_ << dump_json({{"id", d.pattern.id},
                         {"intent", d.pattern.intent},
                         {"applicability", d.pattern.applicability},
                         {"risks", d.pattern.risks},
                         {"slots", slots},
                         {"bindings", d.bindings},
                         {"text", serialize_pattern(d.pattern)}});
      if (!output.empty() && output != "-") write_text(output, serialize_pattern(d.pattern));
    } else {
      emit(serialize_pattern(d.pattern), output);
    }
    return Ok;
  }

  int cmd_snapshot(const std::string& file, const std::string& label, std::string output) {
    if (!is_snapshot_label(label)) throw UsageError("snapshot labels use letters, digits, '.', '_' and '-'");
    auto r = load(file);
    if (!r) return Usage;
    auto snap = snapshot(*r->value, label);
    if (output.empty()) {
      std::string key = r->value->id.empty() ? std::filesystem::path(file).stem().string() : r->value->id;
      output = (dir_of(file) / "snapshots" / key / (label + ".snap")).string();
    }
    write_text(output, write_snapshot(snap));
    if (json)
      out_ << dump_json({{"file", output}, {"label", label}, {"digest", std::string(digest_algorithm) + ":" + snap.digest}});
    else
      out_ << "wrote " << output << ' ' << digest_algorithm << ':' << snap.digest << '\n';
    return Ok;
  }

  int cmd_diff(const std::string& a, const std::string& b) {
    ChangeSet cs;
    try {
      cs = diff(read_snapshot(read_text(a)), read_snapshot(read_text(b)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseFailure) throw;
      throw UsageError(e.what());
    }
    if (json) {
      out_ << dump_json(to_json(cs));
      return Ok;
    }
    if (cs.empty()) {
      out_ << "no changes\n";
      return Ok;
    }
    for (const auto& f : cs.case_fields) out_ << "~ case " << f.field << ": " << f.before << " -> " << f.after << '\n';
    if (cs.phase_change)
      out_ << "~ phase: " << to_string(cs.phase_change->first) << " -> " << to_string(cs.phase_change->second) << '\n';
    auto section = [&](const char* what, const CollectionDiff& d) {
      for (const auto& id : d.added) out_ << "+ " << what << ' ' << id << '\n';
      for (const auto& id : d.removed) out_ << "- " << what << ' ' << id << '\n';
      for (const auto& m : d.modified)
        for (const auto& f : m.fields)
          out_ << "~ " << what << ' ' << m.id << ' ' << f.field << ": " << quote(f.before) << " -> " << quote(f.after)
               << '\n';
    };
    section("element", cs.elements);
    section("link", cs.links);
    section("challenge", cs.challenges);
    section("appraisal", cs.appraisals);
    for (const auto& [id, d] : cs.status_deltas)
      out_ << "status " << id << ": " << to_string(d.first) << " -> " << to_string(d.second) << '\n';
    return Ok;
  }

  int cmd_serve(const std::string& dir, const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw UsageError("--addr expects HOST:PORT");
    std::string host = addr.substr(0, colon);
    auto port = text::parse_number(addr.substr(colon + 1));
    if (!port || *port < 0 || *port > 65535 || *port != int(*port)) throw UsageError("invalid port in --addr");
    std::unique_ptr<ReviewService> svc;
    try {
      svc = std::make_unique<ReviewService>(dir);
      svc->start(host, int(*port));
    } catch (const ServiceError& e) {
      throw IoError(e.what());
    }
    for (const auto& w : svc->store().warnings()) err_ << "WARNING " << w << '\n';
    const std::string url = "http://" + host + ":" + std::to_string(svc->port());
    if (json)
      out_ << dump_json({{"address", url}, {"cases", svc->state()->cases.size()}});
    else
      out_ << "serving " << svc->state()->cases.size() << " case(s) on " << url << '\n';
    out_.flush();
    stop_requested() = false;
    std::signal(SIGINT, [](int) { stop_requested() = true; });
    std::signal(SIGTERM, [](int) { stop_requested() = true; });
    while (!stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    svc->stop();
    return Ok;
  }

  static std::atomic<bool>& stop_requested() {
    static std::atomic<bool> flag{false};
    return flag;
  }

  bool json = false;

 private:
  std::ostream& out_;
  std::ostream& err_;
};

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  CLI::App app{"Author, check and review ethical assurance cases.", "eac"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "eac 1.0.0");
  app.add_flag("--json", runner.json, "Machine-readable output");

  std::function<int()> action;
  auto add = [&](CLI::App* parent, const char* name, const char* desc) {
    auto* sub = parent->add_subcommand(name, desc);
    sub->add_flag("--json", runner.json, "Machine-readable output");
    return sub;
  };

  std::string file, output, title, id, phase, tier, format, explain, evidence, relevance, materiality,
      admissibility, assessor = "eac", date, label, prefix, into, dir, addr = "127.0.0.1:8080";
  std::vector<std::string> goals, stages, binds, files, notes;
  bool strict = false, force = false;
  double value = 0;
  std::optional<double> threshold;

  auto* c_new = add(&app, "new", "Scaffold a new case file");
  c_new->add_option("title", title, "Case title")->required();
  c_new->add_option("--id", id, "Case id");
  c_new->add_option("-o,--output", output, "Write to a file instead of standard output");
  c_new->add_flag("--force", force, "Overwrite an existing output file");
  c_new->callback([&] { action = [&] { return runner.cmd_new(title, id, output, force); }; });

  auto* c_validate = add(&app, "validate", "Check a case against the construction rules");
  c_validate->add_option("file", file, "Case file")->required();
  c_validate->add_option("--phase", phase, "preliminary|interim|operational");
  c_validate->add_flag("--strict", strict, "Treat warnings as errors");
  c_validate->callback([&] { action = [&] { return runner.cmd_validate(file, phase, strict); }; });

  auto* c_status = add(&app, "status", "Show the status of every element");
  c_status->add_option("file", file, "Case file")->required();
  c_status->add_option("--explain", explain, "Explain one element's status");
  c_status->callback([&] { action = [&] { return runner.cmd_status(file, explain); }; });

  auto* c_render = add(&app, "render", "Render DOT, markdown or JSON for an audience tier");
  c_render->add_option("file", file, "Case file")->required();
  c_render->add_option("--format", format, "dot|md|json")->default_val("md");
  c_render->add_option("--tier", tier, "public|stakeholder|auditor");
  c_render->add_option("--goals", goals, "Goal ids to keep")->delimiter(',');
  c_render->add_option("--stages", stages, "Lifecycle stages to keep")->delimiter(',');
  c_render->add_option("-o,--output", output, "Output file");
  c_render->callback([&] { action = [&] { return runner.cmd_render(file, format, tier, goals, stages, output); }; });

  auto* c_appraise = add(&app, "appraise", "Record an evidence appraisal in the case file");
  c_appraise->add_option("file", file, "Case file")->required();
  c_appraise->add_option("--evidence", evidence, "Evidence id")->required();
  c_appraise->add_option("--relevance", relevance, "relevant|irrelevant")->required();
  c_appraise->add_option("--materiality", materiality, "material|immaterial")->required();
  c_appraise->add_option("--admissibility", admissibility, "admissible|inadmissible")->required();
  c_appraise->add_option("--value", value, "Probative value in [0, 1]")->required();
  c_appraise->add_option("--assessor", assessor, "Who made the appraisal");
  c_appraise->add_option("--date", date, "YYYY-MM-DD (default today)");
  c_appraise->add_option("--note", notes, "Notes for relevance, materiality, admissibility in that order");
  c_appraise->callback([&] {
    action = [&] {
      return runner.cmd_appraise(file, evidence, relevance, materiality, admissibility, value, assessor, date, notes);
    };
  });

  auto* c_suff = add(&app, "sufficiency", "Aggregate appraised evidence into claim values");
  c_suff->add_option("file", file, "Case file")->required();
  c_suff->add_option("--threshold", threshold, "Sufficiency threshold")->check(CLI::Range(0.0, 1.0));
  c_suff->callback([&] { action = [&] { return runner.cmd_sufficiency(file, threshold); }; });

  auto* c_cov = add(&app, "coverage", "Count property claims per lifecycle stage");
  c_cov->add_option("file", file, "Case file")->required();
  c_cov->callback([&] { action = [&] { return runner.cmd_coverage(file); }; });

  auto* c_pattern = add(&app, "pattern", "Instantiate or derive argument patterns");
  c_pattern->require_subcommand(1);
  auto* c_inst = add(c_pattern, "instantiate", "Fill a pattern's slots");
  c_inst->add_option("pattern", file, "Pattern file")->required();
  c_inst->add_option("--bind", binds, "name=value");
  c_inst->add_option("--prefix", prefix, "Prefix for generated ids");
  c_inst->add_option("--into", into, "Merge into this host case");
  c_inst->add_option("-o,--output", output, "Output file");
  c_inst->callback([&] { action = [&] { return runner.cmd_instantiate(file, binds, prefix, into, output); }; });
  auto* c_derive = add(c_pattern, "derive", "Derive a pattern from two or more cases");
  c_derive->add_option("cases", files, "Case files")->required();
  c_derive->add_option("-o,--output", output, "Output file");
  c_derive->callback([&] { action = [&] { return runner.cmd_derive(files, output); }; });

  auto* c_snap = add(&app, "snapshot", "Freeze the case into a snapshot file");
  c_snap->add_option("file", file, "Case file")->required();
  c_snap->add_option("--label", label, "Snapshot label")->required();
  c_snap->add_option("-o,--output", output, "Snapshot file (default snapshots/<case>/<label>.snap)");
  c_snap->callback([&] { action = [&] { return runner.cmd_snapshot(file, label, output); }; });

  auto* c_diff = add(&app, "diff", "Compare two snapshots");
  c_diff->add_option("snapshots", files, "Two snapshot files")->required()->expected(2);
  c_diff->callback([&] { action = [&] { return runner.cmd_diff(files[0], files[1]); }; });

  auto* c_serve = add(&app, "serve", "Run the review service over a directory of cases");
  c_serve->add_option("dir", dir, "Case directory")->required();
  c_serve->add_option("--addr", addr, "HOST:PORT")->default_val("127.0.0.1:8080");
  c_serve->callback([&] { action = [&] { return runner.cmd_serve(dir, addr); }; });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Ok;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return Usage;
  }

  try {
    return action ? action() : Usage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return Io;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return Usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return Usage;
  }
}

}  // namespace eac::cli
