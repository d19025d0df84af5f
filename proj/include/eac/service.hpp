#pragma once

// HTTP review service over a directory of case files.
//
// Store layout:
//   <dir>/*.eac                         one case per file; key = header id, else the file stem
//   <dir>/snapshots/<key>/<label>.snap  snapshot files
//   <dir>/challenges.jsonl              append-only challenge journal, replayed on start
//
// Mutations (attach and resolve challenges, reload) run on a single writer
// thread. Readers take the current immutable state under a short lock and
// never see a half-applied change.
//
// The viewer tier comes from the X-EAC-Tier header (default public); a tier
// query parameter can only narrow it.

#include <httplib.h>

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eac/appraisal.hpp"
#include "eac/dsl.hpp"
#include "eac/interchange.hpp"
#include "eac/lifecycle.hpp"
#include "eac/render.hpp"
#include "eac/status.hpp"
#include "eac/validation.hpp"

namespace eac {

// Startup failures: unreadable store, address in use.
class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreState {
  std::map<std::string, Case> cases;
  std::map<std::string, std::filesystem::path> files;
  std::uint64_t version = 0;  // bumped by every accepted mutation
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ServiceError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Directory-backed cases plus the challenge journal. Not thread-safe on its
// own; the service calls the mutating members from its writer thread only.
class CaseStore {
 public:
  explicit CaseStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw ServiceError("not a directory: " + dir_.string());
    reload();
  }

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path journal_path() const { return dir_ / "challenges.jsonl"; }
  std::shared_ptr<const StoreState> current() const {
    std::lock_guard lock(mu_);
    return state_;
  }
  std::vector<std::string> warnings() const {
    std::lock_guard lock(mu_);
    return warnings_;
  }

  // Rereads every case file and replays the journal.
  void reload() {
    auto next = std::make_shared<StoreState>();
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir_, ec))
      if (entry.is_regular_file() && entry.path().extension() == ".eac") files.push_back(entry.path());
    if (ec) throw ServiceError("cannot list " + dir_.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto r = parse(read_file(f));
      if (!r.ok()) {
        warnings.push_back(f.filename().string() + ": skipped, " + std::to_string(r.errors()) + " parse error(s)");
        continue;
      }
      std::string key = r.value->id.empty() ? f.stem().string() : r.value->id;
      if (next->cases.count(key)) {
        warnings.push_back(f.filename().string() + ": skipped, duplicate case id '" + key + "'");
        continue;
      }
      next->cases.emplace(key, std::move(*r.value));
      next->files.emplace(key, f);
    }
    if (std::filesystem::exists(journal_path())) {
      std::istringstream lines(read_file(journal_path()));
      std::string line;
      int number = 0;
      while (std::getline(lines, line)) {
        ++number;
        if (text::blank(line)) continue;
        try {
          apply(*next, Json::parse(line));
        } catch (const std::exception& e) {
          warnings.push_back("challenges.jsonl:" + std::to_string(number) + ": skipped, " + e.what());
        }
      }
    }
    std::lock_guard lock(mu_);
    next->version = state_ ? state_->version + 1 : 0;
    state_ = std::move(next);
    warnings_ = std::move(warnings);
  }

  // Journals and publishes one mutation. Returns the challenge as stored.
  Challenge mutate(const Json& entry) {
    auto next = std::make_shared<StoreState>(*current());
    Challenge out = apply(*next, entry);
    {
      std::ofstream j(journal_path(), std::ios::app | std::ios::binary);
      j << entry.dump() << '\n';
      j.flush();
      if (!j) throw ServiceError("cannot append to " + journal_path().string());
    }
    ++next->version;
    std::lock_guard lock(mu_);
    state_ = std::move(next);
    return out;
  }

  std::filesystem::path snapshot_dir(const std::string& key) const { return dir_ / "snapshots" / key; }

  std::vector<std::string> snapshot_labels(const std::string& key) const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(snapshot_dir(key), ec))
      if (entry.path().extension() == ".snap") out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  // Throws NotFound for an unknown label and ParseFailure for a corrupt file.
  Snapshot load_snapshot(const std::string& key, const std::string& label) const {
    if (!is_snapshot_label(label)) throw Error(ErrorCode::NotFound, label);
    auto p = snapshot_dir(key) / (label + ".snap");
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::NotFound, label);
    return read_snapshot(read_file(p));
  }

  static Json attach_entry(const std::string& key, const Challenge& ch) {
    return {{"op", "attach"}, {"case", key}, {"id", ch.id}, {"target", ch.target}, {"author", ch.author},
            {"text", ch.text}};
  }
  static Json resolve_entry(const std::string& key, const ChallengeId& id, ChallengeState outcome,
                            const std::string& note) {
    return {{"op", "resolve"}, {"case", key}, {"id", id}, {"outcome", std::string(to_string(outcome))},
            {"note", note}};
  }

 private:
  static Challenge apply(StoreState& s, const Json& e) {
    const std::string key = e.at("case").get<std::string>();
    auto it = s.cases.find(key);
    if (it == s.cases.end()) throw Error(ErrorCode::NotFound, key);
    const std::string id = e.at("id").get<std::string>();
    const std::string op = e.at("op").get<std::string>();
    if (op == "attach") {
      Challenge ch;
      ch.id = id;
      ch.target = e.at("target").get<std::string>();
      ch.author = e.at("author").get<std::string>();
      ch.text = e.at("text").get<std::string>();
      it->second = attach_challenge(it->second, ch);
    } else if (op == "resolve") {
      auto outcome = enum_from_string<ChallengeState>(e.at("outcome").get<std::string>());
      if (!outcome) throw Error(ErrorCode::InvalidOutcome, e.at("outcome").get<std::string>(), {id});
      it->second = resolve_challenge(it->second, id, *outcome, e.value("note", ""));
    } else {
      throw Error(ErrorCode::ParseFailure, "unknown journal op '" + op + "'");
    }
    return it->second.challenges.at(id);
  }

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::shared_ptr<const StoreState> state_;
  std::vector<std::string> warnings_;
};

// Smallest CH<n> not used by any id in the case.
inline ChallengeId next_challenge_id(const Case& c) {
  for (std::size_t n = 1;; ++n) {
    ChallengeId id = "CH" + std::to_string(n);
    if (!c.has_id(id)) return id;
  }
}

namespace detail {

struct Problem {
  int status;
  std::string code;
  std::string message;
  std::string pointer;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::DanglingTarget:
      return 404;
    case ErrorCode::DuplicateId:
    case ErrorCode::AlreadyClosed:
      return 409;
    default:
      return 422;
  }
}

inline void send_problem(httplib::Response& res, const Problem& p) {
  res.status = p.status;
  Json body = {{"code", p.code}, {"message", p.message}, {"pointer", p.pointer}};
  res.set_content(dump_json(body), "application/problem+json");
}

inline std::vector<std::string> csv(const std::string& s) {
  std::vector<std::string> out;
  for (auto& part : text::split(s, ','))
    if (!text::blank(part)) out.emplace_back(text::trim(part));
  return out;
}

}  // namespace detail

class ReviewService {
 public:
  explicit ReviewService(std::filesystem::path dir) : store_(std::move(dir)) {
    writer_ = std::thread([this] { writer_loop(); });
    routes();
  }

  ~ReviewService() {
    stop();
    {
      std::lock_guard lock(queue_mu_);
      closing_ = true;
    }
    queue_cv_.notify_all();
    if (writer_.joinable()) writer_.join();
  }

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free port.
  void start(const std::string& host = "127.0.0.1", int port = 0) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      if (port_ < 0) throw ServiceError("cannot bind " + host);
    } else {
      if (!server_.bind_to_port(host, port)) throw ServiceError("address in use: " + host + ":" + std::to_string(port));
      port_ = port;
    }
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  int port() const { return port_; }

  // Blocks until stop() is called from elsewhere.
  void wait() {
    if (listener_.joinable()) listener_.join();
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (listener_.joinable()) listener_.join();
  }

  const CaseStore& store() const { return store_; }
  std::shared_ptr<const StoreState> state() const { return store_.current(); }

 private:
  template <class F>
  auto submit(F f) -> std::future<decltype(f())> {
    auto task = std::make_shared<std::packaged_task<decltype(f())()>>(std::move(f));
    auto fut = task->get_future();
    {
      std::lock_guard lock(queue_mu_);
      queue_.push_back([task] { (*task)(); });
    }
    queue_cv_.notify_one();
    return fut;
  }

  void writer_loop() {
    while (true) {
      std::function<void()> job;
      {
        std::unique_lock lock(queue_mu_);
        queue_cv_.wait(lock, [this] { return closing_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  static AudienceTier parse_tier(const std::string& s, const std::string& where) {
    auto t = enum_from_string<AudienceTier>(s);
    if (!t) throw detail::Problem{400, "InvalidTier", "unknown tier '" + s + "'", where};
    return *t;
  }

  static TierFilter filter_for(const httplib::Request& req) {
    TierFilter f;
    f.viewer = AudienceTier::Public;
    if (req.has_header("X-EAC-Tier")) f.viewer = parse_tier(req.get_header_value("X-EAC-Tier"), "header:X-EAC-Tier");
    if (req.has_param("tier")) f.viewer = std::min(f.viewer, parse_tier(req.get_param_value("tier"), "?tier"));
    if (req.has_param("goals")) {
      auto ids = detail::csv(req.get_param_value("goals"));
      f.goals = std::set<ElementId>(ids.begin(), ids.end());
    }
    if (req.has_param("stages")) {
      std::set<LifecycleStage> stages;
      for (const auto& s : detail::csv(req.get_param_value("stages"))) {
        auto st = enum_from_string<LifecycleStage>(s);
        if (!st) throw detail::Problem{400, "InvalidStage", "unknown stage '" + s + "'", "?stages"};
        stages.insert(*st);
      }
      f.stages = std::move(stages);
    }
    return f;
  }

  static const Case& find_case(const StoreState& s, const std::string& key) {
    auto it = s.cases.find(key);
    if (it == s.cases.end()) throw detail::Problem{404, "NotFound", "no case '" + key + "'", ""};
    return it->second;
  }

  static Json parse_body(const httplib::Request& req) {
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object())
      throw detail::Problem{400, "InvalidBody", "request body must be a JSON object", ""};
    return body;
  }

  static std::string body_string(const Json& body, const char* key, bool required = true) {
    auto it = body.find(key);
    if (it == body.end()) {
      if (!required) return "";
      throw detail::Problem{400, "InvalidBody", std::string("missing member '") + key + "'", std::string("/") + key};
    }
    if (!it->is_string())
      throw detail::Problem{400, "InvalidBody", std::string("member '") + key + "' must be a string",
                            std::string("/") + key};
    return it->get<std::string>();
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const detail::Problem& p) {
        detail::send_problem(res, p);
      } catch (const Error& e) {
        detail::send_problem(res, {detail::http_status(e.code()), std::string(to_string(e.code())), e.what(), ""});
      } catch (const std::exception& e) {
        detail::send_problem(res, {500, "InternalError", e.what(), ""});
      }
    };
  }

  static void send_json(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(dump_json(j), "application/json");
  }

  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    const std::string base = "/api/v1/cases";
    const std::string one = base + "/([^/]+)";

    server_.Get(base, guarded([this](const httplib::Request&, httplib::Response& res) {
      auto s = state();
      Json list = Json::array();
      for (const auto& [key, c] : s->cases)
        list.push_back({{"id", key}, {"title", c.title}, {"phase", std::string(to_string(c.phase))}});
      send_json(res, {{"cases", list}});
    }));

    server_.Get(one, guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      auto f = filter_for(req);
      auto v = visibility(c, f);
      Json doc = interchange_json(redact(c, v));
      doc["redacted"] = v.redacted.size();
      send_json(res, doc);
    }));

    server_.Get(one + "/status", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      auto v = visibility(c, filter_for(req));
      auto statuses = compute_status(c);
      if (req.has_param("explain")) {
        auto id = req.get_param_value("explain");
        if (!v.elements.count(id)) throw detail::Problem{404, "NotFound", "no visible element '" + id + "'", "?explain"};
        auto tree = explain_status(c, id);
        prune(tree, v);
        send_json(res, {{"case", std::string(req.matches[1])}, {"explanation", to_json(tree)}});
        return;
      }
      StatusMap shown;
      for (const auto& id : v.elements) shown[id] = statuses.at(id);
      send_json(res, {{"case", std::string(req.matches[1])}, {"statuses", to_json(shown)}});
    }));

    server_.Get(one + "/validate", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      auto v = visibility(c, filter_for(req));
      std::optional<Phase> phase;
      if (req.has_param("phase")) {
        phase = enum_from_string<Phase>(req.get_param_value("phase"));
        if (!phase) throw detail::Problem{400, "InvalidPhase", "unknown phase", "?phase"};
      }
      auto report = validate(c, phase);
      ValidationReport shown{report.phase, {}, {}};
      for (const auto& f : report.findings)
        if (v.shows(f.target_id) || f.target_id == c.id) shown.findings.push_back(f);
      for (const auto& id : v.elements) shown.statuses[id] = report.statuses.at(id);
      send_json(res, to_json(shown));
    }));

    server_.Get(one + "/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      res.set_content(to_report(c, filter_for(req), threshold_of(req)), "text/markdown; charset=utf-8");
    }));

    server_.Get(one + "/graph.dot", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      res.set_content(to_dot(c, filter_for(req)), "text/vnd.graphviz; charset=utf-8");
    }));

    server_.Get(one + "/sufficiency", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const Case& c = find_case(*s, req.matches[1]);
      auto v = visibility(c, filter_for(req));
      auto report = sufficiency(c, threshold_of(req));
      auto withheld = withheld_values(c, v);
      Json j = to_json(report);
      for (const auto& id : withheld) {
        j["perEvidence"].erase(id);
        if (j["perClaim"].contains(id)) j["perClaim"][id] = "withheld";
      }
      for (auto it = j["perClaim"].begin(); it != j["perClaim"].end();)
        it = v.elements.count(it.key()) ? std::next(it) : j["perClaim"].erase(it);
      for (auto it = j["perEvidence"].begin(); it != j["perEvidence"].end();)
        it = v.elements.count(it.key()) ? std::next(it) : j["perEvidence"].erase(it);
      bool root_withheld = false;
      for (const auto& g : report.root_goals) root_withheld = root_withheld || withheld.count(g);
      if (root_withheld) j["caseValue"] = "withheld";
      send_json(res, j);
    }));

    server_.Get(one + "/snapshots", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      find_case(*s, req.matches[1]);
      send_json(res, {{"snapshots", store_.snapshot_labels(req.matches[1])}});
    }));

    server_.Get(one + "/diff", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = state();
      const std::string key = req.matches[1];
      const Case& live = find_case(*s, key);
      auto f = filter_for(req);
      auto load = [&](const char* param) -> Case {
        if (!req.has_param(param))
          throw detail::Problem{400, "MissingParameter", std::string("missing '") + param + "'", std::string("?") + param};
        auto label = req.get_param_value(param);
        if (label == "current") return live;
        try {
          return thaw(store_.load_snapshot(key, label));
        } catch (const Error& e) {
          throw detail::Problem{e.code() == ErrorCode::NotFound ? 404 : 422, std::string(to_string(e.code())),
                                e.what(), std::string("?") + param};
        }
      };
      Case a = load("from"), b = load("to");
      send_json(res, to_json(diff_cases(redact(a, f), redact(b, f))));
    }));

    server_.Post(one + "/challenges", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string key = req.matches[1];
      auto f = filter_for(req);
      Json body = parse_body(req);
      Challenge ch;
      ch.target = body_string(body, "target");
      ch.author = body_string(body, "author");
      ch.text = body_string(body, "text");
      auto done = submit([this, key, f, ch]() mutable {
        auto s = state();
        const Case& c = find_case(*s, key);
        if (!visibility(c, f).shows(ch.target) || c.challenge(ch.target))
          throw detail::Problem{404, "DanglingTarget", "no visible element or link '" + ch.target + "'", "/target"};
        ch.id = next_challenge_id(c);
        return store_.mutate(CaseStore::attach_entry(key, ch));
      });
      Challenge stored = done.get();
      send_json(res, {{"case", key}, {"challenge", detail::challenge_json(stored)}}, 201);
    }));

    server_.Post(one + "/challenges/([^/]+)/resolve",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string key = req.matches[1], id = req.matches[2];
                   auto f = filter_for(req);
                   Json body = parse_body(req);
                   auto outcome_text = body_string(body, "outcome");
                   auto outcome = enum_from_string<ChallengeState>(outcome_text);
                   if (!outcome)
                     throw detail::Problem{400, "InvalidOutcome", "unknown outcome '" + outcome_text + "'", "/outcome"};
                   auto note = body_string(body, "note", false);
                   auto done = submit([this, key, id, f, outcome, note] {
                     auto s = state();
                     const Case& c = find_case(*s, key);
                     if (!visibility(c, f).challenges.count(id))
                       throw detail::Problem{404, "NotFound", "no visible challenge '" + id + "'", ""};
                     return store_.mutate(CaseStore::resolve_entry(key, id, *outcome, note));
                   });
                   Challenge stored = done.get();
                   send_json(res, {{"case", key}, {"challenge", detail::challenge_json(stored)}});
                 }));

    server_.Post("/api/v1/reload", guarded([this](const httplib::Request&, httplib::Response& res) {
      submit([this] { store_.reload(); }).get();
      send_json(res, {{"cases", state()->cases.size()}, {"warnings", store_.warnings()}});
    }));
  }

  static double threshold_of(const httplib::Request& req) {
    if (!req.has_param("threshold")) return default_threshold;
    auto v = text::parse_number(req.get_param_value("threshold"));
    if (!v || *v < 0.0 || *v > 1.0)
      throw detail::Problem{400, "InvalidThreshold", "threshold must be a number in [0, 1]", "?threshold"};
    return *v;
  }

  static void prune(Explanation& e, const Visibility& v) {
    std::vector<Explanation> kept;
    for (auto& ch : e.children)
      if (v.elements.count(ch.id)) {
        prune(ch, v);
        kept.push_back(std::move(ch));
      }
    e.children = std::move(kept);
    if (!v.shows(e.via)) e.via.clear();
  }

  CaseStore store_;
  httplib::Server server_;
  std::thread listener_;
  int port_ = -1;

  std::thread writer_;
  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::function<void()>> queue_;
  bool closing_ = false;
};

}  // namespace eac
