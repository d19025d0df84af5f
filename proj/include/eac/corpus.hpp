#pragma once

// Shipped fixtures and their expectations, read from <corpus>/fixtures.json.
// The corpus directory is $EAC_CORPUS_DIR, else the path compiled in as
// EAC_CORPUS_DIR, else ./corpus.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eac/dsl.hpp"
#include "eac/interchange.hpp"
#include "eac/patterns.hpp"

namespace eac {

struct FixtureExpectations {
  std::optional<Phase> phase;          // phase to validate at
  std::vector<std::string> codes;      // exact finding codes (parse codes when it must not parse)
  bool parses = true;
  std::optional<std::size_t> elements;
  std::optional<std::size_t> covered;  // lifecycle stages covered
};

struct Fixture {
  std::string name;
  std::filesystem::path path;
  bool is_pattern = false;
  std::string source;
  FixtureExpectations expect;
  std::optional<Case> value;        // parsed case, when it parses
  std::optional<Pattern> pattern;   // parsed pattern, for .eap fixtures
};

inline std::filesystem::path corpus_dir() {
  if (const char* env = std::getenv("EAC_CORPUS_DIR"); env && *env) return env;
#ifdef EAC_CORPUS_DIR
  return EAC_CORPUS_DIR;
#else
  return "corpus";
#endif
}

namespace detail {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnknownFixture, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json manifest() {
  auto j = Json::parse(slurp(corpus_dir() / "fixtures.json"), nullptr, false);
  if (j.is_discarded() || !j.contains("fixtures")) throw Error(ErrorCode::ParseFailure, "fixtures.json");
  return j;
}

}  // namespace detail

inline std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  const auto doc = detail::manifest();
  for (const auto& f : doc["fixtures"]) out.push_back(f.at("name").get<std::string>());
  return out;
}

// Throws UnknownFixture when the name is not in the manifest.
inline Fixture load_fixture(const std::string& name) {
  const auto doc = detail::manifest();
  for (const auto& j : doc["fixtures"]) {
    if (j.at("name") != name) continue;
    Fixture f;
    f.name = name;
    f.path = corpus_dir() / j.at("file").get<std::string>();
    f.is_pattern = j.value("kind", "case") == "pattern";
    f.source = detail::slurp(f.path);
    if (j.contains("phase")) f.expect.phase = enum_from_string<Phase>(j["phase"].get<std::string>());
    f.expect.codes = j.value("expect", std::vector<std::string>{});
    f.expect.parses = j.value("parses", true);
    if (j.contains("elements")) f.expect.elements = j["elements"].get<std::size_t>();
    if (j.contains("covered")) f.expect.covered = j["covered"].get<std::size_t>();
    if (f.is_pattern) {
      f.pattern = parse_pattern(f.source).value;
    } else {
      f.value = parse(f.source).value;
    }
    return f;
  }
  throw Error(ErrorCode::UnknownFixture, name);
}

// Every fixture that parses into a case.
inline std::vector<Fixture> case_fixtures() {
  std::vector<Fixture> out;
  for (const auto& n : fixture_names()) {
    auto f = load_fixture(n);
    if (f.value) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace eac
