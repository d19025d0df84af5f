#pragma once

// Property sweeps shared by the unit tests and the acceptance runner. Each
// returns a tally instead of asserting so both harnesses can report on it.

#include <sstream>
#include <string>

#include "eac/appraisal.hpp"
#include "eac/dsl.hpp"
#include "eac/interchange.hpp"
#include "eac/status.hpp"
#include "support/generator.hpp"
#include "support/oracles.hpp"

namespace eac::testkit {

struct Tally {
  long checks = 0;
  long failures = 0;
  std::string first;

  void check(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  bool ok() const { return failures == 0 && checks > 0; }
  std::string summary() const {
    std::ostringstream os;
    os << checks << " checks, " << failures << " failures";
    if (failures) os << "; first: " << first;
    return os.str();
  }
};

inline std::string describe(const std::map<ElementId, Status>& m) {
  std::string s;
  for (const auto& [id, st] : m) s += id + "=" + std::string(to_string(st)) + " ";
  return s;
}

// compute_status against the recursive oracle on random cases.
inline Tally status_vs_oracle(int cases, std::uint64_t seed0 = 1, int max_elements = 12) {
  Tally t;
  for (int i = 0; i < cases; ++i) {
    Generator g(seed0 + std::uint64_t(i), GenOptions{max_elements, 4, 0.7, false, true});
    Case c = g.generate();
    auto got = compute_status(c);
    auto want = oracle_status(c);
    t.check(got == want, "seed " + std::to_string(seed0 + i) + ": got " + describe(got) + " want " + describe(want));
  }
  return t;
}

// Every assignment of {none, open, withdrawn, sustained, resolved} to every
// element and link of small generated cases. Cases with more than
// `max_targets` targets are skipped rather than truncated, so each case that
// is checked is checked completely.
inline Tally status_exhaustive_challenges(int cases, std::uint64_t seed0 = 7, int max_targets = 6) {
  Tally t;
  static constexpr ChallengeState states[] = {ChallengeState::Open, ChallengeState::Withdrawn,
                                              ChallengeState::Sustained, ChallengeState::Resolved};
  int done = 0;
  for (std::uint64_t seed = seed0; done < cases; ++seed) {
    Generator g(seed, GenOptions{5, 0, 0.7, false, true});
    const Case base = g.generate();
    std::vector<std::string> targets;
    for (const auto& [id, e] : base.elements) targets.push_back(id);
    for (const auto& [id, l] : base.links) targets.push_back(id);
    if (int(targets.size()) > max_targets) continue;
    ++done;
    long combos = 1;
    for (std::size_t k = 0; k < targets.size(); ++k) combos *= 5;
    Case c = base;
    for (long code = 0; code < combos; ++code) {
      c.challenges.clear();
      long rest = code;
      for (std::size_t k = 0; k < targets.size(); ++k, rest /= 5) {
        int choice = int(rest % 5);
        if (choice == 0) continue;
        std::string cid = "CH" + std::to_string(k + 1);
        ChallengeState st = states[choice - 1];
        std::optional<std::string> note;
        if (st != ChallengeState::Open) note = "closed";
        c.challenges.emplace(cid, Challenge{cid, targets[k], "r", "objection", st, note});
      }
      auto got = compute_status(c);
      auto want = oracle_status(c);
      t.check(got == want, "seed " + std::to_string(seed) + " assignment " + std::to_string(code) + ": got " +
                               describe(got) + " want " + describe(want));
    }
  }
  return t;
}

inline Tally roundtrips(int cases, std::uint64_t seed0 = 100) {
  Tally t;
  for (int i = 0; i < cases; ++i) {
    Generator g(seed0 + std::uint64_t(i));
    Case c = g.generate();
    const std::string tag = "seed " + std::to_string(seed0 + i);
    auto text = serialize(c);
    auto back = parse(text);
    t.check(back.ok() && *back.value == c, tag + ": dsl round-trip");
    t.check(serialize(c) == text, tag + ": dsl determinism");
    auto json = to_interchange(c);
    auto jb = from_interchange(json);
    t.check(jb.ok() && *jb.value == c, tag + ": interchange round-trip");
    t.check(to_interchange(c) == json, tag + ": interchange determinism");
  }
  return t;
}

inline std::optional<double> value_of(const SufficiencyReport& r, const ElementId& id) {
  auto it = r.per_claim.find(id);
  return it == r.per_claim.end() ? std::nullopt : it->second.value;
}

// Bottom-up aggregation against enumeration of argument trees, on cases where
// every evidence item is appraised.
inline Tally sufficiency_vs_paths(int cases, std::uint64_t seed0 = 500) {
  Tally t;
  for (int i = 0; i < cases; ++i) {
    Generator g(seed0 + std::uint64_t(i), GenOptions{12, 3, 1.0, false, true});
    Case c = g.generate();
    auto rep = sufficiency(c, 0.5);
    auto st = compute_status(c);
    for (const auto& [id, e] : c.elements) {
      if (e.kind != ElementKind::Goal && e.kind != ElementKind::PropertyClaim &&
          e.kind != ElementKind::EvidentialClaim)
        continue;
      auto want = oracle_claim_value(c, id, st);
      const auto& got = rep.per_claim.at(id);
      const std::string tag = "seed " + std::to_string(seed0 + i) + " " + id;
      t.check(got.value == want.value, tag + ": value");
      auto verdict = !want.value || !want.complete ? SufficiencyVerdict::Unassessed
                     : *want.value >= 0.5          ? SufficiencyVerdict::Sufficient
                                                   : SufficiencyVerdict::Insufficient;
      t.check(got.verdict == verdict, tag + ": verdict");
      if (st.at(id) == Status::Defeated) t.check(got.value == 0.0, tag + ": defeated claims are worth 0");
    }
  }
  return t;
}

// Flipping a triad verdict never raises a value; raising the threshold never
// turns insufficient into sufficient.
inline Tally sufficiency_perturbations(int perturbations, std::uint64_t seed0 = 900) {
  Tally t;
  std::mt19937_64 rng(seed0);
  int done = 0;
  for (std::uint64_t s = seed0; done < perturbations; ++s) {
    Generator g(s, GenOptions{12, 2, 0.8, false, true});
    Case c = g.generate();
    if (c.appraisals.empty()) continue;
    ++done;
    const std::string tag = "seed " + std::to_string(s);
    auto before = sufficiency(c, 0.5);

    std::vector<ElementId> ev;
    for (const auto& [id, r] : c.appraisals) ev.push_back(id);
    auto id = ev[std::uniform_int_distribution<std::size_t>(0, ev.size() - 1)(rng)];
    AppraisalRecord r = c.appraisals.at(id);
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0: r.relevance.value = Relevance::Irrelevant; break;
      case 1: r.materiality.value = Materiality::Immaterial; break;
      default: r.admissibility.value = Admissibility::Inadmissible; break;
    }
    auto after = sufficiency(record_appraisal(c, r), 0.5);
    for (const auto& [cid, v] : before.per_claim) {
      auto a = after.per_claim.at(cid).value;
      t.check(!v.value || (a && *a <= *v.value), tag + ": " + cid + " rose after excluding " + id);
    }
    auto cv = before.case_value.value, ca = after.case_value.value;
    t.check(!cv || (ca && *ca <= *cv), tag + ": case value rose after excluding " + id);

    double lo = std::uniform_real_distribution<double>(0, 1)(rng);
    double hi = std::uniform_real_distribution<double>(lo, 1)(rng);
    auto rl = sufficiency(c, lo), rh = sufficiency(c, hi);
    for (const auto& [cid, v] : rl.per_claim)
      t.check(!(v.verdict == SufficiencyVerdict::Insufficient &&
                rh.per_claim.at(cid).verdict == SufficiencyVerdict::Sufficient),
              tag + ": " + cid + " became sufficient at a higher threshold");
    t.check(!(rl.case_value.verdict == SufficiencyVerdict::Insufficient &&
              rh.case_value.verdict == SufficiencyVerdict::Sufficient),
            tag + ": case became sufficient at a higher threshold");
  }
  return t;
}

}  // namespace eac::testkit
