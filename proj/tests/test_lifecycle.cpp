#include <gtest/gtest.h>

#include "eac/corpus.hpp"
#include "eac/lifecycle.hpp"
#include "eac/validation.hpp"
#include "support/generator.hpp"

using namespace eac;

namespace {

const Timestamp t0{std::chrono::seconds{1700000000}};

std::set<LifecycleStage> covered_stages(const CoverageReport& r) {
  std::set<LifecycleStage> out;
  for (const auto& [s, n] : r.counts)
    if (n) out.insert(s);
  return out;
}

}  // namespace

TEST(Stages, ThirteenStagesInThreeMacroStages) {
  EXPECT_EQ(enum_count<LifecycleStage>(), 13u);
  std::map<MacroStage, int> per;
  for (auto s : enum_values<LifecycleStage>()) ++per[macro_stage(s)];
  EXPECT_EQ(per[MacroStage::Design], 4);
  EXPECT_EQ(per[MacroStage::Development], 5);
  EXPECT_EQ(per[MacroStage::Deployment], 4);
  EXPECT_EQ(macro_stage(LifecycleStage::DataAnalysis), MacroStage::Design);
  EXPECT_EQ(macro_stage(LifecycleStage::ModelReporting), MacroStage::Development);
  EXPECT_EQ(macro_stage(LifecycleStage::SystemUseMonitoring), MacroStage::Deployment);
  EXPECT_EQ(to_string(LifecycleStage::PreprocessingFeatureEngineering), "preprocessing_feature_engineering");
  EXPECT_FALSE(enum_from_string<LifecycleStage>("deployment"));
}

TEST(Coverage, Healthcare) {
  auto r = coverage(*load_fixture("healthcare").value);
  EXPECT_EQ(r.covered(), 3u);
  EXPECT_EQ(r.uncovered.size(), 10u);
  EXPECT_EQ(covered_stages(r), (std::set<LifecycleStage>{LifecycleStage::DataAnalysis, LifecycleStage::ModelReporting,
                                                         LifecycleStage::SystemUseMonitoring}));
}

TEST(Coverage, EmptyAndFull) {
  auto empty = coverage(Case{});
  EXPECT_EQ(empty.covered(), 0u);
  EXPECT_EQ(empty.uncovered.size(), 13u);
  auto full = coverage(*load_fixture("all-stages").value);
  EXPECT_EQ(full.covered(), 13u);
  EXPECT_TRUE(full.uncovered.empty());
}

TEST(Coverage, UntaggedClaimsAreSeparate) {
  auto r = coverage(*load_fixture("fig7-toulmin").value);
  EXPECT_EQ(r.untagged, 1u);
  EXPECT_EQ(r.covered(), 0u);
}

TEST(Snapshot, RoundTripAndDigest) {
  Case c = *load_fixture("healthcare").value;
  auto s = snapshot(c, "v1", t0);
  EXPECT_EQ(*parse(s.frozen).value, c);
  EXPECT_EQ(s.digest, sha256_hex(s.frozen));
  EXPECT_EQ(s.digest.size(), 64u);
  EXPECT_EQ(snapshot(c, "v2", t0 + std::chrono::seconds{5}).digest, s.digest);

  Case edited = c;
  edited.elements.at("P1").text += " Edited.";
  EXPECT_NE(snapshot(edited, "v3", t0).digest, s.digest);
}

TEST(Snapshot, KnownDigest) {
  // sha256 of the empty string and of "abc"
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Snapshot, FileFormat) {
  auto s = snapshot(*load_fixture("fig7-toulmin").value, "prelim-1", t0);
  auto file = write_snapshot(s);
  EXPECT_TRUE(file.starts_with("eac-snapshot prelim-1 2023-11-14T22:13:20Z sha256:" + s.digest + "\n"));
  EXPECT_EQ(read_snapshot(file), s);
}

TEST(Snapshot, CorruptFilesAreRejected) {
  auto file = write_snapshot(snapshot(*load_fixture("fig7-toulmin").value, "a", t0));
  auto code = [](const std::string& f) {
    try {
      read_snapshot(f);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NotFound;
  };
  EXPECT_EQ(code(file + "tampered"), ErrorCode::ParseFailure);
  EXPECT_EQ(code("no header"), ErrorCode::ParseFailure);
  EXPECT_EQ(code("eac-snapshot a 2023 md5:00\nx"), ErrorCode::ParseFailure);

  // Valid digest over text that does not parse: diff names the snapshot.
  Snapshot bad{"broken", t0, "case \"x\" phase never\n", sha256_hex("case \"x\" phase never\n")};
  Snapshot good = snapshot(*load_fixture("fig7-toulmin").value, "good", t0);
  try {
    diff(good, read_snapshot(write_snapshot(bad)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseFailure);
    EXPECT_EQ(e.items(), std::vector<std::string>{"broken"});
  }
}

TEST(Diff, SelfIsEmpty) {
  auto s = snapshot(*load_fixture("healthcare").value, "a", t0);
  EXPECT_TRUE(diff(s, s).empty());
}

TEST(Diff, OpenChallengeDowngradesAnAncestor) {
  Case c = *load_fixture("healthcare").value;
  Case d = attach_challenge(c, Challenge{"CH1", "L9", "reviewer", "Is the review reliable or appropriate?",
                                         ChallengeState::Open, std::nullopt});
  auto cs = diff(snapshot(c, "before", t0), snapshot(d, "after", t0));
  EXPECT_EQ(cs.challenges.added, std::vector<std::string>{"CH1"});
  EXPECT_TRUE(cs.elements.empty());
  ASSERT_TRUE(cs.status_deltas.count("P1"));
  EXPECT_EQ(cs.status_deltas.at("P1"), std::pair(Status::Supported, Status::Contested));
  EXPECT_EQ(cs.status_deltas.at("G1").second, Status::Contested);
}

TEST(Diff, PhaseChangeEscalatesFindings) {
  Case c = *load_fixture("broken-unevidenced").value;
  c.phase = Phase::Preliminary;
  Case d = c;
  d.phase = Phase::Interim;
  auto cs = diff(snapshot(c, "p", t0), snapshot(d, "i", t0));
  ASSERT_TRUE(cs.phase_change);
  EXPECT_EQ(*cs.phase_change, std::pair(Phase::Preliminary, Phase::Interim));
  EXPECT_TRUE(validate(c).has("W-UNEVIDENCED"));
  EXPECT_TRUE(validate(d).has("E-UNEVIDENCED"));
}

TEST(Diff, FieldLevelChanges) {
  Case c = *load_fixture("healthcare").value;
  Case d = c;
  d.elements.at("P3").stage = LifecycleStage::UserTraining;
  d.elements.erase("X1");
  d.links.erase("L1");
  auto cs = diff_cases(c, d);
  EXPECT_EQ(cs.elements.removed, std::vector<std::string>{"X1"});
  ASSERT_EQ(cs.elements.modified.size(), 1u);
  EXPECT_EQ(cs.elements.modified[0].id, "P3");
  ASSERT_EQ(cs.elements.modified[0].fields.size(), 1u);
  EXPECT_EQ(cs.elements.modified[0].fields[0].field, "stage");
  EXPECT_EQ(cs.elements.modified[0].fields[0].after, "user_training");
  EXPECT_EQ(cs.links.removed, std::vector<std::string>{"L1"});
}

TEST(Properties, SymmetryAndEmptiness) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testkit::Generator ga(seed), gb(seed + 10000);
    Case a = ga.generate();
    // b is either a copy of a, a small edit of it, or unrelated
    Case b = seed % 3 == 0 ? a : seed % 3 == 1 ? gb.generate() : a;
    if (seed % 3 == 2 && !b.elements.empty()) b.elements.begin()->second.text += " (revised)";
    auto sa = snapshot(a, "a", t0), sb = snapshot(b, "b", t0);
    auto ab = diff(sa, sb), ba = diff(sb, sa);
    EXPECT_EQ(ab.elements.added, ba.elements.removed);
    EXPECT_EQ(ab.elements.removed, ba.elements.added);
    EXPECT_EQ(ab.links.added, ba.links.removed);
    EXPECT_EQ(ab.challenges.added, ba.challenges.removed);
    EXPECT_EQ(ab.appraisals.added, ba.appraisals.removed);
    EXPECT_EQ(ab.empty(), sa.frozen == sb.frozen) << "seed " << seed;
  }
}

TEST(Properties, StageTagsOutsideTheTaxonomyDoNotParse) {
  for (const char* tag : {"design", "deployment", "data-analysis", "DataAnalysis", "model_monitoring"}) {
    auto r = parse(std::string("case \"t\" phase preliminary\nclaim P1 scope system stage ") + tag + " \"x\"\n");
    EXPECT_FALSE(r.ok()) << tag;
  }
  for (auto s : enum_values<LifecycleStage>()) {
    auto r = parse("case \"t\" phase preliminary\nclaim P1 scope system stage " + std::string(to_string(s)) + " \"x\"\n");
    EXPECT_TRUE(r.ok()) << to_string(s);
  }
}
