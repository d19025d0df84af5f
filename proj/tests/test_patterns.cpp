#include <gtest/gtest.h>

#include "eac/corpus.hpp"
#include "eac/patterns.hpp"
#include "eac/validation.hpp"
#include "support/generator.hpp"

using namespace eac;

namespace {

Pattern interpretability() { return *load_fixture("interpretability").pattern; }

Bindings ward_triage() {
  return {{"system", "decision support tool"},
          {"setting", "clinicians on a hospital ward"},
          {"value", "patient safety"},
          {"ML Model", "risk classifier"},
          {"interpretable", "post-hoc explainable"},
          {"context", "ward triage"}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::NotFound;
}

}  // namespace

TEST(Pattern, ParsesTheCorpusPattern) {
  Pattern p = interpretability();
  EXPECT_EQ(p.id, "interpretability");
  EXPECT_EQ(p.slot_types.size(), 6u);
  EXPECT_EQ(p.slot_types.at("system"), SlotType::System);
  EXPECT_EQ(p.slot_types.at("ML Model"), SlotType::FreeText);
  EXPECT_EQ(p.risks.size(), 2u);
  EXPECT_EQ(p.skeleton.elements.size(), 2u);
  auto again = parse_pattern(serialize_pattern(p));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(*again.value, p);
}

TEST(Pattern, UndeclaredAndBadSlots) {
  auto r = parse_pattern("pattern p\n  claim P1 scope system \"The {thing} works.\"\n");
  EXPECT_TRUE(r.has(diag::undeclared_slot));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(parse_pattern("pattern p\n  slot a : colour\n").has(diag::bad_slot_type));
  EXPECT_TRUE(parse_pattern("pattern p\n  slot a : system\n  slot a : context\n").has(diag::duplicate_slot));
}

TEST(Instantiate, Interpretability) {
  Case c = instantiate(interpretability(), ward_triage());
  ASSERT_EQ(c.elements.size(), 2u);
  EXPECT_EQ(c.elements.at("P1").text, "The risk classifier is sufficiently post-hoc explainable in the intended ward triage.");
  EXPECT_EQ(c.elements.at("G1").slots->system, "decision support tool");
  EXPECT_EQ(c.elements.at("G1").slots->goal, "patient safety");
  EXPECT_EQ(c.elements.at("P1").stage, LifecycleStage::ModelReporting);
  EXPECT_EQ(c.links.at("L1").from, "P1");
  // the fragment is a valid case on its own
  EXPECT_TRUE(parse(serialize(c)).ok());
  EXPECT_EQ(validate(c, Phase::Preliminary).errors(), 0u);
}

TEST(Instantiate, BindingErrors) {
  Bindings b = ward_triage();
  b.erase("context");
  try {
    instantiate(interpretability(), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingBinding);
    EXPECT_EQ(e.items(), std::vector<std::string>{"context"});
  }
  Bindings extra = ward_triage();
  extra["colour"] = "blue";
  EXPECT_EQ(code_of([&] { instantiate(interpretability(), extra); }), ErrorCode::UnknownSlot);
  Bindings braces = ward_triage();
  braces["context"] = "{context}";
  EXPECT_EQ(code_of([&] { instantiate(interpretability(), braces); }), ErrorCode::InvalidBinding);
  Bindings blank = ward_triage();
  blank["system"] = "  ";
  EXPECT_EQ(code_of([&] { instantiate(interpretability(), blank); }), ErrorCode::InvalidBinding);
  EXPECT_EQ(code_of([&] { instantiate(interpretability(), ward_triage(), "9x"); }), ErrorCode::InvalidId);
}

TEST(Instantiate, PrefixesAvoidCollisions) {
  Case a = instantiate(interpretability(), ward_triage(), "a_");
  Bindings other = ward_triage();
  other["context"] = "emergency admissions";
  Case b = instantiate(interpretability(), other, "b_");
  Case merged = merge(a, b);
  EXPECT_EQ(merged.elements.size(), 4u);
  EXPECT_EQ(merged.links.size(), 2u);
  EXPECT_TRUE(merged.elements.count("a_P1") && merged.elements.count("b_P1"));
  EXPECT_EQ(code_of([&] { merge(a, a); }), ErrorCode::DuplicateId);

  // merged into a host case
  Case host = *load_fixture("healthcare").value;
  Case grown = merge(host, a);
  EXPECT_EQ(grown.elements.size(), host.elements.size() + 2);
}

TEST(Derive, SystemSlotPair) {
  auto d = derive_with_bindings({*load_fixture("system-slot-a").value, *load_fixture("system-slot-b").value});
  ASSERT_EQ(d.pattern.slot_types.size(), 1u);
  EXPECT_EQ(d.pattern.slot_types.begin()->second, SlotType::System);
  const auto& name = d.pattern.slot_types.begin()->first;
  ASSERT_EQ(d.bindings.size(), 2u);
  EXPECT_EQ(d.bindings[0].at(name), "decision support tool");
  EXPECT_EQ(d.bindings[1].at(name), "triage chatbot");
  EXPECT_EQ(d.pattern.skeleton.elements.at("G1").slots->system, "{" + name + "}");
  // instantiating with each case's bindings gives that case back
  EXPECT_TRUE(isomorphic(instantiate(d.pattern, d.bindings[0]), *load_fixture("system-slot-a").value));
  EXPECT_TRUE(isomorphic(instantiate(d.pattern, d.bindings[1]), *load_fixture("system-slot-b").value));
  // the derived pattern survives its own file format
  auto again = parse_pattern(serialize_pattern(d.pattern));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again.value->slot_types, d.pattern.slot_types);
}

TEST(Derive, Failures) {
  Case a = *load_fixture("system-slot-a").value;
  try {
    derive({a});
    FAIL();
  } catch (const DeriveFailure& e) {
    EXPECT_EQ(e.reason(), DeriveReason::TooFewCases);
  }
  try {
    derive({a, *load_fixture("healthcare").value});
    FAIL();
  } catch (const DeriveFailure& e) {
    EXPECT_EQ(e.reason(), DeriveReason::ShapeMismatch);
  }
}

TEST(Derive, SubsumesEveryCorpusCase) {
  for (const auto& f : case_fixtures()) {
    const Case& c = *f.value;
    Pattern p = derive({c, c});
    EXPECT_TRUE(p.slot_types.empty()) << f.name;
    EXPECT_TRUE(isomorphic(instantiate(p, {}), c)) << f.name;
  }
}

TEST(Derive, SubsumesGeneratedCases) {
  testkit::GenOptions opts;
  opts.max_challenges = 0;
  opts.rich_text = false;  // literal braces cannot be generalised
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testkit::Generator g(seed, opts);
    Case c = g.generate();
    Pattern p = derive({c, c});
    EXPECT_TRUE(isomorphic(instantiate(p, {}), c)) << "seed " << seed;
  }
}

TEST(Isomorphic, DetectsDifferences) {
  Case a = *load_fixture("system-slot-a").value;
  Case b = *load_fixture("system-slot-b").value;
  EXPECT_TRUE(isomorphic(a, a));
  EXPECT_FALSE(isomorphic(a, b));
  Case renamed;
  for (const auto& [id, e] : a.elements) {
    Element x = e;
    x.id = "Z" + id;
    renamed.elements.emplace(x.id, x);
  }
  for (const auto& [id, l] : a.links) {
    Link x = l;
    x.id = "Z" + id;
    x.from = "Z" + l.from;
    x.to = "Z" + l.to;
    renamed.links.emplace(x.id, x);
  }
  EXPECT_TRUE(isomorphic(a, renamed));
  renamed.elements.at("ZP1").stage = LifecycleStage::ModelValidationTesting;
  EXPECT_FALSE(isomorphic(a, renamed));
}

TEST(Applicability, Advisories) {
  Pattern p = interpretability();
  auto adv = check_applicability(p, CaseMeta{"healthcare", {LifecycleStage::DataAnalysis}});
  std::map<AdvisoryKind, int> n;
  for (const auto& a : adv) ++n[a.kind];
  EXPECT_EQ(n[AdvisoryKind::Applicability], 1);
  EXPECT_EQ(n[AdvisoryKind::Risk], 2);
  EXPECT_EQ(n[AdvisoryKind::StageGap], 1);

  auto covered = check_applicability(p, CaseMeta{"", {LifecycleStage::ModelReporting}});
  for (const auto& a : covered) EXPECT_NE(a.kind, AdvisoryKind::StageGap);

  p.risks.clear();
  auto bare = check_applicability(p, CaseMeta{"", {LifecycleStage::ModelReporting}});
  ASSERT_EQ(bare.size(), 1u);
  EXPECT_EQ(bare[0].kind, AdvisoryKind::Applicability);
}
