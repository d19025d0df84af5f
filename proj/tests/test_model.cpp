#include <gtest/gtest.h>

#include "eac/model.hpp"
#include "support/generator.hpp"

using namespace eac;

namespace {

Element make(const std::string& id, ElementKind k, std::string text = "Some text.") {
  Element e;
  e.id = id;
  e.kind = k;
  e.text = std::move(text);
  if (k == ElementKind::PropertyClaim) e.scope = ClaimScope::Project;
  if (k == ElementKind::Evidence) e.locator = Locator{"doc.pdf", std::nullopt};
  if (k == ElementKind::Goal) e = goal_from_template(id, "tool", "staff", "equity");
  return e;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an eac::Error";
  return ErrorCode::NotFound;
}

}  // namespace

TEST(GoalTemplate, RendersTheFixedSentence) {
  auto g = goal_from_template("G1", "decision support tool", "healthcare professionals in a formal healthcare setting",
                              "health equity");
  EXPECT_EQ(g.text,
            "The use of the {decision support tool} by {healthcare professionals in a formal healthcare setting} can "
            "help advance {health equity}.");
  ASSERT_TRUE(g.slots);
  EXPECT_EQ(g.slots->system, "decision support tool");
  EXPECT_EQ(g.kind, ElementKind::Goal);
}

TEST(GoalTemplate, EmptySlotNamesTheSlot) {
  try {
    goal_from_template("G1", "x", "", "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySlot);
    EXPECT_EQ(e.detail(), "context");
  }
}

TEST(GoalTemplate, BraceInSlotNamesTheSlot) {
  try {
    goal_from_template("G1", "{tool}", "staff", "equity");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BraceInSlot);
    EXPECT_EQ(e.detail(), "system");
  }
}

TEST(GoalTemplate, ExtractionInvertsRendering) {
  for (auto [s, c, g] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"a", "b", "c"}, {"tool by design", "staff by rota", "help advance equity"}, {"é", "\"q\"", "x y"}}) {
    auto e = goal_from_template("G", s, c, g);
    auto back = extract_goal_slots(e.text);
    ASSERT_TRUE(back) << e.text;
    EXPECT_EQ(*back, (GoalSlots{s, c, g}));
  }
  EXPECT_FALSE(extract_goal_slots("This decision support tool is fair."));
}

TEST(AddElement, AddsWithoutTouchingTheInput) {
  Case c;
  auto claim = make("P1", ElementKind::PropertyClaim,
                    "We consulted a panel of experts to independently assess our dataset.");
  Case before = c;
  Case next = add_element(c, claim);
  EXPECT_EQ(c, before);
  EXPECT_EQ(next.elements.size(), 1u);
  EXPECT_EQ(next.elements.at("P1").scope, ClaimScope::Project);
}

TEST(AddElement, RejectsDuplicateIds) {
  Case c = add_element({}, make("P1", ElementKind::PropertyClaim));
  EXPECT_EQ(code_of([&] { add_element(c, make("P1", ElementKind::PropertyClaim)); }), ErrorCode::DuplicateId);
  c = add_link(add_element(add_element(c, make("G1", ElementKind::Goal)), make("P2", ElementKind::PropertyClaim)),
               Link{"L1", LinkKind::Supports, "P1", "G1", std::nullopt});
  // ids are shared between elements, links and challenges
  EXPECT_EQ(code_of([&] { add_element(c, make("L1", ElementKind::PropertyClaim)); }), ErrorCode::DuplicateId);
}

TEST(AddElement, GoalWithoutSlotsViolatesItsKind) {
  Element g;
  g.id = "G1";
  g.kind = ElementKind::Goal;
  g.text = "This decision support tool is fair.";
  try {
    add_element({}, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KindInvariantViolation);
    EXPECT_EQ(e.detail(), "slots-missing");
  }
  EXPECT_NO_THROW(add_element({}, g, Admission{true, false}));
}

TEST(AddElement, KindInvariants) {
  auto rule = [](Element e) {
    try {
      check_element(e);
    } catch (const Error& err) {
      return err.detail();
    }
    return std::string("ok");
  };
  auto claim = make("P1", ElementKind::PropertyClaim);
  claim.scope.reset();
  EXPECT_EQ(rule(claim), "scope-missing");
  auto ev = make("E1", ElementKind::Evidence);
  ev.locator.reset();
  EXPECT_EQ(rule(ev), "locator-missing");
  auto w = make("W1", ElementKind::Warrant);
  w.scope = ClaimScope::System;
  EXPECT_EQ(rule(w), "scope-not-permitted");
  auto blank = make("X1", ElementKind::Context, "   ");
  EXPECT_EQ(rule(blank), "text-empty");
  auto multi = make("X1", ElementKind::Context, "two\nlines");
  EXPECT_EQ(rule(multi), "line-break");
  auto bad = make("1x", ElementKind::Context);
  EXPECT_EQ(code_of([&] { check_element(bad); }), ErrorCode::InvalidId);
}

TEST(AddLink, SharedEvidenceAcrossTwoClaims) {
  Case c;
  c = add_element(c, make("EV1", ElementKind::Evidence, "equality impact assessment"));
  c = add_element(c, make("EC1", ElementKind::EvidentialClaim));
  c = add_element(c, make("EC2", ElementKind::EvidentialClaim));
  c = add_link(c, Link{"L1", LinkKind::Evidences, "EV1", "EC1", std::nullopt});
  c = add_link(c, Link{"L2", LinkKind::Evidences, "EV1", "EC2", std::nullopt});
  EXPECT_EQ(c.links.size(), 2u);
}

TEST(AddLink, GoalSupportsGoal) {
  Case c = add_element(add_element({}, make("G1", ElementKind::Goal)), make("G2", ElementKind::Goal));
  EXPECT_NO_THROW(add_link(c, Link{"L1", LinkKind::Supports, "G2", "G1", std::nullopt}));
}

TEST(AddLink, CycleReportsThePath) {
  Case c = add_element(add_element({}, make("A", ElementKind::PropertyClaim)), make("B", ElementKind::PropertyClaim));
  c = add_link(c, Link{"L1", LinkKind::Supports, "A", "B", std::nullopt});
  try {
    add_link(c, Link{"L2", LinkKind::Supports, "B", "A", std::nullopt});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CycleIntroduced);
    EXPECT_EQ(e.items(), (std::vector<std::string>{"A", "B", "A"}));
  }
}

TEST(AddLink, DanglingEndpoints) {
  Case c = add_element({}, make("A", ElementKind::PropertyClaim));
  EXPECT_EQ(code_of([&] { add_link(c, Link{"L1", LinkKind::Supports, "A", "Z", std::nullopt}); }),
            ErrorCode::DanglingEndpoint);
  EXPECT_EQ(code_of([&] { add_link(c, Link{"L1", LinkKind::Supports, "Z", "A", std::nullopt}); }),
            ErrorCode::DanglingEndpoint);
}

TEST(AddLink, CompatibilityTableIsTotal) {
  // Every (source kind, link kind, target kind) triple: accepted exactly when the table says so.
  const std::set<std::tuple<ElementKind, LinkKind, ElementKind>> allowed = [] {
    using K = ElementKind;
    using L = LinkKind;
    std::set<std::tuple<K, L, K>> s;
    for (auto from : {K::Goal, K::PropertyClaim, K::EvidentialClaim})
      for (auto to : {K::Goal, K::PropertyClaim}) s.insert({from, L::Supports, to});
    for (auto to : {K::Goal, K::PropertyClaim, K::EvidentialClaim}) s.insert({K::Assumption, L::Supports, to});
    s.insert({K::Context, L::ContextOf, K::Goal});
    s.insert({K::Context, L::ContextOf, K::PropertyClaim});
    s.insert({K::Evidence, L::Evidences, K::EvidentialClaim});
    return s;
  }();
  for (auto from : enum_values<ElementKind>())
    for (auto lk : {LinkKind::Supports, LinkKind::ContextOf, LinkKind::Evidences})
      for (auto to : enum_values<ElementKind>()) {
        Case c = add_element(add_element({}, make("A", from)), make("B", to));
        bool accepted = true;
        try {
          add_link(c, Link{"L1", lk, "A", "B", std::nullopt});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::IncompatibleKinds);
          accepted = false;
        }
        EXPECT_EQ(accepted, allowed.count({from, lk, to}) > 0)
            << to_string(from) << " " << to_string(lk) << " " << to_string(to);
      }
}

TEST(AddLink, WarrantsTargetEvidentialSteps) {
  Case c;
  c = add_element(c, make("EC1", ElementKind::EvidentialClaim));
  c = add_element(c, make("P1", ElementKind::PropertyClaim));
  c = add_element(c, make("P2", ElementKind::PropertyClaim));
  c = add_element(c, make("W1", ElementKind::Warrant));
  c = add_element(c, make("X1", ElementKind::Context));
  c = add_link(c, Link{"L1", LinkKind::Supports, "EC1", "P1", Qualifier{QualifierLabel::VeryLikely, std::nullopt}});
  c = add_link(c, Link{"L2", LinkKind::Supports, "P2", "P1", std::nullopt});
  EXPECT_NO_THROW(add_link(c, Link{"L3", LinkKind::Warrants, "W1", "L1", std::nullopt}));
  EXPECT_EQ(code_of([&] { add_link(c, Link{"L3", LinkKind::Warrants, "W1", "L2", std::nullopt}); }),
            ErrorCode::IncompatibleKinds);
  EXPECT_EQ(code_of([&] { add_link(c, Link{"L3", LinkKind::Warrants, "X1", "L1", std::nullopt}); }),
            ErrorCode::IncompatibleKinds);
  EXPECT_EQ(code_of([&] { add_link(c, Link{"L3", LinkKind::Warrants, "W1", "L9", std::nullopt}); }),
            ErrorCode::DanglingEndpoint);
  EXPECT_EQ(code_of([&] {
              add_link(c, Link{"L3", LinkKind::ContextOf, "X1", "P1", Qualifier{QualifierLabel::Likely, std::nullopt}});
            }),
            ErrorCode::KindInvariantViolation);
}

namespace {

Case knock() {
  Case c;
  c = add_element(c, make("P1", ElementKind::PropertyClaim));
  c = add_element(c, make("P2", ElementKind::PropertyClaim));
  c = add_link(c, Link{"L1", LinkKind::Supports, "P2", "P1", std::nullopt});
  return c;
}

}  // namespace

TEST(Challenges, AttachAndResolve) {
  Case c = knock();
  c = attach_challenge(c, Challenge{"CH1", "L1", "reviewer",
                                    "Is the fairness optimisation process reliable or appropriate?",
                                    ChallengeState::Open, std::nullopt});
  EXPECT_EQ(c.challenges.at("CH1").state, ChallengeState::Open);
  Case before = c;
  Case done = resolve_challenge(c, "CH1", ChallengeState::Resolved, "panel re-reviewed dataset");
  EXPECT_EQ(c, before);
  EXPECT_EQ(done.challenges.at("CH1").state, ChallengeState::Resolved);
  EXPECT_EQ(done.challenges.at("CH1").resolution_note, "panel re-reviewed dataset");
  EXPECT_EQ(code_of([&] { resolve_challenge(done, "CH1", ChallengeState::Withdrawn, ""); }), ErrorCode::AlreadyClosed);
  EXPECT_EQ(code_of([&] { resolve_challenge(done, "CH9", ChallengeState::Withdrawn, ""); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { resolve_challenge(c, "CH1", ChallengeState::Sustained, ""); }), ErrorCode::MissingNote);
  EXPECT_EQ(code_of([&] { resolve_challenge(c, "CH1", ChallengeState::Open, "x"); }), ErrorCode::InvalidOutcome);
  EXPECT_NO_THROW(resolve_challenge(c, "CH1", ChallengeState::Withdrawn, ""));
}

TEST(Challenges, MissingTarget) {
  EXPECT_EQ(code_of([&] {
              attach_challenge(knock(), Challenge{"CH1", "NOPE", "a", "b", ChallengeState::Open, std::nullopt});
            }),
            ErrorCode::DanglingTarget);
}

TEST(Challenges, TwoOnOneElementAreIndependent) {
  Case c = knock();
  c = attach_challenge(c, Challenge{"CH1", "P1", "a", "first", ChallengeState::Open, std::nullopt});
  c = attach_challenge(c, Challenge{"CH2", "P1", "b", "second", ChallengeState::Open, std::nullopt});
  c = resolve_challenge(c, "CH1", ChallengeState::Withdrawn, "");
  EXPECT_EQ(c.challenges.at("CH1").state, ChallengeState::Withdrawn);
  EXPECT_EQ(c.challenges.at("CH2").state, ChallengeState::Open);
}

TEST(Properties, GeneratedCasesHaveATopologicalOrder) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testkit::Generator g(seed);
    Case c = g.generate();
    auto order = supports_topological_order(c);
    std::map<ElementId, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    EXPECT_EQ(pos.size(), c.elements.size());
    for (const auto& [id, l] : c.links) {
      if (l.kind == LinkKind::Warrants) {
        EXPECT_TRUE(c.link(l.to));
        continue;
      }
      ASSERT_TRUE(c.element(l.from) && c.element(l.to));
      if (l.kind == LinkKind::Supports) EXPECT_LT(pos[l.from], pos[l.to]) << "seed " << seed;
    }
  }
}
