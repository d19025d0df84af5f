#pragma once

// Closed vocabularies of the case model and their stable spellings.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace eac {

template <class E>
struct EnumNames;

template <class E>
constexpr std::string_view to_string(E e) {
  return EnumNames<E>::names[static_cast<std::size_t>(e)];
}

template <class E>
constexpr std::optional<E> enum_from_string(std::string_view s) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

template <class E>
constexpr std::size_t enum_count() {
  return EnumNames<E>::names.size();
}

template <class E>
constexpr auto enum_values() {
  std::array<E, EnumNames<E>::names.size()> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
  return out;
}

enum class ElementKind { Goal, Context, PropertyClaim, EvidentialClaim, Evidence, Warrant, Assumption };
template <>
struct EnumNames<ElementKind> {
  static constexpr std::array<std::string_view, 7> names{
      "Goal", "Context", "PropertyClaim", "EvidentialClaim", "Evidence", "Warrant", "Assumption"};
};

enum class LinkKind { Supports, ContextOf, Evidences, Warrants };
template <>
struct EnumNames<LinkKind> {
  static constexpr std::array<std::string_view, 4> names{"supports", "contextOf", "evidences", "warrants"};
};

// Strongest first.
enum class QualifierLabel { Certainly, VeryLikely, Likely, Plausibly };
template <>
struct EnumNames<QualifierLabel> {
  static constexpr std::array<std::string_view, 4> names{"certainly", "very-likely", "likely", "plausibly"};
};

enum class ChallengeState { Open, Withdrawn, Sustained, Resolved };
template <>
struct EnumNames<ChallengeState> {
  static constexpr std::array<std::string_view, 4> names{"open", "withdrawn", "sustained", "resolved"};
};

// Ordered: a viewer holding tier t sees every element whose tier is <= t.
enum class AudienceTier { Public, Stakeholder, Auditor };
template <>
struct EnumNames<AudienceTier> {
  static constexpr std::array<std::string_view, 3> names{"public", "stakeholder", "auditor"};
};

enum class Phase { Preliminary, Interim, Operational };
template <>
struct EnumNames<Phase> {
  static constexpr std::array<std::string_view, 3> names{"preliminary", "interim", "operational"};
};

enum class ClaimScope { System, Project };
template <>
struct EnumNames<ClaimScope> {
  static constexpr std::array<std::string_view, 2> names{"system", "project"};
};

enum class Relevance { Relevant, Irrelevant };
template <>
struct EnumNames<Relevance> {
  static constexpr std::array<std::string_view, 2> names{"relevant", "irrelevant"};
};

enum class Materiality { Material, Immaterial };
template <>
struct EnumNames<Materiality> {
  static constexpr std::array<std::string_view, 2> names{"material", "immaterial"};
};

enum class Admissibility { Admissible, Inadmissible };
template <>
struct EnumNames<Admissibility> {
  static constexpr std::array<std::string_view, 2> names{"admissible", "inadmissible"};
};

// Weakest first; combining children takes the minimum.
enum class Status { Defeated, Contested, Undeveloped, Assumed, Supported };
template <>
struct EnumNames<Status> {
  static constexpr std::array<std::string_view, 5> names{"Defeated", "Contested", "Undeveloped", "Assumed",
                                                          "Supported"};
};

enum class MacroStage { Design, Development, Deployment };
template <>
struct EnumNames<MacroStage> {
  static constexpr std::array<std::string_view, 3> names{"design", "development", "deployment"};
};

enum class LifecycleStage {
  ProjectPlanning,
  ProblemFormulation,
  DataExtractionProcurement,
  DataAnalysis,
  PreprocessingFeatureEngineering,
  ModelSelection,
  ModelTraining,
  ModelValidationTesting,
  ModelReporting,
  ModelProductionalization,
  UserTraining,
  SystemUseMonitoring,
  ModelUpdatingDeprovisioning,
};
template <>
struct EnumNames<LifecycleStage> {
  static constexpr std::array<std::string_view, 13> names{
      "project_planning",          "problem_formulation",
      "data_extraction_procurement", "data_analysis",
      "preprocessing_feature_engineering", "model_selection",
      "model_training",            "model_validation_testing",
      "model_reporting",           "model_productionalization",
      "user_training",             "system_use_monitoring",
      "model_updating_deprovisioning"};
};

constexpr MacroStage macro_stage(LifecycleStage s) {
  if (s <= LifecycleStage::DataAnalysis) return MacroStage::Design;
  if (s <= LifecycleStage::ModelReporting) return MacroStage::Development;
  return MacroStage::Deployment;
}

}  // namespace eac
