#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/error.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::lifecycle {

enum class EventKind : std::uint8_t {
  ModelInitialization,
  ModelTraining,
  ModelValidation,
  ModelScoring,
  ModelEvaluation,
  ModelSerialization,
  ModelCleanUp,
  ModelSubmission,  // smart-contract context only
};

/// "MODEL_INITIALIZATION", ... ; "UNKNOWN" for out-of-range values.
std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view name) noexcept;

using TransactionsRef = std::shared_ptr<const std::vector<arm::ItemTransaction>>;

struct LifecycleEvent {
  EventKind kind = EventKind::ModelInitialization;
  TransactionsRef data;  // optional; scoring and evaluation use it when set
};

/// Outcome of one lifecycle step.
struct Status {
  std::optional<Errc> error;
  std::string message;

  static Status ok() { return {}; }
  static Status failure(Errc code, std::string msg) { return {code, std::move(msg)}; }
  [[nodiscard]] bool is_ok() const noexcept { return !error.has_value(); }
};

struct LifecycleConfig {
  arm::MiningParams params;
  /// Fraction of patients held out for validation; 0 means validate on the training data.
  double validation_fraction = 0.0;
  std::uint64_t split_seed = 0;
  model::ArtifactFormat format = model::ArtifactFormat::RulesetText;
  model::MetricSpec metric;
  std::string producer = "ledgerml";
  std::int64_t created_ms = 0;
  /// When set, serialization also writes the artifact under this stem.
  std::optional<std::filesystem::path> output_stem;
  /// Stand-in for hardware requirements checked during initialization.
  std::function<bool()> resource_check;
};

/// Single-owner state threaded through one lifecycle run.
struct Context {
  LifecycleConfig config;
  std::vector<arm::ItemTransaction> data;

  bool initialized = false;
  bool cleaned_up = false;
  std::vector<arm::ItemTransaction> training;
  std::vector<arm::ItemTransaction> validation;
  std::optional<std::vector<arm::AssociationRule>> rules;
  std::optional<double> validation_score;
  std::optional<double> evaluation_score;
  std::vector<arm::RuleScore> scores;
  std::optional<model::ModelArtifact> artifact;
  std::optional<std::filesystem::path> artifact_path;
};

/// True when the patient falls in the held-out validation share.
bool in_validation_split(std::uint64_t patient_id, double fraction, std::uint64_t seed) noexcept;

class LifecycleModel {
 public:
  virtual ~LifecycleModel() = default;
  virtual Status initialize(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status train(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status validate(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status score(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status evaluate(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status serialize(Context& ctx, const LifecycleEvent& event) = 0;
  virtual Status cleanup(Context& ctx, const LifecycleEvent& event) = 0;
};

/// Association-rule model. The trainer is pluggable so the server layer can
/// substitute its parallel miners.
class ArmModel final : public LifecycleModel {
 public:
  using Trainer = std::function<std::vector<arm::AssociationRule>(std::span<const arm::ItemTransaction>,
                                                                  const arm::MiningParams&)>;

  ArmModel();
  explicit ArmModel(Trainer trainer) : trainer_(std::move(trainer)) {}

  Status initialize(Context& ctx, const LifecycleEvent& event) override;
  Status train(Context& ctx, const LifecycleEvent& event) override;
  Status validate(Context& ctx, const LifecycleEvent& event) override;
  Status score(Context& ctx, const LifecycleEvent& event) override;
  Status evaluate(Context& ctx, const LifecycleEvent& event) override;
  Status serialize(Context& ctx, const LifecycleEvent& event) override;
  Status cleanup(Context& ctx, const LifecycleEvent& event) override;

 private:
  Trainer trainer_;
};

/// Routes one event to its operation. Exceptions become error statuses;
/// MODEL_SUBMISSION and out-of-range kinds yield UnknownEvent.
Status dispatch(const LifecycleEvent& event, LifecycleModel& model, Context& ctx);

struct LoopResult {
  Status last;
  std::size_t handled = 0;
  bool stopped_on_unknown = false;
};

/// Feeds events to dispatch in order until exhausted or an unknown event
/// terminates the loop.
LoopResult run_event_loop(std::span<const LifecycleEvent> events, LifecycleModel& model, Context& ctx);

}  // namespace ledgerml::lifecycle
