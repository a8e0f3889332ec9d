#include <new>

#include "ledgerml/lifecycle.hpp"

namespace ledgerml::lifecycle {

namespace {

constexpr std::string_view kNames[] = {
    "MODEL_INITIALIZATION", "MODEL_TRAINING",      "MODEL_VALIDATION", "MODEL_SCORING",
    "MODEL_EVALUATION",     "MODEL_SERIALIZATION", "MODEL_CLEAN_UP",   "MODEL_SUBMISSION",
};

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Status require_rules(const Context& ctx) {
  if (!ctx.rules) return Status::failure(Errc::NoModel, "no trained model in context");
  return Status::ok();
}

std::span<const arm::ItemTransaction> data_or(const LifecycleEvent& event,
                                              const std::vector<arm::ItemTransaction>& fallback) {
  return event.data ? std::span<const arm::ItemTransaction>(*event.data) : fallback;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
  const auto i = static_cast<std::size_t>(kind);
  return i < std::size(kNames) ? kNames[i] : "UNKNOWN";
}

std::optional<EventKind> parse_event_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < std::size(kNames); ++i) {
    if (kNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

bool in_validation_split(std::uint64_t patient_id, double fraction, std::uint64_t seed) noexcept {
  if (fraction <= 0.0) return false;
  const double u = static_cast<double>(splitmix64(patient_id ^ splitmix64(seed)) >> 11) * 0x1.0p-53;
  return u < fraction;
}

ArmModel::ArmModel()
    : trainer_([](std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params) {
        return arm::mine_rules(txns, params);
      }) {}

Status ArmModel::initialize(Context& ctx, const LifecycleEvent& event) {
  if (ctx.config.resource_check && !ctx.config.resource_check()) {
    return Status::failure(Errc::ResourceCheckFailed, "machine does not meet the model's resource requirements");
  }
  ctx.config.params.validate();
  const auto& source = event.data ? *event.data : ctx.data;
  ctx.training.clear();
  ctx.validation.clear();
  if (ctx.config.validation_fraction <= 0.0) {
    ctx.training = source;
    ctx.validation = source;
  } else {
    for (const auto& t : source) {
      (in_validation_split(t.patient_id, ctx.config.validation_fraction, ctx.config.split_seed) ? ctx.validation
                                                                                              : ctx.training)
          .push_back(t);
    }
  }
  ctx.initialized = true;
  ctx.cleaned_up = false;
  return Status::ok();
}

Status ArmModel::train(Context& ctx, const LifecycleEvent&) {
  if (!ctx.initialized) return Status::failure(Errc::NotInitialized, "training before initialization");
  ctx.rules = trainer_(ctx.training, ctx.config.params);
  return Status::ok();
}

Status ArmModel::validate(Context& ctx, const LifecycleEvent& event) {
  if (auto s = require_rules(ctx); !s.is_ok()) return s;
  ctx.validation_score = model::evaluate_rules(*ctx.rules, data_or(event, ctx.validation), ctx.config.metric);
  return Status::ok();
}

Status ArmModel::score(Context& ctx, const LifecycleEvent& event) {
  if (auto s = require_rules(ctx); !s.is_ok()) return s;
  ctx.scores = arm::score_rules(*ctx.rules, data_or(event, ctx.validation));
  return Status::ok();
}

Status ArmModel::evaluate(Context& ctx, const LifecycleEvent& event) {
  if (auto s = require_rules(ctx); !s.is_ok()) return s;
  ctx.evaluation_score = model::evaluate_rules(*ctx.rules, data_or(event, ctx.validation), ctx.config.metric);
  return Status::ok();
}

Status ArmModel::serialize(Context& ctx, const LifecycleEvent&) {
  if (auto s = require_rules(ctx); !s.is_ok()) return s;
  ctx.artifact = model::serialize_model(*ctx.rules, ctx.config.format, ctx.config.producer, ctx.config.created_ms);
  if (ctx.config.output_stem) ctx.artifact_path = model::write_artifact(*ctx.config.output_stem, *ctx.artifact);
  return Status::ok();
}

Status ArmModel::cleanup(Context& ctx, const LifecycleEvent&) {
  ctx.training.clear();
  ctx.training.shrink_to_fit();
  ctx.validation.clear();
  ctx.validation.shrink_to_fit();
  ctx.scores.clear();
  ctx.initialized = false;
  ctx.cleaned_up = true;
  return Status::ok();
}

Status dispatch(const LifecycleEvent& event, LifecycleModel& model, Context& ctx) {
  try {
    switch (event.kind) {
      case EventKind::ModelInitialization: return model.initialize(ctx, event);
      case EventKind::ModelTraining: return model.train(ctx, event);
      case EventKind::ModelValidation: return model.validate(ctx, event);
      case EventKind::ModelScoring: return model.score(ctx, event);
      case EventKind::ModelEvaluation: return model.evaluate(ctx, event);
      case EventKind::ModelSerialization: return model.serialize(ctx, event);
      case EventKind::ModelCleanUp: return model.cleanup(ctx, event);
      case EventKind::ModelSubmission: break;
    }
    return Status::failure(Errc::UnknownEvent, std::string("event ") + std::string(to_string(event.kind)) +
                                                   " is not handled in the thread context");
  } catch (const Error& e) {
    return Status::failure(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return Status::failure(Errc::OutOfMemory, "allocation failed");
  } catch (const std::exception& e) {
    return Status::failure(Errc::Internal, e.what());
  }
}

LoopResult run_event_loop(std::span<const LifecycleEvent> events, LifecycleModel& model, Context& ctx) {
  LoopResult result;
  for (const auto& event : events) {
    Status s = dispatch(event, model, ctx);
    if (s.error == Errc::UnknownEvent) {
      result.last = std::move(s);
      result.stopped_on_unknown = true;
      break;
    }
    result.last = std::move(s);
    ++result.handled;
  }
  return result;
}

}  // namespace ledgerml::lifecycle
