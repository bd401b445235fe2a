#pragma once

#include "tanglefl/model.hpp"

namespace tanglefl {

enum class PublishMode { kEventTriggered, kReferenceBaseline, kAlwaysPublish };

struct TriggerConfig {
    double threshold = 0.008; // relative parameter change required to publish
    PublishMode mode = PublishMode::kEventTriggered;

    void validate() const;
};

/// Relative parameter change ||w_new - w_base||_2 / ||w_base||_2. When the
/// base norm is zero the value is 0 for equal inputs and +infinity otherwise
/// (the genesis-zero bootstrap), with `degenerate` set so callers can flag it.
struct DeltaResult {
    double value = 0.0;
    bool degenerate = false;
};

DeltaResult delta_detailed(const ParamVector& w_new, const ParamVector& w_base);
double delta(const ParamVector& w_new, const ParamVector& w_base);

/// Event trigger: publish iff delta(w_new, w_avg) >= threshold.
bool should_publish_event(const ParamVector& w_new, const ParamVector& w_avg,
                          const TriggerConfig& cfg);

/// Baseline rule: publish iff the new model strictly beats the reference
/// model's cross-entropy on the client's local test data.
bool should_publish_reference(const ModelSpec& spec, const ParamVector& w_new,
                              const ParamVector& w_ref, const DatasetShard& test_shard);

} // namespace tanglefl
