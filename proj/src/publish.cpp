#include "tanglefl/publish.hpp"

#include <cmath>
#include <limits>

namespace tanglefl {

void TriggerConfig::validate() const {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw ConfigError("trigger: threshold must be finite and >= 0");
    }
}

DeltaResult delta_detailed(const ParamVector& w_new, const ParamVector& w_base) {
    if (w_new.dim() != w_base.dim()) throw ShapeError("delta: dimension mismatch");
    double diff_sq = 0.0;
    double base_sq = 0.0;
    for (std::size_t i = 0; i < w_new.dim(); ++i) {
        const double d = w_new[i] - w_base[i];
        diff_sq += d * d;
        base_sq += w_base[i] * w_base[i];
    }
    if (base_sq == 0.0) {
        if (diff_sq == 0.0) return {0.0, true};
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {std::sqrt(diff_sq) / std::sqrt(base_sq), false};
}

double delta(const ParamVector& w_new, const ParamVector& w_base) {
    return delta_detailed(w_new, w_base).value;
}

bool should_publish_event(const ParamVector& w_new, const ParamVector& w_avg,
                          const TriggerConfig& cfg) {
    return delta(w_new, w_avg) >= cfg.threshold;
}

bool should_publish_reference(const ModelSpec& spec, const ParamVector& w_new,
                              const ParamVector& w_ref, const DatasetShard& test_shard) {
    return loss(spec, w_new, test_shard) < loss(spec, w_ref, test_shard);
}

} // namespace tanglefl
