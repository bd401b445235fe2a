#include "tanglefl/energy.hpp"

#include <cmath>

namespace tanglefl {

void CostParams::validate() const {
    const double fields[] = {capacitance,       cpu_freq,      eval_cycles,
                             agg_cycles,        train_cycles_per_sample,
                             confidence_cycles, rating_cycles, avg_children};
    for (double v : fields) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("cost: all cost parameters must be finite and > 0");
        }
    }
    if (walk_depth == 0 || ref_walks == 0) {
        throw ConfigError("cost: walk_depth and ref_walks must be >= 1");
    }
}

double tip_energy(const CostParams& p) {
    return p.capacitance * 2.0 * (p.walk_depth * p.avg_children * p.eval_cycles) *
           (p.cpu_freq * p.cpu_freq);
}

double aggregation_energy(const CostParams& p) {
    return p.capacitance * p.agg_cycles * (p.cpu_freq * p.cpu_freq);
}

double training_energy(const CostParams& p, std::uint32_t batch_size, std::uint32_t batches,
                       std::uint32_t epochs) {
    return p.capacitance *
           (static_cast<double>(batch_size) * batches * epochs * p.train_cycles_per_sample) *
           (p.cpu_freq * p.cpu_freq);
}

double reference_energy(const CostParams& p) {
    return p.capacitance * p.ref_walks *
           (p.walk_depth * (p.avg_children * p.eval_cycles + p.confidence_cycles +
                            p.avg_children * p.rating_cycles)) *
           (p.cpu_freq * p.cpu_freq);
}

double total_update_energy(const CostParams& p, std::uint32_t batch_size, std::uint32_t batches,
                           std::uint32_t epochs, bool include_reference) {
    double total = tip_energy(p) + aggregation_energy(p) +
                   training_energy(p, batch_size, batches, epochs);
    if (include_reference) total += reference_energy(p);
    return total;
}

double tip_time(const CostParams& p) {
    return 2.0 * (p.walk_depth * p.avg_children * p.eval_cycles) / p.cpu_freq;
}

double measured_tip_energy(const CostParams& p, std::uint64_t evaluations) {
    return p.capacitance * static_cast<double>(evaluations) * p.eval_cycles *
           (p.cpu_freq * p.cpu_freq);
}

double measured_reference_energy(const CostParams& p, std::uint64_t evaluations,
                                 std::uint64_t confidence_updates, std::uint64_t rating_calls) {
    return p.capacitance *
           (static_cast<double>(evaluations) * p.eval_cycles +
            static_cast<double>(confidence_updates) * p.confidence_cycles +
            static_cast<double>(rating_calls) * p.rating_cycles) *
           (p.cpu_freq * p.cpu_freq);
}

double measured_tip_time(const CostParams& p, std::uint64_t evaluations) {
    return static_cast<double>(evaluations) * p.eval_cycles / p.cpu_freq;
}

void EnergyLedger::add(const EnergyRow& row) {
    rows_.push_back(row);
    tip_ += row.tip;
    aggregation_ += row.aggregation;
    training_ += row.training;
    reference_ += row.reference;
    total_ += row.total;
    tip_time_ += row.tip_time;
}

} // namespace tanglefl
