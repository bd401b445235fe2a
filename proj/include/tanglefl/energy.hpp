#pragma once

#include <cstdint>
#include <vector>

#include "tanglefl/common.hpp"

namespace tanglefl {

/// CPU/energy cost symbols for one client. Dimensionless unit-scale values:
/// every claim the simulator checks is a ratio, so absolute hardware numbers
/// would add nothing.
struct CostParams {
    double capacitance = 0.01;            // effective capacitance coefficient
    double cpu_freq = 1.0;                // cycles per unit time
    double eval_cycles = 10.0;            // cycles per model accuracy test
    double agg_cycles = 5.0;              // cycles per aggregation
    double train_cycles_per_sample = 1.0; // cycles per trained sample
    double confidence_cycles = 2.0;       // cycles per confidence update
    double rating_cycles = 2.0;           // cycles per rating computation
    std::uint32_t walk_depth = 15;        // tied to WalkConfig::start_depth
    double avg_children = 2.0;            // expected branching along a walk
    std::uint32_t ref_walks = 5;          // tied to WalkConfig::ref_walks

    void validate() const;
};

/// Energy of the two tip-selection walks: C * 2 * d*l*f_w * f^2.
double tip_energy(const CostParams& p);

/// Energy of one model aggregation: C * f_a * f^2.
double aggregation_energy(const CostParams& p);

/// Energy of local training: C * batch_size*batches*epochs*f_t * f^2.
double training_energy(const CostParams& p, std::uint32_t batch_size, std::uint32_t batches,
                       std::uint32_t epochs);

/// Energy of the reference-model search: C * r * d*(l*f_w + f_c + l*f_r) * f^2.
double reference_energy(const CostParams& p);

/// Sum of the four per-update terms; the reference term is dropped on the
/// event-triggered path.
double total_update_energy(const CostParams& p, std::uint32_t batch_size, std::uint32_t batches,
                           std::uint32_t epochs, bool include_reference);

/// Wall-time of the two tip-selection walks: 2 * d*l*f_w / f.
double tip_time(const CostParams& p);

/// Measured-accounting variants: the d*l products above are expectations;
/// these charge the work actually counted during the walks instead.
double measured_tip_energy(const CostParams& p, std::uint64_t evaluations);
double measured_reference_energy(const CostParams& p, std::uint64_t evaluations,
                                 std::uint64_t confidence_updates, std::uint64_t rating_calls);
double measured_tip_time(const CostParams& p, std::uint64_t evaluations);

struct EnergyRow {
    std::uint32_t round = 0;
    ClientId client = 0;
    double tip = 0.0;
    double aggregation = 0.0;
    double training = 0.0;
    double reference = 0.0;
    double total = 0.0;
    double tip_time = 0.0;
};

/// Per-run accumulator of per-round, per-client energy rows. Component
/// totals are maintained incrementally and always equal the row sums.
class EnergyLedger {
  public:
    void add(const EnergyRow& row);

    const std::vector<EnergyRow>& rows() const { return rows_; }
    double total() const { return total_; }
    double total_tip() const { return tip_; }
    double total_aggregation() const { return aggregation_; }
    double total_training() const { return training_; }
    double total_reference() const { return reference_; }
    double total_tip_time() const { return tip_time_; }

  private:
    std::vector<EnergyRow> rows_;
    double total_ = 0.0;
    double tip_ = 0.0;
    double aggregation_ = 0.0;
    double training_ = 0.0;
    double reference_ = 0.0;
    double tip_time_ = 0.0;
};

} // namespace tanglefl
