#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tanglefl/common.hpp"
#include "tanglefl/rng.hpp"

namespace tanglefl {

/// Flat model parameters, the payload unit of the ledger. Arithmetic helpers
/// re-check finiteness so a diverging run fails loudly instead of quietly
/// spreading NaNs through the DAG.
class ParamVector {
  public:
    ParamVector() = default;
    explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }

    /// this += scale * other, with a finiteness check on the result.
    ParamVector& add_scaled(const ParamVector& other, double scale);

    double norm2() const;

    bool operator==(const ParamVector&) const = default;

    /// Throws NumericError if any entry is NaN or infinite.
    void ensure_finite(const char* context) const;

  private:
    std::vector<double> values_;
};

/// Elementwise mean of two equally sized vectors.
ParamVector average(const ParamVector& a, const ParamVector& b);

enum class ModelKind { kSoftmax, kMlp };

/// Shape of the supervised model stored in each ledger payload.
/// Softmax regression: W[K x in] + b[K]. MLP adds one tanh hidden layer.
struct ModelSpec {
    ModelKind kind = ModelKind::kSoftmax;
    std::uint32_t input_dim = 0;
    std::uint32_t hidden_dim = 0; // 0 for softmax
    std::uint32_t num_classes = 0;

    std::size_t param_count() const;
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::uint32_t batch_size = 10;
    std::uint32_t batches = 10;
    std::uint32_t epochs = 1;

    /// Total local SGD steps per update (one step per batch).
    std::uint32_t local_updates() const { return batches * epochs; }
    void validate() const;
};

/// One client's private samples. Features are row-major count x input_dim.
struct DatasetShard {
    std::vector<double> features;
    std::vector<std::uint32_t> labels;
    std::uint32_t input_dim = 0;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(features).subspan(i * input_dim, input_dim);
    }
};

/// Mean cross-entropy over the shard. Nonnegative and finite.
double loss(const ModelSpec& spec, const ParamVector& params, const DatasetShard& shard);

/// Fraction of argmax-correct predictions; ties break to the lowest class.
double accuracy(const ModelSpec& spec, const ParamVector& params, const DatasetShard& shard);

/// Exact analytic gradient of mean cross-entropy over the batch.
ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const DatasetShard& batch);

/// Gradient restricted to the given sample indices (mean over them).
ParamVector gradient_at(const ModelSpec& spec, const ParamVector& params,
                        const DatasetShard& shard, std::span<const std::uint32_t> indices);

/// Runs batches*epochs minibatch SGD steps from `start` and returns the new
/// parameters. Batches are drawn without replacement per epoch (reshuffled
/// each epoch); each batch is processed in ascending sample order so the
/// result does not depend on shuffle order within a batch. If the shard is
/// smaller than one batch, samples are drawn with replacement.
ParamVector local_train(const ModelSpec& spec, const ParamVector& start,
                        const DatasetShard& shard, const TrainConfig& cfg, RngStream& rng);

/// Genesis parameters: all zeros for softmax, uniform +-1/sqrt(fan_in)
/// weights (zero biases) for the MLP.
ParamVector init_params(const ModelSpec& spec, RngStream& rng);

} // namespace tanglefl
