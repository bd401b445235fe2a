#include "tanglefl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tanglefl {

ParamVector& ParamVector::add_scaled(const ParamVector& other, double scale) {
    if (other.dim() != dim()) throw ShapeError("add_scaled: dimension mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
    ensure_finite("add_scaled");
    return *this;
}

double ParamVector::norm2() const {
    double sum = 0.0;
    for (double v : values_) sum += v * v;
    return std::sqrt(sum);
}

void ParamVector::ensure_finite(const char* context) const {
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite parameter after ") + context);
        }
    }
}

ParamVector average(const ParamVector& a, const ParamVector& b) {
    if (a.dim() != b.dim()) throw ShapeError("average: dimension mismatch");
    ParamVector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = 0.5 * (a[i] + b[i]);
    out.ensure_finite("average");
    return out;
}

std::size_t ModelSpec::param_count() const {
    const std::size_t in = input_dim;
    const std::size_t h = hidden_dim;
    const std::size_t k = num_classes;
    if (kind == ModelKind::kSoftmax) return k * (in + 1);
    return h * (in + 1) + k * (h + 1);
}

void ModelSpec::validate() const {
    if (input_dim == 0 || num_classes < 2) {
        throw ConfigError("model: input_dim must be positive and num_classes >= 2");
    }
    if (kind == ModelKind::kSoftmax && hidden_dim != 0) {
        throw ConfigError("model: softmax takes no hidden layer");
    }
    if (kind == ModelKind::kMlp && hidden_dim == 0) {
        throw ConfigError("model: mlp needs hidden_dim > 0");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("train: learning_rate must be positive and finite");
    }
    if (batch_size == 0 || batches == 0 || epochs == 0) {
        throw ConfigError("train: batch_size, batches and epochs must be positive");
    }
}

namespace {

void check_shapes(const ModelSpec& spec, const ParamVector& params, const DatasetShard& shard) {
    if (params.dim() != spec.param_count()) {
        throw ShapeError("parameter vector does not match model spec");
    }
    if (shard.input_dim != spec.input_dim) {
        throw ShapeError("shard input_dim does not match model spec");
    }
    if (shard.features.size() != shard.size() * shard.input_dim) {
        throw ShapeError("shard feature matrix is not count x input_dim");
    }
    for (std::uint32_t y : shard.labels) {
        if (y >= spec.num_classes) throw ShapeError("shard label out of range");
    }
}

// Writes the K class logits for one sample; returns the hidden activations
// for the MLP (needed by backprop), empty for softmax.
std::vector<double> logits(const ModelSpec& spec, const ParamVector& w,
                           std::span<const double> x, std::vector<double>& z) {
    const std::size_t in = spec.input_dim;
    const std::size_t k = spec.num_classes;
    z.assign(k, 0.0);
    if (spec.kind == ModelKind::kSoftmax) {
        // layout: W[K][in], b[K]
        for (std::size_t c = 0; c < k; ++c) {
            double acc = w[k * in + c];
            const std::size_t row = c * in;
            for (std::size_t j = 0; j < in; ++j) acc += w[row + j] * x[j];
            z[c] = acc;
        }
        return {};
    }
    // layout: W1[h][in], b1[h], W2[K][h], b2[K]
    const std::size_t h = spec.hidden_dim;
    const std::size_t off_b1 = h * in;
    const std::size_t off_w2 = off_b1 + h;
    const std::size_t off_b2 = off_w2 + k * h;
    std::vector<double> a1(h);
    for (std::size_t u = 0; u < h; ++u) {
        double acc = w[off_b1 + u];
        const std::size_t row = u * in;
        for (std::size_t j = 0; j < in; ++j) acc += w[row + j] * x[j];
        a1[u] = std::tanh(acc);
    }
    for (std::size_t c = 0; c < k; ++c) {
        double acc = w[off_b2 + c];
        const std::size_t row = off_w2 + c * h;
        for (std::size_t u = 0; u < h; ++u) acc += w[row + u] * a1[u];
        z[c] = acc;
    }
    return a1;
}

// Stable softmax probabilities in place of the logits; returns log(sum exp)
// shifted by the max logit, i.e. the log-partition minus max.
double softmax_inplace(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return std::log(sum);
}

} // namespace

double loss(const ModelSpec& spec, const ParamVector& params, const DatasetShard& shard) {
    check_shapes(spec, params, shard);
    if (shard.size() == 0) throw ShapeError("loss: empty shard");
    std::vector<double> z;
    double total = 0.0;
    for (std::size_t i = 0; i < shard.size(); ++i) {
        logits(spec, params, shard.row(i), z);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - zmax);
        total += zmax + std::log(sum) - z[shard.labels[i]];
    }
    const double mean = total / static_cast<double>(shard.size());
    if (!std::isfinite(mean)) throw NumericError("loss produced a non-finite value");
    // Guard against tiny negative round-off on saturated models.
    return std::max(mean, 0.0);
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const DatasetShard& shard) {
    check_shapes(spec, params, shard);
    if (shard.size() == 0) throw ShapeError("accuracy: empty shard");
    std::vector<double> z;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < shard.size(); ++i) {
        logits(spec, params, shard.row(i), z);
        std::size_t best = 0;
        for (std::size_t c = 1; c < z.size(); ++c) {
            if (z[c] > z[best]) best = c; // strict: ties keep the lowest class
        }
        if (best == shard.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(shard.size());
}

ParamVector gradient_at(const ModelSpec& spec, const ParamVector& params,
                        const DatasetShard& shard, std::span<const std::uint32_t> indices) {
    check_shapes(spec, params, shard);
    if (indices.empty()) throw ShapeError("gradient: empty batch");
    const std::size_t in = spec.input_dim;
    const std::size_t k = spec.num_classes;
    ParamVector grad(params.dim());
    std::vector<double> z;
    const double inv_n = 1.0 / static_cast<double>(indices.size());

    if (spec.kind == ModelKind::kSoftmax) {
        for (std::uint32_t i : indices) {
            const auto x = shard.row(i);
            logits(spec, params, x, z);
            softmax_inplace(z);
            z[shard.labels[i]] -= 1.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = z[c] * inv_n;
                const std::size_t row = c * in;
                for (std::size_t j = 0; j < in; ++j) grad[row + j] += d * x[j];
                grad[k * in + c] += d;
            }
        }
    } else {
        const std::size_t h = spec.hidden_dim;
        const std::size_t off_b1 = h * in;
        const std::size_t off_w2 = off_b1 + h;
        const std::size_t off_b2 = off_w2 + k * h;
        for (std::uint32_t i : indices) {
            const auto x = shard.row(i);
            const std::vector<double> a1 = logits(spec, params, x, z);
            softmax_inplace(z);
            z[shard.labels[i]] -= 1.0; // dL/dz2
            std::vector<double> da1(h, 0.0);
            for (std::size_t c = 0; c < k; ++c) {
                const double d = z[c] * inv_n;
                const std::size_t row = off_w2 + c * h;
                for (std::size_t u = 0; u < h; ++u) {
                    grad[row + u] += d * a1[u];
                    da1[u] += z[c] * params[row + u];
                }
                grad[off_b2 + c] += d;
            }
            for (std::size_t u = 0; u < h; ++u) {
                const double d = da1[u] * (1.0 - a1[u] * a1[u]) * inv_n;
                const std::size_t row = u * in;
                for (std::size_t j = 0; j < in; ++j) grad[row + j] += d * x[j];
                grad[off_b1 + u] += d;
            }
        }
    }
    grad.ensure_finite("gradient");
    return grad;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const DatasetShard& batch) {
    std::vector<std::uint32_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0u);
    return gradient_at(spec, params, batch, all);
}

ParamVector local_train(const ModelSpec& spec, const ParamVector& start,
                        const DatasetShard& shard, const TrainConfig& cfg, RngStream& rng) {
    cfg.validate();
    check_shapes(spec, start, shard);
    if (shard.size() == 0) throw ShapeError("local_train: empty shard");

    const std::size_t n = shard.size();
    const bool with_replacement = n < cfg.batch_size;
    ParamVector w = start;

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<std::uint32_t> batch(cfg.batch_size);

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        std::size_t pos = 0;
        for (std::uint32_t b = 0; b < cfg.batches; ++b) {
            if (with_replacement) {
                for (auto& idx : batch) {
                    idx = static_cast<std::uint32_t>(rng.uniform_below(n));
                }
            } else {
                if (pos + cfg.batch_size > n) { // pool exhausted mid-epoch
                    rng.shuffle(order);
                    pos = 0;
                }
                std::copy_n(order.begin() + static_cast<std::ptrdiff_t>(pos),
                            cfg.batch_size, batch.begin());
                pos += cfg.batch_size;
            }
            // Canonical order inside the batch: the update is independent of
            // the shuffle permutation, and a full batch reproduces
            // gradient(shard) bit for bit.
            std::sort(batch.begin(), batch.end());
            const ParamVector g = gradient_at(spec, w, shard, batch);
            w.add_scaled(g, -cfg.learning_rate);
        }
    }
    return w;
}

ParamVector init_params(const ModelSpec& spec, RngStream& rng) {
    spec.validate();
    ParamVector w(spec.param_count());
    if (spec.kind == ModelKind::kSoftmax) return w; // all zeros; loss is ln(K)

    const std::size_t in = spec.input_dim;
    const std::size_t h = spec.hidden_dim;
    const std::size_t k = spec.num_classes;
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < h * in; ++i) w[i] = (2.0 * rng.uniform01() - 1.0) * bound1;
    const std::size_t off_w2 = h * in + h;
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (std::size_t i = 0; i < k * h; ++i) w[off_w2 + i] = (2.0 * rng.uniform01() - 1.0) * bound2;
    return w;
}

} // namespace tanglefl
