#pragma once

#include "napavq/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace napavq::model {

enum class Activation { Identity, Relu, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct Layer {
    Mat weight;  ///< out x in
    Vec bias;    ///< out
    Activation activation = Activation::Identity;

    Eigen::Index in_dim() const { return weight.cols(); }
    Eigen::Index out_dim() const { return weight.rows(); }
};

/// Gradient with the same shapes as a model's layers.
struct ModelGrad {
    std::vector<Mat> weight;
    std::vector<Vec> bias;

    ModelGrad& operator+=(const ModelGrad& other);
    ModelGrad& operator*=(double s);
    double squared_norm() const;
    bool all_finite() const;
};

class FeatureModel;

/// Activations recorded by a forward pass, consumed by backward().
struct ForwardCache {
    std::vector<Vec> inputs;  ///< input to each layer
    std::vector<Vec> pre;     ///< pre-activation of each layer
    Vec output;
    std::uint64_t version = 0;
};

/// Fully-connected feature extractor. Every parameter mutation bumps an
/// internal version so stale caches are detected in backward().
class FeatureModel {
public:
    FeatureModel() = default;
    explicit FeatureModel(std::vector<Layer> layers);

    /// He-initialised MLP: `hidden` layers with `hidden_activation`, then a
    /// linear output layer of width `output_dim`. Biases start at zero.
    static FeatureModel mlp(int input_dim, std::span<const int> hidden, int output_dim, Rng& rng,
                            Activation hidden_activation = Activation::Relu);

    int input_dim() const;
    int output_dim() const;
    std::size_t num_layers() const noexcept { return layers_.size(); }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::uint64_t version() const noexcept { return version_; }
    std::size_t parameter_count() const;

    /// Mutable access; bumps the version.
    Layer& mutable_layer(std::size_t i);

    Vec forward(const Vec& x) const;
    ForwardCache forward_cached(const Vec& x) const;

    /// Reverse-mode pass. Adds parameter gradients into `grads` (shaped on
    /// first use) and returns dL/dx.
    Vec backward(const Vec& upstream, const ForwardCache& cache, ModelGrad& grads) const;

    ModelGrad zero_grad() const;

    /// theta -= lr * grad
    void apply(const ModelGrad& grad, double lr);

private:
    void check_input(const Vec& x) const;

    std::vector<Layer> layers_;
    std::uint64_t version_ = 1;
};

struct KdResult {
    double loss = 0.0;
    ModelGrad grad;  ///< w.r.t. the current model only
};

/// Mean over the batch of d(F_prev(x), F_cur(x)).
KdResult loss_kd(std::span<const Vec> x_batch, const FeatureModel& previous,
                 const FeatureModel& current);

/// Per-sample distillation term on precomputed features; returns the
/// distance and adds its gradient w.r.t. `current` into grad_current.
double kd_term(const Vec& previous, const Vec& current, Vec& grad_current, double scale = 1.0);

}  // namespace napavq::model
