#include "napavq/model/feature_model.hpp"

#include "napavq/error.hpp"

#include <cmath>
#include <string>

namespace napavq::model {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity" || name == "linear") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("activation", "unknown activation '" + name + "'");
}

ModelGrad& ModelGrad::operator+=(const ModelGrad& other) {
    if (weight.empty()) return *this = other;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        weight[i] += other.weight[i];
        bias[i] += other.bias[i];
    }
    return *this;
}

ModelGrad& ModelGrad::operator*=(double s) {
    for (auto& w : weight) w *= s;
    for (auto& b : bias) b *= s;
    return *this;
}

double ModelGrad::squared_norm() const {
    double total = 0.0;
    for (const auto& w : weight) total += w.squaredNorm();
    for (const auto& b : bias) total += b.squaredNorm();
    return total;
}

bool ModelGrad::all_finite() const {
    for (const auto& w : weight)
        if (!w.allFinite()) return false;
    for (const auto& b : bias)
        if (!b.allFinite()) return false;
    return true;
}

namespace {

Vec activate(const Vec& pre, Activation a) {
    switch (a) {
        case Activation::Identity: return pre;
        case Activation::Relu: return pre.cwiseMax(0.0);
        case Activation::Tanh: return pre.array().tanh().matrix();
    }
    return pre;
}

// dL/dpre given dL/dout and the pre-activation
Vec activation_backward(const Vec& upstream, const Vec& pre, Activation a) {
    switch (a) {
        case Activation::Identity: return upstream;
        case Activation::Relu: return (pre.array() > 0.0).select(upstream, 0.0);
        case Activation::Tanh: {
            const Eigen::ArrayXd t = pre.array().tanh();
            return (upstream.array() * (1.0 - t * t)).matrix();
        }
    }
    return upstream;
}

}  // namespace

FeatureModel::FeatureModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ContractViolation("feature model needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        if (l.bias.size() != l.weight.rows())
            throw ContractViolation("layer " + std::to_string(i) + ": bias/weight shape mismatch");
        if (i > 0 && l.in_dim() != layers_[i - 1].out_dim())
            throw ContractViolation("layer " + std::to_string(i) + ": input width mismatch");
    }
}

FeatureModel FeatureModel::mlp(int input_dim, std::span<const int> hidden, int output_dim, Rng& rng,
                               Activation hidden_activation) {
    if (input_dim <= 0 || output_dim <= 0) throw ConfigError("backbone", "layer widths must be positive");
    std::vector<Layer> layers;
    int fan_in = input_dim;
    auto make = [&](int out, Activation act) {
        if (out <= 0) throw ConfigError("hidden", "layer widths must be positive");
        std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / fan_in));
        Layer l;
        l.weight.resize(out, fan_in);
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = gauss(rng);
        l.bias = Vec::Zero(out);
        l.activation = act;
        layers.push_back(std::move(l));
        fan_in = out;
    };
    for (int width : hidden) make(width, hidden_activation);
    make(output_dim, Activation::Identity);
    return FeatureModel(std::move(layers));
}

int FeatureModel::input_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.front().in_dim());
}

int FeatureModel::output_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().out_dim());
}

std::size_t FeatureModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

Layer& FeatureModel::mutable_layer(std::size_t i) {
    ++version_;
    return layers_.at(i);
}

void FeatureModel::check_input(const Vec& x) const {
    if (layers_.empty()) throw ContractViolation("feature model has no layers");
    if (x.size() != input_dim()) {
        throw ContractViolation("input dimension " + std::to_string(x.size()) +
                                " does not match model input dimension " +
                                std::to_string(input_dim()));
    }
}

Vec FeatureModel::forward(const Vec& x) const {
    check_input(x);
    Vec h = x;
    for (const auto& l : layers_) {
        Vec pre = l.weight * h + l.bias;
        h = activate(pre, l.activation);
    }
    return h;
}

ForwardCache FeatureModel::forward_cached(const Vec& x) const {
    check_input(x);
    ForwardCache cache;
    cache.version = version_;
    cache.inputs.reserve(layers_.size());
    cache.pre.reserve(layers_.size());
    Vec h = x;
    for (const auto& l : layers_) {
        cache.inputs.push_back(h);
        Vec pre = l.weight * h + l.bias;
        h = activate(pre, l.activation);
        cache.pre.push_back(std::move(pre));
    }
    cache.output = std::move(h);
    return cache;
}

ModelGrad FeatureModel::zero_grad() const {
    ModelGrad g;
    for (const auto& l : layers_) {
        g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vec::Zero(l.bias.size()));
    }
    return g;
}

Vec FeatureModel::backward(const Vec& upstream, const ForwardCache& cache, ModelGrad& grads) const {
    if (cache.version != version_ || cache.pre.size() != layers_.size())
        throw ContractViolation("stale forward cache: parameters changed since the forward pass");
    if (upstream.size() != output_dim()) throw ContractViolation("upstream gradient has wrong size");
    if (grads.weight.empty()) grads = zero_grad();

    Vec delta = upstream;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const auto& l = layers_[i];
        const Vec d_pre = activation_backward(delta, cache.pre[i], l.activation);
        grads.weight[i].noalias() += d_pre * cache.inputs[i].transpose();
        grads.bias[i] += d_pre;
        delta = l.weight.transpose() * d_pre;
    }
    return delta;
}

void FeatureModel::apply(const ModelGrad& grad, double lr) {
    if (grad.weight.size() != layers_.size()) throw ContractViolation("gradient shape mismatch");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (grad.weight[i].rows() != layers_[i].weight.rows() ||
            grad.weight[i].cols() != layers_[i].weight.cols() ||
            grad.bias[i].size() != layers_[i].bias.size())
            throw ContractViolation("gradient shape mismatch at layer " + std::to_string(i));
    }
    ++version_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].weight.noalias() -= lr * grad.weight[i];
        layers_[i].bias.noalias() -= lr * grad.bias[i];
    }
}

double kd_term(const Vec& previous, const Vec& current, Vec& grad_current, double scale) {
    const double d = smoothed_distance(current, previous);
    grad_current.noalias() += (scale / d) * (current - previous);
    return d;
}

KdResult loss_kd(std::span<const Vec> x_batch, const FeatureModel& previous,
                 const FeatureModel& current) {
    if (previous.input_dim() != current.input_dim() || previous.output_dim() != current.output_dim())
        throw ContractViolation("distillation models have different shapes");
    KdResult out;
    out.grad = current.zero_grad();
    if (x_batch.empty()) return out;
    const double scale = 1.0 / static_cast<double>(x_batch.size());
    for (const Vec& x : x_batch) {
        const Vec z_prev = previous.forward(x);
        const ForwardCache cache = current.forward_cached(x);
        Vec g = Vec::Zero(cache.output.size());
        out.loss += scale * kd_term(z_prev, cache.output, g, scale);
        current.backward(g, cache, out.grad);
    }
    return out;
}

}  // namespace napavq::model
