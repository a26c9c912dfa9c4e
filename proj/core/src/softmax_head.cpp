#include "napavq/model/softmax_head.hpp"

#include "napavq/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace napavq::model {

void SoftmaxHead::add_classes(std::size_t count, int feature_dim, Rng& rng, double init_scale) {
    if (weight.rows() > 0 && weight.cols() != feature_dim)
        throw ContractViolation("head feature dimension mismatch");
    const Eigen::Index old_rows = weight.rows();
    const Eigen::Index rows = old_rows + static_cast<Eigen::Index>(count);
    Mat w(rows, feature_dim);
    Vec b = Vec::Zero(rows);
    if (old_rows > 0) {
        w.topRows(old_rows) = weight;
        b.head(old_rows) = bias;
    }
    std::normal_distribution<double> gauss(0.0, init_scale);
    for (Eigen::Index r = old_rows; r < rows; ++r)
        for (Eigen::Index c = 0; c < feature_dim; ++c) w(r, c) = gauss(rng);
    weight = std::move(w);
    bias = std::move(b);
}

ClassId SoftmaxHead::predict(const Vec& z, std::span<const ClassId> candidates) const {
    if (candidates.empty()) throw ContractViolation("classification needs at least one candidate class");
    ClassId best = candidates.front();
    double best_logit = -std::numeric_limits<double>::infinity();
    for (ClassId id : candidates) {
        if (id < 0 || id >= weight.rows()) throw ContractViolation("unknown head class " + std::to_string(id));
        const double logit = weight.row(id).dot(z) + bias[id];
        if (logit > best_logit || (logit == best_logit && id < best)) {
            best_logit = logit;
            best = id;
        }
    }
    return best;
}

double cce_loss(const SoftmaxHead& head, const Vec& z, ClassId y, Vec& grad_z, HeadGrad& grad,
                double scale) {
    if (y < 0 || y >= head.weight.rows()) throw ContractViolation("label outside the head");
    const Vec logits = head.weight * z + head.bias;
    const double top = logits.maxCoeff();
    const Eigen::ArrayXd e = (logits.array() - top).exp();
    const double log_z = top + std::log(e.sum());
    Vec p = (e / e.sum()).matrix();
    const double loss = log_z - logits[y];
    p[y] -= 1.0;  // dL/dlogits
    grad_z.noalias() += scale * head.weight.transpose() * p;
    if (grad.weight.size() == 0) {
        grad.weight = Mat::Zero(head.weight.rows(), head.weight.cols());
        grad.bias = Vec::Zero(head.bias.size());
    }
    grad.weight.noalias() += scale * p * z.transpose();
    grad.bias.noalias() += scale * p;
    return loss;
}

}  // namespace napavq::model
