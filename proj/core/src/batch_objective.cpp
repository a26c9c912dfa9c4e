#include "napavq/model/batch_objective.hpp"

#include "napavq/error.hpp"
#include "napavq/vq/losses.hpp"

namespace napavq::model {

namespace {

void check_batch(const FeatureModel& model, const BatchInputs& batch, const ObjectiveSettings& s) {
    if (batch.x.size() != batch.y.size()) throw ContractViolation("batch inputs and labels differ in length");
    if (batch.x.empty()) throw ContractViolation("empty mini-batch");
    if (s.task == 0 && (batch.previous || (batch.prototypes && !batch.prototypes->empty())))
        throw ContractViolation("replay inputs supplied at task 0");
    if (s.task > 0 && s.kd && !batch.previous)
        throw ContractViolation("distillation needs the previous model");
    if (batch.previous && (batch.previous->input_dim() != model.input_dim() ||
                           batch.previous->output_dim() != model.output_dim()))
        throw ContractViolation("previous model has a different shape");
}

void finish(BatchObjective& out, const ObjectiveSettings& s, double hat_dce, double hat_na,
            double kd) {
    if (s.task > 0) {
        out.terms.hat_dce = hat_dce;
        out.terms.hat_na = hat_na;
        out.terms.kd = kd;
    }
    out.total = total_loss(out.terms, s.weights, s.task);
}

}  // namespace

BatchObjective quantizer_objective(const FeatureModel& model, const vq::CodingVectorSet& cvs,
                                   const vq::TopologyGraph& graph, const BatchInputs& batch,
                                   const ObjectiveSettings& s) {
    check_batch(model, batch, s);
    const double inv_b = 1.0 / static_cast<double>(batch.x.size());
    const bool use_kd = s.task > 0 && s.kd;

    BatchObjective out;
    out.model_grad = model.zero_grad();
    out.cv_grads = Mat::Zero(static_cast<Eigen::Index>(cvs.size()), cvs.dim());
    double kd = 0.0;

    for (std::size_t i = 0; i < batch.x.size(); ++i) {
        const ForwardCache cache = model.forward_cached(batch.x[i]);
        const Vec& z = cache.output;
        Vec grad_z = Vec::Zero(z.size());

        const vq::LossGrad dce = vq::loss_dce(z, batch.y[i], cvs, s.tau);
        out.terms.dce += inv_b * dce.loss;
        grad_z.noalias() += inv_b * dce.grad_z;
        dce.accumulate_cvs(out.cv_grads, inv_b);

        if (s.na) {
            const vq::LossGrad na = vq::loss_na(z, batch.y[i], cvs, graph, s.beta);
            out.terms.na += inv_b * na.loss;
            grad_z.noalias() += inv_b * na.grad_z;
            na.accumulate_cvs(out.cv_grads, inv_b);
        }
        if (use_kd) {
            const Vec teacher = batch.previous->forward(batch.x[i]);
            kd += inv_b * kd_term(teacher, z, grad_z, s.weights.lambda2 * inv_b);
        }
        model.backward(grad_z, cache, out.model_grad);
    }

    double hat_dce = 0.0;
    double hat_na = 0.0;
    if (s.task > 0 && batch.prototypes && !batch.prototypes->empty()) {
        const vq::LossGrad hd = proto::loss_hat_dce(*batch.prototypes, cvs, s.tau);
        hat_dce = inv_b * hd.loss;
        hd.accumulate_cvs(out.cv_grads, s.weights.lambda1 * inv_b);
        if (s.na) {
            const vq::LossGrad hn = proto::loss_hat_na(*batch.prototypes, cvs, graph, s.beta);
            hat_na = inv_b * hn.loss;
            hn.accumulate_cvs(out.cv_grads, inv_b);
        }
    }
    finish(out, s, hat_dce, hat_na, kd);
    return out;
}

BatchObjective softmax_objective(const FeatureModel& model, const SoftmaxHead& head,
                                 const BatchInputs& batch, const ObjectiveSettings& s) {
    check_batch(model, batch, s);
    const double inv_b = 1.0 / static_cast<double>(batch.x.size());
    const bool use_kd = s.task > 0 && s.kd;

    BatchObjective out;
    out.model_grad = model.zero_grad();
    out.head_grad = HeadGrad{Mat::Zero(head.weight.rows(), head.weight.cols()),
                             Vec::Zero(head.bias.size())};
    double kd = 0.0;
    for (std::size_t i = 0; i < batch.x.size(); ++i) {
        const ForwardCache cache = model.forward_cached(batch.x[i]);
        Vec grad_z = Vec::Zero(cache.output.size());
        out.terms.dce += inv_b * cce_loss(head, cache.output, batch.y[i], grad_z, *out.head_grad, inv_b);
        if (use_kd) {
            const Vec teacher = batch.previous->forward(batch.x[i]);
            kd += inv_b * kd_term(teacher, cache.output, grad_z, s.weights.lambda2 * inv_b);
        }
        model.backward(grad_z, cache, out.model_grad);
    }
    finish(out, s, 0.0, 0.0, kd);
    return out;
}

}  // namespace napavq::model
