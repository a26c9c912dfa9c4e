#include "napavq/model/objective.hpp"

#include "napavq/error.hpp"

#include <cmath>
#include <string>

namespace napavq::model {

void LossWeights::validate() const {
    if (!(std::isfinite(lambda1) && lambda1 >= 0.0)) throw ConfigError("lambda1", "must be finite and >= 0");
    if (!(std::isfinite(lambda2) && lambda2 >= 0.0)) throw ConfigError("lambda2", "must be finite and >= 0");
}

double total_loss(const LossTerms& terms, const LossWeights& weights, int task) {
    if (task < 0) throw ContractViolation("task index must be non-negative");
    const bool has_replay = terms.hat_dce || terms.hat_na || terms.kd;
    if (task == 0) {
        if (has_replay)
            throw ContractViolation("prototype and distillation terms are undefined at task 0");
        return terms.dce + terms.na;
    }
    if (!(terms.hat_dce && terms.hat_na && terms.kd))
        throw ContractViolation("incremental tasks need the prototype and distillation terms");
    return terms.dce + weights.lambda1 * *terms.hat_dce + terms.na + *terms.hat_na +
           weights.lambda2 * *terms.kd;
}

void sgd_step(FeatureModel& model, vq::CodingVectorSet& cvs, const ModelGrad& model_grad,
              const Mat& cv_grads, const LearningRates& lr, double clip_norm) {
    if (cv_grads.rows() != static_cast<Eigen::Index>(cvs.size()) || cv_grads.cols() != cvs.dim())
        throw ContractViolation("coding vector gradient has the wrong shape");
    if (!model_grad.all_finite() || !cv_grads.allFinite())
        throw NumericFailure("non-finite gradient; step aborted");

    double scale = 1.0;
    if (clip_norm > 0.0) {
        double sq = model_grad.squared_norm();
        for (Eigen::Index i = 0; i < cv_grads.rows(); ++i)
            if (!cvs.is_frozen(static_cast<ClassId>(i))) sq += cv_grads.row(i).squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > clip_norm) scale = clip_norm / norm;
    }
    if (!model_grad.weight.empty()) model.apply(model_grad, lr.theta * scale);
    for (Eigen::Index i = 0; i < cv_grads.rows(); ++i) {
        const auto id = static_cast<ClassId>(i);
        if (cvs.is_frozen(id)) continue;
        cvs.add_scaled(id, cv_grads.row(i).transpose(), -lr.phi * scale);
    }
}

}  // namespace napavq::model
