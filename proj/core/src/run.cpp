#include "napavq/harness/run.hpp"

#include "napavq/error.hpp"
#include "napavq/harness/classify.hpp"
#include "napavq/harness/synthetic.hpp"
#include "napavq/io/tables.hpp"
#include "napavq/model/batch_objective.hpp"
#include "napavq/model/rotation.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <numeric>
#include <thread>

namespace napavq::harness {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::BaselineCceKd: return "baseline_cce_kd";
        case Variant::DceKd: return "dce_kd";
        case Variant::NavqKd: return "navq_kd";
        case Variant::NavqGaussianPa: return "navq_gaussian_pa";
        case Variant::FullNapavq: return "full_napavq";
        case Variant::Finetune: return "finetune";
    }
    return "full_napavq";
}

Variant variant_from_string(std::string_view name) {
    for (Variant v : kAllVariants)
        if (to_string(v) == name) return v;
    throw ConfigError("variant", "unknown variant '" + std::string(name) + "'");
}

VariantFlags VariantFlags::of(Variant v) {
    VariantFlags f;
    switch (v) {
        case Variant::BaselineCceKd:
            f.head = Head::Softmax;
            f.na = false;
            f.augment = Augment::None;
            break;
        case Variant::DceKd:
            f.na = false;
            f.augment = Augment::None;
            break;
        case Variant::NavqKd: f.augment = Augment::None; break;
        case Variant::NavqGaussianPa: f.augment = Augment::Gaussian; break;
        case Variant::FullNapavq: break;
        case Variant::Finetune:
            f.na = false;
            f.kd = false;
            f.augment = Augment::None;
            break;
    }
    return f;
}

bool RunResult::metrics_consistent() const {
    try {
        if (pooled.size() != accuracy.num_tasks() || forgetting.size() != accuracy.num_tasks())
            return false;
        for (std::size_t t = 0; t < accuracy.num_tasks(); ++t)
            if (pooled[t] != pooled_accuracy(accuracy, t)) return false;
        return average_accuracy == harness::average_accuracy(accuracy) &&
               average_forgetting == harness::average_forgetting(accuracy) &&
               forgetting == forgetting_curve(accuracy);
    } catch (const Error&) {
        return false;
    }
}

int effective_connectivity(int K, std::size_t available) {
    if (available < 2) return 0;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(K), available));
}

Stream make_stream(const io::RunConfig& config) {
    if (config.dataset.kind == "synthetic") {
        harness::SyntheticSpec spec = config.dataset.synthetic;
        spec.tasks = config.tasks;
        spec.first_task_classes = config.first_task_classes;
        // The data draw gets its own stream so that it does not shift when
        // training consumes more or fewer random numbers.
        return generate_synthetic_stream(spec, config.seed ^ 0x9e3779b97f4a7c15ULL);
    }
    if (config.dataset.kind != "table") throw ConfigError("dataset.kind", "must be \"synthetic\" or \"table\"");

    const io::FeatureTable train_table = io::load_feature_table(config.dataset.train_table);
    Stream stream;
    if (!config.dataset.test_table.empty()) {
        stream.train = io::dataset_from_table(train_table);
        io::FeatureTable test_table = io::load_feature_table(config.dataset.test_table);
        // Relabel the test rows with the training mapping.
        std::map<ClassId, long long> test_inverse;
        for (const auto& [orig, id] : test_table.label_mapping) test_inverse[id] = orig;
        for (auto& label : test_table.labels) {
            const long long orig = test_inverse.at(label);
            auto it = train_table.label_mapping.find(orig);
            if (it == train_table.label_mapping.end())
                throw ConfigError("dataset.test_table", "label " + std::to_string(orig) + " not present in the training table");
            label = it->second;
        }
        if (test_table.dims() != train_table.dims())
            throw ConfigError("dataset.test_table", "column count differs from the training table");
        stream.test = io::dataset_from_table(test_table);
    } else {
        const Dataset all = io::dataset_from_table(train_table);
        Rng split_rng(config.seed ^ 0x51ed270b27a2f3d1ULL);
        const int classes = static_cast<int>(train_table.label_mapping.size());
        for (ClassId c = 0; c < classes; ++c) {
            const ClassId wanted[] = {c};
            std::vector<std::size_t> idx = all.indices_of(wanted);
            std::shuffle(idx.begin(), idx.end(), split_rng);
            auto n_test = static_cast<std::size_t>(std::floor(config.dataset.test_fraction * idx.size()));
            if (idx.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
            std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
            std::sort(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                Dataset& dst = k < n_test ? stream.test : stream.train;
                dst.x.push_back(all.x[idx[k]]);
                dst.y.push_back(all.y[idx[k]]);
            }
        }
    }
    const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(train_table.dims()))));
    if (config.rotation && side * side == static_cast<int>(train_table.dims())) {
        stream.train.grid_size = side;
        stream.test.grid_size = side;
    }
    stream.num_classes = static_cast<int>(train_table.label_mapping.size());
    stream.schedule = TaskSchedule::partition(stream.num_classes, config.tasks, config.first_task_classes);
    return stream;
}

std::vector<Vec> extract_features(const model::FeatureModel& model, const Dataset& data) {
    std::vector<Vec> out;
    out.reserve(data.size());
    for (const Vec& x : data.x) out.push_back(model.forward(x));
    return out;
}

std::vector<int> predict(const TrainedState& state, const Dataset& data,
                         std::span<const ClassId> candidates, bool parallel) {
    std::vector<ClassId> ids(candidates.begin(), candidates.end());
    if (state.rotation)
        for (ClassId& id : ids) id = model::pseudo_label(id, 0);

    std::vector<int> out(data.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vec z = state.model.forward(data.x[i]);
            const ClassId p = state.head ? state.head->predict(z, ids)
                                         : classify_feature(z, state.cvs, ids);
            out[i] = state.rotation ? model::original_label(p) : p;
        }
    };
    const std::size_t threads = parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : 1;
    if (threads <= 1 || data.size() < 256) {
        work(0, data.size());
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (data.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < data.size(); begin += chunk)
        pool.emplace_back(work, begin, std::min(data.size(), begin + chunk));
    pool.clear();
    return out;
}

namespace {

struct TaskData {
    std::vector<Vec> x;
    std::vector<ClassId> y;  ///< CV ids (pseudo ids under rotation)
};

TaskData task_training_data(const Dataset& train, std::span<const ClassId> classes, bool rotation,
                            int num_classes) {
    TaskData out;
    for (std::size_t i : train.indices_of(classes)) {
        if (!rotation) {
            out.x.push_back(train.x[i]);
            out.y.push_back(train.y[i]);
            continue;
        }
        model::GridSample g;
        g.height = g.width = train.grid_size;
        g.pixels = to_std(train.x[i]);
        g.label = train.y[i];
        const model::GridSample one[] = {g};
        for (auto& r : model::rotate_augment(one, num_classes)) {
            out.x.push_back(r.flatten());
            out.y.push_back(r.label);
        }
    }
    return out;
}

std::vector<ClassId> cv_ids_for(std::span<const ClassId> classes, bool rotation) {
    std::vector<ClassId> out;
    for (ClassId c : classes) {
        if (!rotation) {
            out.push_back(c);
            continue;
        }
        for (int k = 0; k < 4; ++k) out.push_back(model::pseudo_label(c, k));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

RunOutput run_incremental(const Stream& stream, const io::RunConfig& cfg, Variant variant,
                          const EventSink& sink) {
    cfg.validate();
    const VariantFlags flags = VariantFlags::of(variant);
    const bool quantizer = flags.head == VariantFlags::Head::Quantizer;
    if (stream.train.size() == 0 || stream.test.size() == 0) throw ConfigError("dataset", "empty dataset");
    if (cfg.rotation && stream.train.grid_size == 0)
        throw ConfigError("rotation", "rotation augmentation needs square image data");
    if (stream.schedule.total_classes() != static_cast<std::size_t>(stream.num_classes))
        throw ConfigError("tasks", "schedule does not cover every class");

    Rng rng(cfg.seed);
    const std::vector<int> hidden = cfg.hidden;
    TrainedState st;
    st.rotation = cfg.rotation;
    st.model = model::FeatureModel::mlp(stream.train.dim(), hidden, cfg.feature_dim, rng,
                                        model::activation_from_string(cfg.activation));
    st.cvs = vq::CodingVectorSet(cfg.feature_dim);
    st.graph = vq::TopologyGraph(vq::TopologyParams{cfg.K, cfg.epsilon, cfg.e_min}, 0);
    if (!quantizer) st.head = model::SoftmaxHead{};

    model::ObjectiveSettings settings;
    settings.tau = cfg.tau;
    settings.beta = cfg.beta;
    settings.weights = model::LossWeights{cfg.lambda1, cfg.lambda2};
    settings.na = flags.na;
    settings.kd = flags.kd;
    const model::LearningRates lr{cfg.lr_theta, cfg.lr_phi};

    RunResult res;
    res.config = cfg;
    res.variant = std::string(to_string(variant));
    res.seed = cfg.seed;
    std::optional<model::FeatureModel> previous;

    for (std::size_t t = 0; t < stream.schedule.num_tasks(); ++t) {
        const auto& classes = stream.schedule.classes(t);
        const std::vector<ClassId> new_ids = cv_ids_for(classes, cfg.rotation);
        settings.task = static_cast<int>(t);

        if (t > 0) {
            vq::freeze_old_cvs(st.cvs, st.cvs.ids());
            previous = st.model;
        }
        if (quantizer) {
            vq::insert_class_cvs(st.cvs, st.graph, new_ids, rng, cfg.cv_init_scale);
        } else {
            st.head->add_classes(new_ids.size(), cfg.feature_dim, rng, cfg.cv_init_scale);
        }

        const TaskData data = task_training_data(stream.train, classes, cfg.rotation, stream.num_classes);
        if (data.x.empty()) throw MissingClassError("task " + std::to_string(t) + " has no training samples");
        const std::vector<ClassId> old_ids = st.prototypes.ids();
        const bool replay = t > 0 && quantizer && flags.augment != VariantFlags::Augment::None;
        const int k_eff = effective_connectivity(cfg.K, st.cvs.size());

        std::vector<std::size_t> order(data.x.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<Vec> bx;
        std::vector<ClassId> by;

        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            EpochEvent ev;
            ev.task = static_cast<int>(t);
            ev.epoch = epoch;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
                const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
                bx.clear();
                by.clear();
                for (std::size_t k = start; k < end; ++k) {
                    bx.push_back(data.x[order[k]]);
                    by.push_back(data.y[order[k]]);
                }

                proto::AugmentedBatch protos;
                if (replay) {
                    protos = flags.augment == VariantFlags::Augment::Neighborhood
                                 ? proto::build_prototype_batch(old_ids, st.prototypes, st.graph, rng,
                                                                cfg.protos_per_class, cfg.alpha_clip)
                                 : proto::build_gaussian_batch(old_ids, st.prototypes, rng,
                                                               cfg.protos_per_class, cfg.gaussian_pa_sigma);
                }

                model::BatchInputs in;
                in.x = bx;
                in.y = by;
                in.previous = (t > 0 && flags.kd) ? &*previous : nullptr;
                in.prototypes = replay ? &protos : nullptr;

                model::BatchObjective obj;
                try {
                    if (quantizer) {
                        if (k_eff >= 2) {
                            for (const Vec& x : bx) vq::update_topology(st.model.forward(x), st.cvs, st.graph, k_eff);
                            for (const auto& p : protos.prototypes) vq::update_topology(p.vector, st.cvs, st.graph, k_eff);
                        }
                        obj = model::quantizer_objective(st.model, st.cvs, st.graph, in, settings);
                        model::sgd_step(st.model, st.cvs, obj.model_grad, obj.cv_grads, lr, cfg.grad_clip);
                    } else {
                        obj = model::softmax_objective(st.model, *st.head, in, settings);
                        model::sgd_step(st.model, st.cvs, obj.model_grad,
                                        Mat::Zero(0, cfg.feature_dim), lr, cfg.grad_clip);
                        if (!obj.head_grad->weight.allFinite() || !obj.head_grad->bias.allFinite())
                            throw NumericFailure("non-finite head gradient; step aborted");
                        st.head->weight.noalias() -= lr.phi * obj.head_grad->weight;
                        st.head->bias.noalias() -= lr.phi * obj.head_grad->bias;
                    }
                } catch (const NumericFailure& e) {
                    throw NumericFailure("task " + std::to_string(t) + ": " + e.what());
                }
                if (!std::isfinite(obj.total))
                    throw NumericFailure("task " + std::to_string(t) + ": non-finite loss");

                ev.total += obj.total;
                ev.dce += obj.terms.dce;
                ev.na += obj.terms.na;
                ev.hat_dce += obj.terms.hat_dce.value_or(0.0);
                ev.hat_na += obj.terms.hat_na.value_or(0.0);
                ev.kd += obj.terms.kd.value_or(0.0);
                ++batches;
            }
            const double inv = batches ? 1.0 / static_cast<double>(batches) : 0.0;
            ev.total *= inv;
            ev.dce *= inv;
            ev.na *= inv;
            ev.hat_dce *= inv;
            ev.hat_na *= inv;
            ev.kd *= inv;
            ev.edges = st.graph.edge_count();
            res.events.push_back(ev);
            if (sink) sink(ev);
        }

        // Class means under this task's extractor.
        if (quantizer) {
            const std::vector<Vec> feats = extract_features(st.model, Dataset{data.x, data.y, 0});
            for (auto& [id, mean] : proto::compute_class_means(feats, data.y, new_ids))
                st.prototypes.insert(id, std::move(mean), static_cast<int>(t));
        }

        // Evaluate on every seen task.
        const std::vector<ClassId> seen = stream.schedule.seen_classes(t);
        std::vector<double> row;
        StepPredictions step;
        for (std::size_t j = 0; j <= t; ++j) {
            const std::vector<std::size_t> idx = stream.test.indices_of(stream.schedule.classes(j));
            Dataset sub;
            for (std::size_t i : idx) {
                sub.x.push_back(stream.test.x[i]);
                sub.y.push_back(stream.test.y[i]);
            }
            const std::vector<int> pred = predict(st, sub, seen, !cfg.deterministic);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                if (pred[i] == sub.y[i]) ++correct;
                step.predicted.push_back(pred[i]);
                step.truth.push_back(sub.y[i]);
            }
            row.push_back(sub.size() ? static_cast<double>(correct) / static_cast<double>(sub.size()) : 0.0);
            if (j == t) res.accuracy.test_counts.push_back(sub.size());
        }
        res.accuracy.acc.push_back(std::move(row));
        res.confusion.push_back(confusion_matrix(step.predicted, step.truth, static_cast<int>(seen.size())));
        res.predictions.push_back(std::move(step));
    }

    for (std::size_t t = 0; t < res.accuracy.num_tasks(); ++t)
        res.pooled.push_back(pooled_accuracy(res.accuracy, t));
    res.average_accuracy = average_accuracy(res.accuracy);
    res.forgetting = forgetting_curve(res.accuracy);
    res.average_forgetting = res.accuracy.num_tasks() < 2 ? 0.0 : average_forgetting(res.accuracy);
    return RunOutput{std::move(res), std::move(st)};
}

RunOutput run_incremental(const Stream& stream, const io::RunConfig& config, const EventSink& sink) {
    return run_incremental(stream, config, variant_from_string(config.variant), sink);
}

RunOutput run_ablation(const io::RunConfig& config, Variant variant, const EventSink& sink) {
    config.validate();
    return run_incremental(make_stream(config), config, variant, sink);
}

std::vector<KSweepRow> k_sweep(const io::RunConfig& config, const std::vector<int>& k_values) {
    config.validate();
    const Stream stream = make_stream(config);
    const Variant variant = variant_from_string(config.variant);
    std::vector<KSweepRow> rows;
    for (int k : k_values) {
        KSweepRow row;
        row.K = k;
        if (k < 2) {
            row.ok = false;
            row.warning = "K must be >= 2; skipped";
            std::cerr << "warning: K=" << k << " skipped (K must be >= 2)\n";
            rows.push_back(row);
            continue;
        }
        io::RunConfig cfg = config;
        cfg.K = k;
        const auto start = std::chrono::steady_clock::now();
        const RunOutput out = run_incremental(stream, cfg, variant);
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.average_accuracy = out.result.average_accuracy;
        row.average_forgetting = out.result.average_forgetting;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace napavq::harness
