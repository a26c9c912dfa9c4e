#include "napavq/io/cli.hpp"

#include "napavq/error.hpp"
#include "napavq/harness/run.hpp"
#include "napavq/io/config.hpp"
#include "napavq/io/serialize.hpp"
#include "napavq/io/tables.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace napavq::io {

namespace fs = std::filesystem;

namespace {

std::string resolve_output(const std::string& path) {
    const char* root = std::getenv(kOutputRootEnv);
    if (!root || !*root || fs::path(path).is_absolute()) return path;
    return (fs::path(root) / path).string();
}

RunConfig build_config(const std::string& config_path, const std::vector<std::string>& overrides,
                       const std::optional<std::uint64_t>& seed) {
    RunConfig cfg = config_path.empty() ? parse_config_text("") : load_config(config_path);
    std::vector<std::string> all = overrides;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    return all.empty() ? cfg : apply_overrides(std::move(cfg), all);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--values", "'" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw ConfigError("--values", "no values given");
    return out;
}


int report(const std::string& run_dir, const std::string& result_path, std::ostream& out, std::ostream& err) {
    const std::string path = !result_path.empty() ? result_path : (fs::path(run_dir) / "result.json").string();
    const harness::RunResult r = run_result_from_json(nlohmann::json::parse(read_file(path)));
    bool ok = r.metrics_consistent();
    std::string why = ok ? "" : "stored metrics do not match the accuracy matrix";

    // Cross-check the matrix against the stored predictions.
    if (ok) {
        const harness::TaskSchedule schedule =
            harness::TaskSchedule::partition(r.config.dataset.kind == "synthetic" ? r.config.dataset.synthetic.num_classes
                                                                                   : static_cast<int>(r.confusion.empty() ? 0 : r.confusion.back().num_classes),
                                             r.config.tasks, r.config.first_task_classes);
        if (r.predictions.size() != r.accuracy.num_tasks()) {
            ok = false;
            why = "prediction records do not cover every task";
        }
        for (std::size_t t = 0; ok && t < r.predictions.size(); ++t) {
            std::vector<std::size_t> correct(t + 1, 0), total(t + 1, 0);
            const auto& p = r.predictions[t];
            for (std::size_t i = 0; i < p.truth.size(); ++i) {
                const int j = schedule.task_of(p.truth[i]);
                if (j < 0 || static_cast<std::size_t>(j) > t) {
                    ok = false;
                    why = "prediction record has an unseen class";
                    break;
                }
                ++total[static_cast<std::size_t>(j)];
                if (p.predicted[i] == p.truth[i]) ++correct[static_cast<std::size_t>(j)];
            }
            for (std::size_t j = 0; ok && j <= t; ++j) {
                const double acc = total[j] ? static_cast<double>(correct[j]) / static_cast<double>(total[j]) : 0.0;
                if (acc != r.accuracy.acc[t][j] || total[j] != r.accuracy.test_counts[j]) {
                    ok = false;
                    why = "accuracy matrix entry [" + std::to_string(t) + "][" + std::to_string(j) +
                          "] does not match the stored predictions";
                }
            }
        }
    }

    out << "variant: " << r.variant << "\nseed: " << r.seed << "\n";
    out << "average_accuracy: " << format_double(harness::average_accuracy(r.accuracy)) << "\n";
    out << "average_forgetting: "
        << format_double(r.accuracy.num_tasks() < 2 ? 0.0 : harness::average_forgetting(r.accuracy)) << "\n";
    if (!ok) {
        err << "error (metric mismatch): " << why << "\n";
        return 1;
    }
    out << "metrics: consistent\n";
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neighbourhood-aware vector quantisation for class-incremental learning", "napavq"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string run_dir;
    std::string variant_name;
    std::string variants_csv;
    std::string values_csv = "2,15,50";
    std::string result_path;
    std::string split = "test";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON configuration file");
        sub->add_option("--set", overrides, "key=value override (repeatable)");
        sub->add_option("--seed", seed, "random seed");
    };

    auto* train = app.add_subcommand("train", "run one incremental experiment");
    add_common(train);
    train->add_option("--variant", variant_name, "ablation variant (default: from config)");
    train->add_option("-o,--out", out_path, "output directory (default: config output_dir)");

    auto* ablate = app.add_subcommand("ablate", "run ablation variants on one stream");
    add_common(ablate);
    ablate->add_option("--variants", variants_csv, "comma-separated variants (default: all)");
    ablate->add_option("-o,--out", out_path, "output directory");

    auto* sweep = app.add_subcommand("sweep-k", "one run per connectivity factor K");
    add_common(sweep);
    sweep->add_option("--values", values_csv, "comma-separated K values");
    sweep->add_option("-o,--out", out_path, "output CSV path");

    auto* gen = app.add_subcommand("gen-data", "write the configured stream as feature tables");
    add_common(gen);
    gen->add_option("-o,--out", out_path, "output directory")->required();

    auto* graph = app.add_subcommand("export-graph", "write the topology graph of a finished run");
    graph->add_option("--run", run_dir, "run directory")->required();
    graph->add_option("-o,--out", out_path, "output path (default: stdout)");

    auto* emb = app.add_subcommand("export-embeddings", "write features of a finished run");
    emb->add_option("--run", run_dir, "run directory")->required();
    emb->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
    emb->add_option("-o,--out", out_path, "output CSV (default: <run>/embeddings_<split>.csv)");

    auto* rep = app.add_subcommand("report", "recompute and verify the metrics of a stored run");
    rep->add_option("--run", run_dir, "run directory");
    rep->add_option("--result", result_path, "result.json path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 2;
    }

    try {
        if (*train) {
            RunConfig cfg = build_config(config_path, overrides, seed);
            if (!variant_name.empty()) cfg = apply_overrides(cfg, {"variant=" + variant_name});
            if (!out_path.empty()) cfg = apply_overrides(cfg, {"output_dir=" + out_path});
            const std::string dir = resolve_output(cfg.output_dir);
            const harness::Stream stream = harness::make_stream(cfg);
            const harness::RunOutput run = harness::run_incremental(stream, cfg);
            write_run_directory(dir, run);
            out << "wrote " << dir << "\naverage_accuracy: " << format_double(run.result.average_accuracy)
                << "\naverage_forgetting: " << format_double(run.result.average_forgetting) << "\n";
            return 0;
        }
        if (*ablate) {
            RunConfig cfg = build_config(config_path, overrides, seed);
            std::vector<harness::Variant> variants;
            if (variants_csv.empty()) {
                variants.assign(harness::kAllVariants.begin(), harness::kAllVariants.end());
            } else {
                std::stringstream ss(variants_csv);
                std::string item;
                while (std::getline(ss, item, ',')) variants.push_back(harness::variant_from_string(item));
            }
            const std::string dir = resolve_output(out_path.empty() ? cfg.output_dir : out_path);
            const harness::Stream stream = harness::make_stream(cfg);
            std::string table = "variant,average_accuracy,average_forgetting\n";
            for (harness::Variant v : variants) {
                RunConfig vcfg = cfg;
                vcfg.variant = std::string(harness::to_string(v));
                const harness::RunOutput run = harness::run_incremental(stream, vcfg, v);
                write_run_directory((fs::path(dir) / vcfg.variant).string(), run);
                table += vcfg.variant + "," + format_double(run.result.average_accuracy) + "," +
                         format_double(run.result.average_forgetting) + "\n";
            }
            write_file_atomic((fs::path(dir) / "ablation.csv").string(), table);
            out << table;
            return 0;
        }
        if (*sweep) {
            const RunConfig cfg = build_config(config_path, overrides, seed);
            const auto rows = harness::k_sweep(cfg, parse_int_list(values_csv));
            const std::string table = format_k_sweep(rows);
            const std::string path = resolve_output(out_path.empty() ? (fs::path(cfg.output_dir) / "k_sweep.csv").string() : out_path);
            write_file_atomic(path, table);
            out << table;
            return 0;
        }
        if (*gen) {
            const RunConfig cfg = build_config(config_path, overrides, seed);
            const harness::Stream stream = harness::make_stream(cfg);
            const std::string dir = resolve_output(out_path);
            write_feature_table((fs::path(dir) / "train.csv").string(), table_from_dataset(stream.train));
            write_feature_table((fs::path(dir) / "test.csv").string(), table_from_dataset(stream.test));
            write_file_atomic((fs::path(dir) / "config.json").string(), config_to_json(cfg).dump(2) + "\n");
            out << "wrote " << stream.train.size() << " training and " << stream.test.size() << " test rows to " << dir << "\n";
            return 0;
        }
        if (*graph) {
            const harness::TrainedState st = load_trained_state(run_dir);
            const std::string doc = graph_to_json(st.cvs, st.graph).dump(2) + "\n";
            if (out_path.empty()) {
                out << doc;
            } else {
                write_file_atomic(resolve_output(out_path), doc);
            }
            return 0;
        }
        if (*emb) {
            const RunConfig cfg = load_config((fs::path(run_dir) / "config.json").string());
            const harness::TrainedState st = load_trained_state(run_dir);
            const harness::Stream stream = harness::make_stream(cfg);
            const std::string path = out_path.empty() ? (fs::path(run_dir) / ("embeddings_" + split + ".csv")).string()
                                                      : resolve_output(out_path);
            export_embeddings(st, split == "train" ? stream.train : stream.test, stream.schedule, path);
            out << "wrote " << path << "\n";
            return 0;
        }
        if (*rep) {
            if (run_dir.empty() && result_path.empty()) {
                err << "report: one of --run or --result is required\n" << app.help();
                return 2;
            }
            return report(run_dir, result_path, out, err);
        }
    } catch (const Error& e) {
        err << "error (" << e.category() << "): " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error (parse error): " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace napavq::io
