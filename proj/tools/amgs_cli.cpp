// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

// amgs command-line driver: train, ablate, gen-corpus, export-embeddings,
// check-gradients. Failures print one JSON line {"error": kind, "message": ...}
// to stderr and exit non-zero.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "amgs/checkpoint.hpp"
#include "amgs/error.hpp"
#include "amgs/gradcheck.hpp"
#include "amgs/harness.hpp"
#include "amgs/kernels.hpp"

namespace fs = std::filesystem;
using namespace amgs;

namespace {

struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::vector<std::uint64_t> extra_seeds;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "experiment config (JSON)");
        cmd->add_option("--set", overrides, "override a config field, key=value")->take_all();
        cmd->add_option("--seed", extra_seeds, "append a seed to the config's seed list");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        for (const auto& o : overrides) {
            apply_override(cfg, o);
        }
        for (auto s : extra_seeds) {
            cfg.seeds.push_back(s);
        }
        cfg.validate();
        return cfg;
    }
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void log_run(const RunResult& run) {
    std::cerr << to_string(run.config.method) << " N=" << run.config.n_way << " K=" << run.config.k_shot
              << " mean_acc=" << format_double(run.mean_acc) << " std=" << format_double(run.std_acc) << '\n';
}

int cmd_train(const ConfigArgs& args, const std::string& out_dir) {
    const auto cfg = args.resolve();
    const auto [corpus, split] = load_data(cfg);
    fs::create_directories(out_dir);
    auto metrics = open_out(fs::path(out_dir) / "metrics.jsonl");
    const auto run = run_training(cfg, corpus, split, [&](std::uint64_t seed, int epoch, const StepReport& r) {
        write_step_jsonl(metrics, seed, epoch, r);
    });
    auto epochs = open_out(fs::path(out_dir) / "epochs.csv");
    write_epochs_csv(epochs, run);
    auto summary = open_out(fs::path(out_dir) / "summary.csv");
    write_summary_header(summary);
    write_summary_row(summary, run);
    for (const auto& s : run.seeds) {
        save_checkpoint(fs::path(out_dir) / ("psi_seed" + std::to_string(s.seed) + ".bin"), s.best_psi);
    }
    log_run(run);
    return 0;
}

int cmd_ablate(const ConfigArgs& args, const std::string& grid_path, const std::string& preset,
               const std::string& out_dir) {
    const auto cfg = args.resolve();
    Grid grid;
    if (!preset.empty()) {
        grid = grid_preset(preset);
    } else {
        std::ifstream in(grid_path);
        if (!in) {
            throw IoError("cannot read grid file " + grid_path);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        grid = parse_grid(ss.str());
    }
    expand_grid(cfg, grid);  // validate before loading data or running
    const auto [corpus, split] = load_data(cfg);
    fs::create_directories(out_dir);
    auto metrics = open_out(fs::path(out_dir) / "metrics.jsonl");
    const auto result = run_ablation(cfg, grid, corpus, split, [&](std::uint64_t seed, int epoch, const StepReport& r) {
        write_step_jsonl(metrics, seed, epoch, r);
    });
    auto summary = open_out(fs::path(out_dir) / "summary.csv");
    write_ablation_csv(summary, result);
    for (const auto& row : result.rows) {
        log_run(row.result);
    }
    return 0;
}

int cmd_gen_corpus(const SyntheticSpec& spec, const std::string& out, const std::string& split_out,
                   const std::vector<int>& split_sizes) {
    gen_synthetic(spec, fs::path(out));
    if (!split_out.empty()) {
        if (split_sizes.size() != 3 || split_sizes[0] + split_sizes[1] + split_sizes[2] > spec.num_classes) {
            throw ValidationError("--split needs three counts whose sum does not exceed --classes");
        }
        std::vector<std::string> parts[3];
        int k = 0;
        for (int p = 0; p < 3; ++p) {
            for (int i = 0; i < split_sizes[static_cast<std::size_t>(p)]; ++i) {
                parts[p].push_back(synthetic_class_name(k++));
            }
        }
        write_split_file(split_out, parts[0], parts[1], parts[2]);
    }
    return 0;
}

int cmd_export(const ConfigArgs& args, const std::string& checkpoint, const std::string& part,
               std::uint64_t episode_seed, const std::string& out) {
    const auto cfg = args.resolve();
    const auto [corpus, split] = load_data(cfg);
    const auto ck = load_checkpoint(checkpoint);
    if (!(ck.params.dims() == model_dims(cfg, corpus))) {
        throw ValidationError("checkpoint dimensions do not match the config and corpus");
    }
    Rng episodes(mix_seed(episode_seed, 0));
    Rng masks(mix_seed(episode_seed, 1));
    const auto ep =
        sample_episode(corpus, split, parse_split_part(part), cfg.n_way, cfg.k_shot, cfg.q_query, episodes);
    auto file = open_out(out);
    export_embeddings(ck.params, ep, corpus, cfg.effective_fine_tune_steps(), cfg.use_mtp_test, cfg.alpha,
                      cfg.test_rho(), cfg.masking(), masks, file);
    return 0;
}

int cmd_check_gradients(int instances, std::uint64_t seed, double tolerance) {
    const ModelDims dims{10, 4, 3, 3};
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const auto inst = make_gradcheck_instance(dims, 4, 5, rng);
        for (double rho : {0.0, 0.3, 1.0}) {
            const auto r = check_total_gradient(inst, rho);
            worst = std::max(worst, r.max_rel_error);
            std::cout << "instance " << i << " rho=" << rho << " max_rel_error=" << format_double(r.max_rel_error)
                      << " worst=" << block_name(r.worst_block) << "[" << r.worst_index << "]\n";
        }
    }
    std::cout << "simd backend: " << simd::to_string(simd::active_backend()) << '\n';
    std::cout << "overall max_rel_error=" << format_double(worst) << (worst < tolerance ? " PASS" : " FAIL") << '\n';
    return worst < tolerance ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot meta-learning with gradient-similarity gating"};
    app.require_subcommand(1);

    ConfigArgs train_args;
    std::string train_out = "run";
    auto* train = app.add_subcommand("train", "meta-train and evaluate one configuration");
    train_args.attach(train);
    train->add_option("-o,--out", train_out, "output directory");

    ConfigArgs ablate_args;
    std::string grid_path, preset, ablate_out = "ablation";
    auto* ablate = app.add_subcommand("ablate", "run a Cartesian grid of configurations");
    ablate_args.attach(ablate);
    auto* grid_opt = ablate->add_option("--grid", grid_path, "grid JSON: {\"key\": [values...], ...}");
    ablate->add_option("--preset", preset, "table2 | table3 | table4 | table5")->excludes(grid_opt);
    ablate->add_option("-o,--out", ablate_out, "output directory");

    SyntheticSpec spec;
    std::string corpus_out = "corpus.jsonl", split_out;
    std::vector<int> split_sizes = {30, 5, 10};
    auto* gen = app.add_subcommand("gen-corpus", "write a synthetic JSONL corpus");
    gen->add_option("--classes", spec.num_classes);
    gen->add_option("--docs-per-class", spec.docs_per_class);
    gen->add_option("--tokens-per-class", spec.tokens_per_class);
    gen->add_option("--overlap", spec.overlap, "shared-vocabulary mass in [0,1]");
    gen->add_option("--min-len", spec.min_len);
    gen->add_option("--max-len", spec.max_len);
    gen->add_option("--seed", spec.seed);
    gen->add_option("-o,--out", corpus_out);
    gen->add_option("--split-out", split_out, "also write a split file");
    gen->add_option("--split", split_sizes, "train,val,test class counts")->delimiter(',')->expected(3);

    ConfigArgs export_args;
    std::string checkpoint, part = "test", emb_out = "embeddings.csv";
    std::uint64_t episode_seed = 0;
    auto* exp = app.add_subcommand("export-embeddings", "write query-set sentence representations as CSV");
    export_args.attach(exp);
    exp->add_option("--checkpoint", checkpoint)->required();
    exp->add_option("--part", part, "train | val | test");
    exp->add_option("--episode-seed", episode_seed);
    exp->add_option("-o,--out", emb_out);

    int instances = 20;
    std::uint64_t check_seed = 0;
    double tolerance = 1e-5;
    auto* check = app.add_subcommand("check-gradients", "finite-difference check of the analytic gradients");
    check->add_option("--instances", instances);
    check->add_option("--seed", check_seed);
    check->add_option("--tolerance", tolerance);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train) return cmd_train(train_args, train_out);
        if (*ablate) {
            if (grid_path.empty() && preset.empty()) {
                throw ValidationError("ablate needs --grid or --preset");
            }
            return cmd_ablate(ablate_args, grid_path, preset, ablate_out);
        }
        if (*gen) return cmd_gen_corpus(spec, corpus_out, split_out, split_sizes);
        if (*exp) return cmd_export(export_args, checkpoint, part, episode_seed, emb_out);
        if (*check) return cmd_check_gradients(instances, check_seed, tolerance);
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
