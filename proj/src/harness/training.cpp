// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include "amgs/error.hpp"
#include "amgs/harness.hpp"

namespace amgs {
namespace {

// Independent random streams per seed. Episode sampling never shares a
// stream with masking, so every method sees the same episodes for a seed.
enum StreamTag : std::uint64_t {
    kInitStream = 1,
    kTrainEpisodes = 2,
    kTrainMasks = 3,
    kSeenEval = 4,
    kValEval = 5,
    kTestEval = 6,
};

double mean(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

double SeedResult::generalization_gap() const {
    if (best_epoch < 1 || static_cast<std::size_t>(best_epoch) > epochs.size()) {
        return 0.0;
    }
    const auto& e = epochs[static_cast<std::size_t>(best_epoch - 1)];
    return e.train_acc - e.val_acc;
}

bool EarlyStopping::update(int epoch, double score) {
    if (!seen_ || score > best_) {
        seen_ = true;
        best_ = score;
        best_epoch_ = epoch;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

ModelDims model_dims(const ExperimentConfig& cfg, const Corpus& corpus) {
    return {corpus.vocab().size(), static_cast<std::size_t>(cfg.d_emb), static_cast<std::size_t>(cfg.d_h),
            static_cast<std::size_t>(cfg.n_way)};
}

std::pair<Corpus, ClassSplit> load_data(const ExperimentConfig& cfg) {
    if (cfg.corpus_path.empty() || cfg.split_path.empty()) {
        throw ValidationError("config needs corpus_path and split_path");
    }
    Corpus corpus = load_corpus(cfg.corpus_path, static_cast<std::size_t>(cfg.max_len),
                                static_cast<std::size_t>(cfg.min_freq));
    ClassSplit split = load_split_file(corpus, cfg.split_path);
    return {std::move(corpus), std::move(split)};
}

std::vector<double> evaluate(const ExperimentConfig& cfg, const ModelParams& psi, const Corpus& corpus,
                             const ClassSplit& split, SplitPart part, int count, std::uint64_t stream_seed) {
    Rng episodes(mix_seed(stream_seed, 0));
    Rng masks(mix_seed(stream_seed, 1));
    const auto masking = cfg.masking();
    std::vector<double> accs;
    accs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto ep = sample_episode(corpus, split, part, cfg.n_way, cfg.k_shot, cfg.q_query, episodes);
        accs.push_back(meta_test(psi, ep, cfg.effective_fine_tune_steps(), cfg.use_mtp_test, cfg.alpha,
                                 cfg.test_rho(), masking, masks)
                           .accuracy);
    }
    return accs;
}

SeedResult train_seed(const ExperimentConfig& cfg, const Corpus& corpus, const ClassSplit& split,
                      std::uint64_t seed, const StepObserver& observer) {
    cfg.validate();
    Rng init(mix_seed(seed, kInitStream));
    MetaState state(ModelParams::random(model_dims(cfg, corpus), init, cfg.init_scale), cfg.meta_hyper());
    Rng episode_rng(mix_seed(seed, kTrainEpisodes));
    Rng mask_rng(mix_seed(seed, kTrainMasks));

    SeedResult result;
    result.seed = seed;
    result.best_psi = state.psi;
    EarlyStopping stopper(cfg.patience);
    std::vector<Episode> batch;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (int s = 0; s < cfg.episodes_per_epoch_train; ++s) {
            batch.clear();
            for (int b = 0; b < cfg.meta_batch; ++b) {
                batch.push_back(sample_episode(corpus, split, SplitPart::train, cfg.n_way, cfg.k_shot, cfg.q_query,
                                               episode_rng));
            }
            try {
                const auto report = train_step(cfg.method, state, batch, mask_rng);
                if (observer) {
                    observer(seed, epoch, report);
                }
            } catch (const Error& e) {
                throw Error(e.kind(), "seed " + std::to_string(seed) + " epoch " + std::to_string(epoch) +
                                          " step " + std::to_string(s + 1) + ": " + e.what());
            }
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_acc = mean(evaluate(cfg, state.psi, corpus, split, SplitPart::train, cfg.episodes_per_epoch_val,
                                      mix_seed(mix_seed(seed, kSeenEval), static_cast<std::uint64_t>(epoch))));
        rec.val_acc = mean(evaluate(cfg, state.psi, corpus, split, SplitPart::val, cfg.episodes_per_epoch_val,
                                    mix_seed(mix_seed(seed, kValEval), static_cast<std::uint64_t>(epoch))));
        result.epochs.push_back(rec);
        if (stopper.update(epoch, rec.val_acc)) {
            result.best_psi = state.psi;
        }
        if (stopper.should_stop()) {
            break;
        }
    }
    result.best_epoch = stopper.best_epoch();
    result.best_val_acc = stopper.best_score();
    result.test_accuracies =
        evaluate(cfg, result.best_psi, corpus, split, SplitPart::test, cfg.test_episodes, mix_seed(seed, kTestEval));
    result.test_mean = mean(result.test_accuracies);
    return result;
}

RunResult run_training(const ExperimentConfig& cfg, const Corpus& corpus, const ClassSplit& split,
                       const StepObserver& observer) {
    cfg.validate();
    RunResult run;
    run.config = cfg;
    std::vector<double> means;
    for (auto seed : cfg.seeds) {
        run.seeds.push_back(train_seed(cfg, corpus, split, seed, observer));
        means.push_back(run.seeds.back().test_mean);
    }
    run.mean_acc = mean(means);
    if (means.size() > 1) {
        double ss = 0.0;
        for (double m : means) {
            ss += (m - run.mean_acc) * (m - run.mean_acc);
        }
        run.std_acc = std::sqrt(ss / static_cast<double>(means.size() - 1));
    }
    return run;
}

}  // namespace amgs
