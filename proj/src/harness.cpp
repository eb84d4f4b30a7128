/**
 * @file harness.cpp
 * @brief Multi-trial experiment driver.
 */

#include <hmax/harness.h>
#include <hmax/error.h>
#include <hmax/parallel.h>
#include <hmax/synthetic.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace hmax {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

FilterBank bank_for(const ExperimentConfig& cfg) {
    return build_filter_bank(cfg.n_orientations, cfg.include_spot, cfg.filter_size, cfg.effective_sigma());
}

}  // namespace

Split split_dataset(const LabeledImageSet& set, int n_train, int n_test_max, std::uint64_t seed) {
    if (n_train < 1 || n_test_max < 0) throw Error("invalid split sizes");
    Split split;
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < set.images.size(); ++c) {
        const int count = static_cast<int>(set.images[c].size());
        if (count <= n_train) {
            throw Error("class " + set.classes[c] + " has " + std::to_string(count) +
                        " images, needs more than " + std::to_string(n_train));
        }
        std::vector<int> order(static_cast<std::size_t>(count));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const int n_test = std::min(n_test_max, count - n_train);
        std::vector<int> train(order.begin(), order.begin() + n_train);
        std::vector<int> test(order.begin() + n_train, order.begin() + n_train + n_test);
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        for (int i : train) split.train.push_back({static_cast<int>(c), i});
        for (int i : test) split.test.push_back({static_cast<int>(c), i});
    }
    return split;
}

C1Stack extract_c1(const RgbImage& image, const ExperimentConfig& cfg, const FilterBank& bank) {
    const RgbImage sized = resize_max_side(image, cfg.max_side);
    const OpponentImage opp = to_opponent(contrast_stretch(sized), cfg.greyscale_only);
    const S1Maps s1 = s1_convolve(opp, bank, cfg.s1_whitening(), cfg.greyscale_only);
    return c1_pool(s1, cfg.c1_window, cfg.c1_stride);
}

FeatureVector encode_features(const C1Stack& stack, const TemplateDictionary& dict, const ExperimentConfig& cfg) {
    const S2CodeMap codes = s2_encode(stack, dict, cfg.llc_params());
    return c2_features(codes, dict.p, cfg.spm_mode);
}

C1Table extract_all_c1(const LabeledImageSet& set, const ExperimentConfig& cfg, int threads) {
    const FilterBank bank = bank_for(cfg);
    std::vector<ImageRef> refs;
    for (std::size_t c = 0; c < set.images.size(); ++c) {
        for (std::size_t i = 0; i < set.images[c].size(); ++i) refs.push_back({static_cast<int>(c), static_cast<int>(i)});
    }
    C1Table table(set.images.size());
    for (std::size_t c = 0; c < set.images.size(); ++c) table[c].resize(set.images[c].size());
    parallel_for(refs.size(), threads, [&](std::size_t n) {
        const ImageRef r = refs[n];
        table[r.label][r.index] = extract_c1(set.images[r.label][r.index].image, cfg, bank);
    });
    return table;
}

std::shared_ptr<const C1Table> C1Cache::get_or_compute(const LabeledImageSet& set, const ExperimentConfig& cfg,
                                                       int threads) {
    const std::string key = cfg.c1_key();
    {
        std::lock_guard lock(mutex_);
        if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = std::make_shared<const C1Table>(extract_all_c1(set, cfg, threads));
    std::lock_guard lock(mutex_);
    return tables_.emplace(key, std::move(table)).first->second;
}

double mean_class_accuracy(const std::vector<ClassAccuracy>& classes) {
    if (classes.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : classes) sum += c.accuracy();
    return sum / static_cast<double>(classes.size());
}

std::uint64_t template_seed(std::uint64_t split_seed) {
    return split_seed ^ 0x9E3779B97F4A7C15ULL;
}

namespace {

TemplateDictionary sample_for_split(const C1Table& table, const Split& split, int p, std::uint64_t seed,
                                    std::vector<ImageRef>& sources) {
    std::vector<const C1Stack*> stacks;
    stacks.reserve(split.train.size());
    for (const ImageRef& r : split.train) stacks.push_back(&table[r.label][r.index]);
    TemplateDictionary dict = sample_templates(stacks, p, seed);
    std::set<ImageRef> distinct;
    for (const auto& o : dict.origins) distinct.insert(split.train[static_cast<std::size_t>(o.stack)]);
    sources.assign(distinct.begin(), distinct.end());
    return dict;
}

std::vector<FeatureVector> encode_refs(const C1Table& table, const std::vector<ImageRef>& refs,
                                       const TemplateDictionary& dict, const ExperimentConfig& cfg) {
    std::vector<FeatureVector> out(refs.size());
    parallel_for(refs.size(), cfg.threads, [&](std::size_t n) {
        out[n] = encode_features(table[refs[n].label][refs[n].index], dict, cfg);
    });
    return out;
}

std::vector<int> labels_of(const std::vector<ImageRef>& refs) {
    std::vector<int> out;
    out.reserve(refs.size());
    for (const auto& r : refs) out.push_back(r.label);
    return out;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, const LabeledImageSet& set, const RunOptions& options) {
    cfg.validate();
    Report report;
    report.config_json = config_to_json(cfg);
    report.skipped = set.skipped;

    const auto t_c1 = Clock::now();
    std::shared_ptr<const C1Table> table;
    if (options.cache) {
        table = options.cache->get_or_compute(set, cfg, cfg.threads);
    } else {
        table = std::make_shared<const C1Table>(extract_all_c1(set, cfg, cfg.threads));
    }
    const double c1_seconds = seconds_since(t_c1);

    if (!options.features_dir.empty()) std::filesystem::create_directories(options.features_dir);

    std::shared_ptr<TemplateDictionary> shared_dict;
    std::vector<ImageRef> shared_sources;
    for (int t = 0; t < cfg.n_trials; ++t) {
        TrialResult trial;
        trial.trial = t;
        trial.seed = cfg.seed + static_cast<std::uint64_t>(t);
        trial.timings.c1_seconds = t == 0 ? c1_seconds : 0.0;
        try {
            const Split split = split_dataset(set, cfg.n_train, cfg.n_test_max, trial.seed);

            auto t0 = Clock::now();
            TemplateDictionary local;
            const TemplateDictionary* dict = nullptr;
            if (cfg.resample_templates_per_trial || !shared_dict) {
                local = sample_for_split(*table, split, cfg.p, template_seed(trial.seed), trial.template_sources);
                if (!cfg.resample_templates_per_trial) {
                    shared_dict = std::make_shared<TemplateDictionary>(std::move(local));
                    shared_sources = trial.template_sources;
                    dict = shared_dict.get();
                } else {
                    dict = &local;
                }
            } else {
                dict = shared_dict.get();
                trial.template_sources = shared_sources;
            }
            trial.timings.sampling_seconds = seconds_since(t0);

            t0 = Clock::now();
            const auto train_x = encode_refs(*table, split.train, *dict, cfg);
            const auto test_x = encode_refs(*table, split.test, *dict, cfg);
            const auto train_y = labels_of(split.train);
            const auto test_y = labels_of(split.test);
            trial.timings.encoding_seconds = seconds_since(t0);

            if (!options.features_dir.empty()) {
                const auto stem = "trial_" + std::to_string(t);
                export_sparse(options.features_dir / (stem + "_train.txt"), train_x, train_y);
                export_sparse(options.features_dir / (stem + "_test.txt"), test_x, test_y);
            }

            t0 = Clock::now();
            TrainOptions topt;
            topt.cost = cfg.cost;
            topt.threads = cfg.threads;
            const TrainResult trained = train(train_x, train_y, set.classes, topt);
            trial.timings.training_seconds = seconds_since(t0);

            t0 = Clock::now();
            trial.classes.resize(set.classes.size());
            for (std::size_t c = 0; c < set.classes.size(); ++c) trial.classes[c].name = set.classes[c];
            for (std::size_t i = 0; i < test_x.size(); ++i) {
                auto& cls = trial.classes[static_cast<std::size_t>(test_y[i])];
                ++cls.tested;
                if (predict(trained.model, test_x[i]) == test_y[i]) ++cls.correct;
            }
            trial.mean_class_accuracy = mean_class_accuracy(trial.classes);
            trial.timings.evaluation_seconds = seconds_since(t0);
        } catch (const std::exception& e) {
            trial.aborted = true;
            trial.error = e.what();
        }
        report.trials.push_back(std::move(trial));
    }

    std::vector<double> accs;
    for (const auto& t : report.trials) {
        if (!t.aborted) accs.push_back(t.mean_class_accuracy);
    }
    report.completed = static_cast<int>(accs.size());
    if (!accs.empty()) {
        report.mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
        if (accs.size() > 1) {
            double ss = 0.0;
            for (double a : accs) ss += (a - report.mean) * (a - report.mean);
            report.stddev = std::sqrt(ss / static_cast<double>(accs.size() - 1));
        }
    }
    return report;
}

LabeledImageSet load_or_generate(const ExperimentConfig& cfg) {
    if (cfg.dataset_root.empty()) return generate_synthetic_dataset(cfg.synthetic);
    return load_dataset(cfg.dataset_root);
}

std::string report_csv(const Report& report) {
    std::ostringstream os;
    char buf[160];
    os << "kind,trial,class,correct,tested,accuracy\n";
    for (const auto& t : report.trials) {
        if (t.aborted) {
            os << "aborted," << t.trial << ",,,,\n";
            continue;
        }
        for (const auto& c : t.classes) {
            std::snprintf(buf, sizeof buf, "class,%d,%s,%d,%d,%.6f\n", t.trial, c.name.c_str(), c.correct, c.tested,
                          c.accuracy());
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "trial_mean,%d,,,,%.6f\n", t.trial, t.mean_class_accuracy);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,,,,%d,%.6f\n", report.completed, report.mean);
    os << buf;
    std::snprintf(buf, sizeof buf, "stddev,,,,%d,%.6f\n", report.completed, report.stddev);
    os << buf;
    return os.str();
}

void write_report_csv(const std::filesystem::path& path, const Report& report) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << report_csv(report);
}

void print_report(std::ostream& os, const Report& report) {
    char buf[200];
    os << "resolved config:\n" << report.config_json << "\n";
    if (!report.skipped.empty()) {
        os << report.skipped.size() << " undecodable file(s) skipped:\n";
        for (const auto& s : report.skipped) os << "  " << s.path << "\n";
    }
    for (const auto& t : report.trials) {
        if (t.aborted) {
            os << "trial " << t.trial << " (seed " << t.seed << ") aborted: " << t.error << "\n";
            continue;
        }
        std::snprintf(buf, sizeof buf,
                      "trial %d (seed %llu): mean per-class accuracy %.4f  "
                      "[c1 %.2fs, sample %.2fs, encode %.2fs, train %.2fs, eval %.2fs]\n",
                      t.trial, static_cast<unsigned long long>(t.seed), t.mean_class_accuracy, t.timings.c1_seconds,
                      t.timings.sampling_seconds, t.timings.encoding_seconds, t.timings.training_seconds,
                      t.timings.evaluation_seconds);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "accuracy over %d trial(s): %.4f +/- %.4f\n", report.completed, report.mean,
                  report.stddev);
    os << buf;
}

}  // namespace hmax
