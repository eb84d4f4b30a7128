/**
 * @file harness.h
 * @brief Evaluation protocol: splits, feature extraction, multi-trial runs, reports.
 */
#pragma once

#include <hmax/classify.h>
#include <hmax/config.h>
#include <hmax/filterbank.h>
#include <hmax/llc.h>
#include <hmax/preprocess.h>
#include <hmax/s1c1.h>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace hmax {

struct ImageRef {
    int label = 0;
    int index = 0;  ///< position within the class
    auto operator<=>(const ImageRef&) const = default;
};

struct Split {
    std::vector<ImageRef> train;
    std::vector<ImageRef> test;
};

/// Per class: n_train drawn without replacement, then up to n_test_max of the rest.
Split split_dataset(const LabeledImageSet& set, int n_train, int n_test_max, std::uint64_t seed);

/// resize -> contrast stretch -> opponent -> S1 -> C1 for one image.
C1Stack extract_c1(const RgbImage& image, const ExperimentConfig& cfg, const FilterBank& bank);

/// S2 encoding and C2 pooling of one C1 stack.
FeatureVector encode_features(const C1Stack& stack, const TemplateDictionary& dict, const ExperimentConfig& cfg);

/// C1 stacks for every image of a set, indexed [label][index].
using C1Table = std::vector<std::vector<C1Stack>>;

C1Table extract_all_c1(const LabeledImageSet& set, const ExperimentConfig& cfg, int threads);

/// In-memory C1 reuse across runs on one dataset, keyed by ExperimentConfig::c1_key().
class C1Cache {
public:
    std::shared_ptr<const C1Table> get_or_compute(const LabeledImageSet& set, const ExperimentConfig& cfg, int threads);

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const C1Table>> tables_;
};

struct ClassAccuracy {
    std::string name;
    int correct = 0;
    int tested = 0;
    double accuracy() const { return tested > 0 ? static_cast<double>(correct) / tested : 0.0; }
};

struct StageTimings {
    double c1_seconds = 0.0;
    double sampling_seconds = 0.0;
    double encoding_seconds = 0.0;
    double training_seconds = 0.0;
    double evaluation_seconds = 0.0;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    bool aborted = false;
    std::string error;
    std::vector<ClassAccuracy> classes;
    double mean_class_accuracy = 0.0;
    std::vector<ImageRef> template_sources;  ///< distinct images the dictionary was cut from
    StageTimings timings;
};

struct Report {
    std::string config_json;
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double stddev = 0.0;  ///< sample standard deviation over completed trials
    int completed = 0;
    std::vector<SkipRecord> skipped;
};

/// Unweighted mean over classes of correct / tested.
double mean_class_accuracy(const std::vector<ClassAccuracy>& classes);

struct RunOptions {
    std::filesystem::path features_dir;  ///< when set, trial_<t>_{train,test}.txt are written
    C1Cache* cache = nullptr;
};

/// Trial t uses seed + t for its split and a derived stream for template sampling.
Report run_experiment(const ExperimentConfig& cfg, const LabeledImageSet& set, const RunOptions& options = {});

/// Loads cfg.dataset_root, or generates the synthetic set when it is empty.
LabeledImageSet load_or_generate(const ExperimentConfig& cfg);

/// Seed used for the dictionary of a trial whose split seed is `split_seed`.
std::uint64_t template_seed(std::uint64_t split_seed);

/// One row per trial per class, then per-trial and overall aggregate rows.
void write_report_csv(const std::filesystem::path& path, const Report& report);
std::string report_csv(const Report& report);
void print_report(std::ostream& os, const Report& report);

}  // namespace hmax
