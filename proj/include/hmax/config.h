/**
 * @file config.h
 * @brief Experiment configuration, presets, and the JSON configuration file.
 *
 * Every field is addressable by a dotted key (e.g. "llc.p", "protocol.seed");
 * the JSON file uses the same keys as nested objects. Alpha and beta are
 * top-level keys.
 */
#pragma once

#include <hmax/conditioning.h>
#include <hmax/llc.h>
#include <hmax/spm.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hmax {

struct SyntheticSpec {
    int n_classes = 10;
    int per_class = 40;
    int image_side = 96;
    std::uint64_t seed = 7;
};

struct ExperimentConfig {
    std::string dataset_root;  ///< empty: use the synthetic generator
    SyntheticSpec synthetic;

    int max_side = 240;
    bool greyscale_only = false;

    int n_orientations = 12;
    bool include_spot = false;
    int filter_size = 11;
    double sigma = 0.0;  ///< 0 selects filter_size / 4

    int c1_window = 12;
    int c1_stride = 6;

    double alpha = 0.98;
    double beta = 3.0;
    WhiteningMode whitening_mode = WhiteningMode::kPartial;
    std::optional<double> s2_alpha;  ///< S2 reuses alpha/beta unless set
    std::optional<double> s2_beta;

    int p = 1000;
    int k = 20;
    double lambda = 0.25;
    bool resample_templates_per_trial = true;

    SpmMode spm_mode = SpmMode::kFull;
    double cost = 0.1;

    int n_train = 30;
    int n_test_max = 50;
    int n_trials = 5;
    std::uint64_t seed = 1;

    int threads = 1;

    void validate() const;

    double effective_sigma() const { return sigma > 0.0 ? sigma : filter_size / 4.0; }
    WhiteningParams s1_whitening() const;
    LLCParams llc_params() const;
    /// Identifies everything that determines C1 output.
    std::string c1_key() const;
};

/// Names accepted by apply_preset.
std::vector<std::string> preset_names();

/// Architecture presets arch-I/II/III and the ablation presets full,
/// greyscale-only, global-max, spm3, no-whitening, no-whitening-bypass and
/// full-whitening. Only the fields the preset concerns are touched.
void apply_preset(ExperimentConfig& cfg, const std::string& name);

/// Sets one field from its dotted key; `value` is JSON text or a bare string.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads a JSON config. A top-level "preset" is applied before the other keys.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Resolved configuration as pretty JSON.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace hmax
