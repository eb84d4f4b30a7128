/**
 * @file hmax_cli.cpp
 * @brief Batch command line: synth, dump-filters, extract, train, eval, run.
 */

#include <hmax/classify.h>
#include <hmax/config.h>
#include <hmax/error.h>
#include <hmax/filterbank.h>
#include <hmax/harness.h>
#include <hmax/llc.h>
#include <hmax/parallel.h>
#include <hmax/preprocess.h>
#include <hmax/s1c1.h>
#include <hmax/synthetic.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hmax;

namespace {

struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> presets;
    std::vector<std::string> sets;
    std::string dataset;
    int threads = 0;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "JSON configuration file");
        app->add_option("--preset", presets, "Preset(s) applied after the file")->take_all();
        app->add_option("--set", sets, "Override as key=value (dotted keys)")->take_all();
        app->add_option("--dataset", dataset, "Dataset root (<root>/<class>/<image>)");
        app->add_option("-j,--threads", threads, "Worker threads");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        for (const auto& p : presets) apply_preset(cfg, p);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw Error("--set expects key=value, got " + s);
            set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!dataset.empty()) cfg.dataset_root = dataset;
        if (threads > 0) cfg.threads = threads;
        cfg.validate();
        return cfg;
    }
};

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& l : lines) os << l << "\n";
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream is(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(is, line);) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

fs::path classes_sidecar(const fs::path& features) {
    return fs::path(features.string() + ".classes");
}

int cmd_synth(const fs::path& out, const SyntheticSpec& spec) {
    const auto set = generate_synthetic_dataset(spec);
    write_dataset(out, set);
    std::cout << "wrote " << set.total_images() << " images in " << set.classes.size() << " classes to " << out.string()
              << "\n";
    return 0;
}

int cmd_dump_filters(const ExperimentConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    const auto bank = build_filter_bank(cfg.n_orientations, cfg.include_spot, cfg.filter_size, cfg.effective_sigma());
    for (std::size_t f = 0; f < bank.filters.size(); ++f) {
        const Filter& filt = bank.filters[f];
        char stem[64];
        if (filt.kind == FilterKind::kSpot) {
            std::snprintf(stem, sizeof stem, "filter_%02zu_spot", f);
        } else {
            std::snprintf(stem, sizeof stem, "filter_%02zu_edge_%06.2f", f, filt.orientation_deg);
        }
        std::ofstream csv(out / (std::string(stem) + ".csv"));
        csv.precision(17);
        for (int r = 0; r < filt.size; ++r) {
            for (int c = 0; c < filt.size; ++c) csv << (c ? "," : "") << filt.at(r, c);
            csv << "\n";
        }
        const auto [lo, hi] = std::minmax_element(filt.weights.begin(), filt.weights.end());
        const double range = std::max(*hi - *lo, 1e-12);
        RgbImage img(filt.size, filt.size);
        for (int r = 0; r < filt.size; ++r) {
            for (int c = 0; c < filt.size; ++c) {
                const double g = (filt.at(r, c) - *lo) / range;
                for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = g;
            }
        }
        write_png(out / (std::string(stem) + ".png"), img);
    }
    std::cout << "wrote " << bank.filters.size() << " filters to " << out.string() << "\n";
    return 0;
}

fs::path c1_cache_file(const fs::path& dir, const ExperimentConfig& cfg, const std::string& cls, const std::string& id) {
    const auto h = std::hash<std::string>{}(cfg.c1_key());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016zx", h);
    return dir / buf / cls / (id + ".c1");
}

int cmd_extract(const ExperimentConfig& cfg, const fs::path& out, const std::string& dict_path,
                const std::string& cache_dir) {
    const LabeledImageSet set = load_or_generate(cfg);
    const FilterBank bank = build_filter_bank(cfg.n_orientations, cfg.include_spot, cfg.filter_size, cfg.effective_sigma());

    std::vector<ImageRef> refs;
    for (std::size_t c = 0; c < set.images.size(); ++c) {
        for (std::size_t i = 0; i < set.images[c].size(); ++i) refs.push_back({static_cast<int>(c), static_cast<int>(i)});
    }
    std::vector<C1Stack> stacks(refs.size());
    parallel_for(refs.size(), cfg.threads, [&](std::size_t n) {
        const auto& img = set.images[refs[n].label][refs[n].index];
        if (!cache_dir.empty()) {
            const auto file = c1_cache_file(cache_dir, cfg, set.classes[refs[n].label], img.id);
            if (fs::exists(file)) {
                stacks[n] = read_c1_stack(file);
                return;
            }
            stacks[n] = extract_c1(img.image, cfg, bank);
            fs::create_directories(file.parent_path());
            write_c1_stack(file, stacks[n]);
            stacks[n] = read_c1_stack(file);  // cached and fresh runs see the same float32 values
            return;
        }
        stacks[n] = extract_c1(img.image, cfg, bank);
    });

    TemplateDictionary dict;
    if (!dict_path.empty() && fs::exists(dict_path)) {
        dict = read_dictionary(dict_path);
        std::cout << "loaded " << dict.p << " templates from " << dict_path << "\n";
    } else {
        dict = sample_templates(std::span<const C1Stack>(stacks), cfg.p, template_seed(cfg.seed));
        if (!dict_path.empty()) {
            write_dictionary(dict_path, dict);
            dict = read_dictionary(dict_path);
            std::cout << "sampled " << dict.p << " templates into " << dict_path << "\n";
        }
    }

    std::vector<FeatureVector> features(refs.size());
    parallel_for(refs.size(), cfg.threads, [&](std::size_t n) { features[n] = encode_features(stacks[n], dict, cfg); });
    std::vector<int> labels;
    for (const auto& r : refs) labels.push_back(r.label);
    export_sparse(out, features, labels);
    write_lines(classes_sidecar(out), set.classes);
    std::cout << "wrote " << features.size() << " feature vectors of length "
              << (features.empty() ? 0 : features.front().size()) << " to " << out.string() << "\n";
    for (const auto& s : set.skipped) std::cout << "skipped " << s.path << ": " << s.reason << "\n";
    return 0;
}

int cmd_train(const fs::path& features_path, const fs::path& out, double cost, int threads) {
    const SparseDataset data = read_sparse(features_path);
    std::vector<std::string> classes = read_lines(classes_sidecar(features_path));
    const int max_label = data.labels.empty() ? -1 : *std::max_element(data.labels.begin(), data.labels.end());
    for (int c = static_cast<int>(classes.size()); c <= max_label; ++c) classes.push_back(std::to_string(c));
    TrainOptions opt;
    opt.cost = cost;
    opt.threads = threads;
    const auto result = train(data.features, data.labels, classes, opt);
    save_model(out, result.model);
    for (std::size_t c = 0; c < result.traces.size(); ++c) {
        std::printf("class %-24s iterations %3zu  objective %.6f  |grad| %.3e\n", classes[c].c_str(),
                    result.traces[c].objective.size() - 1, result.traces[c].objective.back(),
                    result.traces[c].gradient_norm);
    }
    std::cout << "model written to " << out.string() << "\n";
    return 0;
}

int cmd_eval(const fs::path& model_path, const fs::path& features_path, const std::string& csv) {
    const LinearModel model = load_model(model_path);
    const SparseDataset data = read_sparse(features_path, model.dim);
    std::vector<ClassAccuracy> classes(model.classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) classes[c].name = model.classes[c];
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const int label = data.labels[i];
        if (label < 0 || label >= static_cast<int>(classes.size())) throw Error("label outside model classes");
        auto f = data.features[i];
        if (static_cast<int>(f.size()) != model.dim) throw Error("feature length does not match model");
        ++classes[label].tested;
        if (predict(model, f) == label) ++classes[label].correct;
    }
    std::vector<ClassAccuracy> tested;
    for (const auto& c : classes) {
        if (c.tested > 0) tested.push_back(c);
    }
    Report report;
    TrialResult trial;
    trial.classes = tested;
    trial.mean_class_accuracy = mean_class_accuracy(tested);
    report.trials.push_back(trial);
    report.completed = 1;
    report.mean = trial.mean_class_accuracy;
    for (const auto& c : tested) std::printf("%-28s %4d / %4d  %.4f\n", c.name.c_str(), c.correct, c.tested, c.accuracy());
    std::printf("mean per-class accuracy: %.4f\n", report.mean);
    if (!csv.empty()) write_report_csv(csv, report);
    return 0;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& csv, const std::string& features_out) {
    const LabeledImageSet set = load_or_generate(cfg);
    RunOptions options;
    if (!features_out.empty()) options.features_dir = features_out;
    const Report report = run_experiment(cfg, set, options);
    print_report(std::cout, report);
    if (!csv.empty()) write_report_csv(csv, report);
    return report.completed == cfg.n_trials ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HMAX with locality-constrained linear coding"};
    app.require_subcommand(1);

    SyntheticSpec synth_spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic shape dataset");
    synth->add_option("-o,--out", synth_out, "Output directory")->required();
    synth->add_option("--classes", synth_spec.n_classes, "Number of classes");
    synth->add_option("--per-class", synth_spec.per_class, "Images per class");
    synth->add_option("--side", synth_spec.image_side, "Image side in pixels");
    synth->add_option("--seed", synth_spec.seed, "Random seed");

    ConfigArgs dump_args;
    std::string dump_out;
    auto* dump = app.add_subcommand("dump-filters", "Write S1 kernels as CSV and PNG");
    dump_args.attach(dump);
    dump->add_option("-o,--out", dump_out, "Output directory")->required();

    ConfigArgs extract_args;
    std::string extract_out, dict_path, cache_dir;
    auto* extract = app.add_subcommand("extract", "Dataset to C2 features (sparse text)");
    extract_args.attach(extract);
    extract->add_option("-o,--out", extract_out, "Feature file")->required();
    extract->add_option("--dictionary", dict_path, "Template dictionary to load, or to create if missing");
    extract->add_option("--c1-cache", cache_dir, "Directory for cached C1 stacks");

    std::string train_features, train_out;
    double train_cost = 0.1;
    int train_threads = 1;
    auto* train_cmd = app.add_subcommand("train", "Train the linear classifier");
    train_cmd->add_option("-f,--features", train_features, "Feature file")->required();
    train_cmd->add_option("-o,--out", train_out, "Model file")->required();
    train_cmd->add_option("--cost", train_cost, "Regularization trade-off C");
    train_cmd->add_option("-j,--threads", train_threads, "Worker threads");

    std::string eval_model, eval_features, eval_csv;
    auto* eval = app.add_subcommand("eval", "Evaluate a model on a feature file");
    eval->add_option("-m,--model", eval_model, "Model file")->required();
    eval->add_option("-f,--features", eval_features, "Feature file")->required();
    eval->add_option("--csv", eval_csv, "CSV report");

    ConfigArgs run_args;
    std::string run_csv, run_features;
    auto* run = app.add_subcommand("run", "Full multi-trial experiment");
    run_args.attach(run);
    run->add_option("--csv", run_csv, "CSV report");
    run->add_option("--features-out", run_features, "Directory for per-trial feature files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_out, synth_spec);
        if (dump->parsed()) return cmd_dump_filters(dump_args.resolve(), dump_out);
        if (extract->parsed()) return cmd_extract(extract_args.resolve(), extract_out, dict_path, cache_dir);
        if (train_cmd->parsed()) return cmd_train(train_features, train_out, train_cost, train_threads);
        if (eval->parsed()) return cmd_eval(eval_model, eval_features, eval_csv);
        if (run->parsed()) return cmd_run(run_args.resolve(), run_csv, run_features);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
