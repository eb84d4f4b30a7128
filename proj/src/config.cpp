#include <hmax/config.h>
#include <hmax/error.h>

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hmax {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (max_side < 32) throw Error("max_side must be >= 32");
    if (n_orientations < 1) throw Error("n_orientations must be >= 1");
    if (filter_size < 3 || filter_size % 2 == 0) throw Error("filter_size must be odd and >= 3");
    if (sigma < 0.0) throw Error("sigma must be nonnegative");
    if (c1_window < 1 || c1_stride < 1) throw Error("C1 window and stride must be positive");
    s1_whitening().validate();
    if (p < 1) throw Error("p must be >= 1");
    llc_params().validate(p);
    if (!(cost > 0.0)) throw Error("classifier cost must be positive");
    if (n_train < 1 || n_test_max < 1) throw Error("n_train and n_test_max must be positive");
    if (n_trials < 1) throw Error("n_trials must be >= 1");
    if (threads < 1) throw Error("threads must be >= 1");
    if (dataset_root.empty() && synthetic.n_classes < 2) throw Error("synthetic dataset needs >= 2 classes");
}

WhiteningParams ExperimentConfig::s1_whitening() const {
    return {alpha, beta, whitening_mode};
}

LLCParams ExperimentConfig::llc_params() const {
    LLCParams params;
    params.k = k;
    params.lambda = lambda;
    params.whitening = {s2_alpha.value_or(alpha), s2_beta.value_or(beta), whitening_mode};
    return params;
}

std::string ExperimentConfig::c1_key() const {
    std::ostringstream os;
    os.precision(17);
    os << max_side << '|' << greyscale_only << '|' << n_orientations << '|' << include_spot << '|'
       << filter_size << '|' << effective_sigma() << '|' << c1_window << '|' << c1_stride << '|' << alpha
       << '|' << beta << '|' << static_cast<int>(whitening_mode);
    return os.str();
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const json&)>;

template <typename T>
Setter field(T ExperimentConfig::*member) {
    return [member](ExperimentConfig& c, const json& v) { c.*member = v.get<T>(); };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"dataset.root", field(&ExperimentConfig::dataset_root)},
        {"dataset.synthetic.classes", [](auto& c, const json& v) { c.synthetic.n_classes = v.get<int>(); }},
        {"dataset.synthetic.per_class", [](auto& c, const json& v) { c.synthetic.per_class = v.get<int>(); }},
        {"dataset.synthetic.image_side", [](auto& c, const json& v) { c.synthetic.image_side = v.get<int>(); }},
        {"dataset.synthetic.seed", [](auto& c, const json& v) { c.synthetic.seed = v.get<std::uint64_t>(); }},
        {"preprocess.max_side", field(&ExperimentConfig::max_side)},
        {"preprocess.greyscale_only", field(&ExperimentConfig::greyscale_only)},
        {"s1.n_orientations", field(&ExperimentConfig::n_orientations)},
        {"s1.include_spot", field(&ExperimentConfig::include_spot)},
        {"s1.filter_size", field(&ExperimentConfig::filter_size)},
        {"s1.sigma", field(&ExperimentConfig::sigma)},
        {"c1.window", field(&ExperimentConfig::c1_window)},
        {"c1.stride", field(&ExperimentConfig::c1_stride)},
        {"alpha", field(&ExperimentConfig::alpha)},
        {"beta", field(&ExperimentConfig::beta)},
        {"whitening_mode",
         [](auto& c, const json& v) {
             const auto s = v.get<std::string>();
             if (s == "partial") c.whitening_mode = WhiteningMode::kPartial;
             else if (s == "bypass") c.whitening_mode = WhiteningMode::kBypass;
             else throw Error("whitening_mode must be partial or bypass");
         }},
        {"s2.alpha", [](auto& c, const json& v) { c.s2_alpha = v.get<double>(); }},
        {"s2.beta", [](auto& c, const json& v) { c.s2_beta = v.get<double>(); }},
        {"llc.p", field(&ExperimentConfig::p)},
        {"llc.k", field(&ExperimentConfig::k)},
        {"llc.lambda", field(&ExperimentConfig::lambda)},
        {"llc.resample_per_trial", field(&ExperimentConfig::resample_templates_per_trial)},
        {"spm.mode", [](auto& c, const json& v) { c.spm_mode = parse_spm_mode(v.get<std::string>()); }},
        {"classifier.cost", field(&ExperimentConfig::cost)},
        {"protocol.n_train", field(&ExperimentConfig::n_train)},
        {"protocol.n_test_max", field(&ExperimentConfig::n_test_max)},
        {"protocol.n_trials", field(&ExperimentConfig::n_trials)},
        {"protocol.seed", field(&ExperimentConfig::seed)},
        {"threads", field(&ExperimentConfig::threads)},
    };
    return table;
}

void set_json(ExperimentConfig& cfg, const std::string& key, const json& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw Error("unknown config key: " + key);
    try {
        it->second(cfg, value);
    } catch (const json::exception& e) {
        throw Error("bad value for " + key + ": " + e.what());
    }
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    for (const auto& [k, v] : node.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) flatten(v, key, out);
        else out.emplace_back(key, v);
    }
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"default", "arch-I", "arch-II", "arch-III", "full", "greyscale-only", "global-max",
            "spm3", "no-whitening", "no-whitening-bypass", "full-whitening"};
}

void apply_preset(ExperimentConfig& cfg, const std::string& name) {
    auto final_system = [&](int orientations, bool spot, int p) {
        cfg.n_orientations = orientations;
        cfg.include_spot = spot;
        cfg.p = p;
        cfg.max_side = 300;
        cfg.k = 15;
    };
    if (name == "default" || name == "full") {
        cfg.greyscale_only = false;
        cfg.spm_mode = SpmMode::kFull;
        cfg.alpha = 0.98;
        cfg.whitening_mode = WhiteningMode::kPartial;
    } else if (name == "arch-I") {
        final_system(8, true, 3000);
    } else if (name == "arch-II") {
        final_system(12, false, 2000);
    } else if (name == "arch-III") {
        final_system(12, false, 4000);
    } else if (name == "greyscale-only") {
        cfg.greyscale_only = true;
    } else if (name == "global-max") {
        cfg.spm_mode = SpmMode::kGlobalMax;
    } else if (name == "spm3") {
        cfg.spm_mode = SpmMode::kSpm3;
    } else if (name == "no-whitening") {
        cfg.alpha = 0.0;
        cfg.whitening_mode = WhiteningMode::kPartial;
    } else if (name == "no-whitening-bypass") {
        cfg.whitening_mode = WhiteningMode::kBypass;
    } else if (name == "full-whitening") {
        cfg.alpha = 1.0;
        cfg.whitening_mode = WhiteningMode::kPartial;
    } else {
        throw Error("unknown preset: " + name);
    }
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") {
        apply_preset(cfg, value);
        return;
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    set_json(cfg, key, parsed);
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error("config is not a JSON object");
    ExperimentConfig cfg;
    if (doc.contains("preset")) {
        if (doc["preset"].is_array()) {
            for (const auto& p : doc["preset"]) apply_preset(cfg, p.get<std::string>());
        } else {
            apply_preset(cfg, doc["preset"].get<std::string>());
        }
        doc.erase("preset");
    }
    std::vector<std::pair<std::string, json>> entries;
    flatten(doc, "", entries);
    for (const auto& [key, value] : entries) set_json(cfg, key, value);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["dataset"]["root"] = cfg.dataset_root;
    j["dataset"]["synthetic"] = {{"classes", cfg.synthetic.n_classes},
                                 {"per_class", cfg.synthetic.per_class},
                                 {"image_side", cfg.synthetic.image_side},
                                 {"seed", cfg.synthetic.seed}};
    j["preprocess"] = {{"max_side", cfg.max_side}, {"greyscale_only", cfg.greyscale_only}};
    j["s1"] = {{"n_orientations", cfg.n_orientations},
               {"include_spot", cfg.include_spot},
               {"filter_size", cfg.filter_size},
               {"sigma", cfg.effective_sigma()}};
    j["c1"] = {{"window", cfg.c1_window}, {"stride", cfg.c1_stride}};
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["whitening_mode"] = cfg.whitening_mode == WhiteningMode::kBypass ? "bypass" : "partial";
    const auto llc = cfg.llc_params();
    j["s2"] = {{"alpha", llc.whitening.alpha}, {"beta", llc.whitening.beta}};
    j["llc"] = {{"p", cfg.p}, {"k", cfg.k}, {"lambda", cfg.lambda},
                {"resample_per_trial", cfg.resample_templates_per_trial}};
    j["spm"]["mode"] = to_string(cfg.spm_mode);
    j["classifier"]["cost"] = cfg.cost;
    j["protocol"] = {{"n_train", cfg.n_train}, {"n_test_max", cfg.n_test_max},
                     {"n_trials", cfg.n_trials}, {"seed", cfg.seed}};
    j["threads"] = cfg.threads;
    return j.dump(2);
}

}  // namespace hmax
