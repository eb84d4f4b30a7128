#include <doctest.h>

#include <hmax/config.h>
#include <hmax/error.h>
#include <hmax/harness.h>
#include <hmax/synthetic.h>

#include "test_util.h"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

using namespace hmax;

namespace {

LabeledImageSet fake_set(std::vector<int> counts) {
    LabeledImageSet set;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        set.classes.push_back("class" + std::to_string(c));
        std::vector<LabeledImage> imgs;
        for (int i = 0; i < counts[c]; ++i) imgs.push_back({std::to_string(i) + ".png", RgbImage(1, 1)});
        set.images.push_back(std::move(imgs));
    }
    return set;
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.synthetic = {2, 40, 64, 3};
    cfg.max_side = 64;
    cfg.p = 50;
    cfg.k = 5;
    cfg.n_trials = 2;
    cfg.seed = 11;
    return cfg;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("split_dataset sizes") {
    const auto set = fake_set({100, 35, 31});
    const auto split = split_dataset(set, 30, 50, 1);
    int train[3] = {}, test[3] = {};
    for (const auto& r : split.train) ++train[r.label];
    for (const auto& r : split.test) ++test[r.label];
    CHECK(train[0] == 30);
    CHECK(test[0] == 50);
    CHECK(train[1] == 30);
    CHECK(test[1] == 5);
    CHECK(train[2] == 30);
    CHECK(test[2] == 1);

    std::set<ImageRef> tr(split.train.begin(), split.train.end());
    CHECK(tr.size() == split.train.size());
    for (const auto& r : split.test) CHECK(tr.count(r) == 0);
}

TEST_CASE("split_dataset determinism and seeds") {
    const auto set = fake_set({60, 60});
    const auto a = split_dataset(set, 30, 50, 5);
    const auto b = split_dataset(set, 30, 50, 5);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(split_dataset(set, 30, 50, 6).train != a.train);
}

TEST_CASE("split_dataset rejects small classes by name") {
    const auto set = fake_set({40, 30});
    CHECK_THROWS_WITH_AS(split_dataset(set, 30, 50, 1), doctest::Contains("class1"), Error);
}

TEST_CASE("mean per-class accuracy is unweighted") {
    // 9 of 10 in one class and 1 of 2 in the other: pooled 10/12, per-class mean 0.7.
    const std::vector<ClassAccuracy> acc = {{"a", 9, 10}, {"b", 1, 2}};
    CHECK(mean_class_accuracy(acc) == doctest::Approx(0.7));
}

TEST_CASE("synthetic generator") {
    SUBCASE("deterministic in the seed") {
        const auto a = generate_synthetic_dataset(3, 4, 48, 9);
        const auto b = generate_synthetic_dataset(3, 4, 48, 9);
        const auto c = generate_synthetic_dataset(3, 4, 48, 10);
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 4; ++i) {
                CHECK(a.images[k][i].image == b.images[k][i].image);
                CHECK(a.images[k][i].id == b.images[k][i].id);
            }
        CHECK_FALSE(a.images[0][0].image == c.images[0][0].image);
    }
    SUBCASE("class layout") {
        const auto set = generate_synthetic_dataset(14, 2, 40, 1);
        CHECK(set.classes.size() == 14);
        CHECK(std::is_sorted(set.classes.begin(), set.classes.end()));
        CHECK(set.classes[0].find("horizontal-bars") != std::string::npos);
        CHECK(set.classes[1].find("vertical-bars") != std::string::npos);
        for (const auto& cls : set.images) {
            CHECK(cls.size() == 2);
            std::set<std::string> ids;
            for (const auto& img : cls) {
                ids.insert(img.id);
                CHECK(img.image.width() == 40);
                CHECK(img.image.height() == 40);
            }
            CHECK(ids.size() == cls.size());
        }
    }
    SUBCASE("5 classes at side 64 render in under a second") {
        const auto t0 = std::chrono::steady_clock::now();
        const auto set = generate_synthetic_dataset(5, 40, 64, 2);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(set.total_images() == 200);
        CHECK(s < 1.0);
    }
    SUBCASE("write and reload") {
        testutil::TempDir dir("synth");
        const auto set = generate_synthetic_dataset(2, 3, 32, 4);
        write_dataset(dir.path(), set);
        const auto back = load_dataset(dir.path());
        CHECK(back.classes == set.classes);
        REQUIRE(back.total_images() == 6);
        CHECK(back.images[1][2].image == set.images[1][2].image);
    }
}

TEST_CASE("configuration") {
    SUBCASE("defaults") {
        ExperimentConfig cfg;
        CHECK(cfg.alpha == 0.98);
        CHECK(cfg.beta == 3.0);
        CHECK(cfg.p == 1000);
        CHECK(cfg.k == 20);
        CHECK(cfg.lambda == 0.25);
        CHECK(cfg.max_side == 240);
        CHECK(cfg.n_orientations == 12);
        CHECK(cfg.filter_size == 11);
        CHECK(cfg.effective_sigma() == 2.75);
        CHECK(cfg.cost == 0.1);
        CHECK(cfg.n_train == 30);
        CHECK(cfg.n_test_max == 50);
        CHECK(cfg.spm_mode == SpmMode::kFull);
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("architecture presets") {
        ExperimentConfig a;
        apply_preset(a, "arch-I");
        CHECK(a.n_orientations == 8);
        CHECK(a.include_spot);
        CHECK(a.p == 3000);
        CHECK(a.max_side == 300);
        CHECK(a.k == 15);
        ExperimentConfig b;
        apply_preset(b, "arch-II");
        CHECK(b.p == 2000);
        CHECK_FALSE(b.include_spot);
        ExperimentConfig c;
        apply_preset(c, "arch-III");
        CHECK(c.p == 4000);
    }
    SUBCASE("ablation presets") {
        ExperimentConfig cfg;
        apply_preset(cfg, "greyscale-only");
        CHECK(cfg.greyscale_only);
        apply_preset(cfg, "global-max");
        CHECK(cfg.spm_mode == SpmMode::kGlobalMax);
        apply_preset(cfg, "spm3");
        CHECK(cfg.spm_mode == SpmMode::kSpm3);
        apply_preset(cfg, "no-whitening");
        CHECK(cfg.alpha == 0.0);
        apply_preset(cfg, "full-whitening");
        CHECK(cfg.alpha == 1.0);
        apply_preset(cfg, "no-whitening-bypass");
        CHECK(cfg.whitening_mode == WhiteningMode::kBypass);
        apply_preset(cfg, "full");
        CHECK(cfg.alpha == 0.98);
        CHECK(cfg.spm_mode == SpmMode::kFull);
        CHECK(cfg.whitening_mode == WhiteningMode::kPartial);
        for (const auto& name : preset_names()) CHECK_NOTHROW(apply_preset(cfg, name));
        CHECK_THROWS_AS(apply_preset(cfg, "arch-IV"), Error);
    }
    SUBCASE("dotted keys") {
        ExperimentConfig cfg;
        set_config_value(cfg, "llc.p", "77");
        set_config_value(cfg, "alpha", "0.5");
        set_config_value(cfg, "spm.mode", "global-max");
        set_config_value(cfg, "dataset.root", "/data/caltech");
        set_config_value(cfg, "s2.beta", "1.5");
        set_config_value(cfg, "preset", "arch-II");
        CHECK(cfg.p == 2000);
        CHECK(cfg.alpha == 0.5);
        CHECK(cfg.spm_mode == SpmMode::kGlobalMax);
        CHECK(cfg.dataset_root == "/data/caltech");
        CHECK(cfg.llc_params().whitening.beta == 1.5);
        CHECK(cfg.s1_whitening().beta == 3.0);
        CHECK_THROWS_AS(set_config_value(cfg, "llc.q", "1"), Error);
        CHECK_THROWS_AS(set_config_value(cfg, "llc.p", "\"many\""), Error);
    }
    SUBCASE("JSON file with presets and nested keys") {
        const auto cfg = config_from_json_text(R"({
            "preset": ["arch-I", "global-max"],
            "llc": {"k": 9},
            "alpha": 1.0,
            "protocol": {"n_trials": 7, "seed": 42}
        })");
        CHECK(cfg.p == 3000);
        CHECK(cfg.spm_mode == SpmMode::kGlobalMax);
        CHECK(cfg.k == 9);
        CHECK(cfg.alpha == 1.0);
        CHECK(cfg.n_trials == 7);
        CHECK(cfg.seed == 42);
        const auto again = config_from_json_text(config_to_json(cfg));
        CHECK(config_to_json(again) == config_to_json(cfg));
        CHECK_THROWS_AS(config_from_json_text("[1, 2]"), Error);
        CHECK_THROWS_AS(config_from_json_text(R"({"nope": 1})"), Error);
    }
    SUBCASE("validation") {
        ExperimentConfig cfg;
        cfg.k = 2000;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = {};
        cfg.alpha = 1.2;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = {};
        cfg.n_trials = 0;
        CHECK_THROWS_AS(cfg.validate(), Error);
    }
    SUBCASE("C1 key follows only what determines C1") {
        ExperimentConfig a, b;
        b.p = 5;
        b.spm_mode = SpmMode::kSpm3;
        CHECK(a.c1_key() == b.c1_key());
        b.alpha = 0.5;
        CHECK(a.c1_key() != b.c1_key());
    }
}

TEST_CASE("end-to-end on two synthetic classes") {
    const auto cfg = tiny_config();
    const auto set = load_or_generate(cfg);
    REQUIRE(set.classes.size() == 2);

    testutil::TempDir dir("e2e");
    const auto a = run_experiment(cfg, set, {dir / "a"});
    REQUIRE(a.trials.size() == 2);
    CHECK(a.completed == 2);
    for (const auto& t : a.trials) {
        CHECK_FALSE(t.aborted);
        CHECK(t.mean_class_accuracy > 0.9);
        CHECK(t.classes.size() == 2);
        CHECK(t.classes[0].tested == 10);
        // Templates come only from the trial's own training images.
        const auto split = split_dataset(set, cfg.n_train, cfg.n_test_max, t.seed);
        const std::set<ImageRef> train(split.train.begin(), split.train.end());
        CHECK_FALSE(t.template_sources.empty());
        for (const auto& r : t.template_sources) CHECK(train.count(r) == 1);
    }
    CHECK(a.mean > 0.9);

    auto cfg4 = cfg;
    cfg4.threads = 4;
    C1Cache cache;
    const auto b = run_experiment(cfg4, set, {dir / "b", &cache});
    CHECK(report_csv(a) == report_csv(b));
    for (const char* f : {"trial_0_train.txt", "trial_0_test.txt", "trial_1_train.txt", "trial_1_test.txt"}) {
        const auto fa = read_file(dir / "a" / f);
        CHECK_FALSE(fa.empty());
        CHECK(fa == read_file(dir / "b" / f));
    }

    // The cached table is reused when only post-C1 settings change.
    auto cfg_gm = cfg4;
    cfg_gm.spm_mode = SpmMode::kGlobalMax;
    cfg_gm.n_trials = 1;
    const auto c = run_experiment(cfg_gm, set, {{}, &cache});
    CHECK(c.completed == 1);

    const auto features = read_sparse(dir / "a" / "trial_0_train.txt", 50 * 52);
    CHECK(features.features.size() == 60);
    CHECK(features.features[0].size() == 50 * 52);
}

TEST_CASE("aborted trials are reported") {
    auto cfg = tiny_config();
    cfg.n_train = 45;  // more than the 40 images per class
    cfg.n_trials = 1;
    const auto set = load_or_generate(cfg);
    const auto r = run_experiment(cfg, set);
    REQUIRE(r.trials.size() == 1);
    CHECK(r.trials[0].aborted);
    CHECK(r.trials[0].error.find("needs more than 45") != std::string::npos);
    CHECK(r.completed == 0);
    CHECK(report_csv(r).find("aborted,0") != std::string::npos);
}

TEST_CASE("report CSV layout") {
    Report r;
    TrialResult t;
    t.trial = 0;
    t.classes = {{"a", 3, 4}, {"b", 1, 2}};
    t.mean_class_accuracy = mean_class_accuracy(t.classes);
    r.trials.push_back(t);
    r.completed = 1;
    r.mean = t.mean_class_accuracy;
    CHECK(report_csv(r) ==
          "kind,trial,class,correct,tested,accuracy\n"
          "class,0,a,3,4,0.750000\n"
          "class,0,b,1,2,0.500000\n"
          "trial_mean,0,,,,0.625000\n"
          "mean,,,,1,0.625000\n"
          "stddev,,,,1,0.000000\n");
    std::ostringstream os;
    print_report(os, r);
    CHECK(os.str().find("0.6250") != std::string::npos);
}
