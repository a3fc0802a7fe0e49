#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "oula/harness.hpp"

using namespace oula;
namespace fs = std::filesystem;

namespace {

graph::HeteroGraph blob_graph(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    graph::HeteroGraph g;
    g.node_features.resize(n, 4);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        g.labels.push_back(label);
        g.registration_ids.push_back(i);
        for (int j = 0; j < 4; ++j) {
            g.node_features(i, j) = gauss(rng) + (label ? 2.0 : 0.0);
        }
        g.edge_src.push_back(i);
        g.edge_dst.push_back(i);
    }
    return g;
}

}  // namespace

TEST_CASE("metrics closed-form example") {
    const std::vector<int> y_true = {1, 1, 1, 1, 1, 0, 0, 0};
    const std::vector<int> y_pred = {1, 1, 1, 0, 0, 0, 0, 1};
    // tp=3 fn=2 fp=1 tn=2
    auto m = harness::compute_metrics(y_true, y_pred);
    CHECK(m.accuracy == doctest::Approx(5.0 / 8.0));
    const double f1_pos = 2.0 * 3 / (2.0 * 3 + 1 + 2);
    const double f1_neg = 2.0 * 2 / (2.0 * 2 + 2 + 1);
    CHECK(m.f1_weighted ==
          doctest::Approx(5.0 / 8.0 * f1_pos + 3.0 / 8.0 * f1_neg));
}

TEST_CASE("metrics edge cases") {
    auto perfect = harness::compute_metrics({1, 0, 1}, {1, 0, 1});
    CHECK(perfect.accuracy == doctest::Approx(1.0));
    CHECK(perfect.f1_weighted == doctest::Approx(1.0));
    auto wrong = harness::compute_metrics({1, 1, 1}, {0, 0, 0});
    CHECK(wrong.accuracy == doctest::Approx(0.0));
    CHECK(wrong.f1_weighted == doctest::Approx(0.0));
    CHECK_THROWS(harness::compute_metrics({}, {}));
    CHECK_THROWS(harness::compute_metrics({1}, {1, 0}));
}

TEST_CASE("early stopping halts after patience non-improving epochs") {
    // zero learning rate freezes the model, so validation loss is constant
    // from epoch 1 and the loop must stop at epoch patience + 1
    auto tg = blob_graph(12, 1);
    auto vg = blob_graph(8, 2);
    harness::TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.max_epochs = 800;
    cfg.patience = 100;
    cfg.seed = 3;
    cfg.gnn.hidden = 4;
    cfg.gnn.heads = 2;
    auto r = harness::train_gnn(tg, vg, gnn::ModelKind::HAN, cfg);
    CHECK(r.best_epoch == 1);
    CHECK(r.epochs_run == 101);
    CHECK(!r.diverged);
    for (const auto& h : r.history) {
        CHECK(h.val_loss == doctest::Approx(r.history[0].val_loss));
    }
}

TEST_CASE("training runs to max_epochs when patience never triggers") {
    auto tg = blob_graph(12, 4);
    auto vg = blob_graph(8, 5);
    harness::TrainConfig cfg;
    cfg.max_epochs = 15;
    cfg.patience = 1000;
    cfg.seed = 6;
    cfg.gnn.hidden = 4;
    cfg.gnn.heads = 2;
    auto r = harness::train_gnn(tg, vg, gnn::ModelKind::HGT, cfg);
    CHECK(r.epochs_run == 15);
    CHECK(r.best_epoch >= 1);
    CHECK(r.best_epoch <= 15);
    // best epoch really is the argmin of the recorded validation losses
    double best = 1e300;
    int arg = 0;
    for (size_t e = 0; e < r.history.size(); ++e) {
        if (r.history[e].val_loss < best) {
            best = r.history[e].val_loss;
            arg = int(e) + 1;
        }
    }
    CHECK(r.best_epoch == arg);
    CHECK(!r.best_params.empty());
}

TEST_CASE("learning reduces training loss on separable data") {
    auto tg = blob_graph(40, 7);
    auto vg = blob_graph(20, 8);
    harness::TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.max_epochs = 120;
    cfg.patience = 120;
    cfg.seed = 9;
    cfg.gnn.hidden = 8;
    cfg.gnn.heads = 2;
    for (auto kind : {gnn::ModelKind::HAN, gnn::ModelKind::HGT}) {
        auto r = harness::train_gnn(tg, vg, kind, cfg);
        REQUIRE(!r.history.empty());
        CHECK(r.history.back().train_loss < r.history.front().train_loss);
        const auto& best = r.history[r.best_epoch - 1];
        CHECK(best.val.accuracy > 0.8);
    }
}

TEST_CASE("grid points enumerate lexicographically") {
    harness::Grid grid;
    grid.learning_rate = {1e-3, 5e-3};
    grid.hidden = {32, 64};
    grid.heads = {4, 8};
    grid.dropout = {0.0, 0.3};
    auto pts = grid.points();
    REQUIRE(pts.size() == 16);
    CHECK(pts[0].learning_rate == 1e-3);
    CHECK(pts[0].hidden == 32);
    CHECK(pts[0].heads == 4);
    CHECK(pts[0].dropout == 0.0);
    CHECK(pts[1].dropout == 0.3);
    CHECK(pts[15].learning_rate == 5e-3);
    CHECK(pts[15].hidden == 64);
}

TEST_CASE("results table JSONL round-trip and fold means") {
    harness::ResultRow a{"LR", 5, 20, 0, {0.8, 0.79}, {0.7, 0.69}, 10, 1.5,
                         false};
    harness::ResultRow b{"LR", 5, 20, 1, {0.9, 0.89}, {0.8, 0.79}, 12, 2.5,
                         false};
    harness::ResultRow c{"LR", 5, 20, 2, {0.0, 0.0}, {0.0, 0.0}, 0, 0.1,
                         true};  // failed, excluded from means
    const std::string path =
        (fs::temp_directory_path() / "results_rt.jsonl").string();
    {
        std::ofstream out(path);
        for (const auto& r : {a, b, c}) {
            out << harness::ResultsTable::to_jsonl_line(r) << '\n';
        }
    }
    auto t = harness::ResultsTable::load_jsonl(path);
    fs::remove(path);
    REQUIRE(t.rows().size() == 3);
    CHECK(t.contains("LR", 5, 20, 1));
    CHECK(!t.contains("LR", 5, 40, 1));
    auto mean = t.fold_mean("LR", 5, 20);
    REQUIRE(mean);
    CHECK(mean->val.accuracy == doctest::Approx(0.75));
    CHECK(mean->val.f1_weighted == doctest::Approx(0.74));
    CHECK(!t.fold_mean("RF", 5, 20));
}

TEST_CASE("derived seeds differ across the run key") {
    std::set<std::uint64_t> seen;
    for (const std::string m : {"LR", "HAN"}) {
        for (int c : {1, 5}) {
            for (int d : {20, 40}) {
                for (int f = 0; f < 3; ++f) {
                    seen.insert(harness::derive_seed(42, m, c, d, f));
                }
            }
        }
    }
    CHECK(seen.size() == 24);
    CHECK(harness::derive_seed(42, "LR", 5, 20, 0) !=
          harness::derive_seed(43, "LR", 5, 20, 0));
}

TEST_CASE("run_sweep covers every key and resumes from the results file") {
    // small synthetic registration table
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    harness::SweepInputs inputs;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
        RegistrationRecord r;
        r.registration_id = i;
        r.info.id_student = 1000 + i / 2;  // sibling pairs
        r.info.code_module = i % 2 ? "AAA" : "CCC";
        r.info.code_presentation = "2014J";
        r.info.gender = i % 2 ? "M" : "F";
        r.info.region = i % 3 ? "Scotland" : "Wales";
        r.info.highest_education = "A Level or Equivalent";
        r.info.imd_band = "20-30%";
        r.info.age_band = "0-35";
        r.info.num_of_prev_attempts = i % 2;
        r.info.studied_credits = 60;
        r.info.disability = "N";
        r.info.final_result = i % 2 ? FinalResult::Pass : FinalResult::Fail;
        r.label = i % 2;
        r.course_category =
            i % 2 ? CourseCategory::SocialScience : CourseCategory::STEM;
        inputs.records.push_back(r);
    }
    std::vector<int> labels;
    for (const auto& r : inputs.records) labels.push_back(r.label);
    for (int day : {20, 40}) {
        grade::SnapshotGrades s;
        s.day = day;
        for (int i = 0; i < n; ++i) {
            s.partial_grade.push_back(
                std::clamp(40.0 + 25.0 * labels[i] + 8.0 * gauss(rng), 0.0,
                           100.0));
        }
        inputs.snapshots.push_back(s);
    }
    inputs.encoder = tabular::Encoder::fit(inputs.records);
    inputs.folds = tabular::make_folds(labels, 5, 3);

    harness::SweepConfig cfg;
    cfg.baseline_models = {"LogisticRegression", "GaussianNB"};
    cfg.gnn_models = {"HAN"};
    cfg.cases = {1, 5};
    cfg.days = {20, 40};
    cfg.seed = 17;
    cfg.train.max_epochs = 25;
    cfg.train.patience = 25;
    cfg.train.gnn.hidden = 8;
    cfg.train.gnn.heads = 2;
    cfg.results_path =
        (fs::temp_directory_path() / "sweep_test.jsonl").string();
    fs::remove(cfg.results_path);

    auto results = harness::run_sweep(inputs, cfg);
    // 2 baselines x 2 days x 3 folds + 1 gnn x 2 cases x 2 days x 3 folds
    CHECK(results.rows().size() == 12 + 12);
    for (const std::string m : {"LogisticRegression", "GaussianNB"}) {
        for (int d : {20, 40}) {
            for (int f = 0; f < 3; ++f) CHECK(results.contains(m, 5, d, f));
        }
    }
    for (int c : {1, 5}) {
        for (int d : {20, 40}) {
            for (int f = 0; f < 3; ++f) CHECK(results.contains("HAN", c, d, f));
        }
    }
    for (const auto& r : results.rows()) CHECK(!r.failed);

    // resuming adds nothing
    auto resumed = harness::run_sweep(inputs, cfg);
    CHECK(resumed.rows().size() == 24);
    std::ifstream in(cfg.results_path);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) lines += !line.empty();
    CHECK(lines == 24);
    fs::remove(cfg.results_path);
}
