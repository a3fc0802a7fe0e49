// Command-line surface of the pipeline: preprocess, snapshots, baselines,
// graphs, train-gnn, sweep, report. One JSON config plus flag overrides;
// every artifact lands under --out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oula/baselines.hpp"
#include "oula/gnn.hpp"
#include "oula/grade.hpp"
#include "oula/graph.hpp"
#include "oula/harness.hpp"
#include "oula/ingest.hpp"
#include "oula/report.hpp"
#include "oula/tabular.hpp"

namespace fs = std::filesystem;
using namespace oula;

namespace {

struct RunConfig {
    std::string data_dir;
    std::string categories_path;  // empty = built-in module map
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    std::vector<std::string> baseline_models;  // empty = all nine
    std::vector<std::string> gnn_models = {"HAN", "HGT"};
    std::vector<int> cases = {1, 2, 3, 4, 5};
    std::vector<int> days;  // empty = all 13
    int folds = 5;
    bool grid_search = false;
    int tuning_day = 100;
    harness::TrainConfig train;
    harness::Grid grid;
};

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ValidationError("--config", e.what());
    }
    RunConfig cfg;
    maybe(j, "data_dir", cfg.data_dir);
    maybe(j, "categories", cfg.categories_path);
    maybe(j, "out_dir", cfg.out_dir);
    maybe(j, "seed", cfg.seed);
    maybe(j, "models", cfg.baseline_models);
    maybe(j, "gnn_models", cfg.gnn_models);
    maybe(j, "cases", cfg.cases);
    maybe(j, "days", cfg.days);
    maybe(j, "folds", cfg.folds);
    maybe(j, "grid_search", cfg.grid_search);
    maybe(j, "tuning_day", cfg.tuning_day);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        maybe(t, "learning_rate", cfg.train.learning_rate);
        maybe(t, "max_epochs", cfg.train.max_epochs);
        maybe(t, "patience", cfg.train.patience);
        maybe(t, "hidden", cfg.train.gnn.hidden);
        maybe(t, "heads", cfg.train.gnn.heads);
        maybe(t, "dropout", cfg.train.gnn.dropout);
        maybe(t, "hgt_layers", cfg.train.gnn.hgt_layers);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        maybe(g, "learning_rate", cfg.grid.learning_rate);
        maybe(g, "hidden", cfg.grid.hidden);
        maybe(g, "heads", cfg.grid.heads);
        maybe(g, "dropout", cfg.grid.dropout);
    }
    return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> split_int_list(const std::string& s, const char* flag) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "not an integer: " + item);
        }
    }
    return out;
}

void validate(const RunConfig& cfg) {
    std::set<int> valid_days;
    for (const auto& pt : grade::snapshot_days()) valid_days.insert(pt.day);
    for (int d : cfg.days) {
        if (!valid_days.count(d)) {
            throw CLI::ValidationError(
                "--days", std::to_string(d) + " is not a snapshot day");
        }
    }
    for (int c : cfg.cases) {
        if (c < 1 || c > 5) {
            throw CLI::ValidationError("--cases", "cases must be in 1..5");
        }
    }
    for (const auto& m : cfg.baseline_models) baselines::family_by_name(m);
    for (const auto& m : cfg.gnn_models) gnn::model_by_name(m);
    if (cfg.folds < 2) throw CLI::ValidationError("--folds", "need >= 2");
}

// Everything downstream of raw CSV loading, built once per invocation.
struct Pipeline {
    ingest::PreprocessResult pre;
    std::vector<grade::SnapshotGrades> snaps;
    tabular::Encoder encoder;
    tabular::FoldAssignment folds;
    long unique_students = 0;
    double pass_share = 0.0;
};

Pipeline build_pipeline(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) {
        throw CLI::ValidationError("--data-dir",
                                   "this subcommand needs the dataset");
    }
    Pipeline p;
    auto raw = ingest::load_oula(cfg.data_dir);
    for (const auto& w : raw.warnings) std::cerr << "warning: " << w << '\n';
    const auto categories =
        cfg.categories_path.empty()
            ? ingest::default_course_categories()
            : ingest::load_course_categories(cfg.categories_path);
    p.pre = ingest::preprocess(raw, categories);
    for (const auto& w : p.pre.report.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    p.snaps = grade::build_snapshots(p.pre.records, raw.assessments,
                                     raw.submissions);
    p.encoder = tabular::Encoder::fit(p.pre.records);

    std::vector<int> labels;
    std::set<long> students;
    long positives = 0;
    for (const auto& r : p.pre.records) {
        labels.push_back(r.label);
        students.insert(r.info.id_student);
        positives += r.label;
    }
    p.unique_students = static_cast<long>(students.size());
    p.pass_share = labels.empty() ? 0.0
                                  : double(positives) / double(labels.size());
    p.folds = tabular::make_folds(labels, cfg.seed, cfg.folds);
    return p;
}

std::vector<int> effective_days(const RunConfig& cfg) {
    if (!cfg.days.empty()) return cfg.days;
    std::vector<int> days;
    for (const auto& pt : grade::snapshot_days()) days.push_back(pt.day);
    return days;
}

harness::SweepConfig sweep_config(const RunConfig& cfg) {
    harness::SweepConfig sc;
    sc.baseline_models = cfg.baseline_models;
    sc.gnn_models = cfg.gnn_models;
    sc.cases = cfg.cases;
    sc.days = effective_days(cfg);
    sc.seed = cfg.seed;
    sc.train = cfg.train;
    sc.do_grid_search = cfg.grid_search;
    sc.tuning_day = cfg.tuning_day;
    sc.grid = cfg.grid;
    sc.results_path = cfg.out_dir + "/results.jsonl";
    return sc;
}

int cmd_preprocess(const RunConfig& cfg, bool force) {
    const std::string table = cfg.out_dir + "/preprocessed.csv";
    if (!force && fs::exists(table)) {
        std::cout << table << " exists; skipping (use --force to redo)\n";
        return 0;
    }
    Pipeline p = build_pipeline(cfg);
    ingest::write_preprocessed_csv(table, p.pre.records);
    grade::write_weights_csv(cfg.out_dir + "/weights.csv", p.pre.weights);

    const auto& rep = p.pre.report;
    std::ofstream summary(cfg.out_dir + "/preprocess_report.txt");
    summary << "input_rows " << rep.input_rows << '\n'
            << "dropped_duplicates " << rep.dropped_duplicates << '\n'
            << "dropped_no_grades " << rep.dropped_no_grades << '\n'
            << "dropped_early_withdrawal " << rep.dropped_early_withdrawal
            << '\n'
            << "dropped_outliers " << rep.dropped_outliers << '\n'
            << "output_rows " << rep.output_rows << '\n'
            << "unique_students " << p.unique_students << '\n'
            << "pass_share " << p.pass_share << '\n';
    std::cout << "preprocessed " << rep.output_rows << " records ("
              << p.unique_students << " students, pass share " << p.pass_share
              << ")\n";
    return 0;
}

int cmd_snapshots(const RunConfig& cfg, bool force) {
    const std::string marker = cfg.out_dir + "/snapshot_day260.csv";
    if (!force && fs::exists(marker)) {
        std::cout << "snapshot files exist; skipping (use --force to redo)\n";
        return 0;
    }
    Pipeline p = build_pipeline(cfg);
    for (const auto& snap : p.snaps) {
        std::ofstream out(cfg.out_dir + "/snapshot_day" +
                          std::to_string(snap.day) + ".csv");
        out << "registration_id,label,partial_grade\n";
        for (size_t i = 0; i < p.pre.records.size(); ++i) {
            out << p.pre.records[i].registration_id << ','
                << p.pre.records[i].label << ',' << snap.partial_grade[i]
                << '\n';
        }
    }
    grade::write_weights_csv(cfg.out_dir + "/weights.csv", p.pre.weights);

    std::vector<long> reg_ids;
    for (const auto& r : p.pre.records) reg_ids.push_back(r.registration_id);
    tabular::write_folds_csv(cfg.out_dir + "/folds.csv", reg_ids, p.folds);

    const auto& last = p.snaps.back();
    auto ds = p.encoder.encode(p.pre.records, last.partial_grade, last.day);
    auto pca = tabular::pca_loadings(ds.features, 10);
    tabular::write_pca_csv(cfg.out_dir + "/pca_loadings.csv", pca,
                           ds.column_names);
    std::cout << "wrote " << p.snaps.size() << " snapshot files, folds.csv, "
              << "weights.csv, pca_loadings.csv\n";
    return 0;
}

int run_sweep_subset(const RunConfig& cfg, bool baselines_only) {
    Pipeline p = build_pipeline(cfg);
    harness::SweepConfig sc = sweep_config(cfg);
    if (baselines_only) sc.gnn_models.clear();
    harness::SweepInputs inputs{p.pre.records, p.snaps, p.encoder, p.folds};
    auto results = harness::run_sweep(inputs, sc);
    long failed = 0;
    for (const auto& r : results.rows()) failed += r.failed ? 1 : 0;
    std::cout << "results: " << results.rows().size() << " rows (" << failed
              << " failed) in " << sc.results_path << '\n';
    return failed == 0 ? 0 : 2;
}

int cmd_graphs(const RunConfig& cfg) {
    Pipeline p = build_pipeline(cfg);
    std::vector<int> days = cfg.days.empty() ? std::vector<int>{100}
                                             : cfg.days;
    std::vector<long> student_of;
    for (const auto& r : p.pre.records) student_of.push_back(r.info.id_student);

    std::ofstream stats(cfg.out_dir + "/graph_stats.csv");
    stats << "day,fold,split,nodes,edges,avg_degree,max_degree,modal_degree\n";
    for (int day : days) {
        const grade::SnapshotGrades* snap = nullptr;
        for (const auto& s : p.snaps) {
            if (s.day == day) snap = &s;
        }
        if (!snap) continue;
        auto ds = p.encoder.encode(p.pre.records, snap->partial_grade, day);
        for (int fold = 0; fold < p.folds.k; ++fold) {
            std::vector<int> train_rows, val_rows;
            for (size_t i = 0; i < p.folds.fold_of.size(); ++i) {
                (p.folds.fold_of[i] == fold ? val_rows : train_rows)
                    .push_back(static_cast<int>(i));
            }
            auto sc = tabular::Standardizer::fit(ds.features, train_rows);
            const std::pair<const char*, std::vector<int>*> splits[] = {
                {"train", &train_rows}, {"val", &val_rows}};
            for (const auto& [split, rows] : splits) {
                auto g = graph::build_graph(ds, student_of, *rows, 5, &sc);
                auto st = graph::graph_stats(g);
                stats << day << ',' << fold << ',' << split << ','
                      << st.node_count << ',' << st.edge_count << ','
                      << st.avg_degree << ',' << st.max_degree << ','
                      << st.modal_degree << '\n';
                const std::string stem = cfg.out_dir + "/graph_day" +
                                         std::to_string(day) + "_fold" +
                                         std::to_string(fold) + "_" + split;
                graph::dump_graph(g, stem + "_edges.txt",
                                  stem + "_features.csv", ds.column_names);
            }
        }
    }
    std::cout << "wrote graph dumps and " << cfg.out_dir
              << "/graph_stats.csv\n";
    return 0;
}

int cmd_train_gnn(const RunConfig& cfg) {
    Pipeline p = build_pipeline(cfg);
    const std::string model_name =
        cfg.gnn_models.empty() ? "HAN" : cfg.gnn_models.front();
    const int case_id = cfg.cases.empty() ? 5 : cfg.cases.front();
    const int day = cfg.days.empty() ? 100 : cfg.days.front();

    const grade::SnapshotGrades* snap = nullptr;
    for (const auto& s : p.snaps) {
        if (s.day == day) snap = &s;
    }
    if (!snap) throw CLI::ValidationError("--days", "no such snapshot day");
    auto ds = p.encoder.encode(p.pre.records, snap->partial_grade, day);

    std::vector<long> student_of;
    for (const auto& r : p.pre.records) student_of.push_back(r.info.id_student);
    std::vector<int> train_rows, val_rows;
    for (size_t i = 0; i < p.folds.fold_of.size(); ++i) {
        (p.folds.fold_of[i] == 0 ? val_rows : train_rows)
            .push_back(static_cast<int>(i));
    }
    auto sc = tabular::Standardizer::fit(ds.features, train_rows);
    auto tg = graph::build_graph(ds, student_of, train_rows, case_id, &sc);
    auto vg = graph::build_graph(ds, student_of, val_rows, case_id, &sc);

    harness::TrainConfig tc = cfg.train;
    tc.seed = harness::derive_seed(cfg.seed, model_name, case_id, day, 0);
    auto kind = gnn::model_by_name(model_name);
    auto result = harness::train_gnn(tg, vg, kind, tc);
    if (result.diverged || result.best_epoch == 0) {
        std::cerr << "training diverged\n";
        return 2;
    }

    gnn::GnnModel model(kind, tc.gnn,
                        static_cast<int>(tg.node_features.cols()), tc.seed);
    model.params() = result.best_params;
    const std::string stem = cfg.out_dir + "/" + model_name + "_case" +
                             std::to_string(case_id) + "_day" +
                             std::to_string(day);
    model.save(stem + ".json");
    std::ofstream hist(stem + "_history.csv");
    hist << "epoch,train_loss,val_loss,train_acc,train_f1,val_acc,val_f1\n";
    for (size_t e = 0; e < result.history.size(); ++e) {
        const auto& h = result.history[e];
        hist << (e + 1) << ',' << h.train_loss << ',' << h.val_loss << ','
             << h.train.accuracy << ',' << h.train.f1_weighted << ','
             << h.val.accuracy << ',' << h.val.f1_weighted << '\n';
    }
    const auto& best = result.history[result.best_epoch - 1];
    std::cout << model_name << " case " << case_id << " day " << day
              << ": best epoch " << result.best_epoch << "/"
              << result.epochs_run << ", val acc " << best.val.accuracy
              << ", val F1 " << best.val.f1_weighted << '\n';
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const std::string results_path = cfg.out_dir + "/results.jsonl";
    auto results = harness::ResultsTable::load_jsonl(results_path);
    if (results.rows().empty()) {
        std::cerr << "no results in " << results_path << '\n';
        return 1;
    }
    const auto days = effective_days(cfg);
    auto warnings = report::emit_tables(results, days, cfg.out_dir);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    tabular::PcaResult pca;
    std::vector<std::string> column_names;
    if (!cfg.data_dir.empty()) {
        Pipeline p = build_pipeline(cfg);
        const auto& last = p.snaps.back();
        auto ds = p.encoder.encode(p.pre.records, last.partial_grade,
                                   last.day);
        pca = tabular::pca_loadings(ds.features, 10);
        column_names = ds.column_names;
    } else {
        std::cerr << "no --data-dir: pca_heatmap will be empty\n";
    }
    report::emit_plots(results, pca, column_names, days, cfg.out_dir);
    std::cout << "wrote table4..table7 and figures to " << cfg.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Student-success prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, models, gnn_models, cases,
        days;
    std::uint64_t seed = 0;
    bool have_seed = false, force = false;

    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--data-dir", data_dir, "dataset directory");
    std::string categories;
    app.add_option("--categories", categories,
                   "module category CSV (code_module,category)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed")
        ->each([&](const std::string&) { have_seed = true; });
    app.add_option("--models", models, "comma-separated baseline list");
    app.add_option("--gnn-models", gnn_models, "comma-separated, HAN/HGT");
    app.add_option("--cases", cases, "comma-separated feature cases 1..5");
    app.add_option("--days", days, "comma-separated snapshot days");
    app.add_flag("--force", force, "redo existing outputs");
    app.fallthrough();

    auto* sub_pre = app.add_subcommand("preprocess",
                                       "ingest and filter the dataset");
    auto* sub_snap = app.add_subcommand("snapshots",
                                        "snapshot grades, folds, PCA");
    auto* sub_base = app.add_subcommand("baselines",
                                        "classical-model sweep only");
    auto* sub_graph = app.add_subcommand("graphs",
                                         "build and dump fold graphs");
    auto* sub_train = app.add_subcommand("train-gnn",
                                         "train one graph model run");
    auto* sub_sweep = app.add_subcommand("sweep", "full experiment sweep");
    auto* sub_report = app.add_subcommand("report", "tables and figures");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg =
            config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!data_dir.empty()) cfg.data_dir = data_dir;
        if (!categories.empty()) cfg.categories_path = categories;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (have_seed) cfg.seed = seed;
        if (!models.empty()) cfg.baseline_models = split_list(models);
        if (!gnn_models.empty()) cfg.gnn_models = split_list(gnn_models);
        if (!cases.empty()) cfg.cases = split_int_list(cases, "--cases");
        if (!days.empty()) cfg.days = split_int_list(days, "--days");
        validate(cfg);
        fs::create_directories(cfg.out_dir);

        if (sub_pre->parsed()) return cmd_preprocess(cfg, force);
        if (sub_snap->parsed()) return cmd_snapshots(cfg, force);
        if (sub_base->parsed()) return run_sweep_subset(cfg, true);
        if (sub_graph->parsed()) return cmd_graphs(cfg);
        if (sub_train->parsed()) return cmd_train_gnn(cfg);
        if (sub_sweep->parsed()) return run_sweep_subset(cfg, false);
        if (sub_report->parsed()) return cmd_report(cfg);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
