#include "oula/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace oula::harness {

using Clock = std::chrono::steady_clock;

Metrics compute_metrics(const std::vector<int>& y_true,
                        const std::vector<int>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size()) {
        throw std::runtime_error("compute_metrics: empty or mismatched input");
    }
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1) {
            (y_pred[i] == 1 ? tp : fn)++;
        } else {
            (y_pred[i] == 1 ? fp : tn)++;
        }
    }
    const double n = double(y_true.size());
    Metrics m;
    m.accuracy = double(tp + tn) / n;

    auto f1 = [](long tp_, long fp_, long fn_) {
        const double denom = 2.0 * tp_ + fp_ + fn_;
        return denom > 0 ? 2.0 * tp_ / denom : 0.0;
    };
    const double f1_pos = f1(tp, fp, fn);
    const double f1_neg = f1(tn, fn, fp);  // class 0 viewed as positive
    const double support_pos = double(tp + fn) / n;
    const double support_neg = double(tn + fp) / n;
    m.f1_weighted = support_pos * f1_pos + support_neg * f1_neg;
    return m;
}

namespace {

// One Adam state pair per parameter tensor.
struct AdamState {
    gnn::ParamMap m, v;
    long t = 0;
};

void adam_step(gnn::ParamMap& params, const gnn::ParamMap& grads,
               AdamState& state, const TrainConfig& cfg) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));
    for (auto& [name, p] : params) {
        const Eigen::MatrixXd& g = grads.at(name);
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.size() == 0) {
            m = Eigen::MatrixXd::Zero(p.rows(), p.cols());
            v = Eigen::MatrixXd::Zero(p.rows(), p.cols());
        }
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = (cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square())
                .matrix();
        p.array() -= cfg.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + cfg.epsilon);
    }
}

std::vector<int> all_rows(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<int> argmax_labels(const Eigen::MatrixXd& logits) {
    std::vector<int> out(logits.rows());
    for (long i = 0; i < logits.rows(); ++i) {
        out[i] = logits(i, 1) > logits(i, 0) ? 1 : 0;
    }
    return out;
}

double ce_from_logits(const Eigen::MatrixXd& logits,
                      const std::vector<int>& labels) {
    double loss = 0.0;
    for (long i = 0; i < logits.rows(); ++i) {
        const double m = std::max(logits(i, 0), logits(i, 1));
        const double lse = m + std::log(std::exp(logits(i, 0) - m) +
                                        std::exp(logits(i, 1) - m));
        loss += lse - logits(i, labels[i]);
    }
    return loss / double(logits.rows());
}

}  // namespace

TrainResult train_gnn(const graph::HeteroGraph& train_graph,
                      const graph::HeteroGraph& val_graph,
                      gnn::ModelKind kind, const TrainConfig& config) {
    TrainResult res;
    gnn::GnnModel model(kind, config.gnn,
                        static_cast<int>(train_graph.node_features.cols()),
                        config.seed);
    std::mt19937_64 dropout_rng(config.seed ^ 0xD15EA5E5ULL);

    const std::vector<int> train_mask = all_rows(train_graph.node_count());

    AdamState adam;
    double best_val = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;
    gnn::ParamMap grads;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double train_loss = model.loss_and_grad(
            train_graph, train_mask, grads, true, dropout_rng);
        if (!std::isfinite(train_loss)) {
            res.diverged = true;
            break;
        }
        adam_step(model.params(), grads, adam, config);

        // One eval-mode forward per graph covers both loss and metrics.
        const Eigen::MatrixXd train_logits = model.logits(train_graph);
        const Eigen::MatrixXd val_logits = model.logits(val_graph);
        EpochRecord rec;
        rec.train_loss = ce_from_logits(train_logits, train_graph.labels);
        rec.val_loss = ce_from_logits(val_logits, val_graph.labels);
        rec.train = compute_metrics(train_graph.labels,
                                    argmax_labels(train_logits));
        rec.val = compute_metrics(val_graph.labels, argmax_labels(val_logits));
        res.history.push_back(rec);
        if (!std::isfinite(rec.val_loss)) {
            res.diverged = true;
            break;
        }

        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            res.best_epoch = epoch;
            res.best_params = model.params();
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs >= config.patience) break;
        }
    }
    res.epochs_run = static_cast<int>(res.history.size());
    return res;
}

std::vector<GridPoint> Grid::points() const {
    std::vector<GridPoint> pts;
    for (double lr : learning_rate) {
        for (int h : hidden) {
            for (int hd : heads) {
                for (double dr : dropout) {
                    pts.push_back({lr, h, hd, dr});
                }
            }
        }
    }
    return pts;
}

GridPoint grid_search(gnn::ModelKind kind, const Grid& grid,
                      const graph::HeteroGraph& train_graph,
                      const graph::HeteroGraph& val_graph,
                      const TrainConfig& base) {
    const auto pts = grid.points();
    if (pts.empty()) throw std::runtime_error("grid_search: empty grid");

    bool any_ok = false;
    GridPoint best;
    double best_f1 = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (const auto& pt : pts) {
        TrainConfig cfg = base;
        cfg.learning_rate = pt.learning_rate;
        cfg.gnn.hidden = pt.hidden;
        cfg.gnn.heads = pt.heads;
        cfg.gnn.dropout = pt.dropout;
        TrainResult r;
        try {
            r = train_gnn(train_graph, val_graph, kind, cfg);
        } catch (const std::exception&) {
            continue;
        }
        if (r.diverged || r.history.empty() || r.best_epoch == 0) continue;
        const auto& at_best = r.history[r.best_epoch - 1];
        any_ok = true;
        if (at_best.val.f1_weighted > best_f1 ||
            (at_best.val.f1_weighted == best_f1 &&
             at_best.val_loss < best_loss)) {
            best_f1 = at_best.val.f1_weighted;
            best_loss = at_best.val_loss;
            best = pt;
        }
    }
    if (!any_ok) throw std::runtime_error("grid_search: every point failed");
    return best;
}

void ResultsTable::append(const ResultRow& row) { rows_.push_back(row); }

bool ResultsTable::contains(const std::string& model, int case_id, int day,
                            int fold) const {
    for (const auto& r : rows_) {
        if (r.model == model && r.case_id == case_id && r.day == day &&
            r.fold == fold) {
            return true;
        }
    }
    return false;
}

std::optional<ResultRow> ResultsTable::fold_mean(const std::string& model,
                                                 int case_id, int day) const {
    ResultRow mean;
    mean.model = model;
    mean.case_id = case_id;
    mean.day = day;
    mean.fold = -1;
    int n = 0;
    for (const auto& r : rows_) {
        if (r.model != model || r.case_id != case_id || r.day != day ||
            r.failed) {
            continue;
        }
        mean.train.accuracy += r.train.accuracy;
        mean.train.f1_weighted += r.train.f1_weighted;
        mean.val.accuracy += r.val.accuracy;
        mean.val.f1_weighted += r.val.f1_weighted;
        mean.seconds += r.seconds;
        mean.epochs += r.epochs;
        ++n;
    }
    if (n == 0) return std::nullopt;
    mean.train.accuracy /= n;
    mean.train.f1_weighted /= n;
    mean.val.accuracy /= n;
    mean.val.f1_weighted /= n;
    return mean;
}

std::string ResultsTable::to_jsonl_line(const ResultRow& r) {
    nlohmann::json j;
    j["model"] = r.model;
    j["case"] = r.case_id;
    j["day"] = r.day;
    j["fold"] = r.fold;
    j["train_acc"] = r.train.accuracy;
    j["train_f1"] = r.train.f1_weighted;
    j["val_acc"] = r.val.accuracy;
    j["val_f1"] = r.val.f1_weighted;
    j["epochs"] = r.epochs;
    j["seconds"] = r.seconds;
    j["failed"] = r.failed;
    return j.dump();
}

ResultsTable ResultsTable::load_jsonl(const std::string& path) {
    ResultsTable t;
    std::ifstream in(path);
    if (!in) return t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        ResultRow r;
        r.model = j["model"];
        r.case_id = j["case"];
        r.day = j["day"];
        r.fold = j["fold"];
        r.train.accuracy = j["train_acc"];
        r.train.f1_weighted = j["train_f1"];
        r.val.accuracy = j["val_acc"];
        r.val.f1_weighted = j["val_f1"];
        r.epochs = j["epochs"];
        r.seconds = j["seconds"];
        r.failed = j["failed"];
        t.append(r);
    }
    return t;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& model,
                          int case_id, int day, int fold) {
    std::uint64_t h = master ^ 0x9E3779B97F4A7C15ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    };
    for (char c : model) mix(static_cast<std::uint64_t>(c));
    mix(static_cast<std::uint64_t>(case_id));
    mix(static_cast<std::uint64_t>(day));
    mix(static_cast<std::uint64_t>(fold + 1));
    return h;
}

namespace {

struct FoldRows {
    std::vector<int> train;
    std::vector<int> val;
};

FoldRows split_rows(const tabular::FoldAssignment& folds, int fold) {
    FoldRows fr;
    for (size_t i = 0; i < folds.fold_of.size(); ++i) {
        (folds.fold_of[i] == fold ? fr.val : fr.train)
            .push_back(static_cast<int>(i));
    }
    return fr;
}

Eigen::MatrixXd slice_rows(const Eigen::MatrixXd& X,
                           const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<long>(rows.size()), X.cols());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<long>(i)) = X.row(rows[i]);
    }
    return out;
}

std::vector<int> slice_labels(const std::vector<int>& y,
                              const std::vector<int>& rows) {
    std::vector<int> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
    return out;
}

}  // namespace

ResultsTable run_sweep(const SweepInputs& inputs, const SweepConfig& config) {
    ResultsTable results;
    std::ofstream sink;
    if (!config.results_path.empty()) {
        results = ResultsTable::load_jsonl(config.results_path);
        sink.open(config.results_path, std::ios::app);
        if (!sink) {
            throw std::runtime_error("cannot open results file: " +
                                     config.results_path);
        }
    }
    auto persist = [&](const ResultRow& row) {
        results.append(row);
        if (sink.is_open()) {
            sink << ResultsTable::to_jsonl_line(row) << '\n';
            sink.flush();
        }
    };

    std::vector<int> days = config.days;
    if (days.empty()) {
        for (const auto& pt : grade::snapshot_days()) days.push_back(pt.day);
    }
    std::vector<std::string> baselines = config.baseline_models;
    if (baselines.empty()) {
        for (auto f : baselines::all_families()) {
            baselines.push_back(baselines::to_string(f));
        }
    }

    // Encode every requested day once; topology and all non-grade columns
    // are day-invariant.
    std::map<int, tabular::SnapshotDataset> by_day;
    for (const auto& snap : inputs.snapshots) {
        if (std::find(days.begin(), days.end(), snap.day) == days.end()) {
            continue;
        }
        by_day[snap.day] = inputs.encoder.encode(inputs.records,
                                                 snap.partial_grade, snap.day);
    }
    for (int d : days) {
        if (!by_day.count(d)) {
            throw std::runtime_error("no snapshot for day " +
                                     std::to_string(d));
        }
    }
    std::vector<long> student_of;
    student_of.reserve(inputs.records.size());
    for (const auto& r : inputs.records) {
        student_of.push_back(r.info.id_student);
    }

    const int k = inputs.folds.k;

    // ---- classical baselines, Case 5 features --------------------------
    for (const auto& name : baselines) {
        const auto family = baselines::family_by_name(name);
        const bool needs_scaling = family == baselines::Family::SVC ||
                                   family == baselines::Family::KNN;
        for (int day : days) {
            const auto& ds = by_day.at(day);
            for (int fold = 0; fold < k; ++fold) {
                if (results.contains(name, 5, day, fold)) continue;
                ResultRow row;
                row.model = name;
                row.case_id = 5;
                row.day = day;
                row.fold = fold;
                const auto t0 = Clock::now();
                try {
                    FoldRows fr = split_rows(inputs.folds, fold);
                    Eigen::MatrixXd Xtr = slice_rows(ds.features, fr.train);
                    Eigen::MatrixXd Xva = slice_rows(ds.features, fr.val);
                    if (needs_scaling) {
                        auto sc = tabular::Standardizer::fit(ds.features,
                                                             fr.train);
                        Xtr = sc.apply(Xtr);
                        Xva = sc.apply(Xva);
                    }
                    const auto ytr = slice_labels(ds.labels, fr.train);
                    const auto yva = slice_labels(ds.labels, fr.val);
                    auto fitted = baselines::fit(
                        baselines::ClassifierSpec::defaults(family), Xtr, ytr,
                        derive_seed(config.seed, name, 5, day, fold));
                    row.train = compute_metrics(ytr, fitted.predict(Xtr));
                    row.val = compute_metrics(yva, fitted.predict(Xva));
                } catch (const std::exception& e) {
                    row.failed = true;
                    std::cerr << "baseline run failed (" << name << " day "
                              << day << " fold " << fold << "): " << e.what()
                              << '\n';
                }
                row.seconds =
                    std::chrono::duration<double>(Clock::now() - t0).count();
                persist(row);
            }
        }
    }

    // ---- graph models, Cases 1..5 --------------------------------------
    for (const auto& name : config.gnn_models) {
        const auto kind = gnn::model_by_name(name);
        for (int case_id : config.cases) {
            TrainConfig cfg = config.train;
            if (config.do_grid_search) {
                // Tune once per (model, case) on the tuning day, fold 0.
                const auto& ds = by_day.count(config.tuning_day)
                                     ? by_day.at(config.tuning_day)
                                     : by_day.begin()->second;
                FoldRows fr = split_rows(inputs.folds, 0);
                auto sc = tabular::Standardizer::fit(ds.features, fr.train);
                auto tg = graph::build_graph(ds, student_of, fr.train,
                                             case_id, &sc);
                auto vg = graph::build_graph(ds, student_of, fr.val, case_id,
                                             &sc);
                TrainConfig tune = cfg;
                tune.seed = derive_seed(config.seed, name + "/grid", case_id,
                                        config.tuning_day, 0);
                GridPoint best = grid_search(kind, config.grid, tg, vg, tune);
                cfg.learning_rate = best.learning_rate;
                cfg.gnn.hidden = best.hidden;
                cfg.gnn.heads = best.heads;
                cfg.gnn.dropout = best.dropout;
                std::cerr << name << " case " << case_id
                          << " grid choice: lr=" << best.learning_rate
                          << " hidden=" << best.hidden
                          << " heads=" << best.heads
                          << " dropout=" << best.dropout << '\n';
            }
            for (int day : days) {
                const auto& ds = by_day.at(day);
                for (int fold = 0; fold < k; ++fold) {
                    if (results.contains(name, case_id, day, fold)) continue;
                    ResultRow row;
                    row.model = name;
                    row.case_id = case_id;
                    row.day = day;
                    row.fold = fold;
                    const auto t0 = Clock::now();
                    try {
                        FoldRows fr = split_rows(inputs.folds, fold);
                        auto sc = tabular::Standardizer::fit(ds.features,
                                                             fr.train);
                        auto tg = graph::build_graph(ds, student_of, fr.train,
                                                     case_id, &sc);
                        auto vg = graph::build_graph(ds, student_of, fr.val,
                                                     case_id, &sc);
                        TrainConfig run_cfg = cfg;
                        run_cfg.seed =
                            derive_seed(config.seed, name, case_id, day, fold);
                        TrainResult tr = train_gnn(tg, vg, kind, run_cfg);
                        if (tr.diverged || tr.best_epoch == 0) {
                            row.failed = true;
                        } else {
                            const auto& best = tr.history[tr.best_epoch - 1];
                            row.train = best.train;
                            row.val = best.val;
                            row.epochs = tr.epochs_run;
                        }
                    } catch (const std::exception& e) {
                        row.failed = true;
                        std::cerr << "gnn run failed (" << name << " case "
                                  << case_id << " day " << day << " fold "
                                  << fold << "): " << e.what() << '\n';
                    }
                    row.seconds =
                        std::chrono::duration<double>(Clock::now() - t0)
                            .count();
                    persist(row);
                }
            }
        }
    }
    return results;
}

}  // namespace oula::harness
