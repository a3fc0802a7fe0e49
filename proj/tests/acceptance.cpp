// Acceptance gate. Each criterion prints one line: [PASS], [FAIL] or
// [SKIP]. Dataset-scale criteria need OULAD_DIR pointing at the public
// dataset CSVs; sweep-result criteria additionally need RESULTS_JSONL
// pointing at a completed sweep. Everything else runs self-contained.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fixture.hpp"
#include "oula/baselines.hpp"
#include "oula/gnn.hpp"
#include "oula/grade.hpp"
#include "oula/graph.hpp"
#include "oula/harness.hpp"
#include "oula/ingest.hpp"
#include "oula/tabular.hpp"

using namespace oula;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream notes;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (notes.tellp() > 0) notes << "; ";
            notes << what;
        }
    }
};

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

struct Dataset {
    ingest::PreprocessResult pre;
    std::vector<grade::SnapshotGrades> snaps;
    double load_seconds = 0.0;
    long unique_students = 0;
    double pass_share = 0.0;
};

// Loaded once, shared across criteria 1-3.
Dataset* load_dataset_once() {
    static Dataset ds;
    static bool tried = false, ok = false;
    if (!tried) {
        tried = true;
        const std::string dir = env("OULAD_DIR");
        if (!dir.empty() && fs::exists(fs::path(dir) / "studentInfo.csv")) {
            const auto t0 = std::chrono::steady_clock::now();
            auto raw = ingest::load_oula(dir);
            ds.pre = ingest::preprocess(raw,
                                        ingest::default_course_categories());
            ds.load_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            ds.snaps = grade::build_snapshots(ds.pre.records, raw.assessments,
                                              raw.submissions);
            std::set<long> students;
            long pos = 0;
            for (const auto& r : ds.pre.records) {
                students.insert(r.info.id_student);
                pos += r.label;
            }
            ds.unique_students = long(students.size());
            ds.pass_share = double(pos) / double(ds.pre.records.size());
            ok = true;
        }
    }
    return ok ? &ds : nullptr;
}

harness::ResultsTable* load_results_once() {
    static harness::ResultsTable table;
    static bool tried = false, ok = false;
    if (!tried) {
        tried = true;
        const std::string path = env("RESULTS_JSONL");
        if (!path.empty() && fs::exists(path)) {
            table = harness::ResultsTable::load_jsonl(path);
            ok = !table.rows().empty();
        }
    }
    return ok ? &table : nullptr;
}

double mean_val_f1(const harness::ResultsTable& t, const std::string& model,
                   int case_id, int day, bool* found = nullptr) {
    auto m = t.fold_mean(model, case_id, day);
    if (found) *found = m.has_value();
    return m ? m->val.f1_weighted : -1.0;
}

// ---- criterion bodies ---------------------------------------------------

bool crit_preprocessing(std::string& note) {
    auto* ds = load_dataset_once();
    if (!ds) return (note = "skip"), false;
    Check c;
    const long n = long(ds->pre.records.size());
    c.expect(std::abs(n - 24615) <= 200,
             "record count " + std::to_string(n));
    c.expect(std::abs(ds->unique_students - 21305) <= 200,
             "students " + std::to_string(ds->unique_students));
    c.expect(std::abs(ds->pass_share - 0.5635) <= 0.007,
             "pass share " + std::to_string(ds->pass_share));
    c.expect(ds->load_seconds < 60.0,
             "runtime " + std::to_string(ds->load_seconds) + "s");
    note = c.notes.str();
    if (c.ok) {
        note = std::to_string(n) + " records, " +
               std::to_string(ds->unique_students) + " students, " +
               std::to_string(ds->load_seconds) + "s";
    }
    return c.ok;
}

bool crit_weight_recovery(std::string& note) {
    Check c;
    // synthetic oracle with a known boundary
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> uni(0.0, 100.0);
    std::vector<grade::PassFitSample> samples;
    for (int i = 0; i < 4000; ++i) {
        grade::PassFitSample s;
        s.assessment_grade = uni(rng);
        s.exam_grade = uni(rng);
        s.label = 0.1 * s.assessment_grade + 0.9 * s.exam_grade >= 40.0;
        samples.push_back(s);
    }
    auto fit = grade::fit_pass_weights(samples);
    c.expect(fit.ok, "synthetic fit failed");
    c.expect(std::abs(fit.beta / (fit.alpha + fit.beta) - 0.9) < 0.05,
             "synthetic ratio " + std::to_string(fit.beta));

    auto* ds = load_dataset_once();
    if (ds) {
        double sum = 0.0;
        long n = 0, w_total = 0;
        for (const auto& w : ds->pre.weights) {
            if (w.n_fit <= 0) continue;
            sum += w.beta / (w.alpha + w.beta) * double(w.n_fit);
            w_total += w.n_fit;
            ++n;
        }
        const double mean = w_total > 0 ? sum / double(w_total) : -1.0;
        c.expect(n > 0 && mean >= 0.85 && mean <= 0.95,
                 "dataset exam share " + std::to_string(mean));
        if (c.ok) note = "exam share " + std::to_string(mean);
    } else if (c.ok) {
        note = "synthetic only; dataset part skipped (OULAD_DIR unset)";
    }
    if (!c.ok) note = c.notes.str();
    return c.ok;
}

bool crit_graph_stats(std::string& note) {
    auto* ds = load_dataset_once();
    if (!ds) return (note = "skip"), false;
    Check c;
    std::vector<int> labels;
    std::vector<long> student_of;
    for (const auto& r : ds->pre.records) {
        labels.push_back(r.label);
        student_of.push_back(r.info.id_student);
    }
    auto folds = tabular::make_folds(labels, 42, 5);
    auto enc = tabular::Encoder::fit(ds->pre.records);
    const auto& snap = ds->snaps[4];  // day 100
    auto dset = enc.encode(ds->pre.records, snap.partial_grade, snap.day);
    for (int fold = 0; fold < 5; ++fold) {
        std::vector<int> train_rows, val_rows;
        for (size_t i = 0; i < folds.fold_of.size(); ++i) {
            (folds.fold_of[i] == fold ? val_rows : train_rows)
                .push_back(int(i));
        }
        auto tg = graph::build_graph(dset, student_of, train_rows, 5);
        auto vg = graph::build_graph(dset, student_of, val_rows, 5);
        auto ts = graph::graph_stats(tg);
        auto vs = graph::graph_stats(vg);
        c.expect(ts.node_count >= 19656 - 300 && ts.node_count <= 19701 + 300,
                 "train nodes " + std::to_string(ts.node_count));
        c.expect(ts.avg_degree >= 1.20 && ts.avg_degree <= 1.40,
                 "avg degree " + std::to_string(ts.avg_degree));
        c.expect(ts.max_degree <= 6,
                 "max degree " + std::to_string(ts.max_degree));
        c.expect(ts.modal_degree == 1,
                 "modal degree " + std::to_string(ts.modal_degree));
        c.expect(vs.node_count >= 4870 - 300 && vs.node_count <= 4959 + 300,
                 "val nodes " + std::to_string(vs.node_count));
    }
    note = c.ok ? "5 folds within range" : c.notes.str();
    return c.ok;
}

bool crit_baseline_endpoints(std::string& note) {
    auto* t = load_results_once();
    if (!t) return (note = "skip"), false;
    Check c;
    bool found = true, f2 = true, f3 = true;
    const double lr20 = mean_val_f1(*t, "LogisticRegression", 5, 20, &found);
    const double lr260 = mean_val_f1(*t, "LogisticRegression", 5, 260, &f2);
    const double dt260 = mean_val_f1(*t, "DecisionTree", 5, 260, &f3);
    c.expect(found && std::abs(lr20 - 0.639) <= 0.02,
             "LR day20 " + std::to_string(lr20));
    c.expect(f2 && std::abs(lr260 - 0.889) <= 0.015,
             "LR day260 " + std::to_string(lr260));
    c.expect(f3 && std::abs(dt260 - 0.853) <= 0.02,
             "DT day260 " + std::to_string(dt260));
    double baseline_seconds = 0.0;
    for (const auto& r : t->rows()) {
        const bool is_gnn = r.model == "HAN" || r.model == "HGT";
        if (!is_gnn) baseline_seconds += r.seconds;
        if (r.model == "RandomForest" && r.day >= 60 && !r.failed) {
            c.expect(r.train.accuracy >= 0.99,
                     "RF train acc day " + std::to_string(r.day) + " " +
                         std::to_string(r.train.accuracy));
        }
    }
    c.expect(baseline_seconds < 1800.0,
             "baseline sweep " + std::to_string(baseline_seconds) + "s");
    note = c.ok ? "LR 20/260 = " + std::to_string(lr20) + "/" +
                      std::to_string(lr260)
                : c.notes.str();
    return c.ok;
}

bool crit_graph_endpoints(std::string& note) {
    auto* t = load_results_once();
    if (!t) return (note = "skip"), false;
    Check c;
    const double hgt20 = mean_val_f1(*t, "HGT", 5, 20);
    const double hgt220 = mean_val_f1(*t, "HGT", 5, 220);
    const double han20 = mean_val_f1(*t, "HAN", 5, 20);
    c.expect(std::abs(hgt20 - 0.686) <= 0.025,
             "HGT day20 " + std::to_string(hgt20));
    c.expect(hgt220 >= 0.88, "HGT day220 " + std::to_string(hgt220));
    c.expect(std::abs(han20 - 0.663) <= 0.03,
             "HAN day20 " + std::to_string(han20));
    double best_baseline = -1.0;
    for (auto f : baselines::all_families()) {
        best_baseline = std::max(
            best_baseline, mean_val_f1(*t, baselines::to_string(f), 5, 20));
    }
    c.expect(hgt20 - best_baseline >= 0.025,
             "early gap " + std::to_string(hgt20 - best_baseline));
    note = c.ok ? "HGT day20 " + std::to_string(hgt20) + ", gap " +
                      std::to_string(hgt20 - best_baseline)
                : c.notes.str();
    return c.ok;
}

bool crit_ablation_trend(std::string& note) {
    auto* t = load_results_once();
    if (!t) return (note = "skip"), false;
    Check c;
    for (const auto& pt : grade::snapshot_days()) {
        bool f5 = true, f1 = true;
        const double c5 = mean_val_f1(*t, "HGT", 5, pt.day, &f5);
        const double c1 = mean_val_f1(*t, "HGT", 1, pt.day, &f1);
        c.expect(f5 && f1 && c5 >= c1 - 0.01,
                 "day " + std::to_string(pt.day) + " c5 " +
                     std::to_string(c5) + " < c1 " + std::to_string(c1));
        if (pt.day >= 200) {
            const double c2 = mean_val_f1(*t, "HGT", 2, pt.day);
            c.expect(std::abs(c5 - c2) <= 0.02,
                     "day " + std::to_string(pt.day) + " |c5-c2| " +
                         std::to_string(std::abs(c5 - c2)));
        }
    }
    note = c.ok ? "ordering holds at all 13 days" : c.notes.str();
    return c.ok;
}

bool crit_runtime_ordering(std::string& note) {
    auto* t = load_results_once();
    if (!t) return (note = "skip"), false;
    Check c;
    auto day_mean = [&](const std::string& model, int case_id, int day) {
        double total = 0.0;
        int n = 0;
        for (const auto& r : t->rows()) {
            if (r.model == model && r.case_id == case_id && r.day == day) {
                total += r.seconds;
                ++n;
            }
        }
        return n ? total / n : -1.0;
    };
    for (const auto& pt : grade::snapshot_days()) {
        const double hgt = day_mean("HGT", 5, pt.day);
        const double han = day_mean("HAN", 5, pt.day);
        const double rf = day_mean("RandomForest", 5, pt.day);
        const double lr = day_mean("LogisticRegression", 5, pt.day);
        c.expect(hgt > han && han > rf && rf > lr,
                 "day " + std::to_string(pt.day) + ": " +
                     std::to_string(hgt) + "/" + std::to_string(han) + "/" +
                     std::to_string(rf) + "/" + std::to_string(lr));
    }
    note = c.ok ? "HGT > HAN > RF > LR at every day" : c.notes.str();
    return c.ok;
}

// Hardware-independent property suite; always runs.
bool crit_properties(std::string& note) {
    Check c;

    // gradient checks on tiny graphs
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        graph::HeteroGraph g;
        const int n = 10;
        g.node_features.resize(n, 3);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) g.node_features(i, j) = uni(rng);
            g.labels.push_back(i % 2);
            g.registration_ids.push_back(i);
            g.edge_src.push_back(i);
            g.edge_dst.push_back(i);
        }
        for (int i = 0; i + 1 < n; i += 2) {
            g.edge_src.push_back(i);
            g.edge_dst.push_back(i + 1);
            g.edge_src.push_back(i + 1);
            g.edge_dst.push_back(i);
        }
        std::vector<int> mask(n);
        for (int i = 0; i < n; ++i) mask[i] = i;
        for (auto kind : {gnn::ModelKind::HAN, gnn::ModelKind::HGT}) {
            gnn::GnnConfig cfg;
            cfg.hidden = 4;
            cfg.heads = 2;
            gnn::GnnModel model(kind, cfg, 3, 7);
            gnn::ParamMap grads;
            std::mt19937_64 drop_rng(0);
            model.loss_and_grad(g, mask, grads, false, drop_rng);
            const double h = 1e-5;
            std::mt19937_64 pick(3);
            double worst = 0.0;
            for (auto& [name, p] : model.params()) {
                for (int probe = 0; probe < 3; ++probe) {
                    const long i = long(pick() % std::uint64_t(p.rows()));
                    const long j = long(pick() % std::uint64_t(p.cols()));
                    const double keep = p(i, j);
                    p(i, j) = keep + h;
                    const double up = model.loss(g, mask);
                    p(i, j) = keep - h;
                    const double down = model.loss(g, mask);
                    p(i, j) = keep;
                    const double numeric = (up - down) / (2 * h);
                    const double analytic = grads.at(name)(i, j);
                    const double denom = std::max(
                        {1e-6, std::abs(numeric), std::abs(analytic)});
                    worst = std::max(worst,
                                     std::abs(numeric - analytic) / denom);
                }
            }
            c.expect(worst < 1e-4, gnn::to_string(kind) +
                                       " gradient rel err " +
                                       std::to_string(worst));

            // permutation equivariance
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = (i + 3) % n;
            graph::HeteroGraph pg;
            pg.node_features.resize(n, 3);
            pg.labels.resize(n);
            pg.registration_ids.resize(n);
            for (int i = 0; i < n; ++i) {
                pg.node_features.row(perm[i]) = g.node_features.row(i);
                pg.labels[perm[i]] = g.labels[i];
                pg.registration_ids[perm[i]] = g.registration_ids[i];
            }
            for (size_t e = 0; e < g.edge_src.size(); ++e) {
                pg.edge_src.push_back(perm[g.edge_src[e]]);
                pg.edge_dst.push_back(perm[g.edge_dst[e]]);
            }
            const auto base = model.logits(g);
            const auto permuted = model.logits(pg);
            double err = 0.0;
            for (int i = 0; i < n; ++i) {
                err = std::max(err, (permuted.row(perm[i]) - base.row(i))
                                        .lpNorm<Eigen::Infinity>());
            }
            c.expect(err < 1e-10, gnn::to_string(kind) +
                                      " permutation err " +
                                      std::to_string(err));
        }
    }

    // attention softmax normalization
    {
        tensor::Tape tape;
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> uni(-5.0, 5.0);
        Eigen::MatrixXd scores(20, 1);
        std::vector<int> seg(20);
        for (int i = 0; i < 20; ++i) {
            scores(i, 0) = uni(rng);
            seg[i] = i % 4;
        }
        auto p = tensor::segment_softmax(tape.leaf(scores), seg, 4);
        Eigen::Vector4d sums = Eigen::Vector4d::Zero();
        for (int i = 0; i < 20; ++i) sums(seg[i]) += p.value()(i, 0);
        c.expect((sums.array() - 1.0).abs().maxCoeff() < 1e-6,
                 "softmax normalization");
    }

    // partial grade: brute-force oracle + monotonicity
    {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> due(0, 280);
        std::uniform_real_distribution<double> weight(0.0, 60.0);
        std::uniform_real_distribution<double> score(0.0, 100.0);
        std::uniform_int_distribution<int> coin(0, 3);
        bool oracle_ok = true, monotone_ok = true;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<AssessmentDef> defs;
            std::vector<std::pair<long, double>> scores;
            const int n = 1 + int(rng() % 8);
            for (int i = 0; i < n; ++i) {
                AssessmentDef d;
                d.id_assessment = i;
                d.assessment_type =
                    coin(rng) == 0 ? AssessmentType::Exam : AssessmentType::TMA;
                if (coin(rng) != 0) d.due_day = due(rng);
                d.weight = weight(rng);
                defs.push_back(d);
                if (coin(rng) != 0) scores.emplace_back(i, score(rng));
            }
            const int cutoff = due(rng);
            double expect = 0.0;
            for (const auto& d : defs) {
                if (d.assessment_type == AssessmentType::Exam || !d.due_day ||
                    *d.due_day > cutoff) {
                    continue;
                }
                for (const auto& [id, s] : scores) {
                    if (id == d.id_assessment) expect += d.weight / 100.0 * s;
                }
            }
            expect = std::clamp(expect, 0.0, 100.0);
            const double got =
                grade::weighted_assessment_grade(scores, defs, cutoff);
            oracle_ok = oracle_ok && std::abs(got - expect) < 1e-9;

            double prev = -1.0;
            for (const auto& pt : grade::snapshot_days()) {
                const double g =
                    grade::weighted_assessment_grade(scores, defs, pt.day);
                monotone_ok = monotone_ok && g >= prev - 1e-12;
                prev = g;
            }
        }
        c.expect(oracle_ok, "partial-grade oracle");
        c.expect(monotone_ok, "partial-grade monotonicity");
    }

    // folds partition + encoding bijection on a synthetic table
    {
        const auto dir = fs::temp_directory_path() / "oula_acceptance_fix";
        fs::remove_all(dir);
        fixture::write_oula(dir.string());
        auto raw = ingest::load_oula(dir.string());
        auto pre =
            ingest::preprocess(raw, ingest::default_course_categories());
        fs::remove_all(dir);

        std::vector<int> labels;
        for (const auto& r : pre.records) labels.push_back(r.label);
        auto folds = tabular::make_folds(labels, 13, 5);
        std::vector<long> sizes(5, 0);
        bool in_range = folds.fold_of.size() == labels.size();
        for (int f : folds.fold_of) {
            in_range = in_range && f >= 0 && f < 5;
            if (f >= 0 && f < 5) ++sizes[f];
        }
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        c.expect(in_range && *hi - *lo <= 1, "fold partition");

        auto enc = tabular::Encoder::fit(pre.records);
        std::vector<double> pg(pre.records.size(), 50.0);
        auto dset = enc.encode(pre.records, pg, 100);
        bool bijective = true;
        for (size_t i = 0; i < pre.records.size(); i += 5) {
            auto dec = enc.decode(dset.features.row(long(i)).transpose());
            bijective = bijective &&
                        dec.code_module == pre.records[i].info.code_module &&
                        dec.region == pre.records[i].info.region &&
                        dec.gender == pre.records[i].info.gender &&
                        dec.education ==
                            pre.records[i].info.highest_education;
        }
        c.expect(bijective, "encoding bijection");
    }

    // metrics closed form
    {
        auto m = harness::compute_metrics({1, 1, 1, 1, 1, 0, 0, 0},
                                          {1, 1, 1, 0, 0, 0, 0, 1});
        const double f1p = 6.0 / 9.0, f1n = 4.0 / 7.0;
        c.expect(std::abs(m.accuracy - 0.625) < 1e-12 &&
                     std::abs(m.f1_weighted -
                              (0.625 * f1p + 0.375 * f1n)) < 1e-12,
                 "metrics closed form");
    }

    // early-stopping arithmetic: frozen model -> patience + 1 epochs
    {
        std::mt19937_64 rng(21);
        std::normal_distribution<double> gauss;
        auto make = [&](int n) {
            graph::HeteroGraph g;
            g.node_features.resize(n, 3);
            for (int i = 0; i < n; ++i) {
                g.labels.push_back(i % 2);
                g.registration_ids.push_back(i);
                for (int j = 0; j < 3; ++j) {
                    g.node_features(i, j) = gauss(rng) + (i % 2) * 2.0;
                }
                g.edge_src.push_back(i);
                g.edge_dst.push_back(i);
            }
            return g;
        };
        auto tg = make(10), vg = make(6);
        harness::TrainConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.max_epochs = 800;
        cfg.patience = 100;
        cfg.gnn.hidden = 4;
        cfg.gnn.heads = 2;
        auto r = harness::train_gnn(tg, vg, gnn::ModelKind::HAN, cfg);
        c.expect(r.best_epoch == 1 && r.epochs_run == 101,
                 "early stopping arithmetic (" +
                     std::to_string(r.epochs_run) + " epochs)");
        cfg.learning_rate = 1e-3;
        cfg.max_epochs = 12;
        cfg.patience = 1000;
        auto full = harness::train_gnn(tg, vg, gnn::ModelKind::HAN, cfg);
        c.expect(full.epochs_run == 12, "max-epoch cap");
    }

    note = c.ok ? "gradients, softmax, equivariance, partial grade, folds, "
                  "encoding, metrics, early stopping"
                : c.notes.str();
    return c.ok;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool(std::string&)> body;
        bool dataset_gated;
        bool results_gated;
    };
    const Criterion criteria[] = {
        {"1. preprocessing scale", crit_preprocessing, true, false},
        {"2. pass-weight recovery", crit_weight_recovery, false, false},
        {"3. graph statistics", crit_graph_stats, true, false},
        {"4. baseline endpoints", crit_baseline_endpoints, false, true},
        {"5. graph-model endpoints", crit_graph_endpoints, false, true},
        {"6. ablation trend", crit_ablation_trend, false, true},
        {"7. runtime ordering", crit_runtime_ordering, false, true},
        {"8. property suites", crit_properties, false, false},
    };

    const bool have_data = load_dataset_once() != nullptr;
    const bool have_results = load_results_once() != nullptr;
    int failures = 0;
    for (const auto& crit : criteria) {
        if ((crit.dataset_gated && !have_data) ||
            (crit.results_gated && !have_results)) {
            std::cout << "[SKIP] " << crit.name << " ("
                      << (crit.dataset_gated ? "set OULAD_DIR"
                                             : "set RESULTS_JSONL")
                      << ")\n";
            continue;
        }
        std::string note;
        bool ok = false;
        try {
            ok = crit.body(note);
        } catch (const std::exception& e) {
            note = e.what();
        }
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << crit.name;
        if (!note.empty()) std::cout << " — " << note;
        std::cout << '\n';
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}
