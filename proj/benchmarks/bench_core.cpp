#include <benchmark/benchmark.h>

#include <random>

#include "oula/baselines.hpp"
#include "oula/gnn.hpp"
#include "oula/grade.hpp"
#include "oula/graph.hpp"
#include "oula/tabular.hpp"

using namespace oula;

namespace {

std::vector<AssessmentDef> bench_defs(int n) {
    std::vector<AssessmentDef> defs;
    for (int i = 0; i < n; ++i) {
        defs.push_back({long(i), "AAA", "2014J",
                        i + 1 == n ? AssessmentType::Exam
                                   : AssessmentType::TMA,
                        20 + 20 * i, 100.0 / double(n)});
    }
    return defs;
}

void bm_partial_grade(benchmark::State& state) {
    const int n = int(state.range(0));
    auto defs = bench_defs(n);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> score(0.0, 100.0);
    std::vector<std::pair<long, double>> scores;
    for (int i = 0; i < n; ++i) scores.emplace_back(i, score(rng));
    for (auto _ : state) {
        for (const auto& pt : grade::snapshot_days()) {
            benchmark::DoNotOptimize(
                grade::weighted_assessment_grade(scores, defs, pt.day));
        }
    }
}
BENCHMARK(bm_partial_grade)->Arg(6)->Arg(24);

tabular::SnapshotDataset bench_snapshot(int n, int features) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss;
    tabular::SnapshotDataset ds;
    ds.day = 100;
    ds.features.resize(n, features);
    ds.column_names.push_back("partial_grade");
    for (int j = 1; j < features; ++j) {
        ds.column_names.push_back("region=r" + std::to_string(j));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < features; ++j) ds.features(i, j) = gauss(rng);
        ds.labels.push_back(i % 2);
        ds.registration_ids.push_back(i);
    }
    return ds;
}

void bm_graph_build(benchmark::State& state) {
    const int n = int(state.range(0));
    auto ds = bench_snapshot(n, 16);
    std::vector<long> student_of;
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
        student_of.push_back(1000 + i / 2);  // sibling pairs
        rows.push_back(i);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(graph::build_graph(ds, student_of, rows, 5));
    }
}
BENCHMARK(bm_graph_build)->Arg(1000)->Arg(20000);

graph::HeteroGraph bench_graph(int n, int features) {
    auto ds = bench_snapshot(n, features);
    std::vector<long> student_of;
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
        student_of.push_back(1000 + i / 2);
        rows.push_back(i);
    }
    return graph::build_graph(ds, student_of, rows, 5);
}

void bm_gnn_forward(benchmark::State& state, gnn::ModelKind kind) {
    auto g = bench_graph(int(state.range(0)), 16);
    gnn::GnnConfig cfg;
    cfg.hidden = 64;
    cfg.heads = 8;
    gnn::GnnModel model(kind, cfg, 16, 3);
    for (auto _ : state) benchmark::DoNotOptimize(model.logits(g));
}
BENCHMARK_CAPTURE(bm_gnn_forward, han, gnn::ModelKind::HAN)
    ->Arg(1000)
    ->Arg(5000);
BENCHMARK_CAPTURE(bm_gnn_forward, hgt, gnn::ModelKind::HGT)
    ->Arg(1000)
    ->Arg(5000);

void bm_gnn_backward(benchmark::State& state, gnn::ModelKind kind) {
    auto g = bench_graph(int(state.range(0)), 16);
    gnn::GnnConfig cfg;
    cfg.hidden = 64;
    cfg.heads = 8;
    gnn::GnnModel model(kind, cfg, 16, 3);
    std::vector<int> mask;
    for (int i = 0; i < g.node_count(); ++i) mask.push_back(i);
    gnn::ParamMap grads;
    std::mt19937_64 rng(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            model.loss_and_grad(g, mask, grads, false, rng));
    }
}
BENCHMARK_CAPTURE(bm_gnn_backward, han, gnn::ModelKind::HAN)->Arg(1000);
BENCHMARK_CAPTURE(bm_gnn_backward, hgt, gnn::ModelKind::HGT)->Arg(1000);

void bm_baseline_fit(benchmark::State& state, baselines::Family family) {
    const int n = int(state.range(0));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd X(n, 20);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = i % 2;
        for (int j = 0; j < 20; ++j) X(i, j) = gauss(rng) + y[i];
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            baselines::fit(baselines::ClassifierSpec::defaults(family), X, y,
                           1));
    }
}
BENCHMARK_CAPTURE(bm_baseline_fit, logreg,
                  baselines::Family::LogisticRegression)
    ->Arg(5000);
BENCHMARK_CAPTURE(bm_baseline_fit, random_forest,
                  baselines::Family::RandomForest)
    ->Arg(2000);
BENCHMARK_CAPTURE(bm_baseline_fit, svc, baselines::Family::SVC)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
