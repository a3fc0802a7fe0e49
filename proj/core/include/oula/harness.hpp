#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oula/baselines.hpp"
#include "oula/gnn.hpp"
#include "oula/grade.hpp"
#include "oula/graph.hpp"
#include "oula/tabular.hpp"

namespace oula::harness {

struct Metrics {
    double accuracy = 0.0;
    double f1_weighted = 0.0;  // support-weighted mean of per-class F1
};

Metrics compute_metrics(const std::vector<int>& y_true,
                        const std::vector<int>& y_pred);

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_epochs = 800;
    int patience = 100;
    std::uint64_t seed = 0;
    gnn::GnnConfig gnn;
};

struct EpochRecord {
    double train_loss = 0.0;
    double val_loss = 0.0;
    Metrics train;
    Metrics val;
};

struct TrainResult {
    gnn::ParamMap best_params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;   // 1-based epoch of the lowest validation loss
    int epochs_run = 0;
    bool diverged = false;
};

// Full-graph Adam training with early stopping on validation loss: stop
// after `patience` consecutive epochs without improvement, return the
// parameters from the best epoch.
TrainResult train_gnn(const graph::HeteroGraph& train_graph,
                      const graph::HeteroGraph& val_graph,
                      gnn::ModelKind kind, const TrainConfig& config);

struct GridPoint {
    double learning_rate = 1e-3;
    int hidden = 64;
    int heads = 8;
    double dropout = 0.0;
};

struct Grid {
    std::vector<double> learning_rate = {1e-3, 5e-3};
    std::vector<int> hidden = {32, 64};
    std::vector<int> heads = {4, 8};
    std::vector<double> dropout = {0.0, 0.3};

    std::vector<GridPoint> points() const;  // lexicographic order
};

// Exhaustive evaluation on one tuning fold; picks max validation F1, ties
// broken by lower validation loss, then by grid order.
GridPoint grid_search(gnn::ModelKind kind, const Grid& grid,
                      const graph::HeteroGraph& train_graph,
                      const graph::HeteroGraph& val_graph,
                      const TrainConfig& base);

struct ResultRow {
    std::string model;  // classifier family or HAN/HGT
    int case_id = 5;
    int day = 0;
    int fold = 0;
    Metrics train;
    Metrics val;
    int epochs = 0;
    double seconds = 0.0;
    bool failed = false;
};

class ResultsTable {
  public:
    void append(const ResultRow& row);
    bool contains(const std::string& model, int case_id, int day,
                  int fold) const;
    const std::vector<ResultRow>& rows() const { return rows_; }

    // Arithmetic mean over folds; ignores failed rows.
    std::optional<ResultRow> fold_mean(const std::string& model, int case_id,
                                       int day) const;

    static ResultsTable load_jsonl(const std::string& path);
    static std::string to_jsonl_line(const ResultRow& row);

  private:
    std::vector<ResultRow> rows_;
};

struct SweepInputs {
    std::vector<RegistrationRecord> records;
    std::vector<grade::SnapshotGrades> snapshots;
    tabular::Encoder encoder;
    tabular::FoldAssignment folds;
};

struct SweepConfig {
    std::vector<std::string> baseline_models;  // empty = all nine
    std::vector<std::string> gnn_models = {"HAN", "HGT"};
    std::vector<int> cases = {1, 2, 3, 4, 5};
    std::vector<int> days;  // empty = all 13 snapshot days
    std::uint64_t seed = 0;
    TrainConfig train;
    bool do_grid_search = false;
    int tuning_day = 100;  // grid tuned once per (model, case) on this day
    Grid grid;
    std::string results_path;  // JSONL; existing rows are resumed, not redone
};

// 13 days x 5 folds x (baselines at Case 5 + HAN/HGT x Cases 1-5).
// Individual run failures are recorded and the sweep continues.
ResultsTable run_sweep(const SweepInputs& inputs, const SweepConfig& config);

// Deterministic per-run seed derivation from the master seed.
std::uint64_t derive_seed(std::uint64_t master, const std::string& model,
                          int case_id, int day, int fold);

}  // namespace oula::harness
