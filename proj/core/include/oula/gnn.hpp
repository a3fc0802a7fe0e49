#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oula/graph.hpp"
#include "oula/tensor.hpp"

namespace oula::gnn {

enum class ModelKind { HAN, HGT };

std::string to_string(ModelKind k);
ModelKind model_by_name(const std::string& name);

struct GnnConfig {
    int hidden = 64;
    int heads = 8;
    double dropout = 0.0;
    int han_layers = 1;
    int hgt_layers = 2;
    double leaky_slope = 0.2;
};

// Parameter tensors by name; std::map keeps iteration order stable for the
// optimizer and checkpoints.
using ParamMap = std::map<std::string, Eigen::MatrixXd>;

class GnnModel {
  public:
    GnnModel(ModelKind kind, GnnConfig config, int in_features,
             std::uint64_t seed);

    ModelKind kind() const { return kind_; }
    const GnnConfig& config() const { return config_; }
    int in_features() const { return in_features_; }
    ParamMap& params() { return params_; }
    const ParamMap& params() const { return params_; }

    // Builds the forward graph on `tape` and returns per-node 2-class
    // logits. `param_vars` receives the leaf var of each parameter so the
    // caller can read gradients after backward().
    tensor::Var forward(tensor::Tape& tape, const graph::HeteroGraph& g,
                        std::map<std::string, tensor::Var>* param_vars,
                        bool training, std::mt19937_64& dropout_rng) const;

    // Convenience eval-mode logits.
    Eigen::MatrixXd logits(const graph::HeteroGraph& g) const;

    // Mean masked cross-entropy plus d(loss)/d(param) for every parameter.
    double loss_and_grad(const graph::HeteroGraph& g,
                         const std::vector<int>& mask, ParamMap& grads,
                         bool training, std::mt19937_64& dropout_rng) const;

    double loss(const graph::HeteroGraph& g,
                const std::vector<int>& mask) const;

    void save(const std::string& path) const;
    static GnnModel load(const std::string& path);

  private:
    ModelKind kind_;
    GnnConfig config_;
    int in_features_;
    ParamMap params_;

    tensor::Var han_forward(tensor::Tape& tape, const graph::HeteroGraph& g,
                            std::map<std::string, tensor::Var>& vars,
                            bool training, std::mt19937_64& rng) const;
    tensor::Var hgt_forward(tensor::Tape& tape, const graph::HeteroGraph& g,
                            std::map<std::string, tensor::Var>& vars,
                            bool training, std::mt19937_64& rng) const;
};

}  // namespace oula::gnn
