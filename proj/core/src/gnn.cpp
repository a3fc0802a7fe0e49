#include "oula/gnn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace oula::gnn {

using Eigen::MatrixXd;
using tensor::Tape;
using tensor::Var;

std::string to_string(ModelKind k) {
    return k == ModelKind::HAN ? "HAN" : "HGT";
}

ModelKind model_by_name(const std::string& name) {
    if (name == "HAN") return ModelKind::HAN;
    if (name == "HGT") return ModelKind::HGT;
    throw std::runtime_error("unknown model: " + name);
}

namespace {

MatrixXd glorot(long rows, long cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / double(rows + cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) m(i, j) = uni(rng);
    }
    return m;
}

}  // namespace

GnnModel::GnnModel(ModelKind kind, GnnConfig config, int in_features,
                   std::uint64_t seed)
    : kind_(kind), config_(config), in_features_(in_features) {
    if (config_.hidden % config_.heads != 0) {
        throw std::runtime_error("hidden width must be divisible by heads");
    }
    std::mt19937_64 rng(seed);
    const int hid = config_.hidden;

    if (kind_ == ModelKind::HAN) {
        const int dh = hid / config_.heads;  // heads are concatenated
        for (int h = 0; h < config_.heads; ++h) {
            params_["han_W" + std::to_string(h)] =
                glorot(in_features, dh, rng);
            params_["han_asrc" + std::to_string(h)] = glorot(dh, 1, rng);
            params_["han_adst" + std::to_string(h)] = glorot(dh, 1, rng);
        }
        params_["sem_W"] = glorot(hid, hid, rng);
        params_["sem_b"] = MatrixXd::Zero(1, hid);
        params_["sem_q"] = glorot(hid, 1, rng);
    } else {
        const int dh = hid / config_.heads;
        for (int l = 0; l < config_.hgt_layers; ++l) {
            const int din = l == 0 ? in_features : hid;
            const std::string p = "hgt_l" + std::to_string(l) + "_";
            for (int h = 0; h < config_.heads; ++h) {
                const std::string s = std::to_string(h);
                params_[p + "Wk" + s] = glorot(din, dh, rng);
                params_[p + "Wq" + s] = glorot(din, dh, rng);
                params_[p + "Wv" + s] = glorot(din, dh, rng);
                params_[p + "Watt" + s] = glorot(dh, dh, rng);
                params_[p + "Wmsg" + s] = glorot(dh, dh, rng);
                params_[p + "prior" + s] = MatrixXd::Ones(1, 1);
            }
            params_[p + "Wout"] = glorot(hid, hid, rng);
            if (din != hid) params_[p + "Wskip"] = glorot(din, hid, rng);
        }
    }
    params_["cls_W"] = glorot(hid, 2, rng);
    params_["cls_b"] = MatrixXd::Zero(1, 2);
}

Var GnnModel::forward(Tape& tape, const graph::HeteroGraph& g,
                      std::map<std::string, Var>* param_vars, bool training,
                      std::mt19937_64& dropout_rng) const {
    if (g.node_features.cols() != in_features_) {
        throw std::runtime_error("forward: feature width mismatch");
    }
    std::map<std::string, Var> vars;
    for (const auto& [name, value] : params_) {
        vars[name] = tape.leaf(value);
    }
    Var out = kind_ == ModelKind::HAN
                  ? han_forward(tape, g, vars, training, dropout_rng)
                  : hgt_forward(tape, g, vars, training, dropout_rng);
    if (param_vars) *param_vars = std::move(vars);
    return out;
}

Var GnnModel::han_forward(Tape& tape, const graph::HeteroGraph& g,
                          std::map<std::string, Var>& vars, bool training,
                          std::mt19937_64& rng) const {
    const int n = g.node_count();
    Var x = tape.leaf(g.node_features);
    if (training) x = tensor::dropout(x, config_.dropout, rng);

    // Node-level attention over the single R-R metapath, one pass per head,
    // head outputs concatenated.
    std::vector<Var> head_outs;
    for (int h = 0; h < config_.heads; ++h) {
        const std::string s = std::to_string(h);
        Var H = tensor::matmul(x, vars.at("han_W" + s));
        Var s_src = tensor::matmul(H, vars.at("han_asrc" + s));
        Var s_dst = tensor::matmul(H, vars.at("han_adst" + s));
        Var e = tensor::leaky_relu(
            tensor::add(tensor::gather_rows(s_src, g.edge_src),
                        tensor::gather_rows(s_dst, g.edge_dst)),
            config_.leaky_slope);
        Var alpha = tensor::segment_softmax(e, g.edge_dst, n);
        Var msg = tensor::mul_cols(tensor::gather_rows(H, g.edge_src), alpha);
        head_outs.push_back(
            tensor::elu(tensor::segment_sum(msg, g.edge_dst, n)));
    }
    Var z = tensor::concat_cols(head_outs);

    // Semantic attention across metapaths; a single metapath still goes
    // through the softmax (weight 1).
    Var t = tensor::tanh_of(tensor::add_rowvec(
        tensor::matmul(z, vars.at("sem_W")), vars.at("sem_b")));
    Var w = tensor::mean_rows(tensor::matmul(t, vars.at("sem_q")));  // 1x1
    Var beta = tensor::softmax_rows(w);
    Var fused = tensor::scale_by(z, beta);

    if (training) fused = tensor::dropout(fused, config_.dropout, rng);
    return tensor::add_rowvec(tensor::matmul(fused, vars.at("cls_W")),
                              vars.at("cls_b"));
}

Var GnnModel::hgt_forward(Tape& tape, const graph::HeteroGraph& g,
                          std::map<std::string, Var>& vars, bool training,
                          std::mt19937_64& rng) const {
    const int n = g.node_count();
    const int dh = config_.hidden / config_.heads;
    const double inv_sqrt_d = 1.0 / std::sqrt(double(dh));

    Var x = tape.leaf(g.node_features);
    for (int l = 0; l < config_.hgt_layers; ++l) {
        const std::string p = "hgt_l" + std::to_string(l) + "_";
        Var in = x;
        if (training) in = tensor::dropout(in, config_.dropout, rng);

        std::vector<Var> head_outs;
        for (int h = 0; h < config_.heads; ++h) {
            const std::string s = std::to_string(h);
            Var K = tensor::matmul(in, vars.at(p + "Wk" + s));
            Var Q = tensor::matmul(in, vars.at(p + "Wq" + s));
            Var V = tensor::matmul(in, vars.at(p + "Wv" + s));
            // attention: (key . W_att . query) * prior / sqrt(d_head)
            Var k_rel = tensor::matmul(K, vars.at(p + "Watt" + s));
            Var e = tensor::row_sum(
                tensor::cmul(tensor::gather_rows(k_rel, g.edge_src),
                             tensor::gather_rows(Q, g.edge_dst)));
            e = tensor::scale(e, inv_sqrt_d);
            e = tensor::scale_by(e, vars.at(p + "prior" + s));
            Var alpha = tensor::segment_softmax(e, g.edge_dst, n);
            Var msg = tensor::matmul(V, vars.at(p + "Wmsg" + s));
            msg = tensor::mul_cols(tensor::gather_rows(msg, g.edge_src),
                                   alpha);
            head_outs.push_back(tensor::segment_sum(msg, g.edge_dst, n));
        }
        Var agg = tensor::concat_cols(head_outs);
        Var projected = tensor::matmul(agg, vars.at(p + "Wout"));
        Var skip = vars.count(p + "Wskip")
                       ? tensor::matmul(x, vars.at(p + "Wskip"))
                       : x;
        x = tensor::elu(tensor::add(projected, skip));
    }
    return tensor::add_rowvec(tensor::matmul(x, vars.at("cls_W")),
                              vars.at("cls_b"));
}

Eigen::MatrixXd GnnModel::logits(const graph::HeteroGraph& g) const {
    Tape tape;
    std::mt19937_64 rng(0);
    Var out = forward(tape, g, nullptr, false, rng);
    return out.value();
}

double GnnModel::loss_and_grad(const graph::HeteroGraph& g,
                               const std::vector<int>& mask, ParamMap& grads,
                               bool training,
                               std::mt19937_64& dropout_rng) const {
    Tape tape;
    std::map<std::string, Var> vars;
    Var logit = forward(tape, g, &vars, training, dropout_rng);
    Var loss = tensor::masked_cross_entropy(logit, g.labels, mask);
    if (!std::isfinite(loss.value()(0, 0))) {
        return loss.value()(0, 0);  // caller aborts the run
    }
    tape.backward(loss);
    grads.clear();
    for (const auto& [name, var] : vars) grads[name] = var.grad();
    return loss.value()(0, 0);
}

double GnnModel::loss(const graph::HeteroGraph& g,
                      const std::vector<int>& mask) const {
    Tape tape;
    std::mt19937_64 rng(0);
    Var logit = forward(tape, g, nullptr, false, rng);
    Var l = tensor::masked_cross_entropy(logit, g.labels, mask);
    return l.value()(0, 0);
}

void GnnModel::save(const std::string& path) const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    j["in_features"] = in_features_;
    j["config"] = {{"hidden", config_.hidden},
                   {"heads", config_.heads},
                   {"dropout", config_.dropout},
                   {"han_layers", config_.han_layers},
                   {"hgt_layers", config_.hgt_layers},
                   {"leaky_slope", config_.leaky_slope}};
    nlohmann::json params;
    for (const auto& [name, m] : params_) {
        std::vector<double> data(m.data(), m.data() + m.size());
        params[name] = {{"rows", m.rows()}, {"cols", m.cols()},
                        {"data", data}};
    }
    j["params"] = std::move(params);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump();
}

GnnModel GnnModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    GnnConfig cfg;
    cfg.hidden = j["config"]["hidden"];
    cfg.heads = j["config"]["heads"];
    cfg.dropout = j["config"]["dropout"];
    cfg.han_layers = j["config"]["han_layers"];
    cfg.hgt_layers = j["config"]["hgt_layers"];
    cfg.leaky_slope = j["config"]["leaky_slope"];
    GnnModel model(model_by_name(j["kind"]), cfg, j["in_features"], 0);
    for (auto& [name, pj] : j["params"].items()) {
        MatrixXd m(pj["rows"].get<long>(), pj["cols"].get<long>());
        std::vector<double> data = pj["data"].get<std::vector<double>>();
        std::copy(data.begin(), data.end(), m.data());
        model.params_[name] = std::move(m);
    }
    return model;
}

}  // namespace oula::gnn
