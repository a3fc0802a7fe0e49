#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

namespace oula::tensor {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Eigen::MatrixXd& value() const;
    const Eigen::MatrixXd& grad() const;
    long rows() const { return value().rows(); }
    long cols() const { return value().cols(); }
};

// Reverse-mode tape over dense 64-bit matrices. Nodes are created in
// topological order; backward() walks them in reverse.
class Tape {
  public:
    Var leaf(const Eigen::MatrixXd& value);

    // Seeds d(loss)/d(loss) = 1 (loss must be 1x1) and accumulates
    // gradients into every node.
    void backward(Var loss);

    const Eigen::MatrixXd& value(int id) const { return nodes_[id].value; }
    const Eigen::MatrixXd& grad(int id) const { return nodes_[id].grad; }

    int size() const { return static_cast<int>(nodes_.size()); }

    // Internal: used by the op free functions.
    Var emplace(Eigen::MatrixXd value, std::function<void(Tape&)> backward);
    Eigen::MatrixXd& grad_ref(int id) { return nodes_[id].grad; }

  private:
    struct Node {
        Eigen::MatrixXd value;
        Eigen::MatrixXd grad;
        std::function<void(Tape&)> backward;  // empty for leaves
    };
    std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);                    // same shape
Var sub(Var a, Var b);
Var add_rowvec(Var a, Var bias);          // bias is 1 x cols(a)
Var scale(Var a, double s);
Var cmul(Var a, Var b);                   // elementwise, same shape
Var leaky_relu(Var a, double slope = 0.2);
Var elu(Var a);
Var tanh_of(Var a);
Var concat_cols(const std::vector<Var>& parts);
Var mean_rows(Var a);                     // 1 x cols
Var sum_all(Var a);                       // 1 x 1

// out.row(i) = a.row(index[i]); backward scatter-adds.
Var gather_rows(Var a, const std::vector<int>& index);

// Softmax of the E x 1 score column within each segment (numerically
// stabilized by per-segment max subtraction). segment[i] in [0, n_segments).
Var segment_softmax(Var scores, const std::vector<int>& segment,
                    int n_segments);

// out.row(s) = sum of a.row(i) for segment[i] == s; out is n_segments x d.
Var segment_sum(Var a, const std::vector<int>& segment, int n_segments);

// Broadcast multiply: out.row(i) = a.row(i) * w(i, 0), w is rows(a) x 1.
Var mul_cols(Var a, Var w);

Var softmax_rows(Var a);

// out = a * s where s is a 1x1 var.
Var scale_by(Var a, Var s);

// Row-wise sum -> rows(a) x 1.
Var row_sum(Var a);

// Mean softmax cross-entropy of 2-class logits over the masked rows.
// Result is 1 x 1. mask lists row indices; must be nonempty.
Var masked_cross_entropy(Var logits, const std::vector<int>& labels,
                         const std::vector<int>& mask);

// Inverted-dropout with keep-scaling; identity when rate == 0.
Var dropout(Var a, double rate, std::mt19937_64& rng);

}  // namespace oula::tensor
