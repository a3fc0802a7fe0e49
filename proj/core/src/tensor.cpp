#include "oula/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oula::tensor {

using Eigen::MatrixXd;

const MatrixXd& Var::value() const { return tape->value(id); }
const MatrixXd& Var::grad() const { return tape->grad(id); }

Var Tape::leaf(const MatrixXd& value) {
    return emplace(value, nullptr);
}

Var Tape::emplace(MatrixXd value, std::function<void(Tape&)> backward) {
    Node n;
    n.value = std::move(value);
    n.grad = MatrixXd::Zero(n.value.rows(), n.value.cols());
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::runtime_error("backward: wrong tape");
    if (nodes_[loss.id].value.size() != 1) {
        throw std::runtime_error("backward: loss must be scalar");
    }
    for (auto& n : nodes_) n.grad.setZero();
    nodes_[loss.id].grad(0, 0) = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        if (nodes_[i].backward && nodes_[i].grad.cwiseAbs().sum() != 0.0) {
            nodes_[i].backward(*this);
        }
    }
}

namespace {

void check_same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw std::runtime_error("vars on different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    MatrixXd v = a.value() * b.value();
    int out = t.size();
    return t.emplace(std::move(v), [a, b, out](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        tp.grad_ref(a.id) += g * tp.value(b.id).transpose();
        tp.grad_ref(b.id) += tp.value(a.id).transpose() * g;
    });
}

Var add(Var a, Var b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    int out = t.size();
    return t.emplace(a.value() + b.value(), [a, b, out](Tape& tp) {
        tp.grad_ref(a.id) += tp.grad(out);
        tp.grad_ref(b.id) += tp.grad(out);
    });
}

Var sub(Var a, Var b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    int out = t.size();
    return t.emplace(a.value() - b.value(), [a, b, out](Tape& tp) {
        tp.grad_ref(a.id) += tp.grad(out);
        tp.grad_ref(b.id) -= tp.grad(out);
    });
}

Var add_rowvec(Var a, Var bias) {
    check_same_tape(a, bias);
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        throw std::runtime_error("add_rowvec: bias shape mismatch");
    }
    Tape& t = *a.tape;
    MatrixXd v = a.value().rowwise() + bias.value().row(0);
    int out = t.size();
    return t.emplace(std::move(v), [a, bias, out](Tape& tp) {
        tp.grad_ref(a.id) += tp.grad(out);
        tp.grad_ref(bias.id) += tp.grad(out).colwise().sum();
    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    int out = t.size();
    return t.emplace(s * a.value(), [a, s, out](Tape& tp) {
        tp.grad_ref(a.id) += s * tp.grad(out);
    });
}

Var cmul(Var a, Var b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    int out = t.size();
    return t.emplace(a.value().cwiseProduct(b.value()), [a, b, out](Tape& tp) {
        tp.grad_ref(a.id) += tp.grad(out).cwiseProduct(tp.value(b.id));
        tp.grad_ref(b.id) += tp.grad(out).cwiseProduct(tp.value(a.id));
    });
}

Var leaky_relu(Var a, double slope) {
    Tape& t = *a.tape;
    MatrixXd v = a.value().unaryExpr(
        [slope](double x) { return x > 0 ? x : slope * x; });
    int out = t.size();
    return t.emplace(std::move(v), [a, slope, out](Tape& tp) {
        const MatrixXd& x = tp.value(a.id);
        tp.grad_ref(a.id) +=
            tp.grad(out).cwiseProduct(x.unaryExpr([slope](double v) {
                return v > 0 ? 1.0 : slope;
            }));
    });
}

Var elu(Var a) {
    Tape& t = *a.tape;
    MatrixXd v = a.value().unaryExpr(
        [](double x) { return x > 0 ? x : std::expm1(x); });
    int out = t.size();
    return t.emplace(std::move(v), [a, out](Tape& tp) {
        const MatrixXd& x = tp.value(a.id);
        tp.grad_ref(a.id) +=
            tp.grad(out).cwiseProduct(x.unaryExpr([](double v) {
                return v > 0 ? 1.0 : std::exp(v);
            }));
    });
}

Var tanh_of(Var a) {
    Tape& t = *a.tape;
    MatrixXd v = a.value().array().tanh().matrix();
    int out = t.size();
    return t.emplace(std::move(v), [a, out](Tape& tp) {
        const MatrixXd& y = tp.value(out);
        tp.grad_ref(a.id) += tp.grad(out).cwiseProduct(
            (1.0 - y.array().square()).matrix());
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_cols: empty");
    Tape& t = *parts[0].tape;
    long rows = parts[0].rows();
    long cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) {
            throw std::runtime_error("concat_cols: row mismatch");
        }
        cols += p.cols();
    }
    MatrixXd v(rows, cols);
    long off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p.cols()) = p.value();
        off += p.cols();
    }
    int out = t.size();
    auto ps = parts;
    return t.emplace(std::move(v), [ps, out](Tape& tp) {
        long off = 0;
        for (const auto& p : ps) {
            long c = tp.value(p.id).cols();
            tp.grad_ref(p.id) += tp.grad(out).middleCols(off, c);
            off += c;
        }
    });
}

Var mean_rows(Var a) {
    Tape& t = *a.tape;
    MatrixXd v = a.value().colwise().mean();
    int out = t.size();
    const double inv = 1.0 / double(a.rows());
    return t.emplace(std::move(v), [a, out, inv](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        tp.grad_ref(a.id).rowwise() += (inv * g).row(0);
    });
}

Var sum_all(Var a) {
    Tape& t = *a.tape;
    MatrixXd v(1, 1);
    v(0, 0) = a.value().sum();
    int out = t.size();
    return t.emplace(std::move(v), [a, out](Tape& tp) {
        tp.grad_ref(a.id).array() += tp.grad(out)(0, 0);
    });
}

Var gather_rows(Var a, const std::vector<int>& index) {
    Tape& t = *a.tape;
    MatrixXd v(static_cast<long>(index.size()), a.cols());
    for (size_t i = 0; i < index.size(); ++i) {
        v.row(static_cast<long>(i)) = a.value().row(index[i]);
    }
    int out = t.size();
    return t.emplace(std::move(v), [a, index, out](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        MatrixXd& ga = tp.grad_ref(a.id);
        for (size_t i = 0; i < index.size(); ++i) {
            ga.row(index[i]) += g.row(static_cast<long>(i));
        }
    });
}

Var segment_softmax(Var scores, const std::vector<int>& segment,
                    int n_segments) {
    if (scores.cols() != 1 ||
        scores.rows() != static_cast<long>(segment.size())) {
        throw std::runtime_error("segment_softmax: shape mismatch");
    }
    Tape& t = *scores.tape;
    const long e = scores.rows();
    std::vector<double> seg_max(n_segments,
                                -std::numeric_limits<double>::infinity());
    for (long i = 0; i < e; ++i) {
        seg_max[segment[i]] = std::max(seg_max[segment[i]],
                                       scores.value()(i, 0));
    }
    std::vector<double> seg_sum(n_segments, 0.0);
    MatrixXd v(e, 1);
    for (long i = 0; i < e; ++i) {
        v(i, 0) = std::exp(scores.value()(i, 0) - seg_max[segment[i]]);
        seg_sum[segment[i]] += v(i, 0);
    }
    for (long i = 0; i < e; ++i) v(i, 0) /= seg_sum[segment[i]];

    int out = t.size();
    return t.emplace(std::move(v), [scores, segment, n_segments,
                                    out](Tape& tp) {
        // d softmax: p_i * (g_i - sum_j in seg p_j g_j)
        const MatrixXd& p = tp.value(out);
        const MatrixXd& g = tp.grad(out);
        std::vector<double> seg_dot(n_segments, 0.0);
        for (long i = 0; i < p.rows(); ++i) {
            seg_dot[segment[i]] += p(i, 0) * g(i, 0);
        }
        MatrixXd& gs = tp.grad_ref(scores.id);
        for (long i = 0; i < p.rows(); ++i) {
            gs(i, 0) += p(i, 0) * (g(i, 0) - seg_dot[segment[i]]);
        }
    });
}

Var segment_sum(Var a, const std::vector<int>& segment, int n_segments) {
    if (a.rows() != static_cast<long>(segment.size())) {
        throw std::runtime_error("segment_sum: shape mismatch");
    }
    Tape& t = *a.tape;
    MatrixXd v = MatrixXd::Zero(n_segments, a.cols());
    for (long i = 0; i < a.rows(); ++i) {
        v.row(segment[i]) += a.value().row(i);
    }
    int out = t.size();
    return t.emplace(std::move(v), [a, segment, out](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        MatrixXd& ga = tp.grad_ref(a.id);
        for (long i = 0; i < ga.rows(); ++i) {
            ga.row(i) += g.row(segment[i]);
        }
    });
}

Var mul_cols(Var a, Var w) {
    check_same_tape(a, w);
    if (w.cols() != 1 || w.rows() != a.rows()) {
        throw std::runtime_error("mul_cols: weight shape mismatch");
    }
    Tape& t = *a.tape;
    MatrixXd v = a.value().array().colwise() * w.value().col(0).array();
    int out = t.size();
    return t.emplace(std::move(v), [a, w, out](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        tp.grad_ref(a.id) +=
            (g.array().colwise() * tp.value(w.id).col(0).array()).matrix();
        tp.grad_ref(w.id).col(0) +=
            (g.array() * tp.value(a.id).array()).rowwise().sum().matrix();
    });
}

Var softmax_rows(Var a) {
    Tape& t = *a.tape;
    MatrixXd v = a.value();
    for (long i = 0; i < v.rows(); ++i) {
        double m = v.row(i).maxCoeff();
        v.row(i) = (v.row(i).array() - m).exp();
        v.row(i) /= v.row(i).sum();
    }
    int out = t.size();
    return t.emplace(std::move(v), [a, out](Tape& tp) {
        const MatrixXd& p = tp.value(out);
        const MatrixXd& g = tp.grad(out);
        MatrixXd& ga = tp.grad_ref(a.id);
        for (long i = 0; i < p.rows(); ++i) {
            double dot = p.row(i).dot(g.row(i));
            ga.row(i) +=
                (p.row(i).array() * (g.row(i).array() - dot)).matrix();
        }
    });
}

Var scale_by(Var a, Var s) {
    check_same_tape(a, s);
    if (s.value().size() != 1) {
        throw std::runtime_error("scale_by: scalar expected");
    }
    Tape& t = *a.tape;
    int out = t.size();
    return t.emplace(s.value()(0, 0) * a.value(), [a, s, out](Tape& tp) {
        const MatrixXd& g = tp.grad(out);
        tp.grad_ref(a.id) += tp.value(s.id)(0, 0) * g;
        tp.grad_ref(s.id)(0, 0) +=
            (g.array() * tp.value(a.id).array()).sum();
    });
}

Var row_sum(Var a) {
    Tape& t = *a.tape;
    MatrixXd v = a.value().rowwise().sum();
    int out = t.size();
    return t.emplace(std::move(v), [a, out](Tape& tp) {
        tp.grad_ref(a.id).colwise() += tp.grad(out).col(0);
    });
}

Var masked_cross_entropy(Var logits, const std::vector<int>& labels,
                         const std::vector<int>& mask) {
    if (mask.empty()) throw std::runtime_error("masked_cross_entropy: "
                                               "empty mask");
    if (logits.cols() != 2) {
        throw std::runtime_error("masked_cross_entropy: want 2 logits");
    }
    Tape& t = *logits.tape;
    const MatrixXd& z = logits.value();
    double loss = 0.0;
    for (int r : mask) {
        double m = std::max(z(r, 0), z(r, 1));
        double lse = m + std::log(std::exp(z(r, 0) - m) +
                                  std::exp(z(r, 1) - m));
        loss += lse - z(r, labels[r]);
    }
    MatrixXd v(1, 1);
    v(0, 0) = loss / double(mask.size());
    int out = t.size();
    return t.emplace(std::move(v), [logits, labels, mask, out](Tape& tp) {
        const double g = tp.grad(out)(0, 0) / double(mask.size());
        const MatrixXd& z = tp.value(logits.id);
        MatrixXd& gl = tp.grad_ref(logits.id);
        for (int r : mask) {
            double m = std::max(z(r, 0), z(r, 1));
            double e0 = std::exp(z(r, 0) - m), e1 = std::exp(z(r, 1) - m);
            double s = e0 + e1;
            gl(r, 0) += g * (e0 / s - (labels[r] == 0 ? 1.0 : 0.0));
            gl(r, 1) += g * (e1 / s - (labels[r] == 1 ? 1.0 : 0.0));
        }
    });
}

Var dropout(Var a, double rate, std::mt19937_64& rng) {
    if (rate <= 0.0) return a;
    if (rate >= 1.0) throw std::runtime_error("dropout: rate must be < 1");
    Tape& t = *a.tape;
    std::bernoulli_distribution keep(1.0 - rate);
    MatrixXd mask(a.rows(), a.cols());
    const double scale = 1.0 / (1.0 - rate);
    for (long i = 0; i < mask.rows(); ++i) {
        for (long j = 0; j < mask.cols(); ++j) {
            mask(i, j) = keep(rng) ? scale : 0.0;
        }
    }
    int out = t.size();
    return t.emplace(a.value().cwiseProduct(mask),
                     [a, mask, out](Tape& tp) {
                         tp.grad_ref(a.id) +=
                             tp.grad(out).cwiseProduct(mask);
                     });
}

}  // namespace oula::tensor
