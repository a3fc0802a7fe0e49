#include "oula/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oula::baselines {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<int> threshold_scores(const std::vector<double>& s) {
    std::vector<int> out(s.size());
    for (size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= 0.5 ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------- constant

class ConstantModel : public Model {
  public:
    explicit ConstantModel(int label) : label_(label) {}
    std::vector<int> predict(const MatrixXd& X) const override {
        return std::vector<int>(X.rows(), label_);
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        return std::vector<double>(X.rows(), label_ ? 1.0 : 0.0);
    }

  private:
    int label_;
};

// ------------------------------------------------------------------ linear

class LinearModel : public Model {
  public:
    LinearModel(VectorXd w, double b) : w_(std::move(w)), b_(b) {}
    std::vector<int> predict(const MatrixXd& X) const override {
        return threshold_scores(scores(X));
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        VectorXd z = X * w_;
        std::vector<double> out(X.rows());
        for (long i = 0; i < X.rows(); ++i) out[i] = sigmoid(z(i) + b_);
        return out;
    }

  private:
    VectorXd w_;
    double b_;
};

// L2-regularized logistic regression fit by Newton iterations (IRLS).
// Objective: 0.5 w'w + C * sum log(1 + exp(-y z)), intercept unpenalized.
std::unique_ptr<Model> fit_logreg(const MatrixXd& X, const std::vector<int>& y,
                                  double C, int max_iter) {
    const long n = X.rows(), d = X.cols();
    VectorXd w = VectorXd::Zero(d + 1);  // last entry = intercept
    VectorXd yv(n);
    for (long i = 0; i < n; ++i) yv(i) = y[i];

    MatrixXd Xa(n, d + 1);
    Xa.leftCols(d) = X;
    Xa.col(d).setOnes();

    for (int iter = 0; iter < max_iter; ++iter) {
        VectorXd z = Xa * w;
        VectorXd p = z.unaryExpr([](double v) { return sigmoid(v); });
        VectorXd grad = C * (Xa.transpose() * (p - yv));
        grad.head(d) += w.head(d);
        VectorXd s = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
        MatrixXd H = C * (Xa.transpose() * s.asDiagonal() * Xa);
        for (long j = 0; j < d; ++j) H(j, j) += 1.0;
        H(d, d) += 1e-10;
        VectorXd step = H.ldlt().solve(grad);
        w -= step;
        if (step.norm() < 1e-8 * (1.0 + w.norm())) break;
    }
    return std::make_unique<LinearModel>(w.head(d).eval(), w(d));
}

// --------------------------------------------------------------------- LDA

MatrixXd ridge_until_invertible(MatrixXd cov, Eigen::LLT<MatrixXd>& llt,
                                double* used_eps) {
    const long d = cov.rows();
    double eps = 0.0;
    llt.compute(cov);
    double base = std::max(cov.trace() / double(d), 1e-12);
    while (llt.info() != Eigen::Success && eps < base * 1e4) {
        eps = eps == 0.0 ? base * 1e-8 : eps * 10.0;
        MatrixXd c = cov + eps * MatrixXd::Identity(d, d);
        llt.compute(c);
        if (llt.info() == Eigen::Success) cov = c;
    }
    if (used_eps) *used_eps = eps;
    return cov;
}

std::unique_ptr<Model> fit_lda(const MatrixXd& X, const std::vector<int>& y) {
    const long n = X.rows(), d = X.cols();
    long n1 = std::accumulate(y.begin(), y.end(), 0L);
    long n0 = n - n1;
    VectorXd mu0 = VectorXd::Zero(d), mu1 = VectorXd::Zero(d);
    for (long i = 0; i < n; ++i) (y[i] ? mu1 : mu0) += X.row(i).transpose();
    mu0 /= double(n0);
    mu1 /= double(n1);

    MatrixXd cov = MatrixXd::Zero(d, d);
    for (long i = 0; i < n; ++i) {
        VectorXd c = X.row(i).transpose() - (y[i] ? mu1 : mu0);
        cov += c * c.transpose();
    }
    cov /= double(n - 2);

    Eigen::LLT<MatrixXd> llt;
    ridge_until_invertible(cov, llt, nullptr);
    VectorXd w = llt.solve(mu1 - mu0);
    double b = -0.5 * (mu1 + mu0).dot(w) +
               std::log(double(n1) / double(n0));
    return std::make_unique<LinearModel>(std::move(w), b);
}

// --------------------------------------------------------------------- QDA

class QdaModel : public Model {
  public:
    struct ClassStats {
        VectorXd mean;
        Eigen::LLT<MatrixXd> llt;
        double log_det = 0.0;
        double log_prior = 0.0;
    };
    QdaModel(ClassStats c0, ClassStats c1)
        : c0_(std::move(c0)), c1_(std::move(c1)) {}

    std::vector<int> predict(const MatrixXd& X) const override {
        return threshold_scores(scores(X));
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        std::vector<double> out(X.rows());
        for (long i = 0; i < X.rows(); ++i) {
            double d1 = log_lik(c1_, X.row(i).transpose());
            double d0 = log_lik(c0_, X.row(i).transpose());
            out[i] = sigmoid(d1 - d0);
        }
        return out;
    }

  private:
    static double log_lik(const ClassStats& c, const VectorXd& x) {
        VectorXd diff = x - c.mean;
        VectorXd sol = c.llt.solve(diff);
        return -0.5 * diff.dot(sol) - 0.5 * c.log_det + c.log_prior;
    }
    ClassStats c0_, c1_;
};

std::unique_ptr<Model> fit_qda(const MatrixXd& X, const std::vector<int>& y) {
    const long n = X.rows(), d = X.cols();
    auto stats_for = [&](int label) {
        QdaModel::ClassStats st;
        long m = 0;
        st.mean = VectorXd::Zero(d);
        for (long i = 0; i < n; ++i) {
            if (y[i] == label) {
                st.mean += X.row(i).transpose();
                ++m;
            }
        }
        st.mean /= double(m);
        MatrixXd cov = MatrixXd::Zero(d, d);
        for (long i = 0; i < n; ++i) {
            if (y[i] != label) continue;
            VectorXd c = X.row(i).transpose() - st.mean;
            cov += c * c.transpose();
        }
        cov /= double(std::max<long>(m - 1, 1));
        MatrixXd used = ridge_until_invertible(cov, st.llt, nullptr);
        st.log_det = 0.0;
        const auto& L = st.llt.matrixLLT();
        for (long j = 0; j < d; ++j) st.log_det += 2.0 * std::log(L(j, j));
        st.log_prior = std::log(double(m) / double(n));
        return st;
    };
    return std::make_unique<QdaModel>(stats_for(0), stats_for(1));
}

// ------------------------------------------------------------- gaussian NB

class GnbModel : public Model {
  public:
    GnbModel(MatrixXd means, MatrixXd vars, double lp0, double lp1)
        : means_(std::move(means)), vars_(std::move(vars)), lp0_(lp0),
          lp1_(lp1) {}
    std::vector<int> predict(const MatrixXd& X) const override {
        return threshold_scores(scores(X));
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        std::vector<double> out(X.rows());
        for (long i = 0; i < X.rows(); ++i) {
            double l0 = lp0_, l1 = lp1_;
            for (long j = 0; j < X.cols(); ++j) {
                l0 += gauss_log(X(i, j), means_(0, j), vars_(0, j));
                l1 += gauss_log(X(i, j), means_(1, j), vars_(1, j));
            }
            out[i] = sigmoid(l1 - l0);
        }
        return out;
    }

  private:
    static double gauss_log(double x, double mu, double var) {
        double diff = x - mu;
        return -0.5 * (std::log(2.0 * M_PI * var) + diff * diff / var);
    }
    MatrixXd means_, vars_;
    double lp0_, lp1_;
};

std::unique_ptr<Model> fit_gnb(const MatrixXd& X, const std::vector<int>& y) {
    const long n = X.rows(), d = X.cols();
    MatrixXd means = MatrixXd::Zero(2, d), vars = MatrixXd::Zero(2, d);
    long cnt[2] = {0, 0};
    for (long i = 0; i < n; ++i) {
        means.row(y[i]) += X.row(i);
        ++cnt[y[i]];
    }
    means.row(0) /= double(cnt[0]);
    means.row(1) /= double(cnt[1]);
    for (long i = 0; i < n; ++i) {
        vars.row(y[i]) +=
            (X.row(i) - means.row(y[i])).array().square().matrix();
    }
    vars.row(0) /= double(cnt[0]);
    vars.row(1) /= double(cnt[1]);
    // Variance floor proportional to the largest feature variance.
    double floor = 1e-9 * std::max(vars.maxCoeff(), 1e-12);
    vars = vars.array().max(floor).matrix();
    return std::make_unique<GnbModel>(std::move(means), std::move(vars),
                                      std::log(double(cnt[0]) / double(n)),
                                      std::log(double(cnt[1]) / double(n)));
}

// --------------------------------------------------------------------- KNN

class KnnModel : public Model {
  public:
    KnnModel(MatrixXd X, std::vector<int> y, int k)
        : Xtr_(std::move(X)), y_(std::move(y)), k_(k) {
        sq_norms_ = Xtr_.rowwise().squaredNorm();
    }
    std::vector<int> predict(const MatrixXd& X) const override {
        return threshold_scores(scores(X));
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        const long nq = X.rows();
        const long nt = Xtr_.rows();
        const int k = std::min<int>(k_, static_cast<int>(nt));
        std::vector<double> out(nq);
        const long chunk = 256;
        std::vector<long> order(nt);
        std::vector<double> dist(nt);
        for (long q0 = 0; q0 < nq; q0 += chunk) {
            const long c = std::min(chunk, nq - q0);
            // squared distances via ||a||^2 + ||b||^2 - 2ab
            MatrixXd cross = Xtr_ * X.middleRows(q0, c).transpose();
            VectorXd qn = X.middleRows(q0, c).rowwise().squaredNorm();
            for (long q = 0; q < c; ++q) {
                for (long t = 0; t < nt; ++t) {
                    dist[t] = sq_norms_(t) + qn(q) - 2.0 * cross(t, q);
                }
                std::iota(order.begin(), order.end(), 0L);
                std::nth_element(order.begin(), order.begin() + (k - 1),
                                 order.end(), [&](long a, long b) {
                                     if (dist[a] != dist[b]) {
                                         return dist[a] < dist[b];
                                     }
                                     return a < b;
                                 });
                int pos = 0;
                for (int i = 0; i < k; ++i) pos += y_[order[i]];
                out[q0 + q] = double(pos) / double(k);
            }
        }
        return out;
    }

  private:
    MatrixXd Xtr_;
    VectorXd sq_norms_;
    std::vector<int> y_;
    int k_;
};

// ------------------------------------------------------------------- trees

struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double p1 = 0.0;  // class-1 fraction at the leaf
};

class Tree {
  public:
    // max_features <= 0 means all features; max_depth <= 0 means unlimited.
    void build(const MatrixXd& X, const std::vector<int>& y,
               std::vector<long> idx, int max_features, int max_depth,
               std::mt19937_64& rng) {
        nodes_.clear();
        grow(X, y, std::move(idx), max_features, max_depth, 0, rng);
    }

    double predict_p1(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        int node = 0;
        while (nodes_[node].feature >= 0) {
            node = x(nodes_[node].feature) <= nodes_[node].threshold
                       ? nodes_[node].left
                       : nodes_[node].right;
        }
        return nodes_[node].p1;
    }

  private:
    int grow(const MatrixXd& X, const std::vector<int>& y,
             std::vector<long> idx, int max_features, int max_depth,
             int depth, std::mt19937_64& rng) {
        const long n = static_cast<long>(idx.size());
        long pos = 0;
        for (long i : idx) pos += y[i];
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        nodes_[self].p1 = double(pos) / double(n);
        if (pos == 0 || pos == n || n < 2 ||
            (max_depth > 0 && depth >= max_depth)) {
            return self;
        }

        std::vector<int> feats(X.cols());
        std::iota(feats.begin(), feats.end(), 0);
        if (max_features > 0 && max_features < X.cols()) {
            std::shuffle(feats.begin(), feats.end(), rng);
            feats.resize(max_features);
            std::sort(feats.begin(), feats.end());
        }

        int best_f = -1;
        double best_thr = 0.0;
        double best_impurity = std::numeric_limits<double>::max();
        std::vector<std::pair<double, int>> vals(n);
        for (int f : feats) {
            for (long i = 0; i < n; ++i) {
                vals[i] = {X(idx[i], f), y[idx[i]]};
            }
            std::sort(vals.begin(), vals.end());
            long lpos = 0;
            for (long i = 1; i < n; ++i) {
                lpos += vals[i - 1].second;
                if (vals[i].first <= vals[i - 1].first) continue;
                const long ln = i, rn = n - i;
                const long rpos = pos - lpos;
                double pl = double(lpos) / double(ln);
                double pr = double(rpos) / double(rn);
                double imp = double(ln) * 2.0 * pl * (1.0 - pl) +
                             double(rn) * 2.0 * pr * (1.0 - pr);
                if (imp < best_impurity - 1e-12) {
                    best_impurity = imp;
                    best_f = f;
                    best_thr = 0.5 * (vals[i - 1].first + vals[i].first);
                }
            }
        }
        if (best_f < 0) return self;  // no separating feature in the sample

        std::vector<long> left, right;
        left.reserve(n);
        right.reserve(n);
        for (long i : idx) {
            (X(i, best_f) <= best_thr ? left : right).push_back(i);
        }
        if (left.empty() || right.empty()) return self;
        nodes_[self].feature = best_f;
        nodes_[self].threshold = best_thr;
        idx.clear();
        idx.shrink_to_fit();
        nodes_[self].left = grow(X, y, std::move(left), max_features,
                                 max_depth, depth + 1, rng);
        nodes_[self].right = grow(X, y, std::move(right), max_features,
                                  max_depth, depth + 1, rng);
        return self;
    }

    std::vector<TreeNode> nodes_;
};

class TreeEnsembleModel : public Model {
  public:
    explicit TreeEnsembleModel(std::vector<Tree> trees)
        : trees_(std::move(trees)) {}
    std::vector<int> predict(const MatrixXd& X) const override {
        return threshold_scores(scores(X));
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        std::vector<double> out(X.rows(), 0.0);
#pragma omp parallel for schedule(static)
        for (long i = 0; i < X.rows(); ++i) {
            double s = 0.0;
            for (const auto& t : trees_) s += t.predict_p1(X.row(i));
            out[i] = s / double(trees_.size());
        }
        return out;
    }

  private:
    std::vector<Tree> trees_;
};

std::unique_ptr<Model> fit_tree_ensemble(const MatrixXd& X,
                                         const std::vector<int>& y,
                                         int n_trees, bool bootstrap,
                                         int max_features, int max_depth,
                                         std::uint64_t seed) {
    const long n = X.rows();
    std::vector<Tree> trees(n_trees);
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n_trees; ++t) {
        // Per-tree seed so results do not depend on the thread schedule.
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + t + 1);
        std::vector<long> idx(n);
        if (bootstrap) {
            std::uniform_int_distribution<long> pick(0, n - 1);
            for (long i = 0; i < n; ++i) idx[i] = pick(rng);
        } else {
            std::iota(idx.begin(), idx.end(), 0L);
        }
        trees[t].build(X, y, std::move(idx), max_features, max_depth, rng);
    }
    return std::make_unique<TreeEnsembleModel>(std::move(trees));
}

// --------------------------------------------------------------------- SVC

// RBF-kernel SVC approximated with random Fourier features and a primal
// hinge-loss SGD (Pegasos). Keeps the family's decision surface while
// staying fast enough for repeated sweep fits.
class SvcModel : public Model {
  public:
    SvcModel(MatrixXd proj, VectorXd phase, VectorXd w, double b)
        : proj_(std::move(proj)), phase_(std::move(phase)), w_(std::move(w)),
          b_(b) {}

    MatrixXd featurize(const MatrixXd& X) const {
        MatrixXd Z = X * proj_;
        Z.rowwise() += phase_.transpose();
        const double scale = std::sqrt(2.0 / double(proj_.cols()));
        return scale * Z.array().cos().matrix();
    }

    std::vector<int> predict(const MatrixXd& X) const override {
        // Classification uses the sign of the decision function.
        MatrixXd Z = featurize(X);
        VectorXd m = Z * w_;
        std::vector<int> out(X.rows());
        for (long i = 0; i < X.rows(); ++i) out[i] = m(i) + b_ >= 0 ? 1 : 0;
        return out;
    }
    std::vector<double> scores(const MatrixXd& X) const override {
        MatrixXd Z = featurize(X);
        VectorXd m = Z * w_;
        std::vector<double> out(X.rows());
        for (long i = 0; i < X.rows(); ++i) out[i] = sigmoid(m(i) + b_);
        return out;
    }

  private:
    MatrixXd proj_;
    VectorXd phase_;
    VectorXd w_;
    double b_;
};

std::unique_ptr<Model> fit_svc(const MatrixXd& X, const std::vector<int>& y,
                               double C, double gamma_override, int n_features,
                               std::uint64_t seed) {
    const long n = X.rows(), d = X.cols();
    double gamma = gamma_override;
    if (gamma <= 0.0) {  // "scale": 1 / (d * Var(X))
        double mean = X.mean();
        double var = (X.array() - mean).square().mean();
        gamma = 1.0 / (double(d) * std::max(var, 1e-12));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 * gamma));
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    MatrixXd proj(d, n_features);
    for (long j = 0; j < n_features; ++j) {
        for (long i = 0; i < d; ++i) proj(i, j) = gauss(rng);
    }
    VectorXd phase(n_features);
    for (long j = 0; j < n_features; ++j) phase(j) = uni(rng);

    SvcModel featurizer(proj, phase, VectorXd::Zero(n_features), 0.0);
    MatrixXd Z = featurizer.featurize(X);

    // The bias rides along as one always-on feature so a single Pegasos
    // step covers it.
    const double lambda = 1.0 / (C * double(n));
    VectorXd w = VectorXd::Zero(n_features + 1);
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0L);
    long step = 1;
    const int epochs = 20;
    const double radius = 1.0 / std::sqrt(lambda);
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (long i : order) {
            const double eta = 1.0 / (lambda * double(step));
            const double yi = y[i] ? 1.0 : -1.0;
            const double margin =
                yi * (Z.row(i).dot(w.head(n_features)) + w(n_features));
            w *= (1.0 - eta * lambda);
            if (margin < 1.0) {
                w.head(n_features) += eta * yi * Z.row(i).transpose();
                w(n_features) += eta * yi;
            }
            // Pegasos projection onto the ball of radius 1/sqrt(lambda)
            const double norm = w.norm();
            if (norm > radius) w *= radius / norm;
            ++step;
        }
    }
    double b = w(n_features);
    VectorXd head = w.head(n_features);
    return std::make_unique<SvcModel>(std::move(proj), std::move(phase),
                                      std::move(head), b);
}

}  // namespace

const std::vector<Family>& all_families() {
    static const std::vector<Family> fams = {
        Family::LogisticRegression, Family::LDA,  Family::RandomForest,
        Family::KNN,                Family::GaussianNB, Family::QDA,
        Family::Bagging,            Family::SVC,  Family::DecisionTree};
    return fams;
}

std::string to_string(Family f) {
    switch (f) {
        case Family::LogisticRegression: return "LogisticRegression";
        case Family::LDA: return "LDA";
        case Family::RandomForest: return "RandomForest";
        case Family::KNN: return "KNN";
        case Family::GaussianNB: return "GaussianNB";
        case Family::QDA: return "QDA";
        case Family::Bagging: return "Bagging";
        case Family::SVC: return "SVC";
        case Family::DecisionTree: return "DecisionTree";
    }
    return "?";
}

Family family_by_name(const std::string& name) {
    for (Family f : all_families()) {
        if (to_string(f) == name) return f;
    }
    throw std::runtime_error("unknown classifier: " + name);
}

ClassifierSpec ClassifierSpec::defaults(Family f) {
    ClassifierSpec s;
    s.family = f;
    switch (f) {
        case Family::LogisticRegression:
            s.hyper = {{"C", 1.0}, {"max_iter", 1000}};
            break;
        case Family::RandomForest:
            s.hyper = {{"n_trees", 100}, {"max_depth", 0}};
            break;
        case Family::KNN:
            s.hyper = {{"k", 5}};
            break;
        case Family::Bagging:
            s.hyper = {{"n_trees", 10}};
            break;
        case Family::SVC:
            s.hyper = {{"C", 1.0}, {"gamma", 0.0}, {"rff_features", 512}};
            break;
        case Family::DecisionTree:
            s.hyper = {{"max_depth", 0}};
            break;
        default:
            break;
    }
    return s;
}

double ClassifierSpec::get(const std::string& key, double fallback) const {
    auto it = hyper.find(key);
    return it == hyper.end() ? fallback : it->second;
}

std::vector<int> FittedClassifier::predict(const Eigen::MatrixXd& X) const {
    if (X.rows() == 0) return {};
    if (X.cols() != n_features) {
        throw std::runtime_error("predict: feature schema mismatch");
    }
    return model->predict(X);
}

std::vector<double> FittedClassifier::scores(const Eigen::MatrixXd& X) const {
    if (X.rows() == 0) return {};
    if (X.cols() != n_features) {
        throw std::runtime_error("predict: feature schema mismatch");
    }
    return model->scores(X);
}

FittedClassifier fit(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::uint64_t seed) {
    if (X.rows() == 0 || static_cast<size_t>(X.rows()) != y.size()) {
        throw std::runtime_error("fit: empty or mismatched training data");
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::unique_ptr<Model> model;

    const long npos = std::accumulate(y.begin(), y.end(), 0L);
    if (npos == 0 || npos == X.rows()) {
        model = std::make_unique<ConstantModel>(npos ? 1 : 0);
    } else {
        switch (spec.family) {
            case Family::LogisticRegression:
                model = fit_logreg(X, y, spec.get("C", 1.0),
                                   static_cast<int>(spec.get("max_iter", 1000)));
                break;
            case Family::LDA:
                model = fit_lda(X, y);
                break;
            case Family::QDA:
                model = fit_qda(X, y);
                break;
            case Family::GaussianNB:
                model = fit_gnb(X, y);
                break;
            case Family::KNN:
                model = std::make_unique<KnnModel>(
                    X, y, static_cast<int>(spec.get("k", 5)));
                break;
            case Family::DecisionTree:
                model = fit_tree_ensemble(
                    X, y, 1, false, 0,
                    static_cast<int>(spec.get("max_depth", 0)), seed);
                break;
            case Family::RandomForest: {
                int mf = static_cast<int>(
                    std::lround(std::sqrt(double(X.cols()))));
                model = fit_tree_ensemble(
                    X, y, static_cast<int>(spec.get("n_trees", 100)), true,
                    std::max(mf, 1),
                    static_cast<int>(spec.get("max_depth", 0)), seed);
                break;
            }
            case Family::Bagging:
                model = fit_tree_ensemble(
                    X, y, static_cast<int>(spec.get("n_trees", 10)), true, 0,
                    0, seed);
                break;
            case Family::SVC:
                model = fit_svc(X, y, spec.get("C", 1.0),
                                spec.get("gamma", 0.0),
                                static_cast<int>(spec.get("rff_features", 512)),
                                seed);
                break;
        }
    }

    FittedClassifier out;
    out.spec = spec;
    out.model = std::move(model);
    out.seed = seed;
    out.n_features = X.cols();
    out.fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

}  // namespace oula::baselines
