#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace oula::baselines {

enum class Family {
    LogisticRegression,
    LDA,
    RandomForest,
    KNN,
    GaussianNB,
    QDA,
    Bagging,
    SVC,
    DecisionTree,
};

const std::vector<Family>& all_families();
std::string to_string(Family f);
Family family_by_name(const std::string& name);  // throws on unknown

struct ClassifierSpec {
    Family family = Family::LogisticRegression;
    std::map<std::string, double> hyper;

    // Conventional defaults per family (LR: C=1, 1000 iters; RF: 100 trees;
    // KNN: k=5; Bagging: 10 trees; SVC: C=1, gamma=scale; ...).
    static ClassifierSpec defaults(Family f);
    double get(const std::string& key, double fallback) const;
};

class Model {
  public:
    virtual ~Model() = default;
    virtual std::vector<int> predict(const Eigen::MatrixXd& X) const = 0;
    // Probability-like score for class 1, in [0, 1], when the family has one.
    virtual std::vector<double> scores(const Eigen::MatrixXd& X) const = 0;
};

struct FittedClassifier {
    ClassifierSpec spec;
    std::shared_ptr<const Model> model;
    double fit_seconds = 0.0;
    std::uint64_t seed = 0;
    long n_features = 0;

    std::vector<int> predict(const Eigen::MatrixXd& X) const;
    std::vector<double> scores(const Eigen::MatrixXd& X) const;
};

// Deterministic given (spec, data, seed). Both labels must be present unless
// the training set is constant-label, in which case the model is a constant
// predictor.
FittedClassifier fit(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::uint64_t seed);

}  // namespace oula::baselines
