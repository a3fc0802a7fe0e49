#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oula/types.hpp"

namespace oula::tabular {

// Encoded feature matrix for one snapshot day. Column order is fixed by the
// encoder and identical across all 13 days; only partial_grade differs.
struct SnapshotDataset {
    int day = 0;
    Eigen::MatrixXd features;  // rows = registrations
    std::vector<std::string> column_names;
    std::vector<int> labels;
    std::vector<long> registration_ids;
};

// Categorical vocabularies learned from the preprocessed table. One-hot for
// education, region, module and presentation; integer codes for the rest.
class Encoder {
  public:
    static Encoder fit(const std::vector<RegistrationRecord>& records);

    SnapshotDataset encode(const std::vector<RegistrationRecord>& records,
                           const std::vector<double>& partial_grade,
                           int day) const;

    // Inverse of the categorical encoding for one row; used to check the
    // encoding is a bijection on the training vocabulary.
    struct DecodedRow {
        std::string gender, age_band, imd_band, disability, course_category;
        std::string education, region, code_module, code_presentation;
    };
    DecodedRow decode(const Eigen::VectorXd& row) const;

    const std::vector<std::string>& column_names() const { return names_; }
    // Number of warnings for categories unseen at fit time.
    mutable long unseen_count = 0;

  private:
    std::vector<std::string> names_;
    std::vector<std::string> gender_, age_band_, imd_band_, disability_;
    std::vector<std::string> education_, region_, module_, presentation_;
};

struct FoldAssignment {
    int k = 5;
    std::vector<int> fold_of;  // by row index (= registration order)
    std::uint64_t seed = 0;
};

// Label-stratified shuffled k-way partition; fold sizes differ by at most 1.
FoldAssignment make_folds(const std::vector<int>& labels, std::uint64_t seed,
                          int k = 5);

struct PcaResult {
    Eigen::MatrixXd components;  // n_components x n_kept, orthonormal rows
    Eigen::VectorXd explained_variance_ratio;  // non-increasing, sums <= 1
    std::vector<int> kept_columns;  // constant columns are dropped
};

// PCA on the column-standardized matrix. n_components beyond the matrix
// rank is truncated.
PcaResult pca_loadings(const Eigen::MatrixXd& features, int n_components);

void write_folds_csv(const std::string& path,
                     const std::vector<long>& registration_ids,
                     const FoldAssignment& folds);
void write_pca_csv(const std::string& path, const PcaResult& pca,
                   const std::vector<std::string>& column_names);

// Column-wise zero-mean unit-variance scaling fitted on training rows only;
// constant columns are centered but not scaled.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X,
                            const std::vector<int>& rows);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

// Column indices per ablation case (1..5); case columns nest upward.
std::vector<int> case_columns(const std::vector<std::string>& column_names,
                              int case_id);

}  // namespace oula::tabular
