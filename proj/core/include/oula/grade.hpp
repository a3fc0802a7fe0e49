#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "oula/types.hpp"

namespace oula::grade {

struct SnapshotPoint {
    int day;      // days since semester start
    int percent;  // course completion
};

// The 13 checkpoints: (20, 7%) ... (260, 100%).
const std::vector<SnapshotPoint>& snapshot_days();

// Fitted weights of the pass rule alpha*x + beta*y >= 40 for one
// module-presentation. alpha weighs the end-of-semester assessment grade x,
// beta the exam grade y; normalized so alpha + beta = 1.
struct PassModelWeights {
    std::string code_module;
    std::string code_presentation;
    double alpha = 1.0;
    double beta = 0.0;
    long n_fit = 0;
    // Logistic intercept left over after pinning the threshold at 40;
    // reported, not used for classification.
    double residual_offset = 0.0;
};

// One registration's end-of-semester grades for weight fitting.
struct PassFitSample {
    double assessment_grade = 0.0;  // x
    double exam_grade = 0.0;        // y
    int label = 0;
};

// Weighted sum of non-Exam assessment scores due on or before cutoff_day,
// missing submissions counting 0; clamped to [0, 100]. `defs` must already be
// restricted to the registration's module-presentation.
double weighted_assessment_grade(
    const std::vector<std::pair<long, double>>& scores_by_assessment,
    const std::vector<AssessmentDef>& defs, int cutoff_day);

struct PassFitResult {
    double alpha = 1.0;
    double beta = 0.0;
    double residual_offset = 0.0;
    bool ok = false;  // false when data was insufficient
};

// Two-feature logistic fit of (x, y) -> label, rescaled to the alpha+beta=1
// boundary form. Requires at least 2 samples of each label.
PassFitResult fit_pass_weights(const std::vector<PassFitSample>& samples);

// Per-registration submission scores indexed by assessment id.
using ScoreIndex =
    std::unordered_map<long, std::vector<std::pair<long, double>>>;

// Groups submissions by registration. Key: index into `records`. A
// submission is attributed to the registration whose module-presentation
// owns the assessment.
ScoreIndex index_scores(const std::vector<RegistrationRecord>& records,
                        const std::vector<AssessmentDef>& defs,
                        const std::vector<SubmissionRow>& subs);

struct SnapshotGrades {
    int day = 0;
    std::vector<double> partial_grade;  // aligned with the record list
};

// Partial Grade per record at each of the 13 snapshot days. Exam scores
// never contribute.
std::vector<SnapshotGrades> build_snapshots(
    const std::vector<RegistrationRecord>& records,
    const std::vector<AssessmentDef>& defs,
    const std::vector<SubmissionRow>& subs);

void write_weights_csv(const std::string& path,
                       const std::vector<PassModelWeights>& weights);

}  // namespace oula::grade
