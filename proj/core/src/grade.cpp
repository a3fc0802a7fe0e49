#include "oula/grade.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace oula::grade {

const std::vector<SnapshotPoint>& snapshot_days() {
    static const std::vector<SnapshotPoint> days = {
        {20, 7},   {40, 15},  {60, 23},  {80, 30},  {100, 38},
        {120, 46}, {140, 54}, {160, 60}, {180, 70}, {200, 77},
        {220, 85}, {240, 93}, {260, 100}};
    return days;
}

double weighted_assessment_grade(
    const std::vector<std::pair<long, double>>& scores_by_assessment,
    const std::vector<AssessmentDef>& defs, int cutoff_day) {
    double total = 0.0;
    for (const auto& def : defs) {
        if (def.assessment_type == AssessmentType::Exam) continue;
        if (!def.due_day || *def.due_day > cutoff_day) continue;
        double score = 0.0;  // missing submission scores 0
        for (const auto& [id, s] : scores_by_assessment) {
            if (id == def.id_assessment) {
                score = s;
                break;
            }
        }
        total += def.weight / 100.0 * score;
    }
    return std::clamp(total, 0.0, 100.0);
}

namespace {

// Two-feature logistic regression via Newton iterations with a small ridge.
// Features are scaled to [0, 1] before fitting; weights are rescaled back.
struct LogisticFit {
    double w0, w1, w2;
    bool converged;
};

LogisticFit logistic_2d(const std::vector<PassFitSample>& samples) {
    const size_t n = samples.size();
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = samples[i].assessment_grade / 100.0;
        X(i, 2) = samples[i].exam_grade / 100.0;
        y(i) = samples[i].label;
    }
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    const double ridge = 1e-4;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd z = X * w;
        Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
        Eigen::VectorXd grad = X.transpose() * (p - y);
        grad += ridge * w;
        Eigen::VectorXd s = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
        Eigen::Matrix3d H = X.transpose() * s.asDiagonal() * X;
        H += ridge * Eigen::Matrix3d::Identity();
        Eigen::Vector3d step = H.ldlt().solve(grad);
        w -= step;
        if (step.norm() < 1e-10) {
            converged = true;
            break;
        }
        // Separable data pushes weights to infinity; cap the norm.
        if (w.norm() > 1e4) {
            converged = true;
            break;
        }
    }
    // Undo the /100 feature scaling.
    return {w(0), w(1) / 100.0, w(2) / 100.0, converged};
}

}  // namespace

PassFitResult fit_pass_weights(const std::vector<PassFitSample>& samples) {
    int pos = 0, neg = 0;
    for (const auto& s : samples) (s.label ? pos : neg)++;
    if (pos < 2 || neg < 2) return {};

    LogisticFit fit = logistic_2d(samples);
    double w1 = std::max(fit.w1, 0.0);
    double w2 = std::max(fit.w2, 0.0);
    double sum = w1 + w2;
    if (!(sum > 0.0) || !std::isfinite(sum)) return {};

    PassFitResult out;
    out.alpha = w1 / sum;
    out.beta = w2 / sum;
    // The fitted boundary is w0 + w1 x + w2 y = 0, i.e. alpha x + beta y =
    // -w0/sum. The threshold is pinned at 40; keep the difference around.
    out.residual_offset = -fit.w0 / sum - 40.0;
    out.ok = true;
    return out;
}

ScoreIndex index_scores(const std::vector<RegistrationRecord>& records,
                        const std::vector<AssessmentDef>& defs,
                        const std::vector<SubmissionRow>& subs) {
    // assessment id -> (module, presentation)
    std::unordered_map<long, const AssessmentDef*> def_of;
    def_of.reserve(defs.size());
    for (const auto& d : defs) def_of[d.id_assessment] = &d;

    // (student, module, presentation) -> record index
    std::unordered_map<std::string, long> reg_of;
    reg_of.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i].info;
        reg_of[std::to_string(r.id_student) + "|" + r.code_module + "|" +
               r.code_presentation] = static_cast<long>(i);
    }

    ScoreIndex idx;
    for (const auto& sub : subs) {
        if (!sub.score) continue;
        auto dit = def_of.find(sub.id_assessment);
        if (dit == def_of.end()) continue;
        const auto* d = dit->second;
        auto rit = reg_of.find(std::to_string(sub.id_student) + "|" +
                               d->code_module + "|" + d->code_presentation);
        if (rit == reg_of.end()) continue;
        idx[rit->second].emplace_back(sub.id_assessment, *sub.score);
    }
    return idx;
}

std::vector<SnapshotGrades> build_snapshots(
    const std::vector<RegistrationRecord>& records,
    const std::vector<AssessmentDef>& defs,
    const std::vector<SubmissionRow>& subs) {
    // defs grouped per module-presentation
    std::unordered_map<std::string, std::vector<AssessmentDef>> defs_of;
    for (const auto& d : defs) {
        defs_of[d.code_module + "|" + d.code_presentation].push_back(d);
    }
    ScoreIndex scores = index_scores(records, defs, subs);
    static const std::vector<std::pair<long, double>> kNoScores;

    std::vector<SnapshotGrades> out;
    out.reserve(snapshot_days().size());
    for (const auto& pt : snapshot_days()) {
        SnapshotGrades snap;
        snap.day = pt.day;
        snap.partial_grade.resize(records.size(), 0.0);
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i].info;
            auto dit = defs_of.find(r.code_module + "|" + r.code_presentation);
            if (dit == defs_of.end()) continue;
            auto sit = scores.find(static_cast<long>(i));
            const auto& sc = sit == scores.end() ? kNoScores : sit->second;
            snap.partial_grade[i] =
                weighted_assessment_grade(sc, dit->second, pt.day);
        }
        out.push_back(std::move(snap));
    }
    return out;
}

void write_weights_csv(const std::string& path,
                       const std::vector<PassModelWeights>& weights) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "code_module,code_presentation,alpha,beta,n_fit,residual_offset\n";
    for (const auto& w : weights) {
        out << w.code_module << ',' << w.code_presentation << ',' << w.alpha
            << ',' << w.beta << ',' << w.n_fit << ',' << w.residual_offset
            << '\n';
    }
}

}  // namespace oula::grade
