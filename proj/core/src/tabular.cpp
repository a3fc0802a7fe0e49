#include "oula/tabular.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

namespace oula::tabular {

namespace {

constexpr const char* kMissing = "<missing>";

std::vector<std::string> vocab_of(const std::vector<RegistrationRecord>& recs,
                                  auto getter) {
    std::set<std::string> s;
    for (const auto& r : recs) s.insert(getter(r));
    return {s.begin(), s.end()};
}

int code_of(const std::vector<std::string>& vocab, const std::string& v) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), v);
    if (it == vocab.end() || *it != v) return -1;
    return static_cast<int>(it - vocab.begin());
}

}  // namespace

Encoder Encoder::fit(const std::vector<RegistrationRecord>& records) {
    Encoder e;
    e.gender_ = vocab_of(records, [](auto& r) { return r.info.gender; });
    e.age_band_ = vocab_of(records, [](auto& r) { return r.info.age_band; });
    e.imd_band_ = vocab_of(records, [](auto& r) {
        return r.info.imd_band.value_or(kMissing);
    });
    e.disability_ =
        vocab_of(records, [](auto& r) { return r.info.disability; });
    e.education_ =
        vocab_of(records, [](auto& r) { return r.info.highest_education; });
    e.region_ = vocab_of(records, [](auto& r) { return r.info.region; });
    e.module_ = vocab_of(records, [](auto& r) { return r.info.code_module; });
    e.presentation_ =
        vocab_of(records, [](auto& r) { return r.info.code_presentation; });

    e.names_ = {"partial_grade", "prev_attempts", "studied_credits",
                "gender", "age_band", "imd_band", "disability",
                "course_category"};
    for (const auto& v : e.education_) e.names_.push_back("education=" + v);
    for (const auto& v : e.region_) e.names_.push_back("region=" + v);
    for (const auto& v : e.module_) e.names_.push_back("module=" + v);
    for (const auto& v : e.presentation_) {
        e.names_.push_back("presentation=" + v);
    }
    return e;
}

SnapshotDataset Encoder::encode(const std::vector<RegistrationRecord>& records,
                                const std::vector<double>& partial_grade,
                                int day) const {
    if (partial_grade.size() != records.size()) {
        throw std::runtime_error("partial_grade size mismatch");
    }
    SnapshotDataset ds;
    ds.day = day;
    ds.column_names = names_;
    const long n = static_cast<long>(records.size());
    const long d = static_cast<long>(names_.size());
    ds.features = Eigen::MatrixXd::Zero(n, d);
    ds.labels.resize(n);
    ds.registration_ids.resize(n);

    auto onehot = [&](long row, long base,
                      const std::vector<std::string>& vocab,
                      const std::string& v) {
        int c = code_of(vocab, v);
        if (c < 0) {
            ++unseen_count;  // all-zeros block for unseen categories
            return static_cast<long>(vocab.size());
        }
        ds.features(row, base + c) = 1.0;
        return static_cast<long>(vocab.size());
    };

    for (long i = 0; i < n; ++i) {
        const auto& r = records[i];
        ds.labels[i] = r.label;
        ds.registration_ids[i] = r.registration_id;
        ds.features(i, 0) = partial_grade[i];
        ds.features(i, 1) = r.info.num_of_prev_attempts;
        ds.features(i, 2) = r.info.studied_credits;
        ds.features(i, 3) = std::max(0, code_of(gender_, r.info.gender));
        ds.features(i, 4) = std::max(0, code_of(age_band_, r.info.age_band));
        ds.features(i, 5) = std::max(
            0, code_of(imd_band_, r.info.imd_band.value_or(kMissing)));
        ds.features(i, 6) =
            std::max(0, code_of(disability_, r.info.disability));
        ds.features(i, 7) = r.course_category == CourseCategory::STEM ? 1 : 0;
        long base = 8;
        base += onehot(i, base, education_, r.info.highest_education);
        base += onehot(i, base, region_, r.info.region);
        base += onehot(i, base, module_, r.info.code_module);
        base += onehot(i, base, presentation_, r.info.code_presentation);
    }
    return ds;
}

Encoder::DecodedRow Encoder::decode(const Eigen::VectorXd& row) const {
    DecodedRow out;
    auto pick = [&](const std::vector<std::string>& vocab, double code) {
        int c = static_cast<int>(std::lround(code));
        if (c < 0 || c >= static_cast<int>(vocab.size())) return std::string();
        return vocab[c];
    };
    out.gender = pick(gender_, row(3));
    out.age_band = pick(age_band_, row(4));
    out.imd_band = pick(imd_band_, row(5));
    out.disability = pick(disability_, row(6));
    out.course_category = row(7) > 0.5 ? "STEM" : "SocialScience";
    auto unhot = [&](long base, const std::vector<std::string>& vocab) {
        for (size_t i = 0; i < vocab.size(); ++i) {
            if (row(base + static_cast<long>(i)) > 0.5) return vocab[i];
        }
        return std::string();
    };
    long base = 8;
    out.education = unhot(base, education_);
    base += static_cast<long>(education_.size());
    out.region = unhot(base, region_);
    base += static_cast<long>(region_.size());
    out.code_module = unhot(base, module_);
    base += static_cast<long>(module_.size());
    out.code_presentation = unhot(base, presentation_);
    return out;
}

FoldAssignment make_folds(const std::vector<int>& labels, std::uint64_t seed,
                          int k) {
    if (labels.empty()) throw std::runtime_error("make_folds: empty dataset");
    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of.assign(labels.size(), -1);

    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < labels.size(); ++i) {
        (labels[i] ? pos : neg).push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::shuffle(pos.begin(), pos.end(), rng);

    // Deal both label groups round-robin with a shared running pointer so
    // overall fold sizes differ by at most one while staying stratified.
    int next = 0;
    for (const auto* group : {&neg, &pos}) {
        for (size_t i : *group) {
            fa.fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    return fa;
}

PcaResult pca_loadings(const Eigen::MatrixXd& features, int n_components) {
    const long n = features.rows();
    const long d = features.cols();
    if (n < 2) throw std::runtime_error("pca_loadings: need >= 2 rows");

    Eigen::VectorXd mean = features.colwise().mean();
    Eigen::MatrixXd centered = features.rowwise() - mean.transpose();
    Eigen::VectorXd stddev =
        (centered.array().square().colwise().sum() / double(n - 1))
            .sqrt()
            .matrix();

    PcaResult out;
    for (long j = 0; j < d; ++j) {
        if (stddev(j) > 1e-12) out.kept_columns.push_back(static_cast<int>(j));
    }
    const long m = static_cast<long>(out.kept_columns.size());
    Eigen::MatrixXd Z(n, m);
    for (long j = 0; j < m; ++j) {
        Z.col(j) = centered.col(out.kept_columns[j]) /
                   stddev(out.kept_columns[j]);
    }

    Eigen::MatrixXd cov = (Z.transpose() * Z) / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigen returns ascending eigenvalues; we want descending.
    Eigen::VectorXd evals = eig.eigenvalues().reverse();
    Eigen::MatrixXd evecs = eig.eigenvectors().rowwise().reverse();

    const long rank = std::min<long>(m, n - 1);
    const long k = std::min<long>(n_components, rank);
    out.components = evecs.leftCols(k).transpose();
    const double total = std::max(evals.head(rank).sum(), 1e-300);
    out.explained_variance_ratio =
        (evals.head(k).array().max(0.0) / total).matrix();
    return out;
}

void write_folds_csv(const std::string& path,
                     const std::vector<long>& registration_ids,
                     const FoldAssignment& folds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "registration_id,fold\n";
    for (size_t i = 0; i < registration_ids.size(); ++i) {
        out << registration_ids[i] << ',' << folds.fold_of[i] << '\n';
    }
}

void write_pca_csv(const std::string& path, const PcaResult& pca,
                   const std::vector<std::string>& column_names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "component,explained_variance_ratio";
    for (int c : pca.kept_columns) out << ',' << column_names[c];
    out << '\n';
    for (long i = 0; i < pca.components.rows(); ++i) {
        out << i << ',' << pca.explained_variance_ratio(i);
        for (long j = 0; j < pca.components.cols(); ++j) {
            out << ',' << pca.components(i, j);
        }
        out << '\n';
    }
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X,
                               const std::vector<int>& rows) {
    if (rows.empty()) throw std::runtime_error("Standardizer: no rows");
    const long d = X.cols();
    Standardizer s;
    s.mean = Eigen::VectorXd::Zero(d);
    s.scale = Eigen::VectorXd::Ones(d);
    for (int r : rows) s.mean += X.row(r).transpose();
    s.mean /= double(rows.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (int r : rows) {
        var += (X.row(r).transpose() - s.mean).array().square().matrix();
    }
    var /= double(rows.size());
    for (long j = 0; j < d; ++j) {
        if (var(j) > 1e-12) s.scale(j) = std::sqrt(var(j));
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd Z = X.rowwise() - mean.transpose();
    Z.array().rowwise() /= scale.transpose().array();
    return Z;
}

std::vector<int> case_columns(const std::vector<std::string>& column_names,
                              int case_id) {
    if (case_id < 1 || case_id > 5) {
        throw std::runtime_error("invalid feature case");
    }
    auto starts_with = [](const std::string& s, const std::string& p) {
        return s.rfind(p, 0) == 0;
    };
    std::vector<int> cols;
    for (size_t i = 0; i < column_names.size(); ++i) {
        const auto& n = column_names[i];
        bool take = false;
        if (n == "partial_grade") take = case_id >= 1;
        else if (n == "prev_attempts") take = case_id >= 2;
        else if (n == "course_category" || starts_with(n, "module=") ||
                 starts_with(n, "presentation=")) take = case_id >= 3;
        else if (starts_with(n, "education=") || n == "studied_credits" ||
                 n == "gender") take = case_id >= 4;
        else if (n == "disability" || starts_with(n, "region=") ||
                 n == "age_band" || n == "imd_band") take = case_id >= 5;
        if (take) cols.push_back(static_cast<int>(i));
    }
    return cols;
}

}  // namespace oula::tabular
