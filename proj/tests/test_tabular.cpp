#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "fixture.hpp"
#include "oula/grade.hpp"
#include "oula/ingest.hpp"
#include "oula/tabular.hpp"

using namespace oula;
namespace fs = std::filesystem;

namespace {

std::vector<RegistrationRecord> fixture_records() {
    const auto dir = fs::temp_directory_path() / "oula_tabular_fixture";
    fs::remove_all(dir);
    fixture::write_oula(dir.string());
    auto raw = ingest::load_oula(dir.string());
    auto pre = ingest::preprocess(raw, ingest::default_course_categories());
    fs::remove_all(dir);
    return std::move(pre.records);
}

}  // namespace

TEST_CASE("encoder output shape and column layout") {
    auto records = fixture_records();
    auto enc = tabular::Encoder::fit(records);
    std::vector<double> pg(records.size(), 50.0);
    auto ds = enc.encode(records, pg, 100);

    CHECK(ds.day == 100);
    CHECK(ds.features.rows() == long(records.size()));
    CHECK(ds.features.cols() == long(ds.column_names.size()));
    CHECK(ds.column_names.front() == "partial_grade");
    // every categorical one-hot block sums to one per row
    std::map<std::string, std::vector<long>> blocks;
    for (size_t c = 0; c < ds.column_names.size(); ++c) {
        const auto eq = ds.column_names[c].find('=');
        if (eq != std::string::npos) {
            blocks[ds.column_names[c].substr(0, eq)].push_back(long(c));
        }
    }
    REQUIRE(blocks.count("education"));
    REQUIRE(blocks.count("region"));
    REQUIRE(blocks.count("module"));
    REQUIRE(blocks.count("presentation"));
    for (long r = 0; r < std::min<long>(ds.features.rows(), 50); ++r) {
        for (const auto& [name, cols] : blocks) {
            double sum = 0.0;
            for (long c : cols) sum += ds.features(r, c);
            CHECK(sum == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("encoding is a bijection on the training vocabulary") {
    auto records = fixture_records();
    auto enc = tabular::Encoder::fit(records);
    std::vector<double> pg(records.size(), 0.0);
    auto ds = enc.encode(records, pg, 20);
    for (size_t i = 0; i < records.size(); i += 7) {
        auto dec = enc.decode(ds.features.row(long(i)).transpose());
        CHECK(dec.gender == records[i].info.gender);
        CHECK(dec.age_band == records[i].info.age_band);
        CHECK(dec.disability == records[i].info.disability);
        CHECK(dec.education == records[i].info.highest_education);
        CHECK(dec.region == records[i].info.region);
        CHECK(dec.code_module == records[i].info.code_module);
        CHECK(dec.code_presentation == records[i].info.code_presentation);
        CHECK(dec.course_category ==
              to_string(records[i].course_category));
    }
}

TEST_CASE("stratified folds partition the rows with balanced sizes") {
    std::vector<int> labels;
    for (int i = 0; i < 1013; ++i) labels.push_back(i % 5 == 0 ? 0 : 1);
    auto folds = tabular::make_folds(labels, 99, 5);
    REQUIRE(folds.fold_of.size() == labels.size());

    std::map<int, long> sizes;
    std::map<std::pair<int, int>, long> by_label;
    for (size_t i = 0; i < labels.size(); ++i) {
        const int f = folds.fold_of[i];
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        ++sizes[f];
        ++by_label[{f, labels[i]}];
    }
    long lo = 1 << 30, hi = 0;
    for (const auto& [f, n] : sizes) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    CHECK(hi - lo <= 1);
    // per-label counts also balanced within one
    for (int label : {0, 1}) {
        long llo = 1 << 30, lhi = 0;
        for (int f = 0; f < 5; ++f) {
            llo = std::min(llo, by_label[{f, label}]);
            lhi = std::max(lhi, by_label[{f, label}]);
        }
        CHECK(lhi - llo <= 1);
    }
    // deterministic in the seed
    auto again = tabular::make_folds(labels, 99, 5);
    CHECK(again.fold_of == folds.fold_of);
    auto other = tabular::make_folds(labels, 100, 5);
    CHECK(other.fold_of != folds.fold_of);
}

TEST_CASE("pca loadings are orthonormal with non-increasing variance") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd X(300, 7);
    for (long i = 0; i < X.rows(); ++i) {
        const double a = gauss(rng), b = gauss(rng);
        X(i, 0) = 3.0 * a;
        X(i, 1) = a + 0.1 * gauss(rng);
        X(i, 2) = b;
        X(i, 3) = gauss(rng);
        X(i, 4) = 42.0;  // constant, must be dropped
        X(i, 5) = gauss(rng);
        X(i, 6) = 0.5 * b + 0.5 * gauss(rng);
    }
    auto pca = tabular::pca_loadings(X, 4);
    CHECK(pca.kept_columns.size() == 6);
    REQUIRE(pca.components.rows() == 4);
    CHECK(pca.components.cols() == 6);
    for (long i = 0; i < 4; ++i) {
        for (long j = 0; j < 4; ++j) {
            const double dot =
                pca.components.row(i).dot(pca.components.row(j));
            CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
        }
    }
    for (long i = 1; i < pca.explained_variance_ratio.size(); ++i) {
        CHECK(pca.explained_variance_ratio(i) <=
              pca.explained_variance_ratio(i - 1) + 1e-12);
    }
    CHECK(pca.explained_variance_ratio.sum() <= 1.0 + 1e-9);
    // the correlated (0,1) pair should dominate the first component
    CHECK(pca.explained_variance_ratio(0) > 0.25);
}

TEST_CASE("standardizer uses training rows only and skips constants") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 7, 2, 7, 3, 7, 100, 7;
    auto sc = tabular::Standardizer::fit(X, {0, 1, 2});
    auto Z = sc.apply(X);
    CHECK(Z.col(0).head(3).mean() == doctest::Approx(0.0));
    CHECK(Z(3, 0) > 10.0);  // the held-out outlier stays extreme
    CHECK(Z(0, 1) == doctest::Approx(0.0));  // constant column centered only
}

TEST_CASE("feature cases nest upward") {
    auto records = fixture_records();
    auto enc = tabular::Encoder::fit(records);
    const auto& names = enc.column_names();

    std::set<int> prev;
    for (int c = 1; c <= 5; ++c) {
        auto cols = tabular::case_columns(names, c);
        std::set<int> cur(cols.begin(), cols.end());
        CHECK(cur.size() == cols.size());
        for (int col : prev) CHECK(cur.count(col));
        CHECK(cur.size() > prev.size());
        prev = cur;
    }
    // case 1 is exactly the dynamic feature
    auto c1 = tabular::case_columns(names, 1);
    REQUIRE(c1.size() == 1);
    CHECK(names[c1[0]] == "partial_grade");
    // case 5 is every column
    CHECK(tabular::case_columns(names, 5).size() == names.size());
}
