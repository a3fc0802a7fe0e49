#pragma once

// Synthetic dataset generator shared by the integration-style tests. Labels
// follow the boundary alpha*x + beta*y >= 40 exactly, so weight fitting has
// a known ground truth.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oula/csv.hpp"

namespace fixture {

struct Options {
    int students_per_module = 150;
    double alpha = 0.1;
    double beta = 0.9;
    std::uint64_t seed = 7;
    double sibling_share = 0.2;  // students enrolled in both modules
};

struct Info {
    int registrations = 0;
    double alpha = 0.0;
    double beta = 0.0;
};

inline Info write_oula(const std::string& dir, const Options& opt = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> tma_score(20.0, 100.0);
    std::uniform_real_distribution<double> exam_score(0.0, 100.0);

    const std::vector<std::string> modules = {"AAA", "CCC"};
    const std::string pres = "2014J";

    std::vector<oula::csv::Row> assess_rows;
    // 4 TMAs (weight 25, due 40/100/160/220) + 1 exam per module; the CCC
    // exam has no due date, like real exam rows often do.
    for (size_t m = 0; m < modules.size(); ++m) {
        for (int k = 0; k < 4; ++k) {
            assess_rows.push_back({modules[m], pres,
                                   std::to_string(1000 * (m + 1) + k), "TMA",
                                   std::to_string(40 + 60 * k), "25"});
        }
        assess_rows.push_back({modules[m], pres,
                               std::to_string(1000 * (m + 1) + 4), "Exam",
                               m == 1 ? "" : "250", "100"});
    }
    oula::csv::write_file(
        dir + "/assessments.csv",
        {"code_module", "code_presentation", "id_assessment",
         "assessment_type", "date", "weight"},
        assess_rows);

    const char* regions[] = {"East Anglian Region", "Scotland", "Wales",
                             "London Region"};
    const char* education[] = {"A Level or Equivalent", "HE Qualification",
                               "Lower Than A Level"};
    const char* imd[] = {"0-10%", "20-30%", "50-60%", "90-100%", "?"};
    const char* ages[] = {"0-35", "35-55", "55<="};

    std::vector<oula::csv::Row> info_rows, sub_rows, reg_rows;
    Info out;
    out.alpha = opt.alpha;
    out.beta = opt.beta;

    const int overlap =
        int(opt.sibling_share * double(opt.students_per_module));
    for (size_t m = 0; m < modules.size(); ++m) {
        for (int s = 0; s < opt.students_per_module; ++s) {
            // the first `overlap` students of CCC reuse AAA student ids
            const long id = (m == 1 && s < overlap)
                                ? 100000 + s
                                : long(100000 + m * opt.students_per_module +
                                       s + (m == 1 ? overlap : 0));
            const int idx = int(m) * opt.students_per_module + s;

            const bool withdrawn = idx % 17 == 0;
            const int withdrawal_day = withdrawn ? (idx % 34 == 0 ? 5 : 90)
                                                 : -1;

            double tma_sum = 0.0;
            const int n_tma = withdrawn ? 2 : 4;
            for (int k = 0; k < n_tma; ++k) {
                const double sc = tma_score(rng);
                tma_sum += sc;
                // a sprinkle of missing scores
                const bool missing = (idx + k) % 41 == 0;
                if (missing) tma_sum -= sc;
                sub_rows.push_back(
                    {std::to_string(1000 * (m + 1) + k), std::to_string(id),
                     std::to_string(35 + 60 * k),
                     missing ? "?" : std::to_string(sc)});
            }
            const double x = tma_sum / 4.0;
            double y = 0.0;
            std::string result;
            if (withdrawn) {
                result = "Withdrawn";
            } else {
                y = exam_score(rng);
                // keep a margin around the pass boundary so the fitted
                // weights are well identified
                double total = opt.alpha * x + opt.beta * y;
                if (std::abs(total - 40.0) < 5.0) {
                    const double target =
                        total >= 40.0 ? 45.0 + (total - 40.0)
                                      : 35.0 - (40.0 - total);
                    y = std::clamp((target - opt.alpha * x) / opt.beta, 0.0,
                                   100.0);
                    total = opt.alpha * x + opt.beta * y;
                }
                sub_rows.push_back({std::to_string(1000 * (m + 1) + 4),
                                    std::to_string(id), "250",
                                    std::to_string(y)});
                result = total >= 70.0 ? "Distinction"
                         : total >= 40.0 ? "Pass"
                                         : "Fail";
            }
            info_rows.push_back(
                {modules[m], pres, std::to_string(id),
                 idx % 2 == 0 ? "M" : "F", regions[idx % 4],
                 education[idx % 3], imd[idx % 5], ages[idx % 3],
                 std::to_string(idx % 3), idx % 2 == 0 ? "60" : "120",
                 idx % 9 == 0 ? "Y" : "N", result});
            reg_rows.push_back({modules[m], pres, std::to_string(id),
                                withdrawn ? std::to_string(withdrawal_day)
                                          : "?"});
            ++out.registrations;
        }
    }
    oula::csv::write_file(
        dir + "/studentInfo.csv",
        {"code_module", "code_presentation", "id_student", "gender", "region",
         "highest_education", "imd_band", "age_band", "num_of_prev_attempts",
         "studied_credits", "disability", "final_result"},
        info_rows);
    oula::csv::write_file(dir + "/studentAssessment.csv",
                          {"id_assessment", "id_student", "date_submitted",
                           "score"},
                          sub_rows);
    oula::csv::write_file(dir + "/studentRegistration.csv",
                          {"code_module", "code_presentation", "id_student",
                           "date_unregistration"},
                          reg_rows);
    return out;
}

}  // namespace fixture
