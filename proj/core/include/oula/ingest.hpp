#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "oula/grade.hpp"
#include "oula/types.hpp"

namespace oula::ingest {

// (id_student, code_module, code_presentation)
using RegKey = std::tuple<long, std::string, std::string>;

struct LoadResult {
    std::vector<StudentInfoRow> students;
    std::vector<AssessmentDef> assessments;
    std::vector<SubmissionRow> submissions;
    // From the optional studentRegistration.csv; absent key = not withdrawn.
    std::map<RegKey, int> unregistration_day;
    std::vector<std::string> warnings;
};

// Reads studentInfo.csv, assessments.csv, studentAssessment.csv and, when
// present, studentRegistration.csv. Missing file -> throws; malformed rows
// are rejected and reported in warnings with their line numbers.
LoadResult load_oula(const std::string& dir_path);

using CourseCategoryMap = std::map<std::string, CourseCategory>;

// STEM / Social Science per module code, per the dataset's course list.
const CourseCategoryMap& default_course_categories();
CourseCategoryMap load_course_categories(const std::string& csv_path);

struct PreprocessReport {
    long input_rows = 0;
    long dropped_no_grades = 0;
    long dropped_early_withdrawal = 0;
    long dropped_outliers = 0;
    long dropped_duplicates = 0;
    long output_rows = 0;
    std::vector<std::string> warnings;
};

struct PreprocessResult {
    std::vector<RegistrationRecord> records;
    // Refitted after outlier removal; includes the pooled fallback rows.
    std::vector<grade::PassModelWeights> weights;
    PreprocessReport report;
};

// Filtering pipeline: (1) drop module-presentations with no recorded scores,
// (2) drop withdrawals on day <= 7, (3) drop grade-threshold-inconsistent
// records using a fit -> drop -> refit pass, (4) merge labels. Output sorted
// by (id_student, code_module, code_presentation) with sequential
// registration ids.
PreprocessResult preprocess(const LoadResult& input,
                            const CourseCategoryMap& categories);

// Fixed-column-order canonical table, round-trippable.
void write_preprocessed_csv(const std::string& path,
                            const std::vector<RegistrationRecord>& records);
std::vector<RegistrationRecord> read_preprocessed_csv(const std::string& path);

}  // namespace oula::ingest
