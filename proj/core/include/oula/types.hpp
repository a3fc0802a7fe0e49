#pragma once

#include <optional>
#include <string>

namespace oula {

enum class FinalResult { Pass, Distinction, Fail, Withdrawn };

FinalResult parse_final_result(const std::string& s);  // throws on unknown
std::string to_string(FinalResult r);

enum class AssessmentType { TMA, CMA, Exam };

AssessmentType parse_assessment_type(const std::string& s);
std::string to_string(AssessmentType t);

enum class CourseCategory { STEM, SocialScience };
std::string to_string(CourseCategory c);

struct StudentInfoRow {
    std::string code_module;
    std::string code_presentation;
    long id_student = 0;
    std::string gender;
    std::string region;
    std::string highest_education;
    std::optional<std::string> imd_band;
    std::string age_band;
    int num_of_prev_attempts = 0;
    int studied_credits = 0;
    std::string disability;
    FinalResult final_result = FinalResult::Fail;
};

struct AssessmentDef {
    long id_assessment = 0;
    std::string code_module;
    std::string code_presentation;
    AssessmentType assessment_type = AssessmentType::TMA;
    std::optional<int> due_day;  // exams commonly lack one
    double weight = 0.0;         // percent, [0, 100]
};

struct SubmissionRow {
    long id_assessment = 0;
    long id_student = 0;
    int date_submitted = 0;
    std::optional<double> score;
};

// One (student, module, presentation) enrollment; the unit of prediction.
struct RegistrationRecord {
    long registration_id = 0;
    StudentInfoRow info;
    CourseCategory course_category = CourseCategory::STEM;
    int label = 0;  // 1 = Pass/Distinction, 0 = Fail/Withdrawn
    std::optional<int> withdrawal_day;
};

// 1 iff the four-value result counts as success.
int derive_label(FinalResult r);

}  // namespace oula
