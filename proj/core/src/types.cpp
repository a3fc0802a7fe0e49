#include "oula/types.hpp"

#include <stdexcept>

namespace oula {

FinalResult parse_final_result(const std::string& s) {
    if (s == "Pass") return FinalResult::Pass;
    if (s == "Distinction") return FinalResult::Distinction;
    if (s == "Fail") return FinalResult::Fail;
    if (s == "Withdrawn") return FinalResult::Withdrawn;
    throw std::runtime_error("unknown final_result: " + s);
}

std::string to_string(FinalResult r) {
    switch (r) {
        case FinalResult::Pass: return "Pass";
        case FinalResult::Distinction: return "Distinction";
        case FinalResult::Fail: return "Fail";
        case FinalResult::Withdrawn: return "Withdrawn";
    }
    return "?";
}

AssessmentType parse_assessment_type(const std::string& s) {
    if (s == "TMA") return AssessmentType::TMA;
    if (s == "CMA") return AssessmentType::CMA;
    if (s == "Exam") return AssessmentType::Exam;
    throw std::runtime_error("unknown assessment_type: " + s);
}

std::string to_string(AssessmentType t) {
    switch (t) {
        case AssessmentType::TMA: return "TMA";
        case AssessmentType::CMA: return "CMA";
        case AssessmentType::Exam: return "Exam";
    }
    return "?";
}

std::string to_string(CourseCategory c) {
    return c == CourseCategory::STEM ? "STEM" : "SocialScience";
}

int derive_label(FinalResult r) {
    return (r == FinalResult::Pass || r == FinalResult::Distinction) ? 1 : 0;
}

}  // namespace oula
