#include "oula/ingest.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "oula/csv.hpp"

namespace oula::ingest {

namespace fs = std::filesystem;

namespace {

std::string mp_key(const std::string& m, const std::string& p) {
    return m + "|" + p;
}

void require_columns(const csv::Table& t, const std::string& file,
                     const std::vector<std::string>& cols) {
    for (const auto& c : cols) {
        if (t.column(c) < 0) {
            throw std::runtime_error(file + ": missing column " + c);
        }
    }
}

void collect_rejects(const csv::Table& t, const std::string& file,
                     std::vector<std::string>& warnings) {
    for (const auto& [line, why] : t.rejected) {
        std::ostringstream msg;
        msg << file << " line " << line << ": rejected (" << why << ")";
        warnings.push_back(msg.str());
    }
}

}  // namespace

LoadResult load_oula(const std::string& dir_path) {
    LoadResult out;
    const fs::path dir(dir_path);

    auto path_of = [&](const char* name) {
        fs::path p = dir / name;
        if (!fs::exists(p)) {
            throw std::runtime_error("missing required file: " + p.string());
        }
        return p.string();
    };

    // studentInfo.csv
    {
        const std::string file = path_of("studentInfo.csv");
        csv::Table t = csv::read_file(file);
        require_columns(t, file,
                        {"code_module", "code_presentation", "id_student",
                         "gender", "region", "highest_education", "imd_band",
                         "age_band", "num_of_prev_attempts", "studied_credits",
                         "disability", "final_result"});
        collect_rejects(t, file, out.warnings);
        const int c_mod = t.column("code_module"),
                  c_pres = t.column("code_presentation"),
                  c_id = t.column("id_student"), c_gen = t.column("gender"),
                  c_reg = t.column("region"),
                  c_edu = t.column("highest_education"),
                  c_imd = t.column("imd_band"), c_age = t.column("age_band"),
                  c_prev = t.column("num_of_prev_attempts"),
                  c_cred = t.column("studied_credits"),
                  c_dis = t.column("disability"),
                  c_res = t.column("final_result");
        for (size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            StudentInfoRow row;
            auto id = csv::cell_long(r[c_id]);
            auto prev = csv::cell_long(r[c_prev]);
            auto cred = csv::cell_long(r[c_cred]);
            if (!id || *id <= 0 || !prev || prev < 0 || !cred || *cred <= 0) {
                std::ostringstream msg;
                msg << file << " line " << t.line_of[i]
                    << ": rejected (bad numeric field)";
                out.warnings.push_back(msg.str());
                continue;
            }
            row.code_module = r[c_mod];
            row.code_presentation = r[c_pres];
            row.id_student = *id;
            row.gender = r[c_gen];
            row.region = r[c_reg];
            row.highest_education = r[c_edu];
            row.imd_band = csv::cell_opt(r[c_imd]);
            row.age_band = r[c_age];
            row.num_of_prev_attempts = static_cast<int>(*prev);
            row.studied_credits = static_cast<int>(*cred);
            row.disability = r[c_dis];
            try {
                row.final_result = parse_final_result(r[c_res]);
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << file << " line " << t.line_of[i]
                    << ": rejected (unknown final_result '" << r[c_res] << "')";
                out.warnings.push_back(msg.str());
                continue;
            }
            out.students.push_back(std::move(row));
        }
    }

    // assessments.csv
    {
        const std::string file = path_of("assessments.csv");
        csv::Table t = csv::read_file(file);
        require_columns(t, file,
                        {"code_module", "code_presentation", "id_assessment",
                         "assessment_type", "date", "weight"});
        collect_rejects(t, file, out.warnings);
        const int c_mod = t.column("code_module"),
                  c_pres = t.column("code_presentation"),
                  c_id = t.column("id_assessment"),
                  c_type = t.column("assessment_type"),
                  c_date = t.column("date"), c_w = t.column("weight");
        for (size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            AssessmentDef d;
            auto id = csv::cell_long(r[c_id]);
            auto w = csv::cell_double(r[c_w]);
            if (!id || !w || *w < 0 || *w > 100) {
                std::ostringstream msg;
                msg << file << " line " << t.line_of[i]
                    << ": rejected (bad id or weight)";
                out.warnings.push_back(msg.str());
                continue;
            }
            d.id_assessment = *id;
            d.code_module = r[c_mod];
            d.code_presentation = r[c_pres];
            try {
                d.assessment_type = parse_assessment_type(r[c_type]);
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << file << " line " << t.line_of[i]
                    << ": rejected (unknown assessment_type)";
                out.warnings.push_back(msg.str());
                continue;
            }
            auto day = csv::cell_long(r[c_date]);
            if (day) d.due_day = static_cast<int>(*day);
            d.weight = *w;
            out.assessments.push_back(std::move(d));
        }

        // Weight-sum sanity per module-presentation: warnings, never fatal.
        std::map<std::string, double> nonexam_sum;
        std::map<std::string, double> exam_weight;
        for (const auto& d : out.assessments) {
            const std::string k = mp_key(d.code_module, d.code_presentation);
            if (d.assessment_type == AssessmentType::Exam) {
                exam_weight[k] += d.weight;
            } else {
                nonexam_sum[k] += d.weight;
            }
        }
        for (const auto& [k, s] : nonexam_sum) {
            if (s > 0 && std::abs(s - 100.0) > 1e-6) {
                std::ostringstream msg;
                msg << "assessments " << k << ": non-exam weights sum to " << s;
                out.warnings.push_back(msg.str());
            }
        }
        for (const auto& [k, s] : exam_weight) {
            if (s > 0 && std::abs(s - 100.0) > 1e-6) {
                std::ostringstream msg;
                msg << "assessments " << k << ": exam weight is " << s;
                out.warnings.push_back(msg.str());
            }
        }
    }

    // studentAssessment.csv
    {
        const std::string file = path_of("studentAssessment.csv");
        csv::Table t = csv::read_file(file);
        require_columns(t, file,
                        {"id_assessment", "id_student", "date_submitted",
                         "score"});
        collect_rejects(t, file, out.warnings);
        const int c_a = t.column("id_assessment"),
                  c_s = t.column("id_student"),
                  c_d = t.column("date_submitted"), c_sc = t.column("score");
        for (size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            auto a = csv::cell_long(r[c_a]);
            auto s = csv::cell_long(r[c_s]);
            auto d = csv::cell_long(r[c_d]);
            auto sc = csv::cell_double(r[c_sc]);
            if (!a || !s || !d || (sc && (*sc < 0 || *sc > 100))) {
                std::ostringstream msg;
                msg << file << " line " << t.line_of[i]
                    << ": rejected (bad field)";
                out.warnings.push_back(msg.str());
                continue;
            }
            SubmissionRow row;
            row.id_assessment = *a;
            row.id_student = *s;
            row.date_submitted = static_cast<int>(*d);
            row.score = sc;
            out.submissions.push_back(row);
        }
    }

    // studentRegistration.csv (optional)
    {
        fs::path p = dir / "studentRegistration.csv";
        if (fs::exists(p)) {
            csv::Table t = csv::read_file(p.string());
            require_columns(t, p.string(),
                            {"code_module", "code_presentation", "id_student",
                             "date_unregistration"});
            collect_rejects(t, p.string(), out.warnings);
            const int c_m = t.column("code_module"),
                      c_p = t.column("code_presentation"),
                      c_s = t.column("id_student"),
                      c_u = t.column("date_unregistration");
            for (const auto& r : t.rows) {
                auto s = csv::cell_long(r[c_s]);
                auto u = csv::cell_long(r[c_u]);
                if (!s || !u) continue;  // no unregistration = not withdrawn
                out.unregistration_day[{*s, r[c_m], r[c_p]}] =
                    static_cast<int>(*u);
            }
        }
    }

    return out;
}

const CourseCategoryMap& default_course_categories() {
    // Per the dataset's published course list: AAA, BBB, GGG are Social
    // Science; CCC..FFF are STEM.
    static const CourseCategoryMap map = {
        {"AAA", CourseCategory::SocialScience},
        {"BBB", CourseCategory::SocialScience},
        {"CCC", CourseCategory::STEM},
        {"DDD", CourseCategory::STEM},
        {"EEE", CourseCategory::STEM},
        {"FFF", CourseCategory::STEM},
        {"GGG", CourseCategory::SocialScience},
    };
    return map;
}

CourseCategoryMap load_course_categories(const std::string& csv_path) {
    csv::Table t = csv::read_file(csv_path);
    const int c_m = t.column("code_module");
    const int c_c = t.column("category");
    if (c_m < 0 || c_c < 0) {
        throw std::runtime_error(csv_path +
                                 ": expected columns code_module,category");
    }
    CourseCategoryMap map;
    for (const auto& r : t.rows) {
        map[r[c_m]] = r[c_c] == "STEM" ? CourseCategory::STEM
                                       : CourseCategory::SocialScience;
    }
    return map;
}

namespace {

struct ExamScore {
    double score = 0.0;
    double weight = -1.0;
};

}  // namespace

PreprocessResult preprocess(const LoadResult& input,
                            const CourseCategoryMap& categories) {
    PreprocessResult out;
    auto& rep = out.report;
    rep.input_rows = static_cast<long>(input.students.size());

    // Module-presentations with at least one recorded score.
    std::unordered_map<long, const AssessmentDef*> def_of;
    for (const auto& d : input.assessments) def_of[d.id_assessment] = &d;
    std::set<std::string> graded_mp;
    for (const auto& s : input.submissions) {
        if (!s.score) continue;
        auto it = def_of.find(s.id_assessment);
        if (it == def_of.end()) continue;
        graded_mp.insert(
            mp_key(it->second->code_module, it->second->code_presentation));
    }

    // Steps 1, 2 and deduplication.
    std::vector<RegistrationRecord> records;
    std::set<RegKey> seen;
    for (const auto& s : input.students) {
        RegKey key{s.id_student, s.code_module, s.code_presentation};
        if (!seen.insert(key).second) {
            ++rep.dropped_duplicates;
            continue;
        }
        if (!graded_mp.count(mp_key(s.code_module, s.code_presentation))) {
            ++rep.dropped_no_grades;
            continue;
        }
        RegistrationRecord rec;
        rec.info = s;
        auto uit = input.unregistration_day.find(key);
        if (uit != input.unregistration_day.end()) {
            rec.withdrawal_day = uit->second;
        }
        if (s.final_result == FinalResult::Withdrawn && rec.withdrawal_day &&
            *rec.withdrawal_day <= 7) {
            ++rep.dropped_early_withdrawal;
            continue;
        }
        rec.label = derive_label(s.final_result);
        auto cit = categories.find(s.code_module);
        if (cit == categories.end()) {
            rep.warnings.push_back("unknown course category for module " +
                                   s.code_module + "; defaulting to STEM");
            rec.course_category = CourseCategory::STEM;
        } else {
            rec.course_category = cit->second;
        }
        records.push_back(std::move(rec));
    }

    // End-of-semester assessment grade x and exam grade y per record, for
    // the threshold-consistency filter.
    std::unordered_map<std::string, std::vector<AssessmentDef>> defs_of;
    for (const auto& d : input.assessments) {
        defs_of[mp_key(d.code_module, d.code_presentation)].push_back(d);
    }
    auto compute_xy = [&](const std::vector<RegistrationRecord>& recs,
                          std::vector<double>& x,
                          std::vector<std::optional<double>>& y) {
        grade::ScoreIndex scores =
            grade::index_scores(recs, input.assessments, input.submissions);
        static const std::vector<std::pair<long, double>> kNone;
        x.assign(recs.size(), 0.0);
        y.assign(recs.size(), std::nullopt);
        for (size_t i = 0; i < recs.size(); ++i) {
            const auto& info = recs[i].info;
            auto dit =
                defs_of.find(mp_key(info.code_module, info.code_presentation));
            if (dit == defs_of.end()) continue;
            auto sit = scores.find(static_cast<long>(i));
            const auto& sc = sit == scores.end() ? kNone : sit->second;
            x[i] = grade::weighted_assessment_grade(sc, dit->second, INT_MAX);
            ExamScore best;
            for (const auto& d : dit->second) {
                if (d.assessment_type != AssessmentType::Exam) continue;
                for (const auto& [id, s] : sc) {
                    if (id == d.id_assessment && d.weight > best.weight) {
                        best = {s, d.weight};
                    }
                }
            }
            if (best.weight >= 0) y[i] = best.score;
        }
    };

    auto fit_all = [&](const std::vector<RegistrationRecord>& recs,
                       const std::vector<double>& x,
                       const std::vector<std::optional<double>>& y) {
        std::map<std::string, std::vector<grade::PassFitSample>> samples;
        std::vector<grade::PassFitSample> pooled;
        for (size_t i = 0; i < recs.size(); ++i) {
            if (!y[i]) continue;
            grade::PassFitSample s{x[i], *y[i], recs[i].label};
            samples[mp_key(recs[i].info.code_module,
                           recs[i].info.code_presentation)]
                .push_back(s);
            pooled.push_back(s);
        }
        grade::PassFitResult global = grade::fit_pass_weights(pooled);

        // Which module-presentations have an exam defined at all?
        std::set<std::string> has_exam;
        for (const auto& d : input.assessments) {
            if (d.assessment_type == AssessmentType::Exam) {
                has_exam.insert(mp_key(d.code_module, d.code_presentation));
            }
        }

        std::map<std::string, grade::PassModelWeights> by_mp;
        std::set<std::string> mps;
        for (const auto& r : recs) {
            mps.insert(
                mp_key(r.info.code_module, r.info.code_presentation));
        }
        for (const auto& mp : mps) {
            grade::PassModelWeights w;
            auto bar = mp.find('|');
            w.code_module = mp.substr(0, bar);
            w.code_presentation = mp.substr(bar + 1);
            auto sit = samples.find(mp);
            grade::PassFitResult fit;
            if (sit != samples.end()) {
                fit = grade::fit_pass_weights(sit->second);
                w.n_fit = static_cast<long>(sit->second.size());
            }
            if (fit.ok) {
                w.alpha = fit.alpha;
                w.beta = fit.beta;
                w.residual_offset = fit.residual_offset;
            } else if (!has_exam.count(mp)) {
                w.alpha = 1.0;
                w.beta = 0.0;
                w.n_fit = 0;
                rep.warnings.push_back("no exam in " + mp +
                                       "; pass weights default to (1, 0)");
            } else if (global.ok) {
                w.alpha = global.alpha;
                w.beta = global.beta;
                w.residual_offset = global.residual_offset;
                rep.warnings.push_back("insufficient data to fit " + mp +
                                       "; using pooled weights");
            } else {
                w.alpha = 1.0;
                w.beta = 0.0;
                rep.warnings.push_back("pass-weight fit unavailable for " +
                                       mp);
            }
            by_mp[mp] = w;
        }
        return by_mp;
    };

    // Pass 1: fit, then drop threshold-inconsistent records. A record is
    // inconsistent iff an exam score exists and either it passed with an
    // exam below 40 or it failed with a fitted grade at or above 40.
    std::vector<double> x;
    std::vector<std::optional<double>> y;
    compute_xy(records, x, y);
    auto weights1 = fit_all(records, x, y);

    std::vector<RegistrationRecord> kept;
    kept.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        bool drop = false;
        if (y[i]) {
            const auto& w = weights1.at(mp_key(
                records[i].info.code_module,
                records[i].info.code_presentation));
            const double fitted = w.alpha * x[i] + w.beta * *y[i];
            if (records[i].label == 1 && *y[i] < 40.0) drop = true;
            if (records[i].label == 0 && fitted >= 40.0) drop = true;
        }
        if (drop) {
            ++rep.dropped_outliers;
        } else {
            kept.push_back(std::move(records[i]));
        }
    }
    records = std::move(kept);

    // Pass 2: refit on the surviving records.
    compute_xy(records, x, y);
    auto weights2 = fit_all(records, x, y);
    for (auto& [mp, w] : weights2) out.weights.push_back(w);

    std::sort(records.begin(), records.end(),
              [](const RegistrationRecord& a, const RegistrationRecord& b) {
                  return std::tie(a.info.id_student, a.info.code_module,
                                  a.info.code_presentation) <
                         std::tie(b.info.id_student, b.info.code_module,
                                  b.info.code_presentation);
              });
    for (size_t i = 0; i < records.size(); ++i) {
        records[i].registration_id = static_cast<long>(i);
    }
    rep.output_rows = static_cast<long>(records.size());
    out.records = std::move(records);
    return out;
}

namespace {

const std::vector<std::string> kPreprocessedHeader = {
    "registration_id", "id_student",   "code_module",
    "code_presentation", "gender",     "region",
    "highest_education", "imd_band",   "age_band",
    "num_of_prev_attempts", "studied_credits", "disability",
    "final_result",      "course_category", "label",
    "withdrawal_day"};

}  // namespace

void write_preprocessed_csv(const std::string& path,
                            const std::vector<RegistrationRecord>& records) {
    std::vector<csv::Row> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        const auto& s = r.info;
        rows.push_back({std::to_string(r.registration_id),
                        std::to_string(s.id_student), s.code_module,
                        s.code_presentation, s.gender, s.region,
                        s.highest_education, s.imd_band.value_or("?"),
                        s.age_band, std::to_string(s.num_of_prev_attempts),
                        std::to_string(s.studied_credits), s.disability,
                        to_string(s.final_result),
                        to_string(r.course_category),
                        std::to_string(r.label),
                        r.withdrawal_day ? std::to_string(*r.withdrawal_day)
                                         : "?"});
    }
    csv::write_file(path, kPreprocessedHeader, rows);
}

std::vector<RegistrationRecord> read_preprocessed_csv(
    const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header != kPreprocessedHeader) {
        throw std::runtime_error(path + ": unexpected header");
    }
    std::vector<RegistrationRecord> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        RegistrationRecord rec;
        rec.registration_id = *csv::cell_long(r[0]);
        rec.info.id_student = *csv::cell_long(r[1]);
        rec.info.code_module = r[2];
        rec.info.code_presentation = r[3];
        rec.info.gender = r[4];
        rec.info.region = r[5];
        rec.info.highest_education = r[6];
        rec.info.imd_band = csv::cell_opt(r[7]);
        rec.info.age_band = r[8];
        rec.info.num_of_prev_attempts = static_cast<int>(*csv::cell_long(r[9]));
        rec.info.studied_credits = static_cast<int>(*csv::cell_long(r[10]));
        rec.info.disability = r[11];
        rec.info.final_result = parse_final_result(r[12]);
        rec.course_category = r[13] == "STEM" ? CourseCategory::STEM
                                              : CourseCategory::SocialScience;
        rec.label = static_cast<int>(*csv::cell_long(r[14]));
        auto wd = csv::cell_long(r[15]);
        if (wd) rec.withdrawal_day = static_cast<int>(*wd);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace oula::ingest
