#include "oula/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>

namespace oula::report {

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

struct RowSpec {
    std::string label;
    std::string model;
    int case_id = 5;
};

const char* kMetricNames[4] = {"train accuracy", "train F1",
                               "validation accuracy", "validation F1"};

double metric_of(const harness::ResultRow& r, int metric) {
    switch (metric) {
        case 0: return r.train.accuracy;
        case 1: return r.train.f1_weighted;
        case 2: return r.val.accuracy;
        default: return r.val.f1_weighted;
    }
}

// model x metric grid of 3-decimal strings; empty string = missing cell.
struct TableData {
    std::vector<std::string> row_labels;   // "<model> / <metric>"
    std::vector<std::vector<std::string>> cells;
};

TableData build_metric_table(const harness::ResultsTable& results,
                             const std::vector<RowSpec>& rows,
                             const std::vector<int>& days,
                             const std::string& table_name,
                             std::vector<std::string>& warnings) {
    TableData t;
    for (const auto& spec : rows) {
        for (int metric = 0; metric < 4; ++metric) {
            t.row_labels.push_back(spec.label + " / " + kMetricNames[metric]);
            std::vector<std::string> line;
            for (int day : days) {
                auto mean = results.fold_mean(spec.model, spec.case_id, day);
                if (!mean) {
                    if (metric == 0) {
                        warnings.push_back(table_name + ": no results for " +
                                           spec.label + " at day " +
                                           std::to_string(day));
                    }
                    line.emplace_back();
                } else {
                    line.push_back(fmt3(metric_of(*mean, metric)));
                }
            }
            t.cells.push_back(std::move(line));
        }
    }
    return t;
}

void write_table(const std::string& base, const std::string& title,
                 const std::vector<int>& days, const TableData& t) {
    std::ofstream csv(base + ".csv");
    if (!csv) throw std::runtime_error("cannot write " + base + ".csv");
    csv << "model,metric";
    for (int day : days) csv << ",day" << day;
    csv << '\n';
    for (size_t i = 0; i < t.row_labels.size(); ++i) {
        const auto slash = t.row_labels[i].find(" / ");
        csv << t.row_labels[i].substr(0, slash) << ','
            << t.row_labels[i].substr(slash + 3);
        for (const auto& cell : t.cells[i]) csv << ',' << cell;
        csv << '\n';
    }

    std::ofstream md(base + ".md");
    if (!md) throw std::runtime_error("cannot write " + base + ".md");
    md << "# " << title << "\n\n| model / metric |";
    for (int day : days) md << " day " << day << " |";
    md << "\n|---|";
    for (size_t d = 0; d < days.size(); ++d) md << "---|";
    md << '\n';
    for (size_t i = 0; i < t.row_labels.size(); ++i) {
        md << "| " << t.row_labels[i] << " |";
        for (const auto& cell : t.cells[i]) md << ' ' << cell << " |";
        md << '\n';
    }
}

// Mean validation F1 across all requested days; used to rank baselines.
std::optional<double> overall_val_f1(const harness::ResultsTable& results,
                                     const std::string& model, int case_id,
                                     const std::vector<int>& days) {
    double sum = 0.0;
    int n = 0;
    for (int day : days) {
        auto mean = results.fold_mean(model, case_id, day);
        if (!mean) continue;
        sum += mean->val.f1_weighted;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::vector<std::string> top_baselines(const harness::ResultsTable& results,
                                       const std::vector<int>& days,
                                       size_t count) {
    std::vector<std::pair<double, std::string>> ranked;
    for (auto f : baselines::all_families()) {
        const std::string name = baselines::to_string(f);
        if (auto score = overall_val_f1(results, name, 5, days)) {
            ranked.emplace_back(*score, name);
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    if (ranked.size() > count) ranked.resize(count);
    std::vector<std::string> names;
    for (const auto& [score, name] : ranked) names.push_back(name);
    return names;
}

// ---- SVG plotting ------------------------------------------------------

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

struct Series {
    std::string label;
    std::vector<double> x, y;  // same length; gaps already removed
};

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& ylabel,
                      const std::vector<Series>& series) {
    const double width = 820, height = 520;
    const double left = 70, right = 180, top = 50, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    const double ypad = std::max(0.01, (ymax - ymin) * 0.08);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * plot_h; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << fmt1(left + plot_w / 2) << "\" y=\"24\" "
        << "text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";

    // axes with 5 ticks each
    out << "<rect x=\"" << fmt1(left) << "\" y=\"" << fmt1(top) << "\" width=\""
        << fmt1(plot_w) << "\" height=\"" << fmt1(plot_h)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        const double yc = py(yv);
        out << "<line x1=\"" << fmt1(left) << "\" y1=\"" << fmt1(yc)
            << "\" x2=\"" << fmt1(left + plot_w) << "\" y2=\"" << fmt1(yc)
            << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << fmt1(left - 8) << "\" y=\"" << fmt1(yc + 4)
            << "\" text-anchor=\"end\">" << fmt3(yv) << "</text>\n";
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        out << "<text x=\"" << fmt1(px(xv)) << "\" y=\""
            << fmt1(top + plot_h + 18) << "\" text-anchor=\"middle\">"
            << fmt1(xv) << "</text>\n";
    }
    out << "<text x=\"" << fmt1(left + plot_w / 2) << "\" y=\""
        << fmt1(height - 10) << "\" text-anchor=\"middle\">day</text>\n"
        << "<text x=\"18\" y=\"" << fmt1(top + plot_h / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fmt1(top + plot_h / 2) << ")\">" << ylabel << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        if (s.x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                out << fmt1(px(s.x[i])) << ',' << fmt1(py(s.y[i])) << ' ';
            }
            out << "\"/>\n";
        }
        for (size_t i = 0; i < s.x.size(); ++i) {
            out << "<circle cx=\"" << fmt1(px(s.x[i])) << "\" cy=\""
                << fmt1(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        }
        const double ly = top + 16.0 * double(si);
        out << "<line x1=\"" << fmt1(left + plot_w + 10) << "\" y1=\""
            << fmt1(ly) << "\" x2=\"" << fmt1(left + plot_w + 30) << "\" y2=\""
            << fmt1(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << fmt1(left + plot_w + 34) << "\" y=\""
            << fmt1(ly + 4) << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_series_csv(const std::string& path, const std::vector<int>& days,
                      const std::vector<Series>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "day";
    for (const auto& s : series) out << ',' << s.label;
    out << '\n';
    for (int day : days) {
        out << day;
        for (const auto& s : series) {
            out << ',';
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (s.x[i] == day) {
                    out << fmt3(s.y[i]);
                    break;
                }
            }
        }
        out << '\n';
    }
}

Series make_series(const harness::ResultsTable& results,
                   const std::string& label, const std::string& model,
                   int case_id, const std::vector<int>& days, bool accuracy) {
    Series s;
    s.label = label;
    for (int day : days) {
        auto mean = results.fold_mean(model, case_id, day);
        if (!mean) continue;
        s.x.push_back(day);
        s.y.push_back(accuracy ? mean->val.accuracy : mean->val.f1_weighted);
    }
    return s;
}

std::string diverging_color(double v) {
    // blue (-1) -> white (0) -> red (+1)
    v = std::clamp(v, -1.0, 1.0);
    int r, g, b;
    if (v >= 0) {
        r = 255;
        g = b = int(255.5 - 225.0 * v);
    } else {
        b = 255;
        r = g = int(255.5 + 225.0 * v);
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

void write_heatmap(const std::string& path, const tabular::PcaResult& pca,
                   const std::vector<std::string>& column_names) {
    const long n_comp = pca.components.rows();
    const long n_cols = pca.components.cols();
    const double cell = 26, left = 90, top = 60, label_h = 150;
    const double width = left + cell * double(n_cols) + 40;
    const double height = top + cell * double(n_comp) + label_h;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << fmt1(width / 2)
        << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << "Principal component loadings</text>\n";
    for (long i = 0; i < n_comp; ++i) {
        out << "<text x=\"" << fmt1(left - 8) << "\" y=\""
            << fmt1(top + cell * double(i) + cell * 0.65)
            << "\" text-anchor=\"end\">PC" << (i + 1) << " ("
            << fmt3(pca.explained_variance_ratio(i)) << ")</text>\n";
        for (long j = 0; j < n_cols; ++j) {
            const double v = pca.components(i, j);
            out << "<rect x=\"" << fmt1(left + cell * double(j)) << "\" y=\""
                << fmt1(top + cell * double(i)) << "\" width=\"" << fmt1(cell)
                << "\" height=\"" << fmt1(cell) << "\" fill=\""
                << diverging_color(v) << "\" stroke=\"#cccccc\"/>\n";
        }
    }
    for (long j = 0; j < n_cols; ++j) {
        const std::string name = size_t(pca.kept_columns[j]) <
                                         column_names.size()
                                     ? column_names[pca.kept_columns[j]]
                                     : "col" + std::to_string(j);
        const double xc = left + cell * double(j) + cell * 0.65;
        const double yc = top + cell * double(n_comp) + 8;
        out << "<text x=\"" << fmt1(xc) << "\" y=\"" << fmt1(yc)
            << "\" text-anchor=\"start\" transform=\"rotate(60 " << fmt1(xc)
            << ' ' << fmt1(yc) << ")\">" << name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_tables(const harness::ResultsTable& results,
                                     const std::vector<int>& days,
                                     const std::string& out_dir) {
    std::vector<std::string> warnings;

    std::vector<RowSpec> t4;
    for (auto f : baselines::all_families()) {
        const std::string name = baselines::to_string(f);
        t4.push_back({name, name, 5});
    }
    write_table(out_dir + "/table4", "Classical baselines (Case 5 features)",
                days,
                build_metric_table(results, t4, days, "table4", warnings));

    std::vector<RowSpec> t5;
    for (const std::string model : {"HAN", "HGT"}) {
        for (int c = 1; c <= 5; ++c) {
            t5.push_back({model + " Case " + std::to_string(c), model, c});
        }
    }
    write_table(out_dir + "/table5", "Graph models across feature cases",
                days,
                build_metric_table(results, t5, days, "table5", warnings));

    std::vector<RowSpec> t6;
    for (const auto& name : top_baselines(results, days, 3)) {
        t6.push_back({name, name, 5});
    }
    t6.push_back({"HAN Case 5", "HAN", 5});
    t6.push_back({"HGT Case 5", "HGT", 5});
    write_table(out_dir + "/table6",
                "Best baselines vs Case-5 graph models", days,
                build_metric_table(results, t6, days, "table6", warnings));

    // table7: wall-clock seconds per model-day, fold mean and fold total.
    std::vector<RowSpec> t7 = t4;
    t7.push_back({"HAN Case 5", "HAN", 5});
    t7.push_back({"HGT Case 5", "HGT", 5});
    TableData rt;
    for (const auto& spec : t7) {
        for (int agg = 0; agg < 2; ++agg) {
            rt.row_labels.push_back(spec.label + " / " +
                                    (agg == 0 ? "mean seconds"
                                              : "total seconds"));
            std::vector<std::string> line;
            for (int day : days) {
                double total = 0.0;
                int n = 0;
                for (const auto& r : results.rows()) {
                    if (r.model == spec.model && r.case_id == spec.case_id &&
                        r.day == day && !r.failed) {
                        total += r.seconds;
                        ++n;
                    }
                }
                if (n == 0) {
                    if (agg == 0) {
                        warnings.push_back("table7: no results for " +
                                           spec.label + " at day " +
                                           std::to_string(day));
                    }
                    line.emplace_back();
                } else {
                    line.push_back(fmt3(agg == 0 ? total / n : total));
                }
            }
            rt.cells.push_back(std::move(line));
        }
    }
    write_table(out_dir + "/table7", "Running time in seconds", days, rt);
    return warnings;
}

void emit_plots(const harness::ResultsTable& results,
                const tabular::PcaResult& pca,
                const std::vector<std::string>& column_names,
                const std::vector<int>& days, const std::string& out_dir) {
    // (a) all feature cases, both graph models
    std::vector<Series> cases;
    for (const std::string model : {"HAN", "HGT"}) {
        for (int c = 1; c <= 5; ++c) {
            auto s = make_series(results, model + "_case" + std::to_string(c),
                                 model, c, days, false);
            if (!s.x.empty()) cases.push_back(std::move(s));
        }
    }
    write_line_chart(out_dir + "/fig_cases.svg",
                     "Validation F1 across feature cases", "validation F1",
                     cases);
    // the backing CSV also carries accuracy so the figure claims about both
    // metrics are checkable without re-running
    std::vector<Series> cases_full = cases;
    for (const std::string model : {"HAN", "HGT"}) {
        for (int c = 1; c <= 5; ++c) {
            auto s = make_series(results,
                                 model + "_case" + std::to_string(c) + "_acc",
                                 model, c, days, true);
            if (!s.x.empty()) cases_full.push_back(std::move(s));
        }
    }
    write_series_csv(out_dir + "/fig_cases.csv", days, cases_full);

    // (b) Case 2 vs Case 5
    std::vector<Series> c2v5;
    for (const std::string model : {"HAN", "HGT"}) {
        for (int c : {2, 5}) {
            auto s = make_series(results, model + "_case" + std::to_string(c),
                                 model, c, days, false);
            if (!s.x.empty()) c2v5.push_back(std::move(s));
        }
    }
    write_line_chart(out_dir + "/fig_case2v5.svg",
                     "Case 2 vs Case 5 validation F1", "validation F1", c2v5);
    write_series_csv(out_dir + "/fig_case2v5.csv", days, c2v5);

    // (c) top baselines vs Case-5 graph models
    std::vector<Series> top3;
    for (const auto& name : top_baselines(results, days, 3)) {
        auto s = make_series(results, name, name, 5, days, false);
        if (!s.x.empty()) top3.push_back(std::move(s));
    }
    for (const std::string model : {"HAN", "HGT"}) {
        auto s = make_series(results, model + "_case5", model, 5, days, false);
        if (!s.x.empty()) top3.push_back(std::move(s));
    }
    write_line_chart(out_dir + "/fig_top3.svg",
                     "Best baselines vs Case-5 graph models", "validation F1",
                     top3);
    write_series_csv(out_dir + "/fig_top3.csv", days, top3);

    write_heatmap(out_dir + "/pca_heatmap.svg", pca, column_names);
    tabular::write_pca_csv(out_dir + "/pca_heatmap.csv", pca, column_names);
}

}  // namespace oula::report
