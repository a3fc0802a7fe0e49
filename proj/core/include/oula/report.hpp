#pragma once

#include <string>
#include <vector>

#include "oula/harness.hpp"
#include "oula/tabular.hpp"

namespace oula::report {

// Writes table4..table7 as paired .csv/.md files into out_dir: baselines,
// graph-model ablation, best-vs-graph comparison, and running times. Rows
// are model x metric, columns the requested snapshot days, cells 3-decimal
// fold means. Missing cells are emitted blank; one warning per gap is
// returned.
std::vector<std::string> emit_tables(const harness::ResultsTable& results,
                                     const std::vector<int>& days,
                                     const std::string& out_dir);

// Deterministic SVG figures, each with its backing CSV next to it:
// fig_cases (validation F1 across all feature cases), fig_case2v5,
// fig_top3 (best baselines vs Case-5 graph models), pca_heatmap.
void emit_plots(const harness::ResultsTable& results,
                const tabular::PcaResult& pca,
                const std::vector<std::string>& column_names,
                const std::vector<int>& days, const std::string& out_dir);

}  // namespace oula::report
