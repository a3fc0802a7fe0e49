#include "oula/graph.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace oula::graph {

HeteroGraph build_graph(const tabular::SnapshotDataset& snapshot,
                        const std::vector<long>& student_of,
                        const std::vector<int>& rows, int case_id,
                        const tabular::Standardizer* standardizer) {
    if (student_of.size() != static_cast<size_t>(snapshot.features.rows())) {
        throw std::runtime_error("build_graph: student_of size mismatch");
    }
    HeteroGraph g;
    g.day = snapshot.day;
    g.case_id = case_id;

    const std::vector<int> cols =
        tabular::case_columns(snapshot.column_names, case_id);
    const int n = static_cast<int>(rows.size());
    g.node_features.resize(n, static_cast<long>(cols.size()));
    g.labels.resize(n);
    g.registration_ids.resize(n);
    for (int i = 0; i < n; ++i) {
        const int r = rows[i];
        for (size_t j = 0; j < cols.size(); ++j) {
            double v = snapshot.features(r, cols[j]);
            if (standardizer) {
                v = (v - standardizer->mean(cols[j])) /
                    standardizer->scale(cols[j]);
            }
            g.node_features(i, static_cast<long>(j)) = v;
        }
        g.labels[i] = snapshot.labels[r];
        g.registration_ids[i] = snapshot.registration_ids[r];
    }

    // Sibling groups: registrations of the same student within this split.
    std::unordered_map<long, std::vector<int>> by_student;
    for (int i = 0; i < n; ++i) {
        by_student[student_of[rows[i]]].push_back(i);
    }

    for (int i = 0; i < n; ++i) {
        g.edge_src.push_back(i);  // self-loop
        g.edge_dst.push_back(i);
        const auto& sibs = by_student.at(student_of[rows[i]]);
        for (int j : sibs) {
            if (j == i) continue;
            g.edge_src.push_back(i);
            g.edge_dst.push_back(j);
        }
    }
    return g;
}

GraphStats graph_stats(const HeteroGraph& g) {
    GraphStats s;
    s.node_count = g.node_count();
    s.edge_count = g.edge_count();
    s.avg_degree =
        s.node_count ? double(s.edge_count) / double(s.node_count) : 0.0;
    std::vector<int> out_degree(g.node_count(), 0);
    for (int src : g.edge_src) ++out_degree[src];
    for (int d : out_degree) {
        ++s.degree_histogram[d];
        s.max_degree = std::max(s.max_degree, d);
    }
    long best = -1;
    for (const auto& [deg, cnt] : s.degree_histogram) {
        if (cnt > best) {
            best = cnt;
            s.modal_degree = deg;
        }
    }
    return s;
}

void dump_graph(const HeteroGraph& g, const std::string& edge_path,
                const std::string& feature_path,
                const std::vector<std::string>& column_names) {
    std::ofstream edges(edge_path);
    if (!edges) throw std::runtime_error("cannot write " + edge_path);
    for (int e = 0; e < g.edge_count(); ++e) {
        edges << g.edge_src[e] << ',' << g.edge_dst[e] << '\n';
    }

    std::ofstream feats(feature_path);
    if (!feats) throw std::runtime_error("cannot write " + feature_path);
    const std::vector<int> cols = tabular::case_columns(column_names,
                                                        g.case_id);
    feats << "node,registration_id,label";
    for (int c : cols) feats << ',' << column_names[c];
    feats << '\n';
    for (int i = 0; i < g.node_count(); ++i) {
        feats << i << ',' << g.registration_ids[i] << ',' << g.labels[i];
        for (long j = 0; j < g.node_features.cols(); ++j) {
            feats << ',' << g.node_features(i, j);
        }
        feats << '\n';
    }
}

}  // namespace oula::graph
