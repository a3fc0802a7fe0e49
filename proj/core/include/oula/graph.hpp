#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "oula/tabular.hpp"
#include "oula/types.hpp"

namespace oula::graph {

// Registration-node graph for one (fold split, case, day). The R-S-R
// metapath is collapsed: student attributes ride on registration nodes and
// registrations of the same student are fully cross-connected. Every node
// carries a self-loop; cross edges come in both directions.
struct HeteroGraph {
    Eigen::MatrixXd node_features;
    std::vector<int> labels;
    std::vector<int> edge_src;  // directed, self-loops included
    std::vector<int> edge_dst;
    std::vector<long> registration_ids;
    int day = 0;
    int case_id = 5;

    int node_count() const { return static_cast<int>(labels.size()); }
    int edge_count() const { return static_cast<int>(edge_src.size()); }
};

// `rows` selects the split's rows of the encoded snapshot; `student_of`
// gives id_student per snapshot row. Feature columns follow the ablation
// case; the optional standardizer (fitted on the training split) is applied
// to the selected columns before slicing.
HeteroGraph build_graph(const tabular::SnapshotDataset& snapshot,
                        const std::vector<long>& student_of,
                        const std::vector<int>& rows, int case_id,
                        const tabular::Standardizer* standardizer = nullptr);

struct GraphStats {
    long node_count = 0;
    long edge_count = 0;
    double avg_degree = 0.0;  // directed: edges / nodes
    int max_degree = 0;       // out-degree
    int modal_degree = 0;
    std::map<int, long> degree_histogram;
};

GraphStats graph_stats(const HeteroGraph& g);

// Edge-list text dump (src,dst per line) plus a feature CSV next to it.
void dump_graph(const HeteroGraph& g, const std::string& edge_path,
                const std::string& feature_path,
                const std::vector<std::string>& column_names);

}  // namespace oula::graph
