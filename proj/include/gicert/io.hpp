#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gicert/certify.hpp"
#include "gicert/classifier.hpp"
#include "gicert/graph.hpp"
#include "gicert/votes.hpp"

namespace gicert {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Edge list: one "u,v" pair per line, 0-indexed, '#' comments. An optional
// "# nodes N" comment pins the node count (for trailing isolated nodes).
Graph load_edge_list(const std::string& path);

// Matrix files: header "n d", then whitespace-separated row-major values.
void load_features(Graph& g, const std::string& path);
void load_labels(Graph& g, const std::string& path);

// Weight file: per-layer blocks "rows cols" + row-major values, input first.
std::vector<Matrix> load_weights(const std::string& path);

// Target list: one node id per line, '#' comments.
std::vector<int> load_targets(const std::string& path);

// Gaps CSV: metadata comments, then "node,y_star,p_a_lower,p_b_upper,c_v".
void save_gaps_csv(const GapVector& gaps, int n, const std::string& path);
GapVector load_gaps_csv(const std::string& path);

std::string report_to_json(const CertificateReport& rep);
void save_report(const CertificateReport& rep, const std::string& path);
void save_per_node_csv(const CertificateReport& rep, const std::string& path);

}  // namespace gicert
