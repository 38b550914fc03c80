#include "gicert/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gicert {

namespace {

std::string loc(const std::string& path, int line) {
  return path + ":" + std::to_string(line) + ": ";
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  return in;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Graph load_edge_list(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  Graph g;
  std::string line;
  int lineno = 0;
  int declared_n = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string word;
      if (meta >> word && word == "nodes") {
        if (!(meta >> declared_n) || declared_n < 0)
          throw io_error(loc(path, lineno) + "malformed nodes directive");
      }
      continue;
    }
    int u = 0, v = 0;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> u >> comma >> v) || comma != ',')
      throw io_error(loc(path, lineno) + "expected \"u,v\"");
    if (u < 0 || v < 0 || u == v)
      throw io_error(loc(path, lineno) + "invalid edge endpoints");
    g.add_edge(u, v);
  }
  if (declared_n >= 0) {
    if (declared_n < g.n) throw io_error(path + ": nodes directive below max endpoint");
    g.n = declared_n;
  }
  g.validate();
  return g;
}

namespace {

std::vector<double> load_matrix(const std::string& path, int& rows, int& cols) {
  std::ifstream in = open_or_throw(path);
  if (!(in >> rows >> cols) || rows < 0 || cols < 1)
    throw io_error(path + ": expected header \"rows cols\"");
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(in >> values[i]))
      throw io_error(path + ": value " + std::to_string(i) + " missing or malformed");
  return values;
}

}  // namespace

void load_features(Graph& g, const std::string& path) {
  int rows = 0, cols = 0;
  std::vector<double> values = load_matrix(path, rows, cols);
  if (rows < g.n) throw io_error(path + ": feature rows below node count");
  if (rows > g.n) g.n = rows;  // trailing isolated nodes
  g.features = std::move(values);
  g.feature_dim = cols;
  g.validate();
}

void load_labels(Graph& g, const std::string& path) {
  int rows = 0, cols = 0;
  std::vector<double> values = load_matrix(path, rows, cols);
  if (cols != 1) throw io_error(path + ": labels must have one column");
  if (rows < g.n) throw io_error(path + ": label rows below node count");
  if (rows > g.n) g.n = rows;
  g.labels.resize(rows);
  int max_label = 0;
  for (int i = 0; i < rows; ++i) {
    g.labels[i] = static_cast<int>(values[i]);
    if (g.labels[i] < 0) throw io_error(path + ": negative label");
    max_label = std::max(max_label, g.labels[i]);
  }
  g.num_classes = std::max(g.num_classes, max_label + 1);
  g.validate();
}

std::vector<Matrix> load_weights(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<Matrix> layers;
  int rows = 0, cols = 0;
  while (in >> rows >> cols) {
    if (rows < 1 || cols < 1) throw io_error(path + ": invalid layer header");
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.values.resize(static_cast<std::size_t>(rows) * cols);
    for (std::size_t i = 0; i < m.values.size(); ++i)
      if (!(in >> m.values[i]))
        throw io_error(path + ": layer " + std::to_string(layers.size()) + " truncated");
    layers.push_back(std::move(m));
  }
  if (layers.empty()) throw io_error(path + ": no weight layers found");
  return layers;
}

std::vector<int> load_targets(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<int> targets;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int v = 0;
    if (!(row >> v) || v < 0) throw io_error(loc(path, lineno) + "expected a node id");
    targets.push_back(v);
  }
  return targets;
}

void save_gaps_csv(const GapVector& gaps, int n, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "# gicert gaps v1\n";
  out << "# n=" << n << " classes=" << gaps.num_classes << " samples=" << gaps.samples
      << " alpha=" << fmt_double(gaps.alpha) << " p_e=" << fmt_double(gaps.params.p_e)
      << " p_n=" << fmt_double(gaps.params.p_n) << " seed=" << gaps.seed << " generator="
      << gaps.generator << "\n";
  out << "node,y_star,p_a_lower,p_b_upper,c_v\n";
  for (const NodeGap& ng : gaps.nodes)
    out << ng.node << "," << ng.y_star << "," << fmt_double(ng.p_a_lower) << ","
        << fmt_double(ng.p_b_upper) << "," << fmt_double(ng.c) << "\n";
  if (!out) throw io_error("write failure on " + path);
}

GapVector load_gaps_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  GapVector gaps;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
          if (key == "classes") gaps.num_classes = std::stoi(value);
          else if (key == "samples") gaps.samples = std::stoll(value);
          else if (key == "alpha") gaps.alpha = std::stod(value);
          else if (key == "p_e") gaps.params.p_e = std::stod(value);
          else if (key == "p_n") gaps.params.p_n = std::stod(value);
          else if (key == "seed") gaps.seed = std::stoull(value);
          else if (key == "generator") gaps.generator = value;
        } catch (const std::exception&) {
          throw io_error(loc(path, lineno) + "malformed metadata token " + token);
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "node,y_star,p_a_lower,p_b_upper,c_v")
        throw io_error(loc(path, lineno) + "unexpected gaps header");
      header_seen = true;
      continue;
    }
    NodeGap ng;
    char c1, c2, c3, c4;
    std::istringstream row(line);
    if (!(row >> ng.node >> c1 >> ng.y_star >> c2 >> ng.p_a_lower >> c3 >> ng.p_b_upper >>
          c4 >> ng.c) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
      throw io_error(loc(path, lineno) + "malformed gaps row");
    gaps.nodes.push_back(ng);
  }
  if (!header_seen) throw io_error(path + ": missing gaps header");
  return gaps;
}

std::string report_to_json(const CertificateReport& rep) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["status"] = rep.status;
  j["method"] = method_name(rep.method);
  j["rho"] = rep.threat.rho;
  j["tau"] = rep.threat.tau;
  j["p_e"] = rep.params.p_e;
  j["p_n"] = rep.params.p_n;
  j["k"] = rep.threat.k;
  j["n_targets"] = rep.n_targets;
  j["abstain"] = rep.abstain_count;
  j["M_upper"] = rep.m_upper;
  j["certified_count"] = rep.certified_count;
  j["certified_ratio"] = rep.certified_ratio;
  j["lp"] = {{"rows", rep.lp.rows},
             {"cols", rep.lp.cols},
             {"pivots", rep.lp.pivots},
             {"duality_gap", rep.lp.duality_gap}};
  j["runtime_ms"] = static_cast<std::int64_t>(rep.runtime_ms);
  j["rng"] = {{"seed", rep.seed}, {"generator", rep.generator}};
  nlohmann::ordered_json per_node = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < rep.target_ids.size(); ++t)
    per_node.push_back({{"id", rep.target_ids[t]}, {"robust_flag", rep.robust_flag[t] != 0}});
  j["per_node"] = std::move(per_node);
  return j.dump(2) + "\n";
}

void save_report(const CertificateReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << report_to_json(rep);
  if (!out) throw io_error("write failure on " + path);
}

void save_per_node_csv(const CertificateReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "node,robust_flag\n";
  for (std::size_t t = 0; t < rep.target_ids.size(); ++t)
    out << rep.target_ids[t] << "," << (rep.robust_flag[t] ? 1 : 0) << "\n";
  if (!out) throw io_error("write failure on " + path);
}

}  // namespace gicert
