// Command-line pipeline: sample -> votes -> gaps -> certify, plus sweeps over
// the injected-node budget and the oracle selftest battery.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gicert/certify.hpp"
#include "gicert/io.hpp"
#include "gicert/oracle.hpp"
#include "gicert/rng.hpp"
#include "gicert/threading.hpp"
#include "gicert/votes.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSelftest = 4;

struct VotesArgs {
  std::string graph_path, features_path, labels_path, weights_path, out_path;
  std::string model = "synthetic";
  int classes = 4;
  int depth = 2;
  double p_e = 0.0, p_n = 0.0;
  std::int64_t samples = 10000;  // desk-scale default; the reference protocol uses 100000
  double alpha = 0.01;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct CertifyArgs {
  std::string graph_path, gaps_path, labels_path;
  std::string method = "lp2";
  std::string targets = "all-correct";
  int rho = 0;
  int tau = 1;
  int depth = 2;
  std::vector<int> rho_sweep;
  std::uint64_t target_seed = 7;
  int random_targets = 100;
  std::string out_path, per_node_path, lp_dump_path;
  int exact_max_rho = 12;
  long exact_max_n_rho = 200;
  int threads = 0;
};

gicert::Graph load_graph_inputs(const std::string& graph_path, const std::string& features_path,
                                const std::string& labels_path) {
  gicert::Graph g = gicert::load_edge_list(graph_path);
  if (!features_path.empty()) gicert::load_features(g, features_path);
  if (!labels_path.empty()) gicert::load_labels(g, labels_path);
  return g;
}

std::unique_ptr<gicert::BaseClassifier> make_model(const VotesArgs& args,
                                                   const gicert::Graph& g) {
  if (args.model == "synthetic")
    return std::make_unique<gicert::SyntheticClassifier>(args.classes, args.depth);
  if (args.model == "forward") {
    if (args.weights_path.empty())
      throw gicert::io_error("--model forward requires --weights");
    if (!g.has_features())
      throw gicert::io_error("--model forward requires --features");
    std::vector<gicert::Matrix> weights = gicert::load_weights(args.weights_path);
    const int classes = weights.back().cols;
    return std::make_unique<gicert::ForwardPassModel>(std::move(weights), classes);
  }
  throw gicert::io_error("unknown model " + args.model);
}

int run_votes(const VotesArgs& args) {
  gicert::Graph g = load_graph_inputs(args.graph_path, args.features_path, args.labels_path);
  std::unique_ptr<gicert::BaseClassifier> model = make_model(args, g);
  gicert::SmoothingParams params{args.p_e, args.p_n};
  params.validate();
  std::fprintf(stderr,
               "votes: N=%lld alpha=%g p_e=%g p_n=%g seed=%llu (desk-scale default N=10000; "
               "reference protocol uses N=100000)\n",
               static_cast<long long>(args.samples), args.alpha, args.p_e, args.p_n,
               static_cast<unsigned long long>(args.seed));
  const gicert::VoteStats stats = gicert::estimate_votes(g, *model, params, args.samples,
                                                         args.seed, args.alpha, args.threads);
  const gicert::GapVector gaps = gicert::gaps_from_votes(stats, params, args.seed);
  gicert::save_gaps_csv(gaps, g.n, args.out_path);
  std::fprintf(stderr, "votes: wrote %s (%d nodes)\n", args.out_path.c_str(), g.n);
  return kExitOk;
}

std::vector<int> select_targets(const CertifyArgs& args, const gicert::Graph& g,
                                const gicert::GapVector& gaps) {
  if (args.targets == "all-correct") {
    if (!g.has_labels())
      throw gicert::io_error("--targets all-correct requires labels");
    std::vector<int> t;
    for (const gicert::NodeGap& ng : gaps.nodes)
      if (ng.node < g.n && g.labels[ng.node] == ng.y_star) t.push_back(ng.node);
    return t;
  }
  if (args.targets.rfind("random:", 0) == 0 || args.targets == "random") {
    int count = args.random_targets;
    if (args.targets.rfind("random:", 0) == 0)
      count = std::stoi(args.targets.substr(std::string("random:").size()));
    std::vector<int> ids(g.n);
    std::iota(ids.begin(), ids.end(), 0);
    const std::uint64_t base = gicert::hash_combine(args.target_seed, gicert::stream::kUser);
    for (int i = g.n - 1; i > 0; --i) {
      const int j = static_cast<int>(gicert::u01(gicert::hash_combine(base, i)) * (i + 1));
      std::swap(ids[i], ids[j]);
    }
    ids.resize(std::min<std::size_t>(ids.size(), count));
    std::sort(ids.begin(), ids.end());
    return ids;
  }
  return gicert::load_targets(args.targets);
}

gicert::CertMethod parse_method(const std::string& name) {
  if (name == "exact") return gicert::CertMethod::kExact;
  if (name == "lp1") return gicert::CertMethod::kLp1;
  if (name == "lp2") return gicert::CertMethod::kLp2;
  if (name == "samplewise") return gicert::CertMethod::kSamplewise;
  throw gicert::io_error("unknown method " + name);
}

gicert::CertificateReport certify_once(const gicert::Graph& g, const gicert::GapVector& gaps,
                                       const std::vector<int>& targets, int rho,
                                       const CertifyArgs& args, gicert::CertMethod method) {
  gicert::ThreatModel threat;
  threat.rho = rho;
  threat.tau = args.tau;
  threat.k = args.depth;
  gicert::CertProblem pb = gicert::make_problem(g, gaps, targets, threat, method);
  gicert::CollectiveOptions opts;
  opts.exact_limits.max_rho = args.exact_max_rho;
  opts.exact_limits.max_n_rho = args.exact_max_n_rho;
  opts.lp_dump_path = args.lp_dump_path;
  gicert::CertificateReport rep = gicert::certify_collective(pb, opts);
  rep.seed = gaps.seed;
  rep.generator = gaps.generator;
  return rep;
}

int run_certify(const CertifyArgs& args) {
  gicert::Graph g = load_graph_inputs(args.graph_path, "", args.labels_path);
  const gicert::GapVector gaps = gicert::load_gaps_csv(args.gaps_path);
  const std::vector<int> targets = select_targets(args, g, gaps);
  const gicert::CertMethod method = parse_method(args.method);

  std::vector<int> rhos = args.rho_sweep.empty() ? std::vector<int>{args.rho} : args.rho_sweep;
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const gicert::CertificateReport rep = certify_once(g, gaps, targets, rhos[i], args, method);
    const std::string json = gicert::report_to_json(rep);
    if (!args.out_path.empty()) {
      std::string path = args.out_path;
      if (rhos.size() > 1) {
        const auto dot = path.rfind('.');
        const std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
        const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
        path = stem + ".rho" + std::to_string(rhos[i]) + ext;
      }
      std::ofstream out(path);
      if (!out) throw gicert::io_error("cannot write " + path);
      out << json;
    } else {
      std::cout << json;
    }
    if (!args.per_node_path.empty()) gicert::save_per_node_csv(rep, args.per_node_path);
    if (rep.status != "ok") exit_code = kExitSolver;
    std::fprintf(stderr, "certify: method=%s rho=%d certified %d/%d (ratio %.4f)%s\n",
                 gicert::method_name(method), rhos[i], rep.certified_count, rep.n_targets,
                 rep.certified_ratio, rep.status == "ok" ? "" : " [FAILED]");
  }
  return exit_code;
}

int run_compare(const CertifyArgs& args, const std::string& out_path) {
  gicert::Graph g = load_graph_inputs(args.graph_path, "", args.labels_path);
  const gicert::GapVector gaps = gicert::load_gaps_csv(args.gaps_path);
  const std::vector<int> targets = select_targets(args, g, gaps);
  std::vector<int> rhos = args.rho_sweep.empty() ? std::vector<int>{args.rho} : args.rho_sweep;

  std::ofstream out(out_path);
  if (!out) throw gicert::io_error("cannot write " + out_path);
  out << "rho,samplewise_ratio,lp1_ratio,lp2_ratio,lp1_runtime,lp2_runtime\n";
  int exit_code = kExitOk;
  for (int rho : rhos) {
    const gicert::CertificateReport sw =
        certify_once(g, gaps, targets, rho, args, gicert::CertMethod::kSamplewise);
    const gicert::CertificateReport lp1 =
        certify_once(g, gaps, targets, rho, args, gicert::CertMethod::kLp1);
    const gicert::CertificateReport lp2 =
        certify_once(g, gaps, targets, rho, args, gicert::CertMethod::kLp2);
    if (sw.status != "ok" || lp1.status != "ok" || lp2.status != "ok") exit_code = kExitSolver;
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.3f,%.3f\n", rho, sw.certified_ratio,
                  lp1.certified_ratio, lp2.certified_ratio, lp1.runtime_ms, lp2.runtime_ms);
    out << line;
    std::fprintf(stderr, "compare: rho=%d samplewise=%.3f lp1=%.3f lp2=%.3f\n", rho,
                 sw.certified_ratio, lp1.certified_ratio, lp2.certified_ratio);
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gicert: collective robustness certification for smoothed graph classifiers "
               "under node injection"};
  app.require_subcommand(1);

  VotesArgs votes;
  CLI::App* votes_cmd = app.add_subcommand("votes", "estimate smoothed votes and export gaps");
  votes_cmd->add_option("--graph", votes.graph_path, "edge list file")->required();
  votes_cmd->add_option("--features", votes.features_path, "feature matrix file");
  votes_cmd->add_option("--labels", votes.labels_path, "label file");
  votes_cmd->add_option("--model", votes.model, "synthetic | forward");
  votes_cmd->add_option("--weights", votes.weights_path, "weight file for --model forward");
  votes_cmd->add_option("--classes", votes.classes, "class count for --model synthetic");
  votes_cmd->add_option("--model-depth", votes.depth, "receptive depth of the model");
  votes_cmd->add_option("--p-e", votes.p_e, "edge deletion probability")->required();
  votes_cmd->add_option("--p-n", votes.p_n, "node deletion probability")->required();
  votes_cmd->add_option("--samples", votes.samples, "Monte Carlo sample count");
  votes_cmd->add_option("--alpha", votes.alpha, "confidence level");
  votes_cmd->add_option("--seed", votes.seed, "run seed");
  votes_cmd->add_option("--threads", votes.threads, "worker cap (0 = default)");
  votes_cmd->add_option("--out", votes.out_path, "gaps CSV output")->required();

  CertifyArgs cert;
  CLI::App* cert_cmd = app.add_subcommand("certify", "run a certificate from a gaps file");
  cert_cmd->add_option("--graph", cert.graph_path, "edge list file")->required();
  cert_cmd->add_option("--gaps", cert.gaps_path, "gaps CSV from the votes step")->required();
  cert_cmd->add_option("--labels", cert.labels_path, "label file (for --targets all-correct)");
  cert_cmd->add_option("--method", cert.method, "exact | lp1 | lp2 | samplewise");
  cert_cmd->add_option("--targets", cert.targets,
                       "all-correct | random:<k> | <path to id file>");
  cert_cmd->add_option("--target-seed", cert.target_seed, "seed for random target selection");
  cert_cmd->add_option("--rho", cert.rho, "injected node budget");
  cert_cmd->add_option("--rho-sweep", cert.rho_sweep, "list of rho values")->delimiter(',');
  cert_cmd->add_option("--tau", cert.tau, "degree budget per injected node")->required();
  cert_cmd->add_option("--depth", cert.depth, "GNN receptive depth k");
  cert_cmd->add_option("--out", cert.out_path, "report JSON path (stdout when omitted)");
  cert_cmd->add_option("--per-node", cert.per_node_path, "per-node CSV path");
  cert_cmd->add_option("--lp-dump", cert.lp_dump_path, "LP-format dump of the built instance");
  cert_cmd->add_option("--exact-max-rho", cert.exact_max_rho, "exact-mode guard on rho");
  cert_cmd->add_option("--exact-max-n-rho", cert.exact_max_n_rho, "exact-mode guard on n*rho");
  cert_cmd->add_option("--threads", cert.threads, "worker cap (0 = default)");

  CertifyArgs cmp = cert;
  std::string compare_out;
  CLI::App* cmp_cmd = app.add_subcommand("compare",
                                         "sample-wise vs lp1 vs lp2 over a rho sweep");
  cmp_cmd->add_option("--graph", cmp.graph_path, "edge list file")->required();
  cmp_cmd->add_option("--gaps", cmp.gaps_path, "gaps CSV")->required();
  cmp_cmd->add_option("--labels", cmp.labels_path, "label file");
  cmp_cmd->add_option("--targets", cmp.targets, "all-correct | random:<k> | <path>");
  cmp_cmd->add_option("--target-seed", cmp.target_seed, "seed for random target selection");
  cmp_cmd->add_option("--rho-sweep", cmp.rho_sweep, "list of rho values")->delimiter(',');
  cmp_cmd->add_option("--tau", cmp.tau, "degree budget per injected node")->required();
  cmp_cmd->add_option("--depth", cmp.depth, "GNN receptive depth k");
  cmp_cmd->add_option("--out", compare_out, "CSV output path")->required();
  cmp_cmd->add_option("--threads", cmp.threads, "worker cap (0 = default)");

  gicert::SelftestConfig selftest;
  CLI::App* self_cmd = app.add_subcommand("selftest", "oracle cross-validation battery");
  self_cmd->add_option("--instances", selftest.instances, "battery size");
  self_cmd->add_option("--seed", selftest.seed, "battery seed");
  self_cmd->add_option("--threads", selftest.threads, "worker cap (0 = default)");
  self_cmd->add_flag("--inject-fault", selftest.inject_fault,
                     "debug hook: skew the bound to confirm violations are caught");

  try {
    app.parse(argc, argv);
    if (votes_cmd->parsed()) return run_votes(votes);
    if (cert_cmd->parsed()) return run_certify(cert);
    if (cmp_cmd->parsed()) return run_compare(cmp, compare_out);
    if (self_cmd->parsed()) {
      const gicert::SelftestResult result = gicert::run_selftest(selftest);
      std::fprintf(stderr, "selftest: %d instances, %d checks, %zu violations\n",
                   result.instances, result.checks, result.violations.size());
      for (const std::string& v : result.violations)
        std::fprintf(stderr, "selftest violation: %s\n", v.c_str());
      return result.ok() ? kExitOk : kExitSelftest;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gicert::io_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
