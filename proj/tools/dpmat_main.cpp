// dpmat command line tool: stream ingestion into snapshots, query
// dispatch over snapshots, and benchmark report generation.
//
// Exit codes: 0 success, 2 malformed input row, 3 row-norm violation
// under the reject policy, 64 usage error, 1 other runtime failure.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpmat/analytics.hpp"
#include "dpmat/continual.hpp"
#include "dpmat/errors.hpp"
#include "dpmat/histogram.hpp"
#include "dpmat/io.hpp"
#include "dpmat/log.hpp"
#include "dpmat/oracle.hpp"

namespace {

using namespace dpmat;

constexpr int kExitOk = 0;
constexpr int kExitBadRow = 2;
constexpr int kExitNormViolation = 3;
constexpr int kExitUsage = 64;
constexpr int kExitFailure = 1;

struct CommonOpts {
  std::string mode = "exact";
  std::uint64_t window = 0;
  double eta = 0.25;
  double eps = 1.0;
  double delta = 1e-6;
  int rank = 1;
  double beta = 0.1;
  std::uint64_t seed = 0;
  std::string norm_policy = "reject";
  std::string in = "-";
  std::string format = "csv";
};

NormPolicy parse_policy(const std::string& s) {
  if (s == "reject") return NormPolicy::reject;
  if (s == "clip") return NormPolicy::clip;
  throw InputError("unknown norm policy: " + s);
}

std::vector<Vector> load_rows(const std::string& path,
                              const std::string& format) {
  const bool use_stdin = path == "-";
  std::ifstream file;
  if (!use_stdin) {
    file.open(path, std::ios::binary);
    if (!file) throw InputError("cannot open input: " + path);
  }
  std::istream& in = use_stdin ? std::cin : file;
  if (format == "csv") return read_rows_csv(in);
  if (format == "bin") return read_rows_bin(in);
  throw InputError("unknown row format: " + format);
}

std::vector<std::uint8_t> load_bytes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open snapshot: " + path);
  return std::vector<std::uint8_t>{std::istreambuf_iterator<char>(file),
                                   std::istreambuf_iterator<char>()};
}

void save_bytes(const std::string& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for write: " + path);
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("short write: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for write: " + path);
  file << text << "\n";
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad numeric list entry: '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("empty numeric list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) {
    const int i = static_cast<int>(v);
    if (double(i) != v) throw InputError("expected integer list");
    out.push_back(i);
  }
  return out;
}

nlohmann::ordered_json matrix_to_json(const Matrix& M) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

HistogramConfig histogram_config(const CommonOpts& o, int d) {
  HistogramConfig cfg;
  cfg.mode = mode_from_name(o.mode);
  cfg.W = o.window;
  cfg.eta = o.eta;
  cfg.r = o.rank;
  cfg.d = d;
  cfg.beta = o.beta;
  cfg.budget = make_budget(o.eps, o.delta);
  cfg.seed = o.seed;
  cfg.norm_policy = parse_policy(o.norm_policy);
  return cfg;
}

int run_ingest(const CommonOpts& o, const std::string& snapshot_path) {
  std::vector<Vector> rows;
  try {
    rows = load_rows(o.in, o.format);
  } catch (const InputError& e) {
    std::cerr << "dpmat ingest: " << e.what() << "\n";
    return kExitBadRow;
  }
  // Dimension comes from the data; an empty stream gets a placeholder
  // d=1 so the empty snapshot is still well formed.
  const int d = rows.empty() ? 1 : static_cast<int>(rows.front().size());
  try {
    std::vector<std::uint8_t> bytes;
    if (o.mode == "tree") {
      TreeConfig cfg;
      cfg.W = o.window;
      cfg.d = d;
      cfg.budget = make_budget(o.eps, o.delta);
      cfg.seed = o.seed;
      cfg.norm_policy = parse_policy(o.norm_policy);
      DyadicTree tree = DyadicTree::make(cfg);
      for (const auto& a : rows) tree.tree_ingest(a);
      bytes = tree.snapshot();
    } else {
      SpectralHistogram h = SpectralHistogram::make(histogram_config(o, d));
      for (const auto& a : rows) h.ingest(a);
      bytes = h.snapshot();
    }
    save_bytes(snapshot_path, bytes);
  } catch (const NormViolationError& e) {
    std::cerr << "dpmat ingest: " << e.what() << "\n";
    return kExitNormViolation;
  } catch (const InputError& e) {
    std::cerr << "dpmat ingest: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dpmat ingest: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct QueryOpts {
  std::string name;
  std::string snapshot;
  std::string out = "-";
  int k = 0;
  int p = 0;
  std::string solver = "svd";
  std::string x_csv;
  std::string set_csv;
  bool clip = false;
};

SolverHook hook_by_name(const std::string& name) {
  if (name == "svd") return svd_hook();
  if (name == "sparse") return sparse_hook();
  if (name == "nonneg") return nonneg_hook();
  throw InputError("unknown solver: " + name);
}

int run_query(const QueryOpts& q) {
  static const std::vector<std::string> known = {"spectral", "pca",  "cpca",
                                                 "regress",  "variance", "cut"};
  if (std::find(known.begin(), known.end(), q.name) == known.end()) {
    std::cerr << "dpmat query: unknown query '" << q.name << "'\n";
    return kExitUsage;
  }
  try {
    std::vector<std::uint8_t> bytes = load_bytes(q.snapshot);
    if (bytes.size() < 7) throw CorruptPayloadError("snapshot too short");
    const bool is_tree = bytes[6] == static_cast<std::uint8_t>(Mode::tree);

    nlohmann::ordered_json j;
    j["query"] = q.name;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    nlohmann::ordered_json answer;
    std::string mode;
    double eps = 0, delta = 0, eta = 0;
    std::uint64_t seed = 0;

    if (is_tree) {
      DyadicTree tree = DyadicTree::restore(bytes);
      mode = "tree";
      eps = tree.config().budget.epsilon;
      delta = tree.config().budget.delta;
      eta = 0.0;
      seed = tree.config().seed;
      Matrix C = tree.tree_query();
      if (q.name == "spectral") {
        if (q.clip) C = clip_psd(C);
        params["clip"] = q.clip;
        answer = matrix_to_json(C);
      } else if (q.name == "variance") {
        std::vector<double> xs = parse_double_list(q.x_csv);
        Vector x(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
          x(static_cast<Eigen::Index>(i)) = xs[i];
        params["x"] = xs;
        answer = directional_variance(C, x);
      } else if (q.name == "cut") {
        std::vector<int> set = parse_int_list(q.set_csv);
        params["set"] = set;
        answer = cut_query(C, set);
      } else {
        std::cerr << "dpmat query: '" << q.name
                  << "' is not supported on tree snapshots\n";
        return kExitUsage;
      }
    } else {
      SpectralHistogram h = SpectralHistogram::restore(bytes);
      if (h.checkpoint_count() == 0) {
        std::cerr << "dpmat query: snapshot holds an empty stream; "
                     "ingest rows before querying\n";
        return kExitUsage;
      }
      mode = mode_name(h.config().mode);
      eps = h.config().budget.epsilon;
      delta = h.config().budget.delta;
      eta = h.config().eta;
      seed = h.config().seed;
      if (q.name == "spectral") {
        SpectralAnswer ans = spectral_approx(h, q.clip);
        params["clip"] = q.clip;
        params["sigma_shift"] = ans.sigma_shift;
        params["clipped"] = ans.clipped;
        answer = matrix_to_json(ans.C);
      } else if (q.name == "pca") {
        if (q.k < 1) throw InputError("pca requires --k >= 1");
        params["k"] = q.k;
        answer = matrix_to_json(pca(h, q.k).P);
      } else if (q.name == "cpca") {
        if (q.k < 1) throw InputError("cpca requires --k >= 1");
        params["k"] = q.k;
        params["solver"] = q.solver;
        answer = matrix_to_json(constrained_pca(h, q.k, hook_by_name(q.solver)).P);
      } else if (q.name == "regress") {
        if (q.p < 1) throw InputError("regress requires --p >= 1");
        params["p"] = q.p;
        RegressionAnswer ans = regress(h, q.p);
        nlohmann::ordered_json obj;
        obj["X"] = matrix_to_json(ans.X);
        obj["objective"] = ans.objective;
        answer = std::move(obj);
      } else if (q.name == "variance") {
        std::vector<double> xs = parse_double_list(q.x_csv);
        Vector x(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
          x(static_cast<Eigen::Index>(i)) = xs[i];
        params["x"] = xs;
        answer = directional_variance(spectral_approx(h, q.clip).C, x);
        params["clip"] = q.clip;
      } else if (q.name == "cut") {
        std::vector<int> set = parse_int_list(q.set_csv);
        params["set"] = set;
        answer = cut_query(spectral_approx(h, q.clip).C, set);
        params["clip"] = q.clip;
      }
    }

    j["params"] = std::move(params);
    j["answer"] = std::move(answer);
    j["mode"] = mode;
    j["epsilon"] = eps;
    j["delta"] = delta;
    j["eta"] = eta;
    j["seed"] = seed;
    write_text(q.out, j.dump(2));
  } catch (const InputError& e) {
    std::cerr << "dpmat query: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dpmat query: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct BenchOpts {
  CommonOpts common;
  std::string windows = "64";
  std::string etas = "0.25";
  std::string out = "-";
};

// One bench stream: per-step timing plus accuracy columns against the
// exact oracle. sandwich_ok uses the mode's guaranteed bounds (two-sided
// for exact and jl, lower side only for wishart/tree); mult_err is the
// relative and add_err the absolute spectral deviation of the estimate.
void bench_stream(const CommonOpts& o, std::uint64_t W, double eta,
                  const std::vector<Vector>& rows, std::ostream& out) {
  const int d = static_cast<int>(rows.front().size());
  const Mode mode = mode_from_name(o.mode);
  CommonOpts local = o;
  local.window = W;
  local.eta = eta;

  std::optional<SpectralHistogram> h;
  std::optional<DyadicTree> tree;
  if (mode == Mode::tree) {
    TreeConfig cfg;
    cfg.W = W;
    cfg.d = d;
    cfg.budget = make_budget(o.eps, o.delta);
    cfg.seed = o.seed;
    cfg.norm_policy = parse_policy(o.norm_policy);
    tree = DyadicTree::make(cfg);
  } else {
    h = SpectralHistogram::make(histogram_config(local, d));
  }

  WindowBuffer oracle(W, d);
  for (std::size_t step = 0; step < rows.size(); ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    if (tree) {
      tree->tree_ingest(rows[step]);
    } else {
      h->ingest(rows[step]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    oracle.push(rows[step]);

    const Matrix& A = oracle.exact_covariance();
    Matrix est;
    std::size_t ell = 0;
    std::size_t payload_cells = 0;
    bool ok = false;
    if (tree) {
      est = tree->tree_query();
      ell = tree->node_count();
      payload_cells = ell * std::size_t(d) * std::size_t(d);
      ok = psd_dominates(A, est, loewner_tol(est));
    } else if (mode == Mode::jl) {
      Matrix cov0 = h->cov(0);
      const double s2 = h->sigma() * h->sigma();
      est = cov0 - s2 * Matrix::Identity(d, d);
      ell = h->checkpoint_count();
      payload_cells = ell * std::size_t(h->sketch().m) * std::size_t(d);
      const double lo = 1.0 - eta / 4.0;
      const double hi = (1.0 + eta / 4.0) / (1.0 - eta);
      ok = sandwich_check(cov0, A, lo, hi, lo * s2, hi * s2);
    } else {
      est = h->cov(0);
      ell = h->checkpoint_count();
      payload_cells = ell * std::size_t(d) * std::size_t(d);
      if (mode == Mode::exact) {
        ok = sandwich_check(est, A, 1.0, 1.0 / (1.0 - eta), 0.0, 0.0,
                            1e-8 * std::max(1.0, spectral_norm_sym(A)));
      } else {
        ok = psd_dominates(A, est, loewner_tol(est));
      }
    }
    const double add_err = spectral_norm_sym(est - A);
    const double denom = std::max(spectral_norm_sym(A), 1e-300);
    const double mult_err = add_err / denom;
    const auto ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    out << (step + 1) << ',' << ell << ',' << ns << ',' << (ok ? 1 : 0) << ','
        << mult_err << ',' << add_err << ',' << payload_cells * 8 << ',' << W
        << ',' << eta << '\n';
  }
}

int run_bench(const BenchOpts& b) {
  try {
    std::vector<Vector> rows;
    try {
      rows = load_rows(b.common.in, b.common.format);
    } catch (const InputError& e) {
      std::cerr << "dpmat bench: " << e.what() << "\n";
      return kExitBadRow;
    }
    std::vector<double> windows = parse_double_list(b.windows);
    std::vector<double> etas = parse_double_list(b.etas);

    std::ostringstream csv;
    csv << "T,ell,wall_ns_per_ingest,sandwich_ok,mult_err,add_err,"
           "bytes_resident,W,eta\n";
    if (!rows.empty()) {
      for (double Wd : windows) {
        for (double eta : etas) {
          bench_stream(b.common, static_cast<std::uint64_t>(Wd), eta, rows,
                       csv);
        }
      }
    }
    std::string text = csv.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    write_text(b.out, text);
  } catch (const NormViolationError& e) {
    std::cerr << "dpmat bench: " << e.what() << "\n";
    return kExitNormViolation;
  } catch (const InputError& e) {
    std::cerr << "dpmat bench: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dpmat bench: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private sliding-window matrix analytics"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string snapshot_path;

  CLI::App* ingest = app.add_subcommand("ingest", "stream rows into a snapshot");
  ingest->add_option("--mode", common.mode, "jl|wishart|exact|tree");
  ingest->add_option("--window", common.window, "window size W")->required();
  ingest->add_option("--eta", common.eta, "accuracy parameter");
  ingest->add_option("--eps", common.eps, "privacy epsilon");
  ingest->add_option("--delta", common.delta, "privacy delta");
  ingest->add_option("--rank", common.rank, "sketch target rank r");
  ingest->add_option("--beta", common.beta, "failure probability");
  ingest->add_option("--seed", common.seed, "RNG seed");
  ingest->add_option("--norm-policy", common.norm_policy, "reject|clip");
  ingest->add_option("--in", common.in, "rows path or - for stdin");
  ingest->add_option("--format", common.format, "csv|bin");
  ingest->add_option("--snapshot", snapshot_path, "snapshot output path")
      ->required();

  QueryOpts qopts;
  CLI::App* query = app.add_subcommand("query", "query a snapshot");
  query->add_option("name", qopts.name,
                    "spectral|pca|cpca|regress|variance|cut")
      ->required();
  query->add_option("--snapshot", qopts.snapshot, "snapshot path")->required();
  query->add_option("--out", qopts.out, "answer path or - for stdout");
  query->add_option("--k", qopts.k, "projection rank");
  query->add_option("--p", qopts.p, "response column count");
  query->add_option("--solver", qopts.solver, "svd|sparse|nonneg");
  query->add_option("--x", qopts.x_csv, "unit vector, comma separated");
  query->add_option("--set", qopts.set_csv, "0-based index set, comma separated");
  query->add_flag("--clip", qopts.clip, "clip summary to the PSD cone");

  BenchOpts bopts;
  CLI::App* bench = app.add_subcommand("bench", "benchmark a config grid");
  bench->add_option("--mode", bopts.common.mode, "jl|wishart|exact|tree");
  bench->add_option("--window", bopts.windows, "comma list of window sizes");
  bench->add_option("--eta", bopts.etas, "comma list of eta values");
  bench->add_option("--eps", bopts.common.eps, "privacy epsilon");
  bench->add_option("--delta", bopts.common.delta, "privacy delta");
  bench->add_option("--rank", bopts.common.rank, "sketch target rank r");
  bench->add_option("--beta", bopts.common.beta, "failure probability");
  bench->add_option("--seed", bopts.common.seed, "RNG seed");
  bench->add_option("--norm-policy", bopts.common.norm_policy, "reject|clip");
  bench->add_option("--in", bopts.common.in, "rows path or - for stdin");
  bench->add_option("--format", bopts.common.format, "csv|bin");
  bench->add_option("--out", bopts.out, "report path or - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (ingest->parsed()) return run_ingest(common, snapshot_path);
  if (query->parsed()) return run_query(qopts);
  if (bench->parsed()) return run_bench(bopts);
  return kExitUsage;
}
