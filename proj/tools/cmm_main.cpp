#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "cmm/covariance.hpp"
#include "cmm/errors.hpp"
#include "cmm/estimate.hpp"
#include "cmm/matrix.hpp"
#include "cmm/recovery.hpp"
#include "cmm/reference.hpp"
#include "cmm/serialize.hpp"
#include "cmm/sketch.hpp"

namespace {

using namespace cmm;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SketchArgs {
  std::string a_path, b_path, out_path;
  std::uint32_t buckets = 2;
  std::uint32_t reps = 0;  // 0 = automatic
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool recoverable = false;
  unsigned sign_independence = 2;
};

SignIndependence sign_mode(unsigned wise) {
  if (wise != 2 && wise != 4) throw parse_error("--sign-independence must be 2 or 4");
  return wise == 4 ? SignIndependence::FourWise : SignIndependence::TwoWise;
}

int cmd_sketch(const SketchArgs& args) {
  const SparseMatrix a = load_matrix_market(args.a_path);
  const SparseMatrix b = load_matrix_market(args.b_path);
  SketchParams params;
  params.buckets = args.buckets;
  params.reps = args.reps;
  params.seed = args.seed;
  params.threads = args.threads;
  params.sign_independence = sign_mode(args.sign_independence);

  BuildStats stats;
  if (args.recoverable) {
    const RecoverableSketch sk = compressed_product_recoverable(a, b, params, &stats);
    store_sketch(args.out_path, sk);
    std::cout << "b=" << sk.base().buckets() << "\nd=" << sk.base().reps()
              << "\nmode=recoverable\nell_row=" << sk.row_code().length()
              << "\nell_col=" << sk.col_code().length() << "\n";
  } else {
    const SketchSet sk = compressed_product(a, b, params, &stats);
    store_sketch(args.out_path, sk);
    std::cout << "b=" << sk.buckets() << "\nd=" << sk.reps() << "\nmode=plain\n";
  }
  std::cerr << "wall_seconds=" << fmt(stats.wall_seconds) << "\naux_bytes=" << stats.aux_bytes
            << "\n";
  return 0;
}

const SketchSet& base_of(const AnySketch& sk) {
  return std::holds_alternative<SketchSet>(sk) ? std::get<SketchSet>(sk)
                                               : std::get<RecoverableSketch>(sk).base();
}

int cmd_query(const std::string& sketch_path, std::size_t row, std::size_t col) {
  const AnySketch sk = load_sketch(sketch_path);
  const EntryEstimate e = base_of(sk).decompress(row, col);
  std::cout << "estimate=" << fmt(e.value) << "\n";
  for (std::size_t t = 0; t < e.per_repetition.size(); ++t)
    std::cout << "rep" << t << "=" << fmt(e.per_repetition[t]) << "\n";
  return 0;
}

struct TopkArgs {
  std::string sketch_path, a_path, b_path;
  double threshold = 0.0;
  bool auto_threshold = false;
  double kappa = 40.0;
  std::uint32_t est_reps = 25;
  std::size_t limit = 0;
};

int cmd_topk(const TopkArgs& args) {
  const AnySketch any = load_sketch(args.sketch_path);
  if (!std::holds_alternative<RecoverableSketch>(any))
    throw mode_error("topk needs a recoverable sketch; rebuild with --recoverable");
  const RecoverableSketch& sk = std::get<RecoverableSketch>(any);

  double threshold = args.threshold;
  if (args.auto_threshold) {
    if (args.a_path.empty() || args.b_path.empty())
      throw parse_error("--auto-threshold needs --a and --b to bound the Frobenius norm");
    const SparseMatrix a = load_matrix_market(args.a_path);
    const SparseMatrix b = load_matrix_market(args.b_path);
    const FrobeniusEstimate fe =
        estimate_frobenius_ub(a, b, args.est_reps, derive_seed(sk.base().params().seed, 0x7D));
    threshold = args.kappa * std::sqrt(fe.upper_bound / sk.base().buckets());
    std::cerr << "threshold=" << fmt(threshold) << "\n";
  }
  if (!(threshold > 0.0)) throw parse_error("need --threshold > 0 or --auto-threshold");

  std::vector<SparseEntry> entries = extract_sparse_approx(sk, threshold);
  if (args.limit > 0 && entries.size() > args.limit) entries.resize(args.limit);
  for (const SparseEntry& e : entries)
    std::cout << e.row << " " << e.col << " " << fmt(e.value) << "\n";
  return 0;
}

int cmd_estimate(const std::string& a_path, const std::string& b_path, const std::string& kind,
                 std::uint32_t reps, std::uint64_t seed) {
  const SparseMatrix a = load_matrix_market(a_path);
  const SparseMatrix b = load_matrix_market(b_path);
  if (kind == "nnz") {
    const NnzEstimate e = estimate_nnz(a, b, reps == 0 ? 10 : reps, seed);
    std::cout << "nonzero upper bound " << e.upper_bound << " at b=" << e.terminating_b
              << (e.capped ? " (trivial cap)" : "") << "\n";
    std::cout << "nnz_upper_bound=" << e.upper_bound << " terminating_b=" << e.terminating_b
              << " capped=" << (e.capped ? 1 : 0)
              << " level_failure_bound=" << fmt(e.level_failure_bound) << " zero_fractions=";
    for (std::size_t lvl = 0; lvl < e.zero_fraction_per_level.size(); ++lvl)
      std::cout << (lvl == 0 ? "" : ",") << fmt(e.zero_fraction_per_level[lvl]);
    std::cout << "\n";
  } else if (kind == "frobenius") {
    const FrobeniusEstimate e = estimate_frobenius_ub(a, b, reps == 0 ? 25 : reps, seed);
    std::cout << "squared Frobenius norm upper bound " << fmt(e.upper_bound) << " (median of "
              << e.reps << " estimators: " << fmt(e.median_square) << ")\n";
    std::cout << "frobenius_sq_upper_bound=" << fmt(e.upper_bound)
              << " median_sq=" << fmt(e.median_square) << " reps=" << e.reps << "\n";
  } else {
    throw parse_error("estimate kind must be nnz or frobenius");
  }
  return 0;
}

struct CovArgs {
  std::string samples_path, out_path;
  std::string vars_in = "rows";
  std::uint32_t buckets = 2;
  std::uint32_t reps = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool recoverable = false;
  bool scan = false;
  double threshold = 0.0;
};

int cmd_cov(const CovArgs& args) {
  if (args.vars_in != "rows" && args.vars_in != "cols")
    throw parse_error("--vars-in must be rows or cols");
  const SampleSet samples =
      load_csv(args.samples_path, args.vars_in == "rows" ? CsvOrientation::VariablesInRows
                                                         : CsvOrientation::VariablesInColumns);
  SketchParams params;
  params.buckets = args.buckets;
  params.reps = args.reps;
  params.seed = args.seed;
  params.threads = args.threads;

  const CovarianceSketch cs = sketch_covariance(samples, params, args.recoverable);
  if (!args.out_path.empty()) {
    if (cs.recoverable())
      store_sketch(args.out_path, cs.recoverable_sketch());
    else
      store_sketch(args.out_path, cs.base());
  }
  if (args.scan) {
    if (!(args.threshold > 0.0)) throw parse_error("--scan needs --threshold > 0");
    for (const CorrelationHit& hit : scan_correlations(cs, args.threshold))
      std::cout << hit.i << " " << hit.j << " " << fmt(hit.estimate) << "\n";
  } else if (args.out_path.empty()) {
    throw parse_error("cov needs --out or --scan");
  }
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, std::uint32_t buckets,
                std::uint32_t reps, std::uint64_t seed, unsigned threads) {
  const SparseMatrix a = load_matrix_market(a_path);
  const SparseMatrix b = load_matrix_market(b_path);
  SketchParams params;
  params.buckets = buckets;
  params.reps = reps;
  params.seed = seed;
  params.threads = threads;

  const SketchSet sk = compressed_product(a, b, params);
  const DenseMatrix approx = sk.decompress_all();
  const DenseMatrix exact = reference::exact_product(a, b);

  const std::size_t k = sk.buckets() / 20;
  const double err_tail = reference::err_f_k(exact, k);
  const double bound = 12.0 * std::sqrt(err_tail / sk.buckets());
  // transform residue floor; the tail bound is a statement about exact reals
  const double tol = 1e-8 * std::max(1.0, frobenius_norm(a) * frobenius_norm(b));

  double max_err = 0.0;
  std::size_t held = 0;
  const std::size_t total = exact.rows() * exact.cols();
  for (std::size_t i = 0; i < exact.rows(); ++i)
    for (std::size_t j = 0; j < exact.cols(); ++j) {
      const double err = std::abs(approx(i, j) - exact(i, j));
      max_err = std::max(max_err, err);
      if (err < bound + tol) ++held;
    }

  std::cout << "b=" << sk.buckets() << " d=" << sk.reps() << "\n";
  std::cout << "max_entry_error=" << fmt(max_err) << "\n";
  std::cout << "frobenius_norm=" << fmt(frobenius_norm(exact)) << "\n";
  std::cout << "k=" << k << " err_f_k=" << fmt(err_tail) << "\n";
  std::cout << "tail_bound=" << fmt(bound) << "\n";
  std::cout << "numeric_tolerance=" << fmt(tol) << "\n";
  std::cout << "bound_held_fraction="
            << fmt(total == 0 ? 1.0 : static_cast<double>(held) / static_cast<double>(total))
            << "\n";
  std::cout << "bound_held_all=" << (held == total ? 1 : 0) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed approximate matrix products via count sketches"};
  app.require_subcommand(1);

  SketchArgs sketch_args;
  CLI::App* sketch = app.add_subcommand("sketch", "build a sketch of A*B without forming it");
  sketch->add_option("--a", sketch_args.a_path, "Matrix Market file for A")->required();
  sketch->add_option("--b", sketch_args.b_path, "Matrix Market file for B")->required();
  sketch->add_option("--buckets", sketch_args.buckets, "bucket count b (rounded up to 2^k)")
      ->required();
  sketch->add_option("--reps", sketch_args.reps, "repetitions d (0 = automatic)");
  sketch->add_option("--seed", sketch_args.seed, "master seed");
  sketch->add_option("--threads", sketch_args.threads, "thread cap (1 = sequential)");
  sketch->add_flag("--recoverable", sketch_args.recoverable,
                   "also build code-masked families for topk");
  sketch->add_option("--sign-independence", sketch_args.sign_independence,
                     "sign hash independence (2 or 4)");
  sketch->add_option("--out", sketch_args.out_path, "output sketch file")->required();

  std::string query_sketch;
  std::size_t query_row = 0, query_col = 0;
  CLI::App* query = app.add_subcommand("query", "decode one entry estimate from a sketch");
  query->add_option("--sketch", query_sketch, "sketch file")->required();
  query->add_option("--row", query_row, "row index (0-based)")->required();
  query->add_option("--col", query_col, "column index (0-based)")->required();

  TopkArgs topk_args;
  CLI::App* topk = app.add_subcommand("topk", "extract significant entries from a sketch");
  topk->add_option("--sketch", topk_args.sketch_path, "sketch file")->required();
  topk->add_option("--threshold", topk_args.threshold, "magnitude threshold");
  topk->add_flag("--auto-threshold", topk_args.auto_threshold,
                 "derive the threshold from a Frobenius norm bound (needs --a/--b)");
  topk->add_option("--a", topk_args.a_path, "Matrix Market file for A");
  topk->add_option("--b", topk_args.b_path, "Matrix Market file for B");
  topk->add_option("--kappa", topk_args.kappa, "threshold scale for --auto-threshold");
  topk->add_option("--est-reps", topk_args.est_reps, "estimators for --auto-threshold");
  topk->add_option("--k", topk_args.limit, "print at most k entries");

  std::string est_a, est_b, est_kind;
  std::uint32_t est_reps = 0;
  std::uint64_t est_seed = 0;
  CLI::App* estimate = app.add_subcommand("estimate", "estimate compressibility of A*B");
  estimate->add_option("kind", est_kind, "nnz or frobenius")->required();
  estimate->add_option("--a", est_a, "Matrix Market file for A")->required();
  estimate->add_option("--b", est_b, "Matrix Market file for B")->required();
  estimate->add_option("--reps", est_reps, "estimator count (0 = default)");
  estimate->add_option("--seed", est_seed, "seed");

  CovArgs cov_args;
  CLI::App* cov = app.add_subcommand("cov", "sketch a sample covariance matrix");
  cov->add_option("--samples", cov_args.samples_path, "CSV of observations")->required();
  cov->add_option("--vars-in", cov_args.vars_in, "rows|cols: where variables live");
  cov->add_option("--buckets", cov_args.buckets, "bucket count")->required();
  cov->add_option("--reps", cov_args.reps, "repetitions d (0 = automatic)");
  cov->add_option("--seed", cov_args.seed, "master seed");
  cov->add_option("--threads", cov_args.threads, "thread cap");
  cov->add_flag("--recoverable", cov_args.recoverable, "build code-masked families");
  cov->add_option("--out", cov_args.out_path, "write the diagonal-removed sketch here");
  cov->add_flag("--scan", cov_args.scan, "print correlated pairs above --threshold");
  cov->add_option("--threshold", cov_args.threshold, "scan threshold");

  std::string cmp_a, cmp_b;
  std::uint32_t cmp_buckets = 2, cmp_reps = 0;
  std::uint64_t cmp_seed = 0;
  unsigned cmp_threads = 1;
  CLI::App* compare = app.add_subcommand("compare", "compare a sketch against the exact product");
  compare->add_option("--a", cmp_a, "Matrix Market file for A")->required();
  compare->add_option("--b", cmp_b, "Matrix Market file for B")->required();
  compare->add_option("--buckets", cmp_buckets, "bucket count")->required();
  compare->add_option("--reps", cmp_reps, "repetitions d (0 = automatic)");
  compare->add_option("--seed", cmp_seed, "master seed");
  compare->add_option("--threads", cmp_threads, "thread cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sketch->parsed()) return cmd_sketch(sketch_args);
    if (query->parsed()) return cmd_query(query_sketch, query_row, query_col);
    if (topk->parsed()) return cmd_topk(topk_args);
    if (estimate->parsed()) return cmd_estimate(est_a, est_b, est_kind, est_reps, est_seed);
    if (cov->parsed()) return cmd_cov(cov_args);
    if (compare->parsed())
      return cmd_compare(cmp_a, cmp_b, cmp_buckets, cmp_reps, cmp_seed, cmp_threads);
  } catch (const dim_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mode_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const cap_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
