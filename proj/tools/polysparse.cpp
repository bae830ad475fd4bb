// polysparse command-line front end.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "polysparse/bernstein_solver.hpp"
#include "polysparse/io.hpp"
#include "polysparse/markov_apps.hpp"
#include "polysparse/mdbd.hpp"
#include "polysparse/poly_sparsify.hpp"
#include "polysparse/spectral_oracle.hpp"

namespace {

using namespace polysparse;
using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;
constexpr int kVerifyAttempts = 3;

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string report_path;
};

class Timer {
 public:
  explicit Timer(json& sink) : sink_(sink) {}
  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    sink_[phase] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  json& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json new_report(const std::string& command, const Common& common) {
  json r;
  r["command"] = command;
  r["seed"] = common.seed;
  r["parameters"] = json::object();
  r["timings"] = json::object();
  r["warnings"] = json::array();
  return r;
}

void emit(const json& report, const Common& common) {
  const std::string text = report.dump(2) + "\n";
  if (common.report_path.empty()) {
    std::cout << text;
  } else {
    io::write_text(common.report_path, text);
  }
}

json bounds_json(const oracle::ApproxResult& r, double eps) {
  return {{"lambda_min", r.bounds.lambda_min}, {"lambda_max", r.bounds.lambda_max}, {"eps", eps}, {"holds", r.holds}};
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct SparsifyArgs {
  std::string graph;
  std::string mdbd;
  std::string out;
  double eps = 0.5;
  bool verify = false;
  bool round_up = false;
};

int cmd_sparsify(const SparsifyArgs& a, const Common& common) {
  json report = new_report("sparsify", common);
  Timer timer(report["timings"]);
  const TMatrix b = io::read_matrix(a.graph);
  MDBD mix = io::read_mdbd(a.mdbd);
  timer.lap("read");
  report["parameters"] = {{"graph", a.graph}, {"mdbd", a.mdbd}, {"eps", a.eps}, {"N", mix.n}, {"T", mix.t()},
                          {"threads", common.threads}};
  if (!is_power_of_two(mix.n)) {
    if (!a.round_up) {
      fail(ErrorCode::InvalidParameter,
           "N = " + std::to_string(mix.n) + " is not a power of two (pass --round-up-N to round it up)");
    }
    const std::size_t rounded = next_power_of_two(mix.n);
    report["warnings"].push_back("N rounded up from " + std::to_string(mix.n) + " to " + std::to_string(rounded));
    mix.n = rounded;
    report["parameters"]["N"] = rounded;
  }

  MixtureOptions opts;
  opts.threads = common.threads;
  const bool can_verify = b.dim() <= dense_limit();
  if (a.verify && !can_verify) report["warnings"].push_back("matrix too large for dense verification; skipped");
  Eigen::MatrixXd truth;
  if (a.verify && can_verify) {
    Vector gamma = induce_gamma(mix);
    for (double& g : gamma) g /= 1.0 - mix.delta();
    truth = oracle::dense_poly(b, gamma);
  }

  int attempts = 0;
  std::uint64_t seed = common.seed;
  MixtureResult result;
  json verification;
  while (true) {
    ++attempts;
    result = ss_mdbd(b, mix, a.eps, seed, opts);
    timer.lap("sparsify_" + std::to_string(attempts));
    if (!a.verify || !can_verify) break;
    const auto check = oracle::approx_check(result.sparsifier.to_dense(), truth, a.eps);
    timer.lap("verify_" + std::to_string(attempts));
    verification = bounds_json(check, a.eps);
    verification["attempts"] = attempts;
    if (check.holds || attempts == kVerifyAttempts) break;
    seed = derive_seed(common.seed, 1000 + attempts);
  }
  report["delta"] = result.delta;
  report["branch"] = to_string(result.branch);
  report["schedule"] = {{"eps_init", result.schedule.eps_init},
                        {"eps_step", result.schedule.eps_step},
                        {"eps_final", result.schedule.eps_final}};
  report["nnz"] = {{"input", b.m().nnz()}, {"output", result.sparsifier.m().nnz()}};
  report["effective_seed"] = seed;
  if (!verification.is_null()) report["verification"] = verification;

  io::write_matrix(a.out, result.sparsifier);
  timer.lap("write");
  emit(report, common);
  if (!verification.is_null() && !verification["holds"].get<bool>()) {
    std::cerr << "verification failed after " << attempts << " attempts\n";
    return kExitVerification;
  }
  return 0;
}

struct FitArgs {
  std::string pdf;
  std::size_t n = 0;
  double eps_i = 0.25;
  double mu = 0.25;
  std::string out;
};

int cmd_fit_pdf(const FitArgs& a, const Common& common) {
  json report = new_report("fit-pdf", common);
  Timer timer(report["timings"]);
  report["parameters"] = {{"pdf", a.pdf}, {"N", a.n}, {"eps_i", a.eps_i}, {"mu", a.mu}};
  const SmoothPdf w = canonical_pdf(a.pdf);
  const PdfFit fit = app_dscr_pdf(w, a.n, a.eps_i);
  timer.lap("fit");
  report["T"] = fit.mix.t();
  report["delta_w"] = fit.delta_w;
  report["s_grid"] = fit.s_grid;
  report["s_nodes"] = fit.s_nodes;
  report["dropped"] = fit.dropped;
  for (const auto& msg : fit.warnings) report["warnings"].push_back(msg);

  json checks = json::array();
  const PdfConditionReport conditions = check_pdf_conditions(w, a.n, a.mu);
  for (const auto& c : conditions.checks) {
    checks.push_back({{"id", c.id}, {"description", c.description}, {"measured", c.measured}, {"bound", c.bound},
                      {"pass", c.pass}});
    if (!c.pass) report["warnings"].push_back("condition " + c.id + " fails: " + c.description);
  }
  report["conditions"] = checks;
  json rows = json::array();
  for (const auto& r : residual_table(w, fit)) {
    rows.push_back({{"i", r.i}, {"normalized_gamma", r.normalized_gamma}, {"target", r.target},
                    {"eta_hat", r.eta_hat}, {"deviation", r.deviation}});
  }
  report["residuals"] = rows;
  timer.lap("report");

  if (!a.out.empty()) io::write_text(a.out, io::format_mdbd(fit.mix));
  emit(report, common);
  return 0;
}

int cmd_recover(const std::string& p_path, const std::string& gamma_path, const std::string& out,
                const Common& common) {
  json report = new_report("recover", common);
  Timer timer(report["timings"]);
  report["parameters"] = {{"p", p_path}, {"gamma", gamma_path}};
  const Vector p = io::read_vector(p_path);
  const Vector gamma = io::read_vector(gamma_path);
  const Recovery r = recover_alpha(p, gamma);
  timer.lap("solve");
  report["valid"] = r.valid;
  report["residual"] = r.residual;
  report["condition"] = r.condition;
  report["alpha"] = r.alpha;
  if (!r.valid) report["warnings"].push_back("recovered weights fall outside (0, 1)");
  if (!out.empty()) io::write_text(out, io::format_vector(r.alpha));
  emit(report, common);
  return 0;
}

int cmd_escape(const std::string& graph, const std::string& mdbd, const std::string& subset, double eps, bool exact,
               const Common& common) {
  json report = new_report("escape", common);
  Timer timer(report["timings"]);
  report["parameters"] = {{"graph", graph}, {"mdbd", mdbd}, {"subset", subset}, {"eps", eps}};
  const TMatrix b = io::read_matrix(graph);
  require(b.kind() == TKind::Laplacian, ErrorCode::InvalidParameter, "escape: the graph must be a Laplacian");
  const MDBD mix = io::read_mdbd(mdbd);
  const std::vector<std::size_t> s = io::read_subset(subset);
  if (mix.delta() > 1e-9) report["warnings"].push_back("mixture weights do not sum to 1; estimate is unnormalized");
  MixtureOptions opts;
  opts.threads = common.threads;
  const MixtureResult result = ss_mdbd(b, mix, eps, common.seed, opts);
  timer.lap("sparsify");
  const double estimate = egep_estimate(b.d(), result.sparsifier.m(), s);
  report["estimate"] = estimate;
  if (exact) {
    const double truth = egep_exact(b, induce_gamma(mix), s);
    report["exact"] = truth;
    report["ratio"] = truth > 0.0 ? json(estimate / truth) : json(nullptr);
    timer.lap("exact");
  }
  emit(report, common);
  return 0;
}

int cmd_solve(const std::string& graph, const std::string& rhs_path, double eps, double chain_eps, double kappa,
              const std::string& out, const Common& common) {
  json report = new_report("solve", common);
  Timer timer(report["timings"]);
  const TMatrix b = io::read_matrix(graph);
  const Vector rhs = io::read_vector(rhs_path);
  if (kappa <= 0.0) {
    require(b.dim() <= dense_limit(), ErrorCode::SizeLimitExceeded,
            "solve: --kappa is required above the dense limit");
    kappa = estimate_condition(b);
  }
  report["parameters"] = {{"graph", graph}, {"b", rhs_path}, {"eps", eps}, {"chain_eps", chain_eps}, {"kappa", kappa}};
  const InverseChain chain = build_inverse_chain(b, chain_eps, kappa, common.seed);
  timer.lap("chain");
  const SolveResult r = solve_sddm(b, rhs, eps, chain);
  timer.lap("solve");
  report["depth"] = chain.depth();
  report["terminal_norm"] = chain.terminal_norm;
  report["iterations"] = r.iterations;
  report["residual"] = r.residual;
  report["theta"] = r.theta;
  json nnz = json::array();
  for (const auto& level : chain.levels) nnz.push_back(level.nnz());
  report["nnz"] = nnz;
  if (!out.empty()) io::write_text(out, io::format_vector(r.x));
  emit(report, common);
  return 0;
}

int cmd_verify(const std::string& x_path, const std::string& y_path, double eps, const Common& common) {
  json report = new_report("verify", common);
  report["parameters"] = {{"x", x_path}, {"y", y_path}, {"eps", eps}};
  const TMatrix x = io::read_matrix(x_path);
  const TMatrix y = io::read_matrix(y_path);
  require(x.dim() == y.dim(), ErrorCode::DimensionMismatch, "verify: matrices differ in dimension");
  require(x.dim() <= dense_limit(), ErrorCode::SizeLimitExceeded, "verify: matrix exceeds the dense limit");
  const auto check = oracle::approx_check(x.to_dense(), y.to_dense(), eps);
  report["verification"] = bounds_json(check, eps);
  emit(report, common);
  return check.holds ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral sparsifiers of random-walk matrix polynomials"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker cap (0 = hardware concurrency)");
  app.add_option("--report", common.report_path, "Write the JSON report here instead of stdout");

  SparsifyArgs sp;
  auto* sparsify = app.add_subcommand("sparsify", "Sparsify D - D sum gamma_i (D^-1 M)^i for an MDBD");
  sparsify->add_option("--graph", sp.graph, "Matrix file")->required();
  sparsify->add_option("--mdbd", sp.mdbd, "MDBD JSON file")->required();
  sparsify->add_option("--eps", sp.eps, "Approximation parameter")->capture_default_str();
  sparsify->add_option("--out", sp.out, "Output matrix file")->required();
  sparsify->add_flag("--verify", sp.verify, "Check the output against the dense polynomial");
  sparsify->add_flag("--round-up-N", sp.round_up, "Round N up to a power of two");

  FitArgs fit;
  auto* fit_pdf = app.add_subcommand("fit-pdf", "Fit an MDBD to a canonical pdf");
  fit_pdf->add_option("--pdf", fit.pdf, "uniform | exp:K")->required();
  fit_pdf->add_option("--N", fit.n, "Degree")->required();
  fit_pdf->add_option("--eps-i", fit.eps_i, "Integration accuracy")->capture_default_str();
  fit_pdf->add_option("--mu", fit.mu, "mu used by the condition checks")->capture_default_str();
  fit_pdf->add_option("--out", fit.out, "Output MDBD JSON");

  std::string p_path;
  std::string gamma_path;
  std::string alpha_out;
  auto* recover = app.add_subcommand("recover", "Recover mixture weights from gamma");
  recover->add_option("--p", p_path, "Node file")->required();
  recover->add_option("--gamma", gamma_path, "Coefficient file")->required();
  recover->add_option("--out", alpha_out, "Output weights");

  std::string graph;
  std::string mdbd;
  std::string subset;
  double escape_eps = 0.5;
  bool exact = false;
  auto* escape = app.add_subcommand("escape", "Expected generalized escaping probability");
  escape->add_option("--graph", graph, "Laplacian matrix file")->required();
  escape->add_option("--mdbd", mdbd, "MDBD JSON file")->required();
  escape->add_option("--subset", subset, "Vertex subset file")->required();
  escape->add_option("--eps", escape_eps, "Approximation parameter")->capture_default_str();
  escape->add_flag("--exact", exact, "Also compute the exact value densely");

  std::string rhs_path;
  std::string x_out;
  double solve_eps = 1e-8;
  double chain_eps = 0.5;
  double kappa = 0.0;
  auto* solve = app.add_subcommand("solve", "Solve an SDDM system");
  solve->add_option("--graph", graph, "SDDM matrix file")->required();
  solve->add_option("--b", rhs_path, "Right-hand side")->required();
  solve->add_option("--eps", solve_eps, "Relative residual target")->capture_default_str();
  solve->add_option("--chain-eps", chain_eps, "Inverse chain accuracy")->capture_default_str();
  solve->add_option("--kappa", kappa, "Condition number bound (dense estimate if omitted)");
  solve->add_option("--out", x_out, "Output solution");

  std::string x_path;
  std::string y_path;
  double verify_eps = 0.1;
  auto* verify = app.add_subcommand("verify", "Check X ~eps Y densely");
  verify->add_option("--x", x_path, "Matrix file")->required();
  verify->add_option("--y", y_path, "Matrix file")->required();
  verify->add_option("--eps", verify_eps, "Approximation parameter")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (const char* env = std::getenv("POLYSPARSE_DENSE_LIMIT")) {
      std::cerr << "dense limit " << dense_limit() << " (from POLYSPARSE_DENSE_LIMIT=" << env << ")\n";
    }
    std::cerr << "seed " << common.seed << "\n";
    if (*sparsify) return cmd_sparsify(sp, common);
    if (*fit_pdf) return cmd_fit_pdf(fit, common);
    if (*recover) return cmd_recover(p_path, gamma_path, alpha_out, common);
    if (*escape) return cmd_escape(graph, mdbd, subset, escape_eps, exact, common);
    if (*solve) return cmd_solve(graph, rhs_path, solve_eps, chain_eps, kappa, x_out, common);
    if (*verify) return cmd_verify(x_path, y_path, verify_eps, common);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
