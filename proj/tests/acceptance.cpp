// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "jumpcal/jumpcal.hpp"

using namespace jumpcal;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& label,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
              label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// --- criterion 1: pathwise calculus rules -----------------------------------

void criterion_pathwise_rules() {
  const char* names[] = {"pathwise-product-rule", "pathwise-s-transfer",
                         "pathwise-transfer-of-s", "pathwise-phi-product",
                         "pathwise-psi-of-phi"};
  ExperimentConfig configs[2];
  configs[0].measure =
      JumpMeasure::compound_poisson(0.5, SizeDist::dirac(1.0));
  configs[0].functional = "count";
  configs[0].field = "one";
  configs[1].measure =
      JumpMeasure::compound_poisson(1.5, SizeDist::uniform(0.2, 1.0));
  configs[1].functional = "path-terminal";
  configs[1].field = "count-before";
  double worst = 0.0;
  bool pass = true;
  int draws = 0;
  for (int ci = 0; ci < 2; ++ci) {
    ExperimentConfig c = configs[ci];
    c.replicas = 250;
    c.seed = 1001 + ci;
    c.workers = 4;
    for (const char* name : names) {
      const IdentityReport rep = verify_identity(name, c);
      worst = std::max(worst, rep.max_discrepancy);
      pass = pass && rep.pass;
      draws += rep.replicas;
    }
  }
  report(1, pass && draws >= 1000, "pathwise calculus rules",
         "max relative discrepancy " + fmt(worst) + " over " +
             std::to_string(draws) + " draws");
}

// --- criterion 2: E[S u] for the standard Poisson ----------------------------

void criterion_expectation() {
  ExperimentConfig c;
  c.replicas = 100000;
  c.seed = 2001;
  c.workers = 4;
  const IdentityReport rep = verify_identity("prop-elau", c);
  const bool pass = std::abs(rep.lhs - 1.0) <= 3.0 * rep.se_lhs;
  report(2, pass, "expectation identity E[S u] = nu(Theta)",
         "estimate " + fmt(rep.lhs) + " +- " + fmt(rep.se_lhs) +
             " against 1.0");
}

// --- criterion 3: dualities ---------------------------------------------------

void criterion_dualities() {
  ExperimentConfig c;
  c.measure = JumpMeasure::compound_poisson(0.5, SizeDist::dirac(1.0));
  c.functional = "count";
  c.field = "one";
  c.replicas = 100000;
  c.seed = 3001;
  c.workers = 4;
  struct Case {
    const char* name;
    double oracle;
  };
  const Case cases[] = {{"thm-duality", 0.75},
                        {"prop-dual1", 0.5},
                        {"bar-duality", 0.5}};
  bool pass = true;
  std::string detail;
  for (const Case& cs : cases) {
    const IdentityReport rep = verify_identity(cs.name, c);
    const bool lhs_ok =
        std::abs(rep.lhs - cs.oracle) <= 3.0 * rep.se_lhs + 1e-9;
    const bool rhs_ok =
        std::abs(rep.rhs - cs.oracle) <= 3.0 * rep.se_rhs + 1e-9;
    pass = pass && lhs_ok && rhs_ok && rep.pass;
    detail += std::string(cs.name) + "=" + fmt(rep.lhs) + "/" + fmt(rep.rhs) +
              " vs " + fmt(cs.oracle) + "; ";
  }
  report(3, pass, "duality identities at the closed-form oracles", detail);
}

// --- criterion 4: chaos bridging ---------------------------------------------

void criterion_chaos() {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(2.0, SizeDist::uniform(0.1, 1.0));
  const Region extra(0.8, 1.0, 0.0, 1.0);
  const std::vector<std::vector<Region>> factor_sets = {
      {Region(0.0, 0.8, 0.0, 1.0)},
      {Region(0.0, 0.4, 0.0, 1.0), Region(0.4, 0.8, 0.0, 1.0)},
      {Region(0.0, 0.3, 0.0, 1.0), Region(0.3, 0.6, 0.0, 1.0),
       Region(0.6, 0.8, 0.0, 1.0)}};
  double worst = 0.0;
  Rng rng = Rng::stream(4001, 0);
  for (const auto& factors : factor_sets) {
    const ProductKernel grad_kernel(factors);
    worst = std::max(
        worst, verify_gradient_bridge(grad_kernel, m, 1.0, 0.0, 1000, rng)
                   .max_abs_discrepancy);
    const ProductKernel div_kernel(factors, extra);
    worst = std::max(
        worst, verify_divergence_bridge(div_kernel, m, 1.0, 0.0, 1000, rng)
                   .max_abs_discrepancy);
  }
  report(4, worst < 1e-10, "chaos bridging for orders 1 to 3",
         "max pathwise discrepancy " + fmt(worst));
}

// --- criterion 5: CHO reconstruction ------------------------------------------

void criterion_cho() {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(1.0, SizeDist::uniform(0.1, 0.5));
  double worst_exact = 0.0;
  const Functional funcs[] = {functionals::count(m, 1.0, 0.0),
                              functionals::path_terminal(m, 1.0, 0.0)};
  for (const Functional& F : funcs) {
    const ChoReport rep = cho_reconstruct(F, m, 1.0, 0.0, ChoGrid{}, 50, 8,
                                          5001);
    for (const auto& row : rep.rows)
      worst_exact = std::max(worst_exact, row.abs_error);
  }
  const Functional st = functionals::exp_levy(m, 1.0, 0.05, 1.0);
  const ChoReport rep =
      cho_reconstruct(st, m, 1.0, 0.0, ChoGrid{}, 2000, 200, 5002);
  const bool pass = worst_exact < 1e-8 && rep.l1_relative_error < 0.05;
  report(5, pass, "Clark-Hausmann-Ocone reconstruction",
         "linear-case max error " + fmt(worst_exact) +
             ", price-case L1 relative error " + fmt(rep.l1_relative_error));
}

// --- criterion 6: predictability of the conditional gradient ------------------

void criterion_predictability() {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(1.0, SizeDist::uniform(0.2, 1.0));
  const Region r = Region::theta(1.0, 0.0);
  const Functional F{[](const JumpConfiguration& w) {
                       const double n = static_cast<double>(w.size());
                       return n * n + 0.5 * n;
                     },
                     std::nullopt};
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    Rng setup = Rng::stream(6001, static_cast<std::uint64_t>(i));
    const JumpConfiguration past = sample_config(m, 0.5, 0.0, setup);
    const double s = setup.uniform(0.3, 0.8);
    const double x = setup.uniform(0.2, 1.0);
    const JumpConfiguration with_future =
        add_point(past, {s + setup.uniform(0.01, 0.1), 0.5});
    Rng r1 = Rng::stream(6002, static_cast<std::uint64_t>(i));
    Rng r2 = Rng::stream(6002, static_cast<std::uint64_t>(i));
    const double a = cond_expect_psi(F, s, x, past, m, r, 16, r1).estimate;
    const double b =
        cond_expect_psi(F, s, x, with_future, m, r, 16, r2).estimate;
    if (a != b) ++mismatches;
  }
  report(6, mismatches == 0, "conditional gradient ignores future points",
         std::to_string(mismatches) + " mismatches in 1000 exact trials");
}

// --- criterion 7: Volterra worked example --------------------------------------

void criterion_volterra_example() {
  // (a) the four-case table
  bool table_ok = true;
  {
    const CaseMembership c1 = case_classify(0.5, 0.7);
    const CaseMembership c2 = case_classify(1.5, 0.7);
    const CaseMembership c3 = case_classify(0.5, 0.3);
    const CaseMembership c4 = case_classify(1.5, 0.3);
    table_ok = c1.in_l1 && c1.in_l2 && !c2.in_l1 && c2.in_l2 && c3.in_l1 &&
               !c3.in_l2 && !c4.in_l1 && !c4.in_l2;
  }

  // (b) closed-form gradient of K_g against the operator difference
  const double beta = 0.8, gamma = 0.7, t = 1.0;
  const VolterraKernel k = VolterraKernel::gamma(beta, 0.4);
  const PathProcess nested = processes::nested_vmav(gamma);
  const JumpMeasure m =
      JumpMeasure::compound_poisson(2.0, SizeDist::two_point(0.5));
  Rng rng = Rng::stream(7001, 0);
  double worst_grad = 0.0;
  for (int i = 0; i < 100; ++i) {
    const JumpConfiguration w = sample_config(m, t, 0.0, rng);
    const double s = rng.uniform(0.05, 0.9);
    double x = rng.uniform(-1.0, 1.0);
    if (std::abs(x) < 0.05) x = 0.05;
    const double direct = kg_operator(k, nested, t, s, add_point(w, {s, x}),
                                      1e-9) -
                          kg_operator(k, nested, t, s, w, 1e-9);
    const double closed = psi_kg_closed_form(k, gamma, t, s, x, 1e-9);
    worst_grad = std::max(worst_grad, std::abs(direct - closed));
  }

  // (c) Beta-function bound
  const BetaBoundReport bb = beta_bound_check(0.5, 0.5, 1.0, 2.0, 1e-11);
  const double beta_err = std::abs(bb.quadrature - std::numbers::pi / 2.0);

  // (d) anticipative integral against the pathwise Stieltjes oracle
  const VolterraKernel k2 = VolterraKernel::gamma(0.75, 0.5);
  const VmavSpec spec(m, k2, fields::one());
  const PathProcess Y = processes::step({0.4, 0.7}, {1.0, -2.0, 0.5});
  double worst_stieltjes = 0.0;
  Rng rng2 = Rng::stream(7002, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const JumpConfiguration w = sample_config(m, t, 0.0, rng2);
    const double lhs = vmav_integral(spec, Y, t, w, 0.0, 1e-9);
    auto X = [&](double u) {
      double total = 0.0;
      for (const auto& p : w.points()) total += p.size * k2.g(u, p.time);
      return total;
    };
    const double rhs = 1.0 * (X(0.4) - X(0.0)) - 2.0 * (X(0.7) - X(0.4)) +
                       0.5 * (X(t) - X(0.7));
    worst_stieltjes = std::max(worst_stieltjes, std::abs(lhs - rhs));
  }

  const bool pass = table_ok && worst_grad < 1e-6 && beta_err < 1e-8 &&
                    bb.damped_below && worst_stieltjes < 1e-6;
  report(7, pass, "Volterra gamma-kernel example",
         std::string("case table ") + (table_ok ? "ok" : "WRONG") +
             ", gradient error " + fmt(worst_grad) + ", Beta error " +
             fmt(beta_err) + ", Stieltjes error " + fmt(worst_stieltjes));
}

// --- criterion 8: L1 domain beyond the L2 theory -------------------------------

void criterion_l1_beyond_l2() {
  const VolterraKernel k = VolterraKernel::gamma(0.3, 0.0);
  const JumpMeasure case3 = JumpMeasure::alpha_stable(1.0, 0.5);
  const JumpMeasure case4 = JumpMeasure::alpha_stable(1.0, 1.5);
  const StabilizationReport l1_ok = l1_stabilization_check(case3, k, 1.0);
  const L2CheckReport l2_bad = l2_integral_check(case3, k, 1.0);
  const StabilizationReport l1_bad = l1_stabilization_check(case4, k, 1.0);
  const L2CheckReport l2_bad2 = l2_integral_check(case4, k, 1.0);
  const bool pass = l1_ok.stabilized && l2_bad.divergent &&
                    !l1_bad.stabilized && l2_bad2.divergent;
  report(8, pass, "L1 domain check succeeds where the L2 integral diverges",
         "(0.5,0.3): L1 " + std::string(l1_ok.stabilized ? "stable" : "bad") +
             ", L2 " + (l2_bad.divergent ? "divergent" : "finite") +
             "; (1.5,0.3): L1 " +
             (l1_bad.stabilized ? "stable" : "not stable") + ", L2 " +
             (l2_bad2.divergent ? "divergent" : "finite"));
}

// --- criterion 9: determinism ---------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void criterion_determinism() {
  const auto base =
      std::filesystem::temp_directory_path() / "jumpcal-acceptance";
  std::filesystem::remove_all(base);
  ExperimentConfig c;
  c.experiment = "all";
  c.measure = JumpMeasure::compound_poisson(1.0, SizeDist::dirac(1.0));
  c.functional = "count";
  c.field = "one";
  c.replicas = 1000;
  c.seed = 9001;
  c.workers = 1;
  c.out_dir = (base / "a").string();
  run_experiment(c);
  c.workers = 4;  // different thread count must not change the bytes
  c.out_dir = (base / "b").string();
  run_experiment(c);
  bool pass = true;
  int files = 0;
  for (const auto& entry :
       std::filesystem::directory_iterator(base / "a")) {
    ++files;
    const auto other = base / "b" / entry.path().filename();
    if (!std::filesystem::exists(other) ||
        slurp(entry.path()) != slurp(other))
      pass = false;
  }
  pass = pass && files > 0;
  std::filesystem::remove_all(base);
  report(9, pass, "byte-identical CSV output across reruns",
         std::to_string(files) + " files compared");
}

}  // namespace

int main() {
  criterion_pathwise_rules();
  criterion_expectation();
  criterion_dualities();
  criterion_chaos();
  criterion_cho();
  criterion_predictability();
  criterion_volterra_example();
  criterion_l1_beyond_l2();
  criterion_determinism();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", failures);
  return 1;
}
