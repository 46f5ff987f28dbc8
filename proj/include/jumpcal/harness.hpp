#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jumpcal/chaos.hpp"
#include "jumpcal/cho.hpp"
#include "jumpcal/configuration.hpp"
#include "jumpcal/functional.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/operators.hpp"
#include "jumpcal/region.hpp"
#include "jumpcal/rng.hpp"
#include "jumpcal/sampler.hpp"

namespace jumpcal {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---- Configuration ----------------------------------------------------------

struct ExperimentConfig {
  std::string experiment = "all";
  JumpMeasure measure = JumpMeasure::standard_poisson();
  double T = 1.0;
  double eps = 0.0;
  int replicas = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string functional = "count";
  std::string field = "one";
  double pathwise_tol = 1e-10;
  double sigma_mult = 3.0;
  std::string out_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

inline JumpMeasure measure_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "standard_poisson");
  TimeIntensity h;
  if (j.contains("h")) {
    const auto& a = j.at("h");
    if (!a.is_array() || a.size() != 2)
      throw ConfigError("measure.h must be [a, b]");
    h = {a[0].get<double>(), a[1].get<double>()};
  }
  if (kind == "standard_poisson") return JumpMeasure::standard_poisson();
  if (kind == "compound_poisson") {
    const double rate = j.value("rate", 1.0);
    SizeDist rho = SizeDist::dirac(1.0);
    if (j.contains("sizes")) {
      const auto& s = j.at("sizes");
      const std::string type = s.value("type", "dirac");
      if (type == "dirac")
        rho = SizeDist::dirac(s.value("x", 1.0));
      else if (type == "two_point")
        rho = SizeDist::two_point(s.value("x", 1.0));
      else if (type == "uniform")
        rho = SizeDist::uniform(s.value("lo", 0.0), s.value("hi", 1.0));
      else
        throw ConfigError("unknown size distribution: " + type);
    }
    return JumpMeasure::compound_poisson(rate, rho, h);
  }
  if (kind == "alpha_stable")
    return JumpMeasure::alpha_stable(j.value("c", 1.0), j.value("alpha", 0.5),
                                     h);
  throw ConfigError("unknown measure kind: " + kind);
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.value("experiment", c.experiment);
  if (j.contains("measure")) c.measure = detail::measure_from_json(j.at("measure"));
  c.T = j.value("T", c.T);
  c.eps = j.value("eps", c.eps);
  c.replicas = j.value("replicas", c.replicas);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.functional = j.value("functional", c.functional);
  c.field = j.value("field", c.field);
  c.pathwise_tol = j.value("pathwise_tol", c.pathwise_tol);
  c.sigma_mult = j.value("sigma_mult", c.sigma_mult);
  c.out_dir = j.value("out", c.out_dir);
  if (c.replicas <= 0) throw ConfigError("replicas must be positive");
  if (c.workers <= 0) throw ConfigError("workers must be positive");
  if (!(c.T > 0.0)) throw ConfigError("T must be positive");
  if (c.eps < 0.0) throw ConfigError("eps must be >= 0");
  if (c.measure.infinite_activity() && c.eps <= 0.0)
    throw ConfigError("infinite-activity measure requires eps > 0");
  return c;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

inline Functional make_functional(const ExperimentConfig& c) {
  if (c.functional == "count")
    return functionals::count(c.measure, c.T, c.eps);
  if (c.functional == "path-terminal")
    return functionals::path_terminal(c.measure, c.T, c.eps);
  if (c.functional == "constant") return functionals::constant(2.5);
  throw ConfigError("unknown functional: " + c.functional);
}

inline RandomField make_field(const ExperimentConfig& c) {
  if (c.field == "one") return fields::one();
  if (c.field == "coordinate-x") return fields::coordinate_x();
  if (c.field == "indicator")
    return fields::indicator(Region(0.0, 0.5 * c.T, c.eps, 1.0));
  if (c.field == "count-before") return fields::count_before();
  throw ConfigError("unknown field: " + c.field);
}

// ---- Replica-parallel map ---------------------------------------------------

// fn(r) writes into slot r of caller-owned storage; results are therefore
// independent of the worker count.
template <typename Fn>
void parallel_replicas(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2 * workers) {
    for (int r = 0; r < n; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= n) return;
      fn(r);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// ---- Identity verification --------------------------------------------------

struct IdentityReport {
  std::string name;
  std::string statement;  // the identity being checked, printed as the anchor
  bool pathwise = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double se_lhs = 0.0;
  double se_rhs = 0.0;
  double max_discrepancy = 0.0;  // pathwise identities
  double threshold = 0.0;
  bool pass = false;
  bool divergent = false;
  int replicas = 0;
  double wall_ms = 0.0;  // console only, never persisted
  std::vector<double> lhs_samples;  // per replica, for CSV emission
  std::vector<double> rhs_samples;
};

namespace detail {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                       static_cast<double>(v.size()));
  }
  return out;
}

// Two-sided MC identity: lhs(w) under one stream family, rhs(w) under an
// independent one; pass when the estimates agree within sigma_mult combined
// standard errors.
inline IdentityReport run_expectation_identity(
    const std::string& name, const std::string& statement,
    const ExperimentConfig& c,
    const std::function<double(const JumpConfiguration&)>& lhs,
    const std::function<double(const JumpConfiguration&)>& rhs) {
  IdentityReport rep;
  rep.name = name;
  rep.statement = statement;
  rep.replicas = c.replicas;
  rep.lhs_samples.resize(c.replicas);
  rep.rhs_samples.resize(c.replicas);
  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<bool> diverged{false};
  parallel_replicas(c.replicas, c.workers, [&](int r) {
    try {
      Rng rl = Rng::stream(c.seed, 2 * static_cast<std::uint64_t>(r));
      Rng rr = Rng::stream(c.seed, 2 * static_cast<std::uint64_t>(r) + 1);
      rep.lhs_samples[r] = lhs(sample_config(c.measure, c.T, c.eps, rl));
      rep.rhs_samples[r] = rhs(sample_config(c.measure, c.T, c.eps, rr));
    } catch (const DivergenceError&) {
      diverged.store(true);
    }
  });
  rep.divergent = diverged.load();
  const MeanSe l = mean_se(rep.lhs_samples);
  const MeanSe r = mean_se(rep.rhs_samples);
  rep.lhs = l.mean;
  rep.rhs = r.mean;
  rep.se_lhs = l.se;
  rep.se_rhs = r.se;
  rep.threshold = c.sigma_mult * std::sqrt(l.se * l.se + r.se * r.se);
  rep.pass = !rep.divergent && std::abs(l.mean - r.mean) <= rep.threshold;
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// Pathwise identity: both sides on the same (theta, omega); pass when the
// worst relative discrepancy stays below pathwise_tol.
inline IdentityReport run_pathwise_identity(
    const std::string& name, const std::string& statement,
    const ExperimentConfig& c,
    const std::function<std::pair<double, double>(const JumpPoint&,
                                                  const JumpConfiguration&,
                                                  Rng&)>& sides) {
  IdentityReport rep;
  rep.name = name;
  rep.statement = statement;
  rep.pathwise = true;
  rep.replicas = c.replicas;
  rep.lhs_samples.resize(c.replicas);
  rep.rhs_samples.resize(c.replicas);
  std::vector<double> disc(c.replicas, 0.0);
  const Region box = Region::theta(c.T, c.eps);
  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<bool> diverged{false};
  parallel_replicas(c.replicas, c.workers, [&](int r) {
    try {
      Rng rng = Rng::stream(c.seed, static_cast<std::uint64_t>(r));
      const JumpConfiguration w = sample_config(c.measure, c.T, c.eps, rng);
      const JumpPoint theta = c.measure.sample_point(box, rng);
      const auto [l, rv] = sides(theta, w, rng);
      rep.lhs_samples[r] = l;
      rep.rhs_samples[r] = rv;
      disc[r] = std::abs(l - rv) /
                std::max({1.0, std::abs(l), std::abs(rv)});
    } catch (const DivergenceError&) {
      diverged.store(true);
    }
  });
  rep.divergent = diverged.load();
  for (double d : disc) rep.max_discrepancy = std::max(rep.max_discrepancy, d);
  rep.lhs = mean_se(rep.lhs_samples).mean;
  rep.rhs = mean_se(rep.rhs_samples).mean;
  rep.threshold = c.pathwise_tol;
  rep.pass = !rep.divergent && rep.max_discrepancy < rep.threshold;
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

}  // namespace detail

inline std::vector<std::string> registered_identities() {
  return {"prop-elau",
          "thm-duality",
          "prop-dual1",
          "bar-duality",
          "expectation-phi-zero",
          "pathwise-product-rule",
          "pathwise-s-transfer",
          "pathwise-transfer-of-s",
          "pathwise-phi-product",
          "pathwise-psi-of-phi",
          "chaos-gradient-bridge",
          "chaos-divergence-bridge"};
}

inline IdentityReport verify_identity(const std::string& name,
                                      const ExperimentConfig& c) {
  const JumpMeasure& m = c.measure;
  const Region box = Region::theta(c.T, c.eps);
  const Functional F = make_functional(c);
  const RandomField u = make_field(c);
  const double tol = 1e-11;

  if (name == "prop-elau") {
    return detail::run_expectation_identity(
        name, "E[S u] = E[int u dnu]", c,
        [&](const JumpConfiguration& w) { return ops::s_integral(u, w); },
        [&](const JumpConfiguration& w) {
          return ops::ecal(u, w, m, box, tol);
        });
  }
  if (name == "thm-duality") {
    return detail::run_expectation_identity(
        name, "E[F * S u] = E[int (T F) u dnu]", c,
        [&](const JumpConfiguration& w) {
          return F(w) * ops::s_integral(u, w);
        },
        [&](const JumpConfiguration& w) {
          const RandomField tf = ops::transfer(F);
          const RandomField v = fields::product(tf, u);
          return ops::ecal(v, w, m, box, tol);
        });
  }
  if (name == "prop-dual1") {
    return detail::run_expectation_identity(
        name, "E[F * Phi u] = E[int (Psi F) u dnu]", c,
        [&](const JumpConfiguration& w) {
          return F(w) * ops::phi(u, w, m, box, tol);
        },
        [&](const JumpConfiguration& w) {
          const RandomField v = fields::product(ops::psi(F), u);
          return ops::ecal(v, w, m, box, tol);
        });
  }
  if (name == "bar-duality") {
    return detail::run_expectation_identity(
        name, "E[F * Phibar u] = E[int (Psibar F) u x^2 dnu]", c,
        [&](const JumpConfiguration& w) {
          return F(w) * ops::bar_phi(u, w, m, box, tol);
        },
        [&](const JumpConfiguration& w) {
          const RandomField v = fields::product(ops::bar_psi(F), u);
          return ops::bar_ecal(v, w, m, box, tol);
        });
  }
  if (name == "expectation-phi-zero") {
    return detail::run_expectation_identity(
        name, "E[Phi u] = 0", c,
        [&](const JumpConfiguration& w) { return ops::phi(u, w, m, box, tol); },
        [&](const JumpConfiguration&) { return 0.0; });
  }
  if (name == "pathwise-product-rule") {
    const Functional G = functionals::path_terminal(m, c.T, c.eps);
    return detail::run_pathwise_identity(
        name, "Psi(FG) = G PsiF + F PsiG + PsiF PsiG", c,
        [&](const JumpPoint& th, const JumpConfiguration& w, Rng&) {
          const double lhs = F(add_point(w, th)) * G(add_point(w, th)) -
                             F(w) * G(w);
          const double pf = F(add_point(w, th)) - F(w);
          const double pg = G(add_point(w, th)) - G(w);
          return std::pair{lhs, G(w) * pf + F(w) * pg + pf * pg};
        });
  }
  if (name == "pathwise-s-transfer") {
    return detail::run_pathwise_identity(
        name, "F * S u = S((T F) u)", c,
        [&](const JumpPoint&, const JumpConfiguration& w, Rng&) {
          const double lhs = F(w) * ops::s_integral(u, w);
          const RandomField v = fields::product(ops::transfer(F), u);
          return std::pair{lhs, ops::s_integral(v, w)};
        });
  }
  if (name == "pathwise-transfer-of-s") {
    return detail::run_pathwise_identity(
        name, "T_theta(S u) = u_theta + S(T_theta u)", c,
        [&](const JumpPoint& th, const JumpConfiguration& w, Rng&) {
          const double lhs = ops::s_integral(u, add_point(w, th));
          double rhs = u(th, w);
          for (const auto& p : w.points())
            rhs += u(p, add_point(remove_point(w, p), th));
          return std::pair{lhs, rhs};
        });
  }
  if (name == "pathwise-phi-product") {
    return detail::run_pathwise_identity(
        name, "F * Phi u = Phi(F u) + Phi((Psi F) u) + E((Psi F) u)", c,
        [&](const JumpPoint&, const JumpConfiguration& w, Rng&) {
          const double lhs = F(w) * ops::phi(u, w, m, box, tol);
          const RandomField fu = fields::product(fields::of_functional(F), u);
          const RandomField pfu = fields::product(ops::psi(F), u);
          const double rhs = ops::phi(fu, w, m, box, tol) +
                             ops::phi(pfu, w, m, box, tol) +
                             ops::ecal(pfu, w, m, box, tol);
          return std::pair{lhs, rhs};
        });
  }
  if (name == "pathwise-psi-of-phi") {
    return detail::run_pathwise_identity(
        name, "Psi_theta(Phi u) = u_theta + Phi(Psi_theta u)", c,
        [&](const JumpPoint& th, const JumpConfiguration& w, Rng&) {
          const double lhs = ops::phi(u, add_point(w, th), m, box, tol) -
                             ops::phi(u, w, m, box, tol);
          const RandomField du{
              [&u, th](const JumpPoint& p, const JumpConfiguration& om) {
                return u(p, add_point(om, th)) - u(p, om);
              },
              false};
          return std::pair{lhs, u(th, w) + ops::phi(du, w, m, box, tol)};
        });
  }
  if (name == "chaos-gradient-bridge" || name == "chaos-divergence-bridge") {
    const double third = c.T / 3.0;
    const ProductKernel g(
        {Region(0.0, third, c.eps, 1.0), Region(third, 2.0 * third, c.eps, 1.0)},
        Region(2.0 * third, c.T, c.eps, 1.0));
    Rng rng = Rng::stream(c.seed, 0xC0);
    IdentityReport rep;
    rep.name = name;
    rep.pathwise = true;
    rep.replicas = c.replicas;
    rep.threshold = c.pathwise_tol;
    const auto t0 = std::chrono::steady_clock::now();
    const BridgeReport br =
        name == "chaos-gradient-bridge"
            ? verify_gradient_bridge(g, m, c.T, c.eps, c.replicas, rng)
            : verify_divergence_bridge(g, m, c.T, c.eps, c.replicas, rng);
    rep.statement = name == "chaos-gradient-bridge"
                        ? "Psi_theta I_k(g) = k I_{k-1}(g(., theta))"
                        : "Phi(I_k(g(., theta))) = I_{k+1}(g)";
    rep.max_discrepancy = br.max_abs_discrepancy;
    rep.pass = br.max_abs_discrepancy < rep.threshold;
    rep.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
  }
  throw ConfigError("unknown identity: " + name);
}

// ---- CSV persistence --------------------------------------------------------

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Versioned CSV with atomic replace. Rows are written with %.17g so reruns
// under one seed are byte-identical.
inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << "# jumpcal-csv v1\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << detail::format_g17(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
  }
  std::filesystem::rename(tmp, path);
}

struct RunSummary {
  std::vector<IdentityReport> reports;
  bool all_pass = true;
  bool any_divergent = false;
};

// Runs the configured identity (or the full registry) and persists one
// per-replica CSV per identity plus a summary CSV.
inline RunSummary run_experiment(const ExperimentConfig& c) {
  std::vector<std::string> names;
  if (c.experiment == "all")
    names = registered_identities();
  else
    names.push_back(c.experiment);

  RunSummary summary;
  std::vector<std::vector<double>> summary_rows;
  for (const auto& name : names) {
    IdentityReport rep = verify_identity(name, c);
    summary.all_pass = summary.all_pass && rep.pass;
    summary.any_divergent = summary.any_divergent || rep.divergent;
    if (!rep.lhs_samples.empty()) {
      std::vector<std::vector<double>> rows;
      rows.reserve(rep.lhs_samples.size());
      for (std::size_t r = 0; r < rep.lhs_samples.size(); ++r)
        rows.push_back({static_cast<double>(r), rep.lhs_samples[r],
                        rep.rhs_samples[r]});
      write_csv(std::filesystem::path(c.out_dir) / (name + ".csv"),
                {"replica", "lhs", "rhs"}, rows);
    }
    summary_rows.push_back({rep.lhs, rep.rhs, rep.se_lhs, rep.se_rhs,
                            rep.max_discrepancy, rep.threshold,
                            rep.pass ? 1.0 : 0.0,
                            static_cast<double>(rep.replicas)});
    summary.reports.push_back(std::move(rep));
  }
  write_csv(std::filesystem::path(c.out_dir) / "summary.csv",
            {"lhs", "rhs", "se_lhs", "se_rhs", "max_discrepancy", "threshold",
             "pass", "replicas"},
            summary_rows);
  return summary;
}

}  // namespace jumpcal
