#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "leapsgd/harness.hpp"
#include "leapsgd/leap.hpp"
#include "leapsgd/oracle.hpp"

namespace {

using nlohmann::json;

void write_output(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + out + "'");
    f << doc.dump(2) << "\n";
  }
}

std::map<std::string, std::string> parse_hyper(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> out;
  for (const std::string& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--set", "expected key=expression, got '" + kv + "'");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

int cmd_leap(const std::string& target, const std::string& out) {
  leapsgd::SparsePolynomial poly = leapsgd::parse_target(target);
  poly.validate();
  leapsgd::LeapResult res = leapsgd::leap(poly);
  json doc{{"target", leapsgd::print_target(poly)},
           {"leap", res.leap},
           {"ordering", res.ordering},
           {"per_step_new_mass", res.per_step_new_mass}};
  write_output(doc, out);
  return 0;
}

int cmd_train(const leapsgd::SweepSpec& spec, int d, uint64_t seed, const std::string& out,
              const std::string& csv) {
  leapsgd::Rng rng = leapsgd::Rng(seed).split(static_cast<uint64_t>(d)).split(0);
  leapsgd::TrainingTrace trace = leapsgd::run_cell(spec, d, rng);
  trace.seed = seed;
  const auto levels = spec.levels.empty()
                          ? leapsgd::default_thresholds(leapsgd::parse_target(spec.target))
                          : spec.levels;
  leapsgd::EscapeReport rep = leapsgd::detect_escapes(trace, levels);
  json doc = leapsgd::trace_to_json(trace);
  // Risk is half the MSE; emit plain MSE alongside for plotting.
  for (json& p : doc["points"]) p["mse"] = 2.0 * p["risk"].get<double>();
  json jlv = json::array();
  for (size_t l = 0; l < rep.levels.size(); ++l) {
    jlv.push_back({{"threshold", levels[l].threshold},
                   {"step", rep.levels[l].step ? json(*rep.levels[l].step) : json()},
                   {"plateau_span", rep.levels[l].plateau_span}});
  }
  doc["escapes"] = std::move(jlv);
  write_output(doc, out);
  if (!csv.empty()) {
    leapsgd::emit_trace(trace, leapsgd::TraceFormat::Csv, csv);
    // One support-stats CSV per tracked coordinate group.
    const std::string stem =
        csv.size() > 4 && csv.substr(csv.size() - 4) == ".csv" ? csv.substr(0, csv.size() - 4)
                                                               : csv;
    for (size_t g = 0; g < trace.group_names.size(); ++g) {
      std::ofstream f(stem + "." + trace.group_names[g] + ".csv", std::ios::binary);
      f << "step,min_abs,max_abs,mean_abs\r\n";
      for (const leapsgd::TracePoint& p : trace.points) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g\r\n", p.step,
                      p.groups[g].min_abs, p.groups[g].max_abs, p.groups[g].mean_abs);
        f << buf;
      }
    }
  }
  return 0;
}

int cmd_sweep(const leapsgd::SweepSpec& spec) {
  // run_sweep writes per-cell traces plus summary.json when out_dir is set;
  // the summary also goes to stdout.
  leapsgd::SweepResult res = leapsgd::run_sweep(spec);
  std::cout << res.summary.dump(2) << "\n";
  for (const leapsgd::CellResult& c : res.cells) {
    if (!c.ok)
      std::cerr << "cell d=" << c.d << " seed=" << c.seed << " failed: " << c.error << "\n";
  }
  return 0;
}

// Randomized cross-check corpus: closed form vs Monte-Carlo drift, nested
// L = 1 reduction, sequence bounds, and the correlation bound.
int cmd_oracle_check(uint64_t seed, long mc_samples, int configs, int threads,
                     const std::string& out) {
  leapsgd::Rng rng(seed);
  leapsgd::GaussHermite quad(200);
  auto act = leapsgd::make_shifted_sigmoid(1.0);
  json checks = json::array();
  bool all_ok = true;

  {  // pop_grad_single vs mc_pop_grad, and the L = 1 bitwise reduction.
    int bad_coords = 0, bad_bitwise = 0;
    double worst_z = 0.0;
    const int d = 30;
    for (int c = 0; c < configs; ++c) {
      leapsgd::Rng draw = rng.split(100 + c);
      const int P = 1 + static_cast<int>(draw.uniform_int(4));
      std::vector<int> k(P, 1);
      int degree = P;
      while (degree < 2) {  // total degree within [2, 4]
        ++k[draw.uniform_int(P)];
        ++degree;
      }
      while (degree < 4 && draw.uniform() < 0.5) {
        ++k[draw.uniform_int(P)];
        ++degree;
      }
      std::vector<uint8_t> S(d, 1);
      std::vector<double> w(d);
      for (double& v : w) v = draw.normal() / std::sqrt(static_cast<double>(d));
      // Push a couple of coordinates out of S and clamp them.
      for (int rep = 0; rep < 2; ++rep) {
        int i = static_cast<int>(draw.uniform_int(d));
        S[i] = 0;
        w[i] = 0.4 * (2.0 * draw.uniform() - 1.0);
      }
      double norm = 0.0;
      for (int i = 0; i < d; ++i)
        if (S[i]) norm += w[i] * w[i];
      norm = std::sqrt(norm);
      for (int i = 0; i < d; ++i)
        if (S[i]) w[i] /= norm;
      const double a0 = draw.rademacher() * 0.5;

      leapsgd::SparsePolynomial poly;
      poly.basis = leapsgd::BasisKind::Gaussian;
      poly.latent_dim = P;
      poly.terms.push_back({leapsgd::Monomial{k}, 1.0});
      leapsgd::EmbeddedTarget target = leapsgd::embed_prefix(poly, d);

      leapsgd::PopGradResult closed =
          leapsgd::pop_grad_single(w, S, k, *act, a0, 0.0, quad);
      leapsgd::PopGradResult nested =
          leapsgd::pop_grad_nested(w, S, leapsgd::nested_from_poly(poly), *act, a0, 0.0, quad);
      for (int i = 0; i < d; ++i)
        if (closed.drift[i] != nested.drift[i]) ++bad_bitwise;
      leapsgd::Rng mc_rng = draw.split(7);
      leapsgd::McDrift mc =
          leapsgd::mc_pop_grad(w, S, target, *act, a0, 0.0, mc_samples, mc_rng, threads);
      for (int i = 0; i < d; ++i) {
        const double gap = std::fabs(closed.drift[i] - mc.estimate[i]);
        const double z = gap / std::max(mc.std_error[i], 1e-300);
        worst_z = std::max(worst_z, z);
        if (gap > 4.0 * mc.std_error[i] + 1e-12) ++bad_coords;
      }
    }
    const bool ok = bad_coords == 0 && bad_bitwise == 0;
    all_ok = all_ok && ok;
    checks.push_back({{"name", "pop_grad_vs_mc"},
                      {"ok", ok},
                      {"configs", configs},
                      {"samples", mc_samples},
                      {"coords_outside_4se", bad_coords},
                      {"nested_bitwise_mismatches", bad_bitwise},
                      {"worst_z", worst_z}});
  }

  {  // Extremal-sequence envelopes on random parameter draws.
    int violations = 0;
    long checked = 0;
    leapsgd::Rng draw = rng.split(200);
    for (int c = 0; c < 100; ++c) {
      const double a0 = 0.001 + 0.1 * draw.uniform();
      const double b0 = a0 * (1.0 + draw.uniform());
      const double a1 = 0.0001 + 0.01 * draw.uniform();
      const double b1 = a1 * (1.0 + draw.uniform());
      const int k = 2 + static_cast<int>(draw.uniform_int(4));
      auto rep = leapsgd::sequence_bounds_check(a0, a1, b0, b1, k, 10000, 0.5);
      checked += rep.checked;
      if (!rep.ok) ++violations;
    }
    all_ok = all_ok && violations == 0;
    checks.push_back({{"name", "sequence_bounds"},
                      {"ok", violations == 0},
                      {"draws", 100},
                      {"bounds_checked", checked},
                      {"violations", violations}});
  }

  {  // Correlation bound on random unit directions.
    int failures = 0;
    double worst_margin = 1e300;
    leapsgd::Rng draw = rng.split(300);
    for (int c = 0; c < 20; ++c) {
      const int d = 10;
      const int P = 1 + static_cast<int>(draw.uniform_int(3));
      std::vector<double> w(d);
      double norm = 0.0;
      for (double& v : w) {
        v = draw.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (double& v : w) v /= norm;
      leapsgd::Rng mc_rng = draw.split(5);
      auto rep = leapsgd::correlation_bound_check(w, P, *act, 0.0, mc_samples, mc_rng);
      worst_margin = std::min(worst_margin, rep.bound - std::fabs(rep.quadrature_value));
      if (!rep.ok) ++failures;
    }
    all_ok = all_ok && failures == 0;
    checks.push_back({{"name", "correlation_bound"},
                      {"ok", failures == 0},
                      {"draws", 20},
                      {"failures", failures},
                      {"worst_margin", worst_margin}});
  }

  write_output(json{{"ok", all_ok}, {"checks", checks}}, out);
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layerwise training, leap complexity, and population-gradient checks for "
               "sparse polynomial targets"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand name too
  app.set_config("--config")->description("config file mirroring the flags (TOML/INI)");

  uint64_t seed = 0;
  std::string out;
  int threads = 1;
  app.add_option("--seed", seed, "rng seed")->capture_default_str();
  app.add_option("--out", out, "output file or directory (default: stdout)");
  app.add_option("--threads", threads, "worker threads")->capture_default_str();

  std::string target, activation = "sigmoid", mode = "vanilla", csv;
  int d = 50, seeds = 1, dwell = 3, configs = 20;
  long heldout = 50000, mc_samples = 200000;
  int points_per_decade = 25;
  std::vector<int> dims;
  std::vector<double> thresholds;
  std::vector<std::string> hyper_kv, phase_kv;

  CLI::App* leap_cmd = app.add_subcommand("leap", "leap complexity of a target");
  leap_cmd->add_option("target", target, "target DSL, e.g. 'gauss: He2(z1)'")->required();

  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--target", target, "target DSL")->required();
    cmd->add_option("--activation", activation, "sigmoid[:c] | centered_sigmoid[:c] | sine")
        ->capture_default_str();
    cmd->add_option("--mode", mode, "algorithm1 | vanilla")->capture_default_str();
    cmd->add_option("--set", hyper_kv, "hyperparameter key=expression (repeatable)");
    cmd->add_option("--phase", phase_kv,
                    "adaptive phase steps=eta (d-expressions, repeatable, in order)");
    cmd->add_option("--thresholds", thresholds, "escape thresholds, strictly decreasing");
    cmd->add_option("--dwell", dwell, "escape dwell window (logged points)")
        ->capture_default_str();
    cmd->add_option("--heldout", heldout, "held-out sample count for risk")
        ->capture_default_str();
    cmd->add_option("--points-per-decade", points_per_decade, "risk-eval density")
        ->capture_default_str();
  };

  CLI::App* train_cmd = app.add_subcommand("train", "single training run");
  add_train_opts(train_cmd);
  train_cmd->add_option("-d,--dim", d, "ambient dimension")->capture_default_str();
  train_cmd->add_option("--csv", csv, "also write the trace as CSV to this path");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "dimension sweep with scaling fit");
  add_train_opts(sweep_cmd);
  sweep_cmd->add_option("--dims", dims, "ambient dimensions, strictly increasing")->required();
  sweep_cmd->add_option("--seeds", seeds, "seeds per dimension")->capture_default_str();

  CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "population-gradient cross-checks");
  oracle_cmd->add_option("--samples", mc_samples, "Monte-Carlo samples per check")
      ->capture_default_str();
  oracle_cmd->add_option("--configs", configs, "random drift configs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    leapsgd::SweepSpec spec;
    spec.target = target;
    spec.activation = activation;
    spec.mode = mode;
    spec.seeds = seeds;
    spec.base_seed = seed;
    spec.hyper = parse_hyper(hyper_kv);
    for (const std::string& kv : phase_kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("--phase expects steps=eta, got '" + kv + "'");
      spec.schedule.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
    }
    for (double t : thresholds) spec.levels.push_back({t, dwell});
    spec.threads = threads;
    spec.heldout_N = heldout;
    spec.points_per_decade = points_per_decade;

    if (*leap_cmd) return cmd_leap(target, out);
    if (*train_cmd) {
      spec.dims = {d};
      return cmd_train(spec, d, seed, out, csv);
    }
    if (*sweep_cmd) {
      spec.dims = dims;
      spec.out_dir = out;
      return cmd_sweep(spec);
    }
    if (*oracle_cmd) return cmd_oracle_check(seed, mc_samples, configs, threads, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
