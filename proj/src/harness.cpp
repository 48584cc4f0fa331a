#include "leapsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "leapsgd/leap.hpp"

namespace leapsgd {

std::optional<long> EscapeReport::final_step() const {
  if (levels.empty()) return std::nullopt;
  for (const auto& l : levels)
    if (!l.step) return std::nullopt;
  return levels.back().step;
}

EscapeReport detect_escapes(const TrainingTrace& trace,
                            const std::vector<EscapeLevel>& levels) {
  if (trace.points.empty()) throw std::invalid_argument("detect_escapes: empty trace");
  for (size_t l = 1; l < levels.size(); ++l)
    if (!(levels[l].threshold < levels[l - 1].threshold))
      throw std::invalid_argument("detect_escapes: thresholds must be strictly decreasing");
  const auto& pts = trace.points;
  EscapeReport rep;
  long prev_step = 0;
  for (const auto& level : levels) {
    if (level.dwell < 1) throw std::invalid_argument("detect_escapes: dwell must be >= 1");
    LevelEscape esc;
    for (size_t i = 0; i < pts.size(); ++i) {
      bool sustained = true;
      // The trace end truncates the dwell window.
      for (size_t j = i; j < std::min(pts.size(), i + level.dwell); ++j) {
        if (pts[j].risk > level.threshold) {
          sustained = false;
          break;
        }
      }
      if (sustained) {
        esc.step = pts[i].step;
        esc.plateau_span = pts[i].step - prev_step;
        prev_step = pts[i].step;
        break;
      }
    }
    rep.levels.push_back(esc);
  }
  return rep;
}

std::vector<EscapeLevel> default_thresholds(const SparsePolynomial& target, int dwell) {
  target.validate();
  struct Term {
    int top;     // largest coordinate in the term
    double var;  // coeff^2 * Var(chi)
  };
  std::vector<Term> terms;
  for (const auto& [mono, coeff] : target.terms) {
    if (coeff == 0.0) continue;
    Term t{0, coeff * coeff};
    for (size_t i = 0; i < mono.exponents.size(); ++i) {
      if (mono.exponents[i] > 0) t.top = static_cast<int>(i);
      if (target.basis == BasisKind::Gaussian)
        for (int f = 2; f <= mono.exponents[i]; ++f) t.var *= f;
    }
    terms.push_back(t);
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.top < b.top; });
  double remaining = 0.0;
  for (const Term& t : terms) remaining += t.var;
  std::vector<EscapeLevel> out;
  for (const Term& t : terms) {
    remaining -= t.var;
    out.push_back({0.5 * remaining + 0.25 * t.var, dwell});
  }
  return out;
}

namespace {

// Recursive-descent evaluator for the d-expression language.
class DExpr {
public:
  DExpr(const std::string& src, double d) : src_(src), d_(d) {}

  double run() {
    double v = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("d-expression error at position " + std::to_string(pos_) +
                                ": " + what + " in '" + src_ + "'");
  }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*'))
        v *= unary();
      else if (eat('/'))
        v /= unary();
      else
        return v;
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    return power();
  }
  double power() {
    double base = primary();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }
  double primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      double v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v;
      try {
        v = std::stod(src_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name = src_.substr(start, pos_ - start);
      if (name == "d") return d_;
      if (!eat('(')) fail("unknown identifier '" + name + "'");
      std::vector<double> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')'");
      auto arity = [&](size_t n) {
        if (args.size() != n) fail("'" + name + "' takes " + std::to_string(n) + " argument(s)");
      };
      if (name == "log") {
        arity(1);
        return std::log(args[0]);
      }
      if (name == "log2") {
        arity(1);
        return std::log2(args[0]);
      }
      if (name == "sqrt") {
        arity(1);
        return std::sqrt(args[0]);
      }
      if (name == "min") {
        arity(2);
        return std::min(args[0], args[1]);
      }
      if (name == "max") {
        arity(2);
        return std::max(args[0], args[1]);
      }
      if (name == "pow") {
        arity(2);
        return std::pow(args[0], args[1]);
      }
      fail("unknown function '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  double d_;
  size_t pos_ = 0;
};

}  // namespace

double eval_dexpr(const std::string& expr, double d) { return DExpr(expr, d).run(); }

void SweepSpec::validate() const {
  if (dims.empty()) throw std::invalid_argument("sweep: dims must be nonempty");
  for (size_t i = 1; i < dims.size(); ++i)
    if (dims[i] <= dims[i - 1])
      throw std::invalid_argument("sweep: dims must be strictly increasing");
  if (seeds < 1) throw std::invalid_argument("sweep: seeds must be >= 1");
  if (mode != "algorithm1" && mode != "vanilla" && mode != "adaptive")
    throw std::invalid_argument("sweep: mode must be 'algorithm1', 'vanilla', or 'adaptive'");
  if (mode == "adaptive" && schedule.empty())
    throw std::invalid_argument("sweep: adaptive mode needs a step-size schedule");
  if (threads < 1) throw std::invalid_argument("sweep: threads must be >= 1");
  parse_target(target).validate();
  for (size_t l = 1; l < levels.size(); ++l)
    if (!(levels[l].threshold < levels[l - 1].threshold))
      throw std::invalid_argument("sweep: thresholds must be strictly decreasing");
}

TrainingTrace run_cell(const SweepSpec& spec, int d, Rng rng) {
  SparsePolynomial poly = parse_target(spec.target);
  poly.validate();
  EmbeddedTarget target = embed_prefix(poly, d);
  ActivationPtr act = make_activation(spec.activation);
  const int D = leap(poly).leap;

  auto hv = [&](const char* key, double fallback) {
    auto it = spec.hyper.find(key);
    return it == spec.hyper.end() ? fallback : eval_dexpr(it->second, static_cast<double>(d));
  };
  auto hl = [&](const char* key, double fallback) {
    return static_cast<long>(std::llround(hv(key, fallback)));
  };

  EvalConfig eval;
  eval.heldout_N = spec.heldout_N;
  eval.points_per_decade = spec.points_per_decade;

  TrainingTrace trace;
  nlohmann::json echo{{"target", spec.target}, {"activation", spec.activation},
                      {"mode", spec.mode},     {"d", d},
                      {"leap", D}};
  if (spec.mode == "algorithm1" || spec.mode == "adaptive") {
    const double c0 = hv("c0", 1.0), c1 = hv("c1", 1.0), c2 = hv("c2", 1.0);
    ScalingParams sp = scaling_params(d, D, c0, c1, c2);
    const int M = static_cast<int>(hl("M", 32));
    const double kappa = hv("kappa", sp.kappa);
    const double rho = hv("rho", 0.0);
    Phase1Config cfg1;
    // The default step size scales with 1/kappa, so it follows an overridden kappa.
    cfg1.eta1 = hv("eta1", sp.eta1 * sp.kappa / kappa);
    cfg1.T1 = hl("T1", static_cast<double>(sp.T1));
    cfg1.r = hv("r", 0.2);
    cfg1.Delta = hv("Delta", 0.4);
    if (spec.mode == "adaptive") {
      cfg1.T1 = 0;
      for (const auto& [steps_expr, eta_expr] : spec.schedule) {
        const long steps =
            std::llround(eval_dexpr(steps_expr, static_cast<double>(d)));
        cfg1.schedule.push_back({steps, eval_dexpr(eta_expr, static_cast<double>(d))});
        cfg1.T1 += steps;
      }
    }
    Phase2Config cfg2;
    cfg2.T2 = hl("T2", 1000.0);
    cfg2.eta2 = hv("eta2", 0.5 / M);
    cfg2.lambda_a = hv("lambda_a", 0.0);
    echo["M"] = M;
    echo["kappa"] = kappa;
    echo["rho"] = rho;
    echo["eta1"] = cfg1.eta1;
    echo["T1"] = cfg1.T1;
    echo["r"] = cfg1.r;
    echo["Delta"] = cfg1.Delta;
    echo["eta2"] = cfg2.eta2;
    echo["T2"] = cfg2.T2;
    echo["lambda_a"] = cfg2.lambda_a;
    if (!cfg1.schedule.empty()) {
      nlohmann::json jsched = nlohmann::json::array();
      for (const auto& [steps, eta] : cfg1.schedule) jsched.push_back({{"steps", steps}, {"eta", eta}});
      echo["schedule"] = std::move(jsched);
    }
    Rng init_rng = rng.split(10);
    TwoLayerNet net = init_net(M, d, kappa, rho, init_rng);
    trace = run_algorithm1(target, *act, std::move(net), cfg1, cfg2, eval, {}, rng.split(11));
  } else {
    const int M = static_cast<int>(hl("M", 500));
    const double kappa = hv("kappa", 1.0 / std::sqrt(static_cast<double>(M)));
    const double eta = hv("eta", 0.4 / d);
    const long T = hl("T", 100000.0);
    const int batch = static_cast<int>(hl("batch", 1.0));
    echo["M"] = M;
    echo["kappa"] = kappa;
    echo["eta"] = eta;
    echo["T"] = T;
    echo["batch"] = batch;
    Rng init_rng = rng.split(10);
    TwoLayerNet net = init_net(M, d, kappa, 0.0, init_rng);
    trace = run_vanilla_sgd(target, *act, std::move(net), eta, T, batch, eval, {},
                            rng.split(11));
  }
  trace.config_echo = std::move(echo);
  return trace;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct FitInput {
  std::vector<double> dims, medians;
};

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 matched points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SparsePolynomial poly = parse_target(spec.target);
  const std::vector<EscapeLevel> levels =
      spec.levels.empty() ? default_thresholds(poly) : spec.levels;
  if (!spec.out_dir.empty()) std::filesystem::create_directories(spec.out_dir);

  struct Cell {
    int d, seed;
  };
  std::vector<Cell> cells;
  for (int d : spec.dims)
    for (int s = 0; s < spec.seeds; ++s) cells.push_back({d, s});

  SweepResult res;
  res.cells.resize(cells.size());
  const Rng root(spec.base_seed);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell cell = cells[idx];
      CellResult& out = res.cells[idx];
      out.d = cell.d;
      out.seed = cell.seed;
      try {
        Rng cell_rng = root.split(static_cast<uint64_t>(cell.d))
                           .split(static_cast<uint64_t>(cell.seed));
        TrainingTrace trace = run_cell(spec, cell.d, cell_rng);
        trace.seed = static_cast<uint64_t>(cell.seed);
        out.escapes = detect_escapes(trace, levels);
        out.escape_step = out.escapes.final_step();
        if (!spec.out_dir.empty()) {
          out.trace_path = spec.out_dir + "/cell_d" + std::to_string(cell.d) + "_s" +
                           std::to_string(cell.seed) + ".json";
          emit_trace(trace, TraceFormat::Json, out.trace_path);
        }
        out.ok = true;
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(spec.threads, static_cast<int>(cells.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Deterministic single-threaded reduce over (d, seed)-sorted cells.
  std::vector<std::vector<double>> escapes_per_dim(spec.dims.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!res.cells[i].ok || !res.cells[i].escape_step) continue;
    const auto dim_it = std::find(spec.dims.begin(), spec.dims.end(), cells[i].d);
    escapes_per_dim[dim_it - spec.dims.begin()].push_back(
        static_cast<double>(*res.cells[i].escape_step));
  }
  FitInput fit;
  for (size_t k = 0; k < spec.dims.size(); ++k) {
    if (escapes_per_dim[k].empty()) continue;
    fit.dims.push_back(static_cast<double>(spec.dims[k]));
    fit.medians.push_back(median(escapes_per_dim[k]));
  }
  for (size_t k = 0; k < fit.dims.size(); ++k) {
    res.fit.dims.push_back(static_cast<int>(fit.dims[k]));
    res.fit.median_escape.push_back(fit.medians[k]);
  }
  if (fit.dims.size() >= 3) {
    res.fit.fitted = true;
    res.fit.slope = loglog_slope(fit.dims, fit.medians);
    // Bootstrap over seeds within each dimension.
    constexpr int kBoot = 200;
    Rng boot = root.split(0xb00715ull);
    std::vector<double> slopes;
    slopes.reserve(kBoot);
    for (int b = 0; b < kBoot; ++b) {
      std::vector<double> bd, bm;
      for (size_t k = 0; k < spec.dims.size(); ++k) {
        const auto& pool = escapes_per_dim[k];
        if (pool.empty()) continue;
        std::vector<double> resampled(pool.size());
        for (double& v : resampled) v = pool[boot.uniform_int(pool.size())];
        bd.push_back(static_cast<double>(spec.dims[k]));
        bm.push_back(median(std::move(resampled)));
      }
      if (bd.size() >= 3) slopes.push_back(loglog_slope(bd, bm));
    }
    if (!slopes.empty()) {
      std::sort(slopes.begin(), slopes.end());
      auto pct = [&](double q) {
        const double pos = q * (slopes.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, slopes.size() - 1);
        return slopes[lo] + (pos - lo) * (slopes[hi] - slopes[lo]);
      };
      res.fit.slope_ci_lo = pct(0.025);
      res.fit.slope_ci_hi = pct(0.975);
    }
  }

  nlohmann::json summary;
  summary["target"] = spec.target;
  summary["leap"] = leap(poly).leap;
  summary["dims"] = res.fit.dims;
  summary["median_escape"] = res.fit.median_escape;
  if (res.fit.fitted) {
    summary["slope"] = res.fit.slope;
    summary["slope_ci"] = {res.fit.slope_ci_lo, res.fit.slope_ci_hi};
  } else {
    summary["slope"] = nullptr;
    summary["slope_ci"] = nullptr;
  }
  nlohmann::json jcells = nlohmann::json::array();
  for (const CellResult& c : res.cells) {
    nlohmann::json jc{{"d", c.d}, {"seed", c.seed}, {"ok", c.ok}};
    if (!c.ok) jc["error"] = c.error;
    jc["escape_step"] = c.escape_step ? nlohmann::json(*c.escape_step) : nlohmann::json();
    nlohmann::json jlv = nlohmann::json::array();
    for (const LevelEscape& l : c.escapes.levels) {
      jlv.push_back({{"step", l.step ? nlohmann::json(*l.step) : nlohmann::json()},
                     {"plateau_span", l.plateau_span}});
    }
    jc["levels"] = std::move(jlv);
    if (!c.trace_path.empty()) jc["trace_path"] = c.trace_path;
    jcells.push_back(std::move(jc));
  }
  summary["cells"] = std::move(jcells);
  res.summary = std::move(summary);
  if (!spec.out_dir.empty()) {
    std::ofstream out(spec.out_dir + "/summary.json");
    out << res.summary.dump(2) << "\n";
  }
  return res;
}

nlohmann::json trace_to_json(const TrainingTrace& trace) {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const TracePoint& p : trace.points) {
    nlohmann::json groups = nlohmann::json::array();
    for (const SupportStat& s : p.groups)
      groups.push_back({{"min_abs", s.min_abs}, {"max_abs", s.max_abs}, {"mean_abs", s.mean_abs}});
    pts.push_back(
        {{"step", p.step}, {"risk", p.risk}, {"se", p.se}, {"groups", std::move(groups)}});
  }
  j["points"] = std::move(pts);
  j["group_names"] = trace.group_names;
  j["groups"] = trace.groups;
  nlohmann::json evs = nlohmann::json::array();
  for (const ProjectionEvent& e : trace.projection_events)
    evs.push_back({{"step", e.step}, {"neuron", e.neuron}, {"coord", e.coord}});
  j["projection_events"] = std::move(evs);
  j["phase_boundary"] = trace.phase_boundary;
  j["config"] = trace.config_echo;
  j["seed"] = trace.seed;
  if (trace.checkpoint) j["checkpoint"] = *trace.checkpoint;
  return j;
}

TrainingTrace trace_from_json(const nlohmann::json& j) {
  TrainingTrace trace;
  for (const auto& jp : j.at("points")) {
    TracePoint p;
    p.step = jp.at("step").get<long>();
    p.risk = jp.at("risk").get<double>();
    p.se = jp.at("se").get<double>();
    for (const auto& jg : jp.at("groups")) {
      SupportStat s;
      s.min_abs = jg.at("min_abs").get<double>();
      s.max_abs = jg.at("max_abs").get<double>();
      s.mean_abs = jg.at("mean_abs").get<double>();
      p.groups.push_back(s);
    }
    trace.points.push_back(std::move(p));
  }
  trace.group_names = j.at("group_names").get<std::vector<std::string>>();
  trace.groups = j.at("groups").get<std::vector<std::vector<int>>>();
  for (const auto& je : j.at("projection_events")) {
    trace.projection_events.push_back(
        {je.at("step").get<long>(), je.at("neuron").get<int>(), je.at("coord").get<int>()});
  }
  trace.phase_boundary = j.at("phase_boundary").get<long>();
  trace.config_echo = j.at("config");
  trace.seed = j.at("seed").get<uint64_t>();
  if (j.contains("checkpoint")) trace.checkpoint = j.at("checkpoint");
  return trace;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_trace(const TrainingTrace& trace, TraceFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_trace: cannot open '" + path + "'");
  if (format == TraceFormat::Json) {
    out << trace_to_json(trace).dump(2) << "\n";
  } else {
    out << "step,risk,se";
    for (const std::string& name : trace.group_names)
      out << "," << csv_quote(name + "_min_abs") << "," << csv_quote(name + "_max_abs") << ","
          << csv_quote(name + "_mean_abs");
    out << "\r\n";
    for (const TracePoint& p : trace.points) {
      out << p.step << "," << fmt_double(p.risk) << "," << fmt_double(p.se);
      for (const SupportStat& s : p.groups)
        out << "," << fmt_double(s.min_abs) << "," << fmt_double(s.max_abs) << ","
            << fmt_double(s.mean_abs);
      out << "\r\n";
    }
  }
  if (!out.good()) throw std::runtime_error("emit_trace: write failed for '" + path + "'");
}

TrainingTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trace: cannot open '" + path + "'");
  try {
    return trace_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("load_trace: '" + path + "': parse error at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_trace: '" + path + "': " + e.what());
  }
}

}  // namespace leapsgd
