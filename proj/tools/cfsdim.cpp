// cfsdim: dimensions of self-similar systems with common fixed points.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfsdim/cfsdim.hpp"

namespace {

using namespace cfsdim;

enum Exit { kOk = 0, kIo = 1, kValidation = 2, kBudget = 3 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError: return kIo;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::RunTooLong: return kBudget;
    default: return kValidation;
  }
}

struct Options {
  std::string system_path;
  std::string probabilities;
  std::string format = "json";
  std::string out;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  std::uint64_t budget = 10'000'000;

  // subcommand specific
  int gd_depth = 0;
  bool box = false;
  int m_lo = 4, m_hi = 16;
  std::string phi_method = "series";
  std::uint64_t samples = 1'000'000;
  int depth = 0;
  int n_max = 8;
  std::string mode = "cylinders";
  std::uint64_t points = 100'000;
  int width = 512;
  std::string kind = "box";
};

unsigned default_threads() {
  if (const char* env = std::getenv("CFSDIM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// A table for CSV output: header then rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void flatten(const Json& j, const std::string& prefix, Table& t) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, t);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), t);
  } else if (j.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < j.size(); ++i) joined += (i ? ";" : "") + (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
    t.rows.push_back({prefix, joined});
  } else {
    t.rows.push_back({prefix, j.is_string() ? j.get<std::string>() : j.dump()});
  }
}

Table key_value_table(const Json& j) {
  Table t;
  t.header = {"key", "value"};
  flatten(j, "", t);
  return t;
}

void emit(const Options& opt, const Json& result, const Table* table = nullptr) {
  std::ostringstream text;
  if (opt.format == "csv") {
    const Table t = table ? *table : key_value_table(result);
    CsvWriter w(text);
    w.row(t.header);
    for (const auto& r : t.rows) w.row(r);
  } else {
    text << result.dump(2) << '\n';
  }
  if (opt.out.empty()) {
    std::cout << text.str();
  } else {
    write_file(opt.out, text.str());
  }
}

ProbabilitySpec probability_spec(const Options& opt, const SystemDescriptor& d) {
  return opt.probabilities.empty() ? d.probabilities : parse_probability_spec(opt.probabilities);
}

void require_cfs(const SystemDescriptor& d, const std::string& command) {
  if (d.type != "cfs") throw Error(ErrorCode::ShapeMismatch, command + " needs a \"cfs\" system");
}

void require_valid_4c(const FourCornerSystem& sys) {
  const auto c = validate_4c(sys);
  if (!c.separation_ok()) throw Error(ErrorCode::ConditionsNotMet, c.separation_violations.front());
}

Json conditions_json(const FourCornerConditions& c) {
  return {{"separation_ok", c.separation_ok()},
          {"separation_violations", c.separation_violations},
          {"domination_ok", c.domination_ok()},
          {"domination_violations", c.domination_violations}};
}

int cmd_measure_dim(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  Json out;
  out["command"] = "measure-dim";
  if (d.type == "four_corner") {
    require_valid_4c(d.four_corner);
    const FourCornerProb p = resolve_probabilities(d.four_corner, probability_spec(opt, d));
    out["system"] = to_json(d.four_corner);
    out["probabilities"] = p;
    out["report"] = to_json(measure_dimension_4c(d.four_corner, p, opt.tol));
  } else {
    require_valid(d.cfs);
    const ProbVector p = resolve_probabilities(d.cfs, probability_spec(opt, d));
    require_valid(d.cfs, p);
    out["system"] = to_json(d.cfs);
    out["probabilities"] = p.weights();
    out["report"] = to_json(measure_dimension(d.cfs, p, opt.tol));
  }
  emit(opt, out);
  return kOk;
}

int cmd_attractor_dim(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  Json out;
  out["command"] = "attractor-dim";
  if (d.type == "four_corner") {
    out["system"] = to_json(d.four_corner);
    out["report"] = to_json(set_dimension_4c(d.four_corner));
    if (opt.box) {
      BoxCount2DOptions bo;
      bo.points = opt.points;
      bo.seed = opt.seed;
      bo.threads = opt.threads;
      out["box"] = to_json(box_dimension_2d(d.four_corner, opt.m_lo, opt.m_hi, bo));
    }
    emit(opt, out);
    return kOk;
  }
  require_valid(d.cfs);
  const DimensionReport rep = attractor_dimension(d.cfs);
  out["system"] = to_json(d.cfs);
  out["report"] = to_json(rep);
  Table table;
  table.header = {"n", "s_n", "s0_minus_s_n"};
  if (opt.gd_depth > 0) {
    Json rows = Json::array();
    double prev = -1.0;
    bool monotone = true;
    for (int n = 1; n <= opt.gd_depth; ++n) {
      const double s = gd_dimension(d.cfs, n);
      monotone = monotone && s >= prev - 1e-12;
      prev = s;
      rows.push_back({{"n", n}, {"s", s}, {"delta", rep.raw - s}});
      table.rows.push_back({std::to_string(n), CsvWriter::field(s), CsvWriter::field(rep.raw - s)});
    }
    out["graph_directed"] = {{"rows", rows}, {"nondecreasing", monotone}};
  }
  if (opt.box) {
    const ScalingFit fit = box_dimension_1d(d.cfs, opt.m_lo, opt.m_hi, opt.budget);
    out["box"] = to_json(fit);
    out["box_delta"] = fit.slope - rep.dimension;
  }
  emit(opt, out, opt.gd_depth > 0 ? &table : nullptr);
  return kOk;
}

int cmd_phi(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  require_cfs(d, "phi");
  require_valid(d.cfs);
  const ProbVector p = resolve_probabilities(d.cfs, probability_spec(opt, d));
  require_valid(d.cfs, p);
  Json out;
  out["command"] = "phi";
  out["system"] = to_json(d.cfs, p);
  Json results = Json::array();
  const bool all = opt.phi_method == "all";
  if (all || opt.phi_method == "series") results.push_back(to_json(phi_series(d.cfs, p, opt.tol)));
  if (all || opt.phi_method == "monte-carlo") {
    MonteCarloOptions mc;
    mc.samples = opt.samples;
    mc.seed = opt.seed;
    mc.threads = opt.threads;
    results.push_back(to_json(phi_monte_carlo(d.cfs, p, mc)));
  }
  if (all || opt.phi_method == "lower-bound")
    results.push_back({{"value", number(phi_lower_bound(d.cfs, p))}, {"method", "jensen-lower-bound"}});
  out["results"] = results;
  out["params"] = {{"tolerance", opt.tol}, {"seed", opt.seed}, {"samples", opt.samples}};
  emit(opt, out);
  return kOk;
}

int cmd_rw_entropy(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  require_cfs(d, "rw-entropy");
  require_valid(d.cfs);
  const ProbVector p = resolve_probabilities(d.cfs, probability_spec(opt, d));
  require_valid(d.cfs, p);
  const RWEntropyResult closed = rw_entropy_closed(d.cfs, p, opt.tol);
  Json out;
  out["command"] = "rw-entropy";
  out["system"] = to_json(d.cfs, p);
  out["value"] = closed.value;
  out["method"] = closed.method;
  Table table;
  table.header = {"n", "H_n", "increment", "increment_error"};
  if (opt.depth > 0) {
    const RWEntropyResult b = rw_entropy_bruteforce(d.cfs, p, opt.depth, opt.budget);
    Json rows = Json::array();
    for (std::size_t k = 0; k < b.entropies.size(); ++k) {
      Json row = {{"n", k + 1}, {"H_n", b.entropies[k]}};
      std::vector<std::string> cells{std::to_string(k + 1), CsvWriter::field(b.entropies[k]), "", ""};
      if (k > 0) {
        const double inc = b.increments[k - 1];
        row["increment"] = inc;
        row["error"] = inc - closed.value;
        cells[2] = CsvWriter::field(inc);
        cells[3] = CsvWriter::field(inc - closed.value);
      }
      rows.push_back(row);
      table.rows.push_back(cells);
    }
    out["finite_depth"] = rows;
  }
  emit(opt, out, opt.depth > 0 ? &table : nullptr);
  return kOk;
}

int cmd_esc_probe(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  require_cfs(d, "esc-probe");
  require_valid(d.cfs);
  const EscProbe probe = esc_probe(d.cfs, opt.n_max, opt.budget);
  Json out;
  out["command"] = "esc-probe";
  out["system"] = to_json(d.cfs);
  Json rows = Json::array();
  Table table;
  table.header = {"n", "classes", "buckets", "pairs", "min_gap", "implied_b", "status"};
  for (const auto& r : probe.rows) {
    rows.push_back(to_json(r));
    table.rows.push_back({std::to_string(r.depth), std::to_string(r.class_count), std::to_string(r.bucket_count),
                          std::to_string(r.pairs_compared), CsvWriter::field(r.min_gap), CsvWriter::field(r.implied_b),
                          to_string(r.status)});
  }
  out["rows"] = rows;
  out["verdict"] = to_string(probe.verdict);
  out["b_hat"] = number(probe.b_hat);
  emit(opt, out, &table);
  return kOk;
}

int cmd_fourcorner(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  if (d.type != "four_corner") throw Error(ErrorCode::ShapeMismatch, "fourcorner needs a \"four_corner\" system");
  const FourCornerSystem& sys = d.four_corner;
  const FourCornerConditions cond = validate_4c(sys);
  Json out;
  out["command"] = "fourcorner";
  out["system"] = to_json(sys);
  out["conditions"] = conditions_json(cond);
  if (!cond.separation_ok()) {
    emit(opt, out);
    return kValidation;
  }
  const NaturalMeasure nat = natural_p(sys);
  const SuffCheck suff = suff_check(sys);
  out["s"] = nat.s;
  out["natural_p"] = nat.p;
  out["suff"] = {{"value", suff.value}, {"holds", suff.holds}};
  out["set_dimension"] = to_json(set_dimension_4c(sys));
  out["natural_measure_dimension"] = to_json(measure_dimension_4c(sys, nat.p, opt.tol));
  emit(opt, out);
  return kOk;
}

int cmd_render(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  if (d.type != "four_corner") throw Error(ErrorCode::ShapeMismatch, "render needs a \"four_corner\" system");
  require_valid_4c(d.four_corner);
  if (opt.out.empty()) throw Error(ErrorCode::IoError, "render needs --out");
  Json out;
  out["command"] = "render";
  out["mode"] = opt.mode;
  out["path"] = opt.out;
  if (opt.mode == "cylinders") {
    write_file(opt.out, cylinders_svg(d.four_corner, opt.depth, opt.width));
    out["depth"] = opt.depth;
    out["rectangles"] = checked_power(4, opt.depth, std::numeric_limits<std::uint64_t>::max() - 1);
  } else {
    write_file(opt.out, attractor_ppm(d.four_corner, opt.points, opt.seed, opt.width, opt.width));
    out["points"] = opt.points;
    out["seed"] = opt.seed;
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_estimate(const Options& opt) {
  const SystemDescriptor d = load_system(opt.system_path);
  Json out;
  out["command"] = "estimate";
  ScalingFit fit;
  if (d.type == "four_corner") {
    require_valid_4c(d.four_corner);
    BoxCount2DOptions bo;
    bo.points = opt.points;
    bo.seed = opt.seed;
    bo.threads = opt.threads;
    fit = box_dimension_2d(d.four_corner, opt.m_lo, opt.m_hi, bo);
    out["system"] = to_json(d.four_corner);
    out["kind"] = "box-2d";
  } else {
    require_valid(d.cfs);
    out["system"] = to_json(d.cfs);
    if (opt.kind == "entropy") {
      const ProbVector p = resolve_probabilities(d.cfs, probability_spec(opt, d));
      require_valid(d.cfs, p);
      EntropySlopeOptions eo;
      eo.samples = opt.samples;
      eo.seed = opt.seed;
      eo.threads = opt.threads;
      fit = entropy_slope(d.cfs, p, opt.m_lo, opt.m_hi, eo);
      out["probabilities"] = p.weights();
      out["kind"] = "entropy";
    } else {
      fit = box_dimension_1d(d.cfs, opt.m_lo, opt.m_hi, opt.budget);
      out["kind"] = "box-1d";
    }
  }
  out["fit"] = to_json(fit);
  Table table;
  table.header = {"m", out["kind"] == "entropy" ? "entropy_bits" : "count"};
  if (!fit.lower_counts.empty()) table.header.push_back("lower_count");
  for (std::size_t k = 0; k < fit.scales.size(); ++k) {
    table.rows.push_back({std::to_string(fit.scales[k]), CsvWriter::field(fit.counts[k])});
    if (!fit.lower_counts.empty()) table.rows.back().push_back(CsvWriter::field(fit.lower_counts[k]));
  }
  emit(opt, out, &table);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimensions of self-similar systems whose maps share fixed points"};
  app.require_subcommand(1);
  Options opt;
  opt.threads = default_threads();

  const auto common = [&](CLI::App* sub) {
    sub->add_option("system", opt.system_path, "System descriptor (JSON)")->required();
    sub->add_option("--threads", opt.threads, "Worker threads (default: CFSDIM_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Seed for every random stream");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", opt.out, "Write output here instead of stdout");
    sub->add_option("-p,--probabilities", opt.probabilities,
                    "\"uniform\", \"natural\" or a JSON array; overrides the descriptor");
    sub->add_option("--tol", opt.tol, "Truncation tolerance for series")->check(CLI::PositiveNumber);
    sub->add_option("--budget", opt.budget, "Enumeration budget")->check(CLI::PositiveNumber);
  };
  const auto scales = [&](CLI::App* sub) {
    sub->add_option("--m-lo", opt.m_lo, "Coarsest box exponent")->check(CLI::Range(1, 40));
    sub->add_option("--m-hi", opt.m_hi, "Finest box exponent")->check(CLI::Range(2, 40));
  };

  auto* measure = app.add_subcommand("measure-dim", "Dimension of a self-similar measure");
  common(measure);

  auto* attractor = app.add_subcommand("attractor-dim", "Dimension of the attractor");
  common(attractor);
  attractor->add_option("--gd-depth", opt.gd_depth, "Add the graph-directed roots s_1..s_k")->check(CLI::NonNegativeNumber);
  attractor->add_flag("--box", opt.box, "Add a box-counting fit");
  attractor->add_option("--points", opt.points, "Chaos-game points for 2-D box counting")->check(CLI::PositiveNumber);
  scales(attractor);

  auto* phi = app.add_subcommand("phi", "The commutation entropy correction Phi(p)");
  common(phi);
  phi->add_option("--method", opt.phi_method, "Evaluation method")
      ->check(CLI::IsMember({"series", "monte-carlo", "lower-bound", "all"}));
  phi->add_option("--samples", opt.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);

  auto* rw = app.add_subcommand("rw-entropy", "Random-walk entropy h_p + Phi(p)");
  common(rw);
  rw->add_option("--depth", opt.depth, "Also tabulate H_1..H_depth exactly")->check(CLI::NonNegativeNumber);

  auto* esc = app.add_subcommand("esc-probe", "Finite-depth separation probe");
  common(esc);
  esc->add_option("--n-max", opt.n_max, "Largest word length")->check(CLI::Range(2, 64));

  auto* four = app.add_subcommand("fourcorner", "Conditions, natural measure and dimension of a 4-corner set");
  common(four);

  auto* render = app.add_subcommand("render", "Draw a 4-corner set (SVG cylinders or PPM point cloud)");
  common(render);
  render->add_option("--mode", opt.mode, "What to draw")->check(CLI::IsMember({"cylinders", "attractor"}));
  render->add_option("--depth", opt.depth, "Cylinder depth")->check(CLI::Range(0, 10));
  render->add_option("--points", opt.points, "Chaos-game points")->check(CLI::PositiveNumber);
  render->add_option("--size", opt.width, "Image size in pixels")->check(CLI::Range(1, 16384));

  auto* estimate = app.add_subcommand("estimate", "Empirical dimension estimates");
  common(estimate);
  estimate->add_option("--kind", opt.kind, "box (cover or chaos game) or entropy (dyadic entropy slope)")
      ->check(CLI::IsMember({"box", "entropy"}));
  estimate->add_option("--points", opt.points, "Chaos-game points (4-corner systems)")->check(CLI::PositiveNumber);
  estimate->add_option("--samples", opt.samples, "Sampled points for the entropy slope")->check(CLI::PositiveNumber);
  scales(estimate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kIo;
  }

  try {
    if (*measure) return cmd_measure_dim(opt);
    if (*attractor) return cmd_attractor_dim(opt);
    if (*phi) return cmd_phi(opt);
    if (*rw) return cmd_rw_entropy(opt);
    if (*esc) return cmd_esc_probe(opt);
    if (*four) return cmd_fourcorner(opt);
    if (*render) return cmd_render(opt);
    if (*estimate) return cmd_estimate(opt);
  } catch (const Error& e) {
    std::cerr << "cfsdim: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cfsdim: " << e.what() << '\n';
    return kIo;
  }
  return kIo;
}
