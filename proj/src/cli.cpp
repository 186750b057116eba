#include "pinning/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pinning/errors.hpp"
#include "pinning/homogeneous.hpp"
#include "pinning/io.hpp"
#include "pinning/parallel.hpp"
#include "pinning/path.hpp"
#include "pinning/quenched.hpp"
#include "pinning/tilted.hpp"

#ifndef PINNING_VERSION
#define PINNING_VERSION "0.0.0"
#endif

namespace pinning::cli {

using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// parameter access

const std::string& get(const Params& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing option --" + key);
  return it->second;
}

double get_double(const Params& p, const std::string& key) {
  const auto v = parse_grid(get(p, key));
  if (v.size() != 1) throw std::invalid_argument("--" + key + " takes a single value");
  return v[0];
}

long get_long(const Params& p, const std::string& key) {
  const auto v = parse_int_grid(get(p, key));
  if (v.size() != 1) throw std::invalid_argument("--" + key + " takes a single integer");
  return v[0];
}

std::uint64_t get_seed(const Params& p) {
  const std::string& s = get(p, "seed");
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("--seed must be a nonnegative integer");
  }
  if (pos != s.size()) throw std::invalid_argument("--seed must be a nonnegative integer");
  return v;
}

unsigned get_threads(const Params& p) {
  const long t = get_long(p, "threads");
  if (t < 0) throw std::invalid_argument("--threads must be >= 0");
  return static_cast<unsigned>(t);
}

std::vector<double> get_grid(const Params& p, const std::string& key, bool nonnegative = true) {
  auto g = parse_grid(get(p, key));
  if (nonnegative)
    for (double v : g)
      if (!(v >= 0.0)) throw std::invalid_argument("--" + key + " grid entries must be >= 0");
  return g;
}

long positive(long v, const char* what) {
  if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
  return v;
}

// ---------------------------------------------------------------------------
// tables rendered as CSV or as a JSON array of row objects

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<ojson> cells) {
    if (cells.size() != header_.size()) throw SizeError("table row width does not match header");
    rows_.push_back(std::move(cells));
  }

  std::string render(const std::string& format) const {
    if (format == "json") {
      ojson arr = ojson::array();
      for (const auto& r : rows_) {
        ojson o = ojson::object();
        for (std::size_t i = 0; i < header_.size(); ++i) o[header_[i]] = r[i];
        arr.push_back(std::move(o));
      }
      return arr.dump(2) + "\n";
    }
    CsvTable csv(header_);
    for (const auto& r : rows_) {
      std::vector<std::string> cells;
      for (const auto& c : r) cells.push_back(cell_text(c));
      csv.add_row(std::move(cells));
    }
    return csv.str();
  }

 private:
  static std::string cell_text(const ojson& c) {
    if (c.is_number_float()) return format_number(c.get<double>());
    if (c.is_number_integer()) return std::to_string(c.get<long long>());
    if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
    if (c.is_string()) return c.get<std::string>();
    return "nan";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<ojson>> rows_;
};

std::string get_format(const Params& p) {
  const std::string& f = get(p, "format");
  if (f != "csv" && f != "json") throw std::invalid_argument("--format must be csv or json");
  return f;
}

ojson num(double v) { return json_number(v); }

CommandOutput text_output(std::string text) {
  CommandOutput out;
  out.text = std::move(text);
  return out;
}

const char* status_name(BoundValue::Status s) {
  switch (s) {
    case BoundValue::Status::value:
      return "value";
    case BoundValue::Status::out_of_domain:
      return "out_of_domain";
    case BoundValue::Status::error:
      return "error";
  }
  return "error";
}

ojson paired_json(const PairedEstimate& e) {
  return {{"estimate", num(e.estimate)},
          {"stderr", num(e.estimate_stderr)},
          {"prediction", num(e.prediction)},
          {"prediction_stderr", num(e.prediction_stderr)},
          {"diff_stderr", num(e.diff_stderr)},
          {"replicas", e.replicas},
          {"within_3_stderr", e.consistent(3.0)}};
}

ojson dominance_json(const std::string& name, const DominanceReport& r) {
  ojson o = {{"pair", name},
             {"dominates", r.dominates},
             {"single_crossing", r.single_crossing},
             {"max_cdf_violation", num(r.max_cdf_violation)}};
  o["crossing_index"] = r.crossing_index ? ojson(*r.crossing_index) : ojson(nullptr);
  return o;
}

// ---------------------------------------------------------------------------
// command table

struct OptionDef {
  std::string name;
  std::string default_value;
  std::string help;
};

struct CommandDef {
  std::string name;
  std::string description;
  std::vector<OptionDef> options;
  std::function<CommandOutput(const Params&)> fn;
};

const std::vector<OptionDef> kCommon = {
    {"spec", "scaled_rademacher", "disorder law: scaled_rademacher | gaussian_unit | table:v:p,... | JSON"},
    {"seed", "1", "master seed"},
    {"threads", "1", "worker threads (0 = all cores); results do not depend on it"},
};

const std::vector<CommandDef>& commands() {
  static const std::vector<CommandDef> defs = {
      {"curves",
       "critical curves h_c^0, h_ann, m^s and related quantities on a (beta, s) grid",
       {{"beta", "0:0.69:24", "beta grid (list or start:stop:count)"},
        {"s", "0,0.5,1", "disorder amplitude grid"},
        {"format", "csv", "csv | json"}},
       cmd_curves},
      {"free-energy",
       "finite-n quenched and annealed free energies with contact fractions",
       {{"beta", "0.4", "beta grid"},
        {"h", "0,0.1", "h grid"},
        {"s", "0,0.5", "s grid"},
        {"n", "10000", "system size (even)"},
        {"replicas", "20", "disorder replicas per point"},
        {"mode", "free", "free | constrained"},
        {"format", "csv", "csv | json"}},
       cmd_free_energy},
      {"phase-bracket",
       "numerical bracket of the quenched critical point h_c^s(beta)",
       {{"beta", "0.2,0.4,0.6", "beta grid"},
        {"s", "0", "s grid"},
        {"n", "100000", "system size (even)"},
        {"replicas", "1", "disorder replicas"},
        {"threshold", "0.001", "contact-fraction threshold of the detector"},
        {"h-tol", "0.0001", "bisection tolerance in h"},
        {"clamp-eps", "0.001", "half-width of the [hc0, h_ann] sanity band"},
        {"format", "csv", "csv | json"}},
       cmd_phase_bracket},
      {"tilt-audit",
       "constants, inequality margins, energy/entropy estimates and the lower-bound bracket",
       {{"beta", "0.3", "beta grid"},
        {"s", "1", "s grid (<= 1)"},
        {"h", "0.1", "h grid (> 0)"},
        {"n", "100000", "sampled system size"},
        {"replicas", "200", "disorder replicas"},
        {"trunc", "200000", "excursion law horizon T (even, >= n)"},
        {"n0-tail", "0", "target tail for N0 (0 = q(s))"}},
       cmd_tilt_audit},
      {"dominance",
       "stochastic dominance of the excursion laws and coupled contact counts",
       {{"beta", "0.3", "beta"},
        {"s", "1", "s (<= 1)"},
        {"h", "0.1", "h (> 0)"},
        {"n", "10000", "system size of coupled draws"},
        {"replicas", "10000", "coupled draws"},
        {"trunc", "20000", "excursion law horizon T (even, >= n)"}},
       cmd_dominance},
      {"path",
       "exact path observables from the height-resolved recursion",
       {{"beta", "0.69", "beta"},
        {"h", "0", "h"},
        {"s", "0", "s"},
        {"n", "2000", "system size (<= 5000)"},
        {"what", "endpoint", "endpoint | tail | above"},
        {"levels", "0:40:21", "levels L for the tail profile"},
        {"k", "0,5,10", "levels K for the time-above fraction"}},
       cmd_path},
  };
  return defs;
}

const CommandDef& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown command '" + name + "'");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_object() || v.is_array()) return v.dump();
  throw std::invalid_argument("config values must be scalars");
}


}  // namespace

Params default_params(const std::string& command) {
  const CommandDef& def = find_command(command);
  Params p;
  for (const auto& o : kCommon) p[o.name] = o.default_value;
  for (const auto& o : def.options) p[o.name] = o.default_value;
  return p;
}

// ---------------------------------------------------------------------------
// commands

CommandOutput cmd_curves(const Params& p) {
  const auto betas = get_grid(p, "beta");
  const auto ss = get_grid(p, "s");
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  const std::string format = get_format(p);
  std::vector<std::pair<double, double>> pts;
  for (double b : betas)
    for (double s : ss) pts.emplace_back(b, s);
  const auto rows = parallel_map(pts.size(), get_threads(p), [&](std::size_t i) {
    return curve_point(pts[i].first, pts[i].second, spec);
  });
  Table t({"beta", "s", "hc0", "h_ann", "m_s", "q_s", "beta_ann", "h0", "m_s_status"});
  for (const CurvePoint& c : rows) {
    t.add({num(c.beta), num(c.s), num(c.hc0), num(c.h_ann), num(c.m_s.defined() ? c.m_s.value : NAN), num(c.q_s),
           num(c.beta_ann), num(c.h0 ? *c.h0 : NAN), status_name(c.m_s.status)});
  }
  return text_output(t.render(format));
}

CommandOutput cmd_free_energy(const Params& p) {
  const auto betas = get_grid(p, "beta");
  const auto hs = get_grid(p, "h");
  const auto ss = get_grid(p, "s");
  const long n = positive(get_long(p, "n"), "--n");
  if (n % 2 != 0) throw std::invalid_argument("--n must be even");
  const long replicas = positive(get_long(p, "replicas"), "--replicas");
  const std::uint64_t seed = get_seed(p);
  const std::string& mode_name = get(p, "mode");
  if (mode_name != "free" && mode_name != "constrained") throw std::invalid_argument("--mode must be free or constrained");
  const FreeEnergyMode mode = mode_name == "free" ? FreeEnergyMode::free : FreeEnergyMode::constrained;
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  const std::string format = get_format(p);

  std::vector<ModelParams> pts;
  for (double b : betas)
    for (double h : hs)
      for (double s : ss) pts.push_back({b, h, s});
  struct Row {
    FreeEnergyEstimate q;
    double annealed, contacts;
  };
  const auto rows = parallel_map(pts.size(), get_threads(p), [&](std::size_t i) {
    Row r;
    r.q = free_energy_quenched(pts[i], spec, n, replicas, seed, mode);
    r.annealed = free_energy_annealed(pts[i], spec, n, mode);
    r.contacts = mean_contact_fraction(pts[i], spec, n, replicas, seed);
    return r;
  });
  Table t({"beta", "h", "s", "n", "replicas", "mode", "phi_mean", "phi_stderr", "annealed", "contact_fraction"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.add({num(pts[i].beta), num(pts[i].h), num(pts[i].s), n, replicas, mode_name, num(rows[i].q.mean),
           num(rows[i].q.std_err), num(rows[i].annealed), num(rows[i].contacts)});
  }
  return text_output(t.render(format));
}

CommandOutput cmd_phase_bracket(const Params& p) {
  const auto betas = get_grid(p, "beta");
  const auto ss = get_grid(p, "s");
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  const std::string format = get_format(p);
  BracketOptions opt;
  opt.n = positive(get_long(p, "n"), "--n");
  opt.replicas = positive(get_long(p, "replicas"), "--replicas");
  opt.threshold = get_double(p, "threshold");
  opt.h_tol = get_double(p, "h-tol");
  opt.clamp_eps = get_double(p, "clamp-eps");
  opt.seed = get_seed(p);
  if (!(opt.h_tol > 0.0)) throw std::invalid_argument("--h-tol must be > 0");
  if (!(opt.threshold > 0.0)) throw DomainError("threshold must be > 0: the detector is undefined at 0");

  std::vector<std::pair<double, double>> pts;
  for (double b : betas)
    for (double s : ss) pts.emplace_back(b, s);
  const auto rows = parallel_map(pts.size(), get_threads(p), [&](std::size_t i) {
    return bracket_critical_h(pts[i].first, pts[i].second, spec, opt);
  });
  Table t({"beta", "s", "n", "replicas", "threshold", "h_lo", "h_hi", "raw_h_lo", "raw_h_hi", "hc0", "h_ann", "m_s",
           "low_confidence", "clamped", "divergent", "evaluations"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [b, s] = pts[i];
    const CriticalBracket& r = rows[i];
    BoundValue ms;
    try {
      ms = theorem_lower_bound(b, s);
    } catch (const DomainError&) {
      ms = BoundValue::failed();
    }
    t.add({num(b), num(s), opt.n, opt.replicas, num(opt.threshold), num(r.h_lo), num(r.h_hi), num(r.raw_h_lo),
           num(r.raw_h_hi), num(critical_h_hom(b)), num(annealed_critical_h(b, s, spec)),
           num(ms.defined() ? ms.value : NAN), r.low_confidence, r.clamped, r.divergent, r.evaluations});
  }
  return text_output(t.render(format));
}

CommandOutput cmd_tilt_audit(const Params& p) {
  const auto betas = get_grid(p, "beta");
  const auto ss = get_grid(p, "s");
  const auto hs = get_grid(p, "h");
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  TiltRunOptions opt;
  opt.n = positive(get_long(p, "n"), "--n");
  opt.replicas = positive(get_long(p, "replicas"), "--replicas");
  opt.seed = get_seed(p);
  const long trunc = get_long(p, "trunc");
  const double n0_tail = get_double(p, "n0-tail");

  struct Pt {
    double beta, s, h;
  };
  std::vector<Pt> pts;
  for (double b : betas)
    for (double s : ss)
      for (double h : hs) pts.push_back({b, s, h});

  const auto objs = parallel_map(pts.size(), get_threads(p), [&](std::size_t i) {
    const Pt& pt = pts[i];
    const TiltSetup t = make_tilt(pt.beta, pt.s, pt.h, trunc);
    ojson o = ojson::object();
    o["beta"] = num(pt.beta);
    o["s"] = num(pt.s);
    o["h"] = num(pt.h);
    o["alpha"] = num(t.law.alpha);
    o["alpha1"] = num(t.constants.alpha1);
    o["c"] = num(t.constants.c);
    o["sqrt_c"] = num(t.constants.sqrt_c);
    o["alpha_sq"] = num(t.constants.alpha_sq);
    o["mu1"] = num(t.constants.mu1);
    o["p2"] = num(t.law.p2());
    o["normalizer"] = num(t.law.normalizer);
    o["trunc"] = trunc;
    o["trunc_mass"] = num(t.law.trunc_mass());
    ojson margins = ojson::object();
    for (const Margin& m : t.margins.items) margins[m.name] = num(m.margin);
    o["margins"] = margins;
    o["margins_hold"] = t.margins.all_hold();

    const double q = q_shift(pt.beta, pt.s);
    o["q_s"] = num(q);
    o["bracket"] = num(min8_bracket(pt.beta, pt.s, pt.h));
    o["bracket_positive"] = min8_bracket(pt.beta, pt.s, pt.h) > 0.0;
    double h0 = NAN;
    try {
      h0 = h0_of_beta(pt.beta, pt.s);
    } catch (const DomainError&) {
    }
    o["h0"] = num(h0);

    ojson n0 = ojson::object();
    try {
      const BoundLedger b = assemble_min8(pt.beta, pt.s, pt.h, t.law, t.constants, n0_tail);
      n0["status"] = "ok";
      n0["n0"] = b.n0;
      n0["tail_at_n0"] = num(b.tail_at_n0);
      n0["target_tail"] = num(b.target_tail);
    } catch (const TruncationError& e) {
      n0["status"] = "truncation";
      n0["required_trunc"] = e.required_trunc();
      n0["target_tail"] = num(n0_tail > 0.0 ? n0_tail : q);
    } catch (const DomainError&) {
      n0["status"] = "undefined";
    }
    o["n0"] = n0;

    const TiltRunSummary mc = run_tilted({pt.beta, pt.h, pt.s}, spec, t.law, t.constants, opt);
    o["n"] = opt.n;
    o["e1"] = paired_json(mc.e1);
    o["e2"] = paired_json(mc.e2);
    o["contacts_per_step"] = num(mc.contacts_per_step);
    o["contacts_per_step_stderr"] = num(mc.contacts_per_step_stderr);
    return o;
  });

  CommandOutput out;
  ojson root = ojson::object();
  root["spec"] = disorder_spec_to_json(spec, opt.seed);
  root["points"] = ojson::array();
  long truncated = 0;
  for (const auto& o : objs) {
    if (o["n0"]["status"] == "truncation") ++truncated;
    root["points"].push_back(o);
  }
  out.text = root.dump(2) + "\n";
  if (truncated > 0) {
    out.exit_code = kExitTruncation;
    out.message = std::to_string(truncated) + " point(s): N0 tail target not reachable within --trunc";
  }
  return out;
}

CommandOutput cmd_dominance(const Params& p) {
  const double beta = get_double(p, "beta");
  const double s = get_double(p, "s");
  const double h = get_double(p, "h");
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  TiltRunOptions opt;
  opt.n = positive(get_long(p, "n"), "--n");
  opt.replicas = positive(get_long(p, "replicas"), "--replicas");
  opt.seed = get_seed(p);
  opt.threads = get_threads(p);
  const TiltSetup t = make_tilt(beta, s, h, get_long(p, "trunc"));
  const TiltedLaw floor_law = hom_tilted_law(t.law.alpha, kInf, 0.0, t.law.trunc);

  ojson root = ojson::object();
  root["beta"] = num(beta);
  root["s"] = num(s);
  root["h"] = num(h);
  root["alpha"] = num(t.law.alpha);
  root["trunc"] = t.law.trunc;
  root["pairs"] = ojson::array(
      {dominance_json("env_tilted_vs_hom", dominance_check(env_tilted_step(t.law, t.constants, 1.0), t.law.dist)),
       dominance_json("hom_vs_beta0_hinf", dominance_check(t.law.dist, floor_law.dist)),
       dominance_json("hom_vs_itself", dominance_check(t.law.dist, t.law.dist))});
  const OrderingEstimate o = expected_contacts_ordering({beta, h, s}, spec, t.law, t.constants, opt);
  root["ordering"] = {{"n", opt.n},
                      {"draws", o.draws},
                      {"violations", o.violations},
                      {"tilted", num(o.tilted)},
                      {"tilted_stderr", num(o.tilted_stderr)},
                      {"hom", num(o.hom)},
                      {"hom_stderr", num(o.hom_stderr)},
                      {"beta0_hinf", num(o.untilted)},
                      {"beta0_hinf_stderr", num(o.untilted_stderr)}};
  return text_output(root.dump(2) + "\n");
}

CommandOutput cmd_path(const Params& p) {
  const ModelParams mp{get_double(p, "beta"), get_double(p, "h"), get_double(p, "s")};
  const long n = positive(get_long(p, "n"), "--n");
  const DisorderSpec spec = parse_disorder_spec(get(p, "spec"));
  const DisorderField field = mp.s == 0.0 ? constant_disorder(static_cast<std::size_t>(n))
                                          : make_disorder(spec, static_cast<std::size_t>(n), get_seed(p));
  const std::string& what = get(p, "what");
  CommandOutput out;
  if (what == "endpoint") {
    const EndpointLaw law = endpoint_distribution(mp, field, n);
    CsvTable t({"height", "prob"});
    for (long j = -n; j <= n; j += 2) t.add_row({std::to_string(j), format_number(law.at(j))});
    out.text = t.str();
    out.manifest_extra["log_z"] = num(law.log_z);
  } else if (what == "tail") {
    const TailProfile prof = tail_decay_profile(mp, field, n, parse_int_grid(get(p, "levels")));
    CsvTable t({"L", "tail", "log_tail"});
    for (std::size_t i = 0; i < prof.levels.size(); ++i)
      t.add_row({std::to_string(prof.levels[i]), format_number(prof.tails[i]), format_number(prof.log_tails[i])});
    out.text = t.str();
    out.manifest_extra["fit"] = {{"slope", num(prof.slope)},
                                 {"intercept", num(prof.intercept)},
                                 {"points", prof.fitted_points},
                                 {"comparison", "qualitative"}};
  } else if (what == "above") {
    CsvTable t({"k", "fraction"});
    for (long k : parse_int_grid(get(p, "k")))
      t.add_row({std::to_string(k), format_number(above_level_fraction(mp, field, n, k))});
    out.text = t.str();
  } else {
    throw std::invalid_argument("--what must be endpoint, tail or above");
  }
  return out;
}

// ---------------------------------------------------------------------------
// front end

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for the disordered pinning/wetting model"};
  app.set_version_flag("--version", PINNING_VERSION);
  app.require_subcommand(1);
  // -h would collide with the --h option
  app.set_help_flag("--help", "print help and exit");

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> given;
    std::map<std::string, CLI::Option*> opts;
    std::string out_path, manifest_path, config_path;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const CommandDef& def : commands()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(def.name, def.description);
    b->sub->set_help_flag("--help", "print help and exit");
    auto add = [&](const OptionDef& o) {
      b->opts[o.name] = b->sub->add_option("--" + o.name, b->given[o.name], o.help + " [" + o.default_value + "]");
    };
    for (const auto& o : kCommon) add(o);
    for (const auto& o : def.options) add(o);
    b->sub->add_option("--out", b->out_path, "output file (default stdout)");
    b->sub->add_option("--manifest", b->manifest_path, "write a run manifest JSON here");
    b->sub->add_option("--config", b->config_path, "JSON file of option values, or a manifest to replay");
    bound.push_back(std::move(b));
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  for (std::size_t ci = 0; ci < bound.size(); ++ci) {
    Bound& b = *bound[ci];
    if (!b.sub->parsed()) continue;
    const CommandDef& def = commands()[ci];
    try {
      Params params = default_params(def.name);
      if (!b.config_path.empty()) {
        std::ifstream in(b.config_path);
        if (!in) throw std::invalid_argument("cannot read config " + b.config_path);
        const nlohmann::json cfg = nlohmann::json::parse(in);
        const nlohmann::json* values = &cfg;
        if (cfg.contains("params")) {
          if (cfg.contains("command") && cfg.at("command").get<std::string>() != def.name)
            throw std::invalid_argument("manifest was written by '" + cfg.at("command").get<std::string>() + "'");
          values = &cfg.at("params");
        }
        for (const auto& [key, v] : values->items()) {
          if (!params.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
          params[key] = json_scalar_to_string(v);
        }
      }
      for (const auto& [name, opt] : b.opts)
        if (opt->count() > 0) params[name] = b.given[name];

      const auto t0 = std::chrono::steady_clock::now();
      const std::string started = utc_now();
      CommandOutput result = def.fn(params);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      if (b.out_path.empty() || b.out_path == "-") {
        out << result.text;
      } else {
        std::ofstream f(b.out_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + b.out_path);
        f << result.text;
      }
      if (!b.manifest_path.empty()) {
        ojson m = ojson::object();
        m["tool"] = "pinning_lab";
        m["version"] = PINNING_VERSION;
        m["command"] = def.name;
        ojson pj = ojson::object();
        for (const auto& [k, v] : params) pj[k] = v;
        m["params"] = pj;
        m["seed"] = get_seed(params);
        if (params.count("trunc")) m["trunc"] = params.at("trunc");
        m["started_utc"] = started;
        m["wall_seconds"] = wall;
        m["output"] = {{"path", b.out_path.empty() ? "-" : b.out_path},
                       {"bytes", result.text.size()},
                       {"fnv1a64", hex64(fnv1a64(result.text))}};
        for (const auto& [k, v] : result.manifest_extra.items()) m[k] = v;
        std::ofstream f(b.manifest_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + b.manifest_path);
        f << m.dump(2) << "\n";
      }
      if (!result.message.empty()) err << def.name << ": " << result.message << "\n";
      return result.exit_code;
    } catch (const TruncationError& e) {
      err << def.name << ": " << e.what() << " (required horizon " << e.required_trunc() << ")\n";
      return kExitTruncation;
    } catch (const DomainError& e) {
      err << def.name << ": " << e.what() << "\n";
      return kExitDomain;
    } catch (const SizeError& e) {
      err << def.name << ": " << e.what() << "\n";
      return kExitDomain;
    } catch (const std::invalid_argument& e) {
      err << def.name << ": " << e.what() << "\n";
      return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
      err << def.name << ": " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}

}  // namespace pinning::cli
