#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dioex/dioph.hpp"
#include "dioex/io/config.hpp"
#include "dioex/io/emit.hpp"
#include "dioex/mcfield/estimate.hpp"
#include "dioex/spectral/fit.hpp"
#include "dioex/spectral/structure.hpp"
#include "dioex/spectral/variance.hpp"
#include "dioex/walk/statistics.hpp"
#include "dioex/walk/targeted.hpp"

using namespace dioex;

namespace {

// One command's output: the JSON document and the rows used for CSV.
struct Result {
  std::string kind;
  std::string defaultFormat = "json";
  Json doc;
  Json rows = Json::array();
};

Json big(const BigInt& x) {
  if (x >= std::numeric_limits<std::int64_t>::min() && x <= std::numeric_limits<std::int64_t>::max())
    return x.convert_to<std::int64_t>();
  return x.str();
}

std::string csv_cell(const Json& v) {
  switch (v.type()) {
    case Json::value_t::number_float:
      return format_real(v.get<double>());
    case Json::value_t::number_integer:
      return std::to_string(v.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return std::to_string(v.get<std::uint64_t>());
    case Json::value_t::boolean:
      return v.get<bool>() ? "true" : "false";
    case Json::value_t::string:
      return v.get<std::string>();
    case Json::value_t::array: {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_cell(v[i]);
      return s;
    }
    default:
      return "";
  }
}

std::string render(const Result& r, const std::string& format) {
  if (format == "json") {
    // doubles are printed in shortest round-trip form by the JSON writer
    return r.doc.dump(2) + "\n";
  }
  std::vector<std::string> cols;
  if (!r.rows.empty())
    for (const auto& [k, v] : r.rows[0].items()) cols.push_back(k);
  CsvTable t(r.kind, cols);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells;
    for (const auto& c : cols) cells.push_back(csv_cell(row.at(c)));
    t.add(std::move(cells));
  }
  return t.str();
}

std::vector<std::int64_t> int_list(const std::string& s, const std::string& what) {
  std::vector<std::int64_t> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) throw ParseError(what + " expects comma-separated integers, got '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(what + " is empty");
  return out;
}

struct Context {
  ExperimentConfig cfg;

  Frequencies freqs() const {
    return Frequencies::parse(cfg.str("freqs.omega"), static_cast<int>(cfg.integer("freqs.d")),
                              static_cast<int>(cfg.integer("freqs.precision")));
  }
  RegularPsi psi() const { return RegularPsi(cfg.real("psi.tau"), cfg.real("psi.c"), cfg.real("psi.p")); }
  Json psi_json() const { return {{"tau", cfg.real("psi.tau")}, {"c", cfg.real("psi.c")}, {"p", cfg.real("psi.p")}}; }
  std::size_t budget() const { return static_cast<std::size_t>(cfg.integer("walk.budget_mib")) << 20; }
  WalkConfig walk() const { return WalkConfig::uniform_for(freqs()); }
  std::int64_t qmax_for(double eps) const {
    return static_cast<std::int64_t>(std::ceil(cfg.real("walk.qmax_factor") / eps));
  }
};

Json base_doc(const Context& c, const std::string& kind) {
  Json d = json_document(kind);
  d["omega"] = c.freqs().descriptor();
  return d;
}

void attach_rows(Result& r, const char* key = "rows") { r.doc[key] = r.rows; }

// ---- dioph ----

Result dioph_convergents(const Context& c, int count, int axis, int index) {
  const auto f = c.freqs();
  require(axis >= 1 && axis <= f.d && index >= 1 && index <= f.m, "axis/index out of range");
  Result r{"convergents", "json", base_doc(c, "convergents")};
  int j = 0;
  for (const auto& cv : cf_convergents(f.omega[static_cast<std::size_t>(axis - 1)][static_cast<std::size_t>(index - 1)], count))
    r.rows.push_back({{"index", j++}, {"p", big(cv.p)}, {"q", big(cv.q)}});
  attach_rows(r, "convergents");
  return r;
}

Result dioph_delta(const Context& c, const std::string& qs) {
  const auto f = c.freqs();
  const auto q = int_list(qs, "--q");
  require(static_cast<int>(q.size()) == f.m, "--q needs one entry per frequency on the axis");
  const auto d = delta_q(f.omega[0], q);
  Result r{"delta", "json", base_doc(c, "delta")};
  Json row = {{"q", q}, {"p", d.p}, {"delta", d.delta}, {"exact", d.exact}};
  r.rows.push_back(row);
  for (const auto& [k, v] : row.items()) r.doc[k] = v;
  return r;
}

Result dioph_iset(const Context& c, std::int64_t qmax, bool certify) {
  const auto f = c.freqs();
  const auto psi = c.psi();
  Result r{"iset", "json", base_doc(c, "iset")};
  r.doc["qmax"] = qmax;
  Json sets = Json::array();
  for (double eps : c.cfg.reals("walk.eps")) {
    auto s = i_eps_set(f.omega[0], eps, qmax, certify ? &psi : nullptr);
    Json set = {{"eps", eps}, {"size", s.elements.size()}};
    if (certify) {
      set["psi_inverse"] = *s.psi_inverse_eps;
      set["complete"] = s.complete_for_psi;
      set["min_gap"] = std::isfinite(s.min_gap) ? Json(s.min_gap) : Json(nullptr);
      set["separation_holds"] = s.separation_holds;
    }
    sets.push_back(set);
    for (const auto& e : s.elements)
      r.rows.push_back({{"eps", eps}, {"q", e.q}, {"p", e.p}, {"delta", e.delta}, {"norm", e.norm}});
  }
  r.doc["sets"] = sets;
  if (certify) r.doc["psi"] = c.psi_json();
  attach_rows(r, "elements");
  return r;
}

Result dioph_ba_cert(const Context& c, std::int64_t qmax) {
  const auto f = c.freqs();
  const auto cert = ba_certificate(f.omega[0], c.psi(), qmax);
  Result r{"ba-cert", "json", base_doc(c, "ba-cert")};
  const Json ratio = std::isfinite(cert.worstRatio) ? Json(cert.worstRatio) : Json(nullptr);
  r.doc["psi"] = c.psi_json();
  r.doc["qmax"] = qmax;
  r.doc["holds"] = cert.holds;
  r.doc["worst"] = {{"q", cert.worstQ}, {"ratio", ratio}};
  r.doc["q0"] = cert.q0;
  r.doc["scanned"] = cert.scanned;
  r.rows.push_back({{"holds", cert.holds}, {"worst_q", cert.worstQ}, {"worst_ratio", ratio}, {"q0", cert.q0},
                    {"qmax", qmax}, {"scanned", cert.scanned}});
  return r;
}

Result dioph_witnesses(const Context& c, double cW, int count, std::int64_t qmax) {
  const auto f = c.freqs();
  const auto rep = wa_witnesses(f.omega[0], c.psi(), cW, count, qmax);
  Result r{"witnesses", "json", base_doc(c, "witnesses")};
  r.doc["psi"] = c.psi_json();
  r.doc["qmax"] = qmax;
  r.doc["c_w"] = cW;
  r.doc["shift_index"] = rep.shift_index;
  for (const auto& w : rep.witnesses)
    r.rows.push_back({{"p", w.p}, {"q", w.q}, {"err", w.err}, {"parity", w.parity}, {"shift_index", w.shift_index}});
  attach_rows(r, "witnesses");
  return r;
}

// ---- walk ----

Result walk_dist(const Context& c, int nMax) {
  const auto wc = c.walk();
  const int M = wc.M();
  Result r{"dist", "csv", base_doc(c, "dist")};
  LatticeDistribution last;
  evolve_visit(wc, nMax, c.cfg.real("walk.prune"), [&](const LatticeDistribution& d) {
    if (d.n == nMax) last = d;
  }, c.budget());
  auto entries = last.entries;
  std::sort(entries.begin(), entries.end(), [](const LatticeEntry& a, const LatticeEntry& b) { return a.point < b.point; });
  for (const auto& e : entries) {
    Json row = {{"n", nMax}};
    for (int i = 0; i < M; ++i) row["s" + std::to_string(i + 1)] = e.point[static_cast<std::size_t>(i)];
    row["prob"] = e.prob;
    r.rows.push_back(row);
  }
  r.doc["n"] = nMax;
  r.doc["lost_mass"] = last.lostMass;
  attach_rows(r);
  return r;
}

Result walk_rows(const Context& c, int nMax, bool torus) {
  const char* kind = torus ? "pbar" : "pn";
  Result r{kind, "csv", base_doc(c, kind)};
  for (const auto& row : recurrence_rows(c.walk(), nMax, c.cfg.reals("walk.eps"), torus, c.cfg.real("walk.prune"), c.budget()))
    r.rows.push_back({{"n", row.n}, {"eps", row.eps}, {"K", axis_set_label(row.K)}, {"value_lo", row.lo}, {"value_hi", row.hi}});
  attach_rows(r);
  return r;
}

Result walk_series(const Context& c, int nMax, bool torus, const std::string& mode, bool targeted) {
  const char* kind = torus ? "ibeta" : "jbeta";
  Result r{kind, "csv", base_doc(c, kind)};
  const double beta = c.cfg.real("walk.beta");
  const auto eps = c.cfg.reals("walk.eps");
  const int nEps = static_cast<int>(c.cfg.integer("walk.neps"));
  if (targeted) {
    require(!torus, "the targeted engine evaluates J_beta only");
    for (double e : eps) {
      const auto qmax = c.qmax_for(e);
      auto t = J_beta_targeted(c.walk(), beta, e, nEps, qmax);
      r.rows.push_back({{"beta", beta}, {"eps", e}, {"n_eps", nEps}, {"qmax", qmax}, {"points", t.points},
                        {"lo", t.lo}, {"estimate", t.estimate}, {"hi", t.hi}});
    }
  } else {
    if (mode != "crude" && mode != "envelope") throw ParseError("--mode is crude or envelope");
    RecurrenceOptions o;
    o.beta = beta;
    o.nEps = nEps;
    o.nMax = nMax;
    o.mode = mode == "crude" ? TailMode::Crude : TailMode::Envelope;
    o.prune = c.cfg.real("walk.prune");
    o.memoryBudget = c.budget();
    auto sums = torus ? I_beta_grid(c.walk(), eps, o) : J_beta_grid(c.walk(), eps, o);
    for (std::size_t i = 0; i < eps.size(); ++i)
      r.rows.push_back({{"beta", beta}, {"eps", eps[i]}, {"n_eps", nEps}, {"n_max", nMax}, {"partial", sums[i].partial},
                        {"tail", sums[i].tailBound}, {"mode", tail_mode_name(sums[i].mode)}});
  }
  attach_rows(r);
  return r;
}

// ---- spectral ----

Result variance_cmd(const Context& c, double u) {
  Result r{"variance", "csv", base_doc(c, "variance")};
  const auto Ts = c.cfg.reals("variance.T");
  const int nMax = static_cast<int>(c.cfg.integer("variance.nmax"));
  if (u != 0) {
    for (double T : Ts) {
      auto v = variance_series_level(c.walk(), T, u);
      r.rows.push_back({{"T", T}, {"u", u}, {"partial", v.partial}, {"tail", v.tailBound}, {"low_order", v.lowOrder}});
    }
  } else {
    VarianceOptions o;
    o.nMax = nMax;
    o.prune = c.cfg.real("walk.prune");
    o.memoryBudget = c.budget();
    for (const auto& v : variance_series_multi(c.walk(), Ts, o))
      r.rows.push_back({{"T", v.T}, {"V_lo", v.lo()}, {"V_hi", v.hi()}, {"V_est", v.estimate}, {"n_max", nMax},
                        {"normalization", v.normalization}});
  }
  attach_rows(r);
  return r;
}

Result sfactor_atoms(const Context& c, int nMax, const std::string& window) {
  const auto f = c.freqs();
  const auto w = ExperimentConfig::parse("walk.eps = " + window).reals("walk.eps");
  require(w.size() == 2 && w[0] < w[1], "--window expects lo,hi");
  std::vector<double> lo(static_cast<std::size_t>(f.d), w[0]), hi(static_cast<std::size_t>(f.d), w[1]);
  Result r{"sfactor-atoms", "csv", base_doc(c, "sfactor-atoms")};
  for (const auto& a : structure_factor_atoms(c.walk(), nMax, lo, hi)) {
    Json row;
    for (int k = 0; k < f.d; ++k) row["x" + std::to_string(k + 1)] = a.location[static_cast<std::size_t>(k)];
    row["weight"] = a.weight;
    r.rows.push_back(row);
  }
  r.doc["n_max"] = nMax;
  attach_rows(r, "atoms");
  return r;
}

Result sfactor_ball(const Context& c, int nMax, bool targeted) {
  Result r{"sfactor-ball", "csv", base_doc(c, "sfactor-ball")};
  for (double e : c.cfg.reals("walk.eps")) {
    if (targeted) {
      const auto qmax = c.qmax_for(e);
      auto t = structure_factor_ball_targeted(c.walk(), e, qmax);
      r.rows.push_back({{"eps", e}, {"qmax", qmax}, {"points", t.points}, {"lo", t.lo}, {"estimate", t.estimate}, {"hi", t.hi}});
    } else {
      auto t = structure_factor_ball(c.walk(), e, nMax, c.cfg.real("walk.prune"), c.budget());
      r.rows.push_back({{"eps", e}, {"n_max", nMax}, {"partial", t.partial}, {"tail", t.tailBound}});
    }
  }
  attach_rows(r);
  return r;
}

// ---- mcfield ----

Result mc_cmd(const Context& c, const std::string& lawSpec, int m, int inner, const std::string& volumesPath) {
  const auto Ts = c.cfg.reals("variance.T");
  const auto reps = c.cfg.integer("mc.reps");
  const int grid = static_cast<int>(c.cfg.integer("mc.grid"));
  const auto seed = static_cast<std::uint64_t>(c.cfg.integer("mc.seed"));
  const double u = c.cfg.real("mc.u");
  McOptions o;
  o.threads = static_cast<int>(c.cfg.integer("mc.threads"));
  o.keepVolumes = !volumesPath.empty();
  if (o.keepVolumes && Ts.size() != 1) throw ParseError("--volumes needs a single T");
  Result r{"mc", "json", json_document("mc")};
  std::vector<double> volumes;
  for (double T : Ts) {
    Json row;
    McEstimate e;
    if (lawSpec.empty()) {
      e = variance_mc(c.freqs(), T, reps, grid, seed, u, o);
      r.doc["omega"] = c.freqs().descriptor();
    } else {
      const auto law = FrequencyLaw::parse(lawSpec);
      const int d = static_cast<int>(c.cfg.integer("freqs.d"));
      auto rr = randomized_run(law, d, m, T, reps, seed, grid, u, inner, o);
      e = rr.total;
      row["mean_conditional_variance"] = rr.meanConditionalVariance;
      row["variance_of_conditional_mean"] = rr.varianceOfConditionalMean;
      r.doc["law"] = lawSpec;
      r.doc["d"] = d;
    }
    Json head = {{"T", T}, {"u", u}, {"reps", e.reps}, {"grid", grid}, {"var", e.variance}, {"stderr", e.stderrOfVariance},
                 {"seed", seed}, {"mean", e.mean}, {"max_error_bound", e.maxErrorBound}, {"unreliable", e.unreliable}};
    for (const auto& [k, v] : row.items()) head[k] = v;
    r.rows.push_back(head);
    if (o.keepVolumes) volumes = e.volumes;
  }
  if (r.rows.size() == 1)
    for (const auto& [k, v] : r.rows[0].items()) r.doc[k] = v;
  else
    attach_rows(r, "estimates");
  if (!volumesPath.empty()) {
    CsvTable t("mc-volumes", {"rep", "volume"});
    for (std::size_t i = 0; i < volumes.size(); ++i) t.row(static_cast<std::int64_t>(i), volumes[i]);
    std::ofstream f(volumesPath);
    if (!f) throw ParseError("cannot write '" + volumesPath + "'");
    f << t.str();
  }
  return r;
}

Result fit_cmd(const std::string& input, const std::string& xcol, const std::string& ycol, double minDecades) {
  CsvData data;
  if (input == "-") {
    data = read_csv(std::cin);
  } else {
    std::ifstream f(input);
    if (!f) throw ParseError("cannot read '" + input + "'");
    data = read_csv(f);
  }
  if (data.columns.size() < 2) throw ParseError("fit needs at least two columns");
  const int xi = xcol.empty() ? 0 : data.column(xcol);
  const int yi = ycol.empty() ? 1 : data.column(ycol);
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : data.rows)
    pts.push_back({csv_real(row[static_cast<std::size_t>(xi)]), csv_real(row[static_cast<std::size_t>(yi)])});
  const auto fit = scaling_fit(pts, minDecades);
  Result r{"fit", "json", json_document("fit")};
  Json row = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"points", pts.size()}};
  r.rows.push_back(row);
  for (const auto& [k, v] : row.items()) r.doc[k] = v;
  return r;
}

std::string help_footer() {
  std::string s = "\nConfig keys (file lines `key = value`, '#' comments; flags override):\n";
  for (const auto& k : config_keys()) {
    s += "  " + std::string(k.key) + " = " + (k.fallback[0] ? k.fallback : "\"\"");
    s += "\n      " + std::string(k.help) + "\n";
  }
  s += "\nExit codes: 0 ok, 1 other failure, 2 parse or argument error, 3 precision exhausted, 4 memory budget exceeded.\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dioex: diophantine frequencies, lattice walks and Gaussian excursion variances"};
  app.footer(help_footer());
  app.require_subcommand(1);
  app.fallthrough();

  std::string configPath;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;
  app.add_option("--config", configPath, "config file");
  app.add_option("--set", sets, "override any config key, key=value");
  auto key_flag = [&overrides](CLI::App* a, const std::string& name, const std::string& key, const std::string& help) {
    a->add_option_function<std::string>(name, [&overrides, key](const std::string& v) { overrides.push_back({key, v}); },
                                        help + " [" + key + "]");
  };
  key_flag(&app, "--omega", "freqs.omega", "frequency descriptor (sqrt:N, dec:X, cf:a0,a1,..., liouville:B:D)");
  key_flag(&app, "--d", "freqs.d", "dimension");
  key_flag(&app, "--precision", "freqs.precision", "precision in bits");
  key_flag(&app, "--tau", "psi.tau", "psi exponent");
  key_flag(&app, "--c", "psi.c", "psi constant");
  key_flag(&app, "--p", "psi.p", "psi log exponent");
  key_flag(&app, "--prune", "walk.prune", "pruning threshold");
  key_flag(&app, "--budget-mib", "walk.budget_mib", "memory budget in MiB");
  key_flag(&app, "--seed", "mc.seed", "master seed");
  key_flag(&app, "--threads", "mc.threads", "worker threads");
  key_flag(&app, "--format", "output.format", "csv or json");
  key_flag(&app, "--out", "output.directory", "output directory");

  Context ctx;
  Result result;
  std::function<Result()> run;

  // dioph
  auto* dioph = app.add_subcommand("dioph", "diophantine toolkit")->require_subcommand(1)->fallthrough();
  int count = 10, axis = 1, index = 1;
  std::int64_t qmax = 1000;
  std::string qs;
  double cW = 1.0;
  bool certify = false;
  auto* conv = dioph->add_subcommand("convergents", "continued-fraction convergents");
  conv->add_option("--count", count, "number of convergents");
  conv->add_option("--axis", axis, "axis (1-based)");
  conv->add_option("--index", index, "frequency index on the axis (1-based)");
  conv->callback([&] { run = [&] { return dioph_convergents(ctx, count, axis, index); }; });
  auto* delta = dioph->add_subcommand("delta", "distance of q.omega to the nearest integer");
  delta->add_option("--q", qs, "integer vector q, comma-separated")->required();
  delta->callback([&] { run = [&] { return dioph_delta(ctx, qs); }; });
  auto* iset = dioph->add_subcommand("iset", "the set {q : 0 < delta_q <= eps, |q| <= qmax}");
  key_flag(iset, "--eps", "walk.eps", "eps grid");
  iset->add_option("--qmax", qmax, "search radius");
  iset->add_flag("--certify", certify, "attach the psi completeness and separation checks");
  iset->callback([&] { run = [&] { return dioph_iset(ctx, qmax, certify); }; });
  auto* ba = dioph->add_subcommand("ba-cert", "finite-range badly-approximable certificate");
  ba->add_option("--qmax", qmax, "search radius");
  ba->callback([&] { run = [&] { return dioph_ba_cert(ctx, qmax); }; });
  auto* wit = dioph->add_subcommand("witnesses", "well-approximable witnesses, odd parity first");
  wit->add_option("--cw", cW, "witness constant c_W");
  wit->add_option("--count", count, "number of witnesses");
  wit->add_option("--qmax", qmax, "search radius");
  wit->callback([&] { run = [&] { return dioph_witnesses(ctx, cW, count, qmax); }; });

  // walk
  auto* walk = app.add_subcommand("walk", "lattice walk statistics")->require_subcommand(1)->fallthrough();
  std::string mode = "crude";
  bool targeted = false;
  auto* dist = walk->add_subcommand("dist", "exact distribution of S_n");
  key_flag(dist, "--nmax", "walk.nmax", "step count");
  dist->callback([&] { run = [&] { return walk_dist(ctx, static_cast<int>(ctx.cfg.integer("walk.nmax"))); }; });
  for (bool torus : {true, false}) {
    auto* s = walk->add_subcommand(torus ? "pbar" : "pn", torus ? "torus recurrence rows" : "real-line recurrence rows");
    key_flag(s, "--nmax", "walk.nmax", "step count");
    key_flag(s, "--eps", "walk.eps", "eps grid");
    s->callback([&, torus] { run = [&, torus] { return walk_rows(ctx, static_cast<int>(ctx.cfg.integer("walk.nmax")), torus); }; });
  }
  for (bool torus : {false, true}) {
    auto* s = walk->add_subcommand(torus ? "ibeta" : "jbeta", torus ? "I_beta series" : "J_beta series");
    key_flag(s, "--nmax", "walk.nmax", "series truncation");
    key_flag(s, "--eps", "walk.eps", "eps grid");
    key_flag(s, "--beta", "walk.beta", "beta");
    key_flag(s, "--neps", "walk.neps", "first step");
    s->add_option("--mode", mode, "tail mode: crude or envelope");
    if (!torus) {
      s->add_flag("--targeted", targeted, "large-scale engine over the points 0 < |U| <= eps");
      key_flag(s, "--qmax-factor", "walk.qmax_factor", "targeted search radius factor");
    }
    s->callback([&, torus] {
      run = [&, torus] { return walk_series(ctx, static_cast<int>(ctx.cfg.integer("walk.nmax")), torus, mode, targeted); };
    });
  }

  // variance
  double level = 0.0;
  auto* var = app.add_subcommand("variance", "excursion variance series V(T)")->fallthrough();
  key_flag(var, "--T", "variance.T", "window radii");
  key_flag(var, "--nmax", "variance.nmax", "series truncation");
  var->add_option("--level", level, "nonzero level u: low-order indicator-covariance series");
  var->callback([&] { run = [&] { return variance_cmd(ctx, level); }; });

  // sfactor
  auto* sf = app.add_subcommand("sfactor", "structure factor")->require_subcommand(1)->fallthrough();
  std::string window = "-3,3";
  auto* atoms = sf->add_subcommand("atoms", "atoms of the structure factor in a box");
  key_flag(atoms, "--nmax", "walk.nmax", "largest odd order");
  atoms->add_option("--window", window, "box lo,hi on every axis");
  atoms->callback([&] { run = [&] { return sfactor_atoms(ctx, static_cast<int>(ctx.cfg.integer("walk.nmax")), window); }; });
  auto* ball = sf->add_subcommand("ball", "S(B(0, eps))");
  key_flag(ball, "--nmax", "walk.nmax", "series truncation");
  key_flag(ball, "--eps", "walk.eps", "eps grid");
  ball->add_flag("--targeted", targeted, "large-scale engine over the points 0 < |U| <= eps");
  key_flag(ball, "--qmax-factor", "walk.qmax_factor", "targeted search radius factor");
  ball->callback([&] { run = [&] { return sfactor_ball(ctx, static_cast<int>(ctx.cfg.integer("walk.nmax")), targeted); }; });

  // mc
  std::string law, volumes;
  int lawM = 1, inner = 2;
  auto* mc = app.add_subcommand("mc", "Monte Carlo excursion variance")->fallthrough();
  key_flag(mc, "--T", "variance.T", "window radii");
  key_flag(mc, "--reps", "mc.reps", "replications");
  key_flag(mc, "--grid", "mc.grid", "grid points per unit length");
  key_flag(mc, "--u", "mc.u", "level");
  mc->add_option("--law", law, "random frequencies: fixed:<freqs>, uniform:a,b or tuple:a,b");
  mc->add_option("--m", lawM, "frequencies per axis for --law");
  mc->add_option("--inner", inner, "fields per frequency draw for --law");
  mc->add_option("--volumes", volumes, "write replicate volumes (rep,volume) to this CSV file");
  mc->callback([&] { run = [&] { return mc_cmd(ctx, law, lawM, inner, volumes); }; });

  // fit
  std::string input = "-", xcol, ycol;
  double minDecades = 1.0;
  auto* fit = app.add_subcommand("fit", "log-log scaling fit of a two-column CSV");
  fit->add_option("--input", input, "CSV file, '-' for stdin");
  fit->add_option("--x", xcol, "scale column name (default: first)");
  fit->add_option("--y", ycol, "value column name (default: second)");
  fit->add_option("--min-decades", minDecades, "required span of the scales in decades");
  fit->callback([&] { run = [&] { return fit_cmd(input, xcol, ycol, minDecades); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!configPath.empty()) ctx.cfg = ExperimentConfig::load(configPath);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value");
      ctx.cfg.set(detail::trim_copy(s.substr(0, eq)), detail::trim_copy(s.substr(eq + 1)));
    }
    for (const auto& [k, v] : overrides) ctx.cfg.set(k, v);
    if (!run) throw ParseError("no command given");
    Result r = run();
    std::string format = ctx.cfg.str("output.format");
    if (format.empty()) format = r.defaultFormat;
    if (format != "csv" && format != "json") throw ParseError("--format is csv or json");
    const std::string text = render(r, format);
    const std::string dir = ctx.cfg.str("output.directory");
    if (dir.empty()) {
      std::cout << text;
    } else {
      std::filesystem::create_directories(dir);
      const auto path = std::filesystem::path(dir) / (r.kind + "." + format);
      std::ofstream f(path);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << text;
    }
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return 3;
  } catch (const MemoryBudgetExceeded& e) {
    std::cerr << "memory budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
