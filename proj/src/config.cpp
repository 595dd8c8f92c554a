#include "frontlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;
using Document = std::map<std::string, Section>;

const std::set<std::string> kSections{"model", "kernels", "grid",   "time",  "initial", "fronts",
                                      "spectral", "assumptions", "bounds", "sweep", "run"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ValidationError, key + ": " + what);
}

Document tokenize(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') parse_error(line, "unterminated section header");
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (!kSections.count(section)) parse_error(line, "unknown section [" + section + "]");
      doc[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) parse_error(line, "expected 'key = value'");
    if (section.empty()) parse_error(line, "key outside of any section");
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) parse_error(line, "empty key");
    if (value.empty()) parse_error(line, "empty value for '" + key + "'");
    auto& sec = doc[section];
    if (sec.count(key)) parse_error(line, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = {value, line, false};
  }
  return doc;
}

class Reader {
 public:
  explicit Reader(Document doc) : doc_(std::move(doc)) {}

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = doc_.find(section);
    if (s == doc_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return to_number(e->value, name(section, key), e->line);
  }

  std::optional<std::vector<double>> list(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    std::istringstream in(e->value);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_number(trim(item), name(section, key), e->line));
    return out;
  }

  std::optional<bool> flag(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const std::string v = lower(e->value);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    parse_error(e->line, name(section, key) + " expects true or false");
  }

  /// Keys of a section not yet consumed, in file order.
  std::vector<std::pair<std::string, Entry>> remaining(const std::string& section) {
    std::vector<std::pair<std::string, Entry>> out;
    auto s = doc_.find(section);
    if (s == doc_.end()) return out;
    for (auto& [k, e] : s->second) {
      if (!e.used) out.emplace_back(k, e);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second.line < b.second.line; });
    return out;
  }

  void mark_used(const std::string& section, const std::string& key) { find(section, key); }

  void reject_unused() {
    const Entry* first = nullptr;
    std::string where;
    for (auto& [sec, entries] : doc_) {
      for (auto& [key, e] : entries) {
        if (!e.used && (!first || e.line < first->line)) {
          first = &e;
          where = name(sec, key);
        }
      }
    }
    if (first) invalid(where, "unknown key (line " + std::to_string(first->line) + ")");
  }

  static std::string name(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
  }

 private:
  static double to_number(const std::string& s, const std::string& key, int line) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      parse_error(line, key + " expects a number, got '" + s + "'");
    }
  }

  Document doc_;
};

std::size_t to_count(double v, const std::string& key) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) invalid(key, "expects a nonnegative integer");
  return static_cast<std::size_t>(v);
}

void require_positive(double v, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(key, "must be positive");
}

}  // namespace

KernelSpec parse_kernel_spec(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    throw Error(ErrorKind::ParseError, "kernel '" + s + "' must look like family(params)");
  }
  KernelSpec spec;
  spec.text = s;
  spec.family = kernel_family_from_string(lower(trim(s.substr(0, open))));
  std::istringstream in(s.substr(open + 1, s.size() - open - 2));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (spec.family == KernelFamily::Tabulated) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorKind::ParseError, "tabulated kernel points are written x:k, got '" + item + "'");
      }
      spec.params.push_back(std::stod(item.substr(0, colon)));
      spec.params.push_back(std::stod(item.substr(colon + 1)));
    } else {
      spec.params.push_back(std::stod(item));
    }
  }
  return spec;
}

ReactionModel ExperimentConfig::make_model() const {
  return builtin_model(model_name, model_params, diffusion);
}

Dispersal ExperimentConfig::make_dispersal() const {
  if (mode == DispersalMode::Laplacian) return Dispersal::laplacian();
  std::vector<Kernel> ks;
  for (const auto& k : kernels) ks.push_back(make_kernel(k.family, k.params));
  return Dispersal::nonlocal(std::move(ks));
}

Grid ExperimentConfig::make_grid() const { return Grid::make(half_extent, dx); }

RunSettings ExperimentConfig::run_settings() const {
  RunSettings s;
  s.grid = make_grid();
  s.t_final = t_final;
  s.dt = dt;
  s.dt_accuracy = dt_accuracy;
  s.tail_tol = tail_tol;
  s.engine = engine;
  s.snapshot_interval = snapshot_interval;
  s.trace_interval = trace_interval;
  if (theta) s.thetas = {*theta};
  s.strict = strict;
  return s;
}

std::vector<double> ExperimentConfig::decay_rates() const {
  const double inf = std::numeric_limits<double>::infinity();
  if (const auto* e = std::get_if<ExponentialDecay>(&initial.profile)) return e->rates;
  if (const auto* h = std::get_if<HypothesisH>(&initial.profile)) {
    std::vector<double> rates(components, inf);
    rates[h->j0] = h->lambda0;
    return rates;
  }
  return std::vector<double>(std::get<CompactData>(initial.profile).heights.size(), inf);
}

std::optional<double> ExperimentConfig::smallest_rate() const {
  const auto rates = decay_rates();
  const double r = *std::min_element(rates.begin(), rates.end());
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

ExperimentConfig ExperimentConfig::with_smallest_rate(double lambda0) const {
  ExperimentConfig copy = *this;
  if (auto* e = std::get_if<ExponentialDecay>(&copy.initial.profile)) {
    const auto it = std::min_element(e->rates.begin(), e->rates.end());
    *it = lambda0;
  } else if (auto* h = std::get_if<HypothesisH>(&copy.initial.profile)) {
    h->lambda0 = lambda0;
  } else {
    invalid("[initial] kind", "a decay-rate sweep needs exponentially decaying initial data");
  }
  return copy;
}

nlohmann::json ExperimentConfig::to_json() const {
  using nlohmann::json;
  json j;
  json model{{"name", model_name},
             {"dispersal", mode == DispersalMode::Laplacian ? "laplacian" : "nonlocal"}};
  for (const auto& [k, v] : model_params) model["params"][k] = v;
  if (!diffusion.empty()) model["diffusion"] = diffusion;
  j["model"] = model;
  json ks = json::array();
  for (const auto& k : kernels) ks.push_back(k.text);
  j["kernels"] = ks;
  j["grid"] = {{"half_extent", half_extent}, {"dx", dx}};
  j["time"] = {{"dt", dt ? json(*dt) : json("auto")},
               {"dt_accuracy", dt_accuracy},
               {"t_final", t_final},
               {"snapshot_interval", snapshot_interval},
               {"trace_interval", trace_interval},
               {"tail_tol", tail_tol}};
  json init;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExponentialDecay>) {
          init = {{"kind", "exponential"}, {"rates", p.rates}, {"amplitudes", p.amplitudes}};
        } else if constexpr (std::is_same_v<T, HypothesisH>) {
          init = {{"kind", "hypothesis_h"},   {"component", p.j0 + 1},
                  {"lambda0", p.lambda0},      {"amplitude", p.amplitude},
                  {"others_height", p.others_height}, {"others_radius", p.others_radius}};
        } else {
          init = {{"kind", "compact"}, {"radius", p.radius}, {"heights", p.heights}};
        }
      },
      initial.profile);
  init["clamp"] = initial.clamp;
  j["initial"] = init;
  j["fronts"] = {{"theta", theta ? json(*theta) : json("default")},
                 {"window_fraction", window_fraction},
                 {"rtol", rtol}};
  if (fit_t_lo) j["fronts"]["t_lo"] = *fit_t_lo;
  if (fit_t_hi) j["fronts"]["t_hi"] = *fit_t_hi;
  j["spectral"] = {{"tol", search.tol}, {"samples", search.samples}};
  if (search.lo) j["spectral"]["lambda_lo"] = *search.lo;
  if (search.hi) j["spectral"]["lambda_hi"] = *search.hi;
  j["assumptions"] = {{"samples", samples}};
  if (q0) j["assumptions"]["q0"] = *q0;
  if (delta0) j["assumptions"]["delta0"] = *delta0;
  if (M) j["assumptions"]["M"] = *M;
  j["bounds"] = {{"y0", y0}, {"slack", slack}, {"residual_times", residual_times}};
  if (bounds_lambda) j["bounds"]["lambda"] = *bounds_lambda;
  if (kink_slack) j["bounds"]["kink_slack"] = *kink_slack;
  j["sweep"] = {{"lambda0", sweep_lambdas}};
  j["run"] = {{"engine", to_string(engine)},
              {"strict", strict},
              {"jobs", jobs},
              {"seed", seed},
              {"snapshot_format", binary_snapshots ? "binary" : "csv"}};
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  Reader r(tokenize(text));
  ExperimentConfig c;

  // [model]
  const auto name = r.text("model", "name");
  if (!name) invalid("[model] name", "required");
  c.model_name = *name;
  if (auto d = r.list("model", "diffusion")) c.diffusion = *d;
  if (auto mode = r.text("model", "dispersal")) {
    const std::string m = lower(*mode);
    if (m == "nonlocal") c.mode = DispersalMode::Nonlocal;
    else if (m == "laplacian") c.mode = DispersalMode::Laplacian;
    else invalid("[model] dispersal", "expects nonlocal or laplacian");
  }
  for (const auto& [key, entry] : r.remaining("model")) {
    r.mark_used("model", key);
    c.model_params[key] = *r.number("model", key);
  }
  ReactionModel model = [&] {
    try {
      return c.make_model();
    } catch (const Error& e) {
      invalid("[model]", e.what());
    }
  }();
  const std::size_t m = model.size();
  c.components = m;

  // [kernels]
  if (c.mode == DispersalMode::Nonlocal) {
    std::vector<std::optional<KernelSpec>> specs(m);
    auto parse_spec = [&](const std::string& key, const std::string& value) {
      try {
        return parse_kernel_spec(value);
      } catch (const Error& e) {
        invalid("[kernels] " + key, e.what());
      } catch (const std::exception&) {
        invalid("[kernels] " + key, "malformed kernel parameters");
      }
    };
    if (auto all = r.text("kernels", "all")) {
      const KernelSpec spec = parse_spec("all", *all);
      for (auto& s : specs) s = spec;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const std::string key = "k" + std::to_string(j + 1);
      if (auto t = r.text("kernels", key)) specs[j] = parse_spec(key, *t);
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!specs[j]) invalid("[kernels] k" + std::to_string(j + 1), "no kernel for this component");
      try {
        (void)make_kernel(specs[j]->family, specs[j]->params);
      } catch (const Error& e) {
        invalid("[kernels] k" + std::to_string(j + 1), e.what());
      }
      c.kernels.push_back(*specs[j]);
    }
  }

  // [grid]
  if (auto v = r.number("grid", "half_extent")) c.half_extent = *v;
  if (auto v = r.number("grid", "dx")) c.dx = *v;
  require_positive(c.half_extent, "[grid] half_extent");
  require_positive(c.dx, "[grid] dx");
  try {
    (void)c.make_grid();
  } catch (const Error& e) {
    invalid("[grid] dx", e.what());
  }

  // [time]
  if (auto v = r.text("time", "dt"); v && lower(*v) != "auto") c.dt = *r.number("time", "dt");
  if (auto v = r.number("time", "accuracy")) c.dt_accuracy = *v;
  if (auto v = r.number("time", "t_final")) c.t_final = *v;
  if (auto v = r.number("time", "snapshot_interval")) c.snapshot_interval = *v;
  if (auto v = r.number("time", "trace_interval")) c.trace_interval = *v;
  if (auto v = r.number("time", "tail_tol")) c.tail_tol = *v;
  require_positive(c.dt_accuracy, "[time] accuracy");
  require_positive(c.t_final, "[time] t_final");
  require_positive(c.tail_tol, "[time] tail_tol");
  if (c.snapshot_interval < 0.0) invalid("[time] snapshot_interval", "must be nonnegative");
  if (c.trace_interval < 0.0) invalid("[time] trace_interval", "must be nonnegative");
  if (c.dt) {
    require_positive(*c.dt, "[time] dt");
    const double bound = dt_max(model, c.mode, c.dx);
    if (*c.dt > bound) {
      std::ostringstream msg;
      msg << "dt = " << *c.dt << " exceeds the monotone-scheme bound dt_max = " << bound
          << " (0.9 / max_j (d_j + Lip_j)";
      if (c.mode == DispersalMode::Laplacian) msg << ", with the Laplacian stability limits";
      msg << ")";
      invalid("[time] dt", msg.str());
    }
  }

  // [initial]
  const std::string kind = lower(r.text("initial", "kind").value_or("exponential"));
  if (auto v = r.flag("initial", "clamp")) c.initial.clamp = *v;
  if (kind == "exponential") {
    ExponentialDecay e;
    const auto rates = r.list("initial", "rates");
    if (!rates) invalid("[initial] rates", "required for exponential data");
    e.rates = *rates;
    e.amplitudes = r.list("initial", "amplitudes").value_or(std::vector<double>(m, 1.0));
    if (e.rates.size() != m) {
      invalid("[initial] rates", "has " + std::to_string(e.rates.size()) + " entries, the model has " +
                                     std::to_string(m) + " components");
    }
    if (e.amplitudes.size() != m) {
      invalid("[initial] amplitudes", "has " + std::to_string(e.amplitudes.size()) +
                                          " entries, the model has " + std::to_string(m) + " components");
    }
    for (double v : e.rates) require_positive(v, "[initial] rates");
    for (double v : e.amplitudes) require_positive(v, "[initial] amplitudes");
    c.initial.profile = e;
  } else if (kind == "hypothesis_h") {
    HypothesisH h;
    const double comp = r.number("initial", "component").value_or(1.0);
    const std::size_t j0 = to_count(comp, "[initial] component");
    if (j0 < 1 || j0 > m) invalid("[initial] component", "must lie in 1.." + std::to_string(m));
    h.j0 = j0 - 1;
    const auto l0 = r.number("initial", "lambda0");
    if (!l0) invalid("[initial] lambda0", "required for hypothesis_h data");
    h.lambda0 = *l0;
    h.amplitude = r.number("initial", "amplitude").value_or(1.0);
    h.others_height = r.number("initial", "others_height").value_or(0.0);
    h.others_radius = r.number("initial", "others_radius").value_or(0.0);
    require_positive(h.lambda0, "[initial] lambda0");
    require_positive(h.amplitude, "[initial] amplitude");
    if (h.others_height < 0.0) invalid("[initial] others_height", "must be nonnegative");
    if (h.others_radius < 0.0) invalid("[initial] others_radius", "must be nonnegative");
    c.initial.profile = h;
  } else if (kind == "compact") {
    CompactData cd;
    cd.radius = r.number("initial", "radius").value_or(5.0);
    cd.heights = r.list("initial", "heights").value_or(model.equilibrium());
    if (cd.heights.size() != m) {
      invalid("[initial] heights", "has " + std::to_string(cd.heights.size()) +
                                       " entries, the model has " + std::to_string(m) + " components");
    }
    for (double v : cd.heights) {
      if (v < 0.0) invalid("[initial] heights", "must be nonnegative");
    }
    if (cd.radius < 0.0) invalid("[initial] radius", "must be nonnegative");
    c.initial.profile = cd;
  } else {
    invalid("[initial] kind", "expects exponential, hypothesis_h or compact");
  }

  // [fronts]
  c.theta = r.number("fronts", "theta");
  if (auto v = r.number("fronts", "window_fraction")) c.window_fraction = *v;
  c.fit_t_lo = r.number("fronts", "t_lo");
  c.fit_t_hi = r.number("fronts", "t_hi");
  if (auto v = r.number("fronts", "rtol")) c.rtol = *v;
  if (c.theta) {
    const auto& p = model.equilibrium();
    if (!(*c.theta > 0.0 && *c.theta < *std::min_element(p.begin(), p.end()))) {
      invalid("[fronts] theta", "must lie strictly between 0 and min p_j");
    }
  }
  if (!(c.window_fraction > 0.0 && c.window_fraction <= 1.0)) {
    invalid("[fronts] window_fraction", "must lie in (0, 1]");
  }
  if (c.fit_t_lo.has_value() != c.fit_t_hi.has_value()) {
    invalid(c.fit_t_lo ? "[fronts] t_hi" : "[fronts] t_lo", "t_lo and t_hi must be given together");
  }
  if (c.fit_t_lo && !(*c.fit_t_hi > *c.fit_t_lo)) invalid("[fronts] t_hi", "must exceed t_lo");
  require_positive(c.rtol, "[fronts] rtol");

  // [spectral]
  c.search.lo = r.number("spectral", "lambda_lo");
  c.search.hi = r.number("spectral", "lambda_hi");
  if (auto v = r.number("spectral", "tol")) c.search.tol = *v;
  if (auto v = r.number("spectral", "samples")) c.search.samples = to_count(*v, "[spectral] samples");
  if (c.search.lo) require_positive(*c.search.lo, "[spectral] lambda_lo");
  if (c.search.hi) require_positive(*c.search.hi, "[spectral] lambda_hi");
  if (c.search.lo && c.search.hi && !(*c.search.hi > *c.search.lo)) {
    invalid("[spectral] lambda_hi", "must exceed lambda_lo");
  }
  require_positive(c.search.tol, "[spectral] tol");
  if (c.search.samples < 3) invalid("[spectral] samples", "needs at least 3");

  // [assumptions]
  if (auto v = r.number("assumptions", "samples")) c.samples = to_count(*v, "[assumptions] samples");
  c.q0 = r.number("assumptions", "q0");
  c.delta0 = r.number("assumptions", "delta0");
  c.M = r.number("assumptions", "m");
  if (c.q0) require_positive(*c.q0, "[assumptions] q0");
  if (c.delta0) require_positive(*c.delta0, "[assumptions] delta0");
  if (c.M) require_positive(*c.M, "[assumptions] m");
  if (c.samples == 0) invalid("[assumptions] samples", "must be positive");

  // [bounds]
  c.bounds_lambda = r.number("bounds", "lambda");
  if (auto v = r.number("bounds", "y0")) c.y0 = *v;
  if (auto v = r.number("bounds", "slack")) c.slack = *v;
  c.kink_slack = r.number("bounds", "kink_slack");
  if (auto v = r.list("bounds", "residual_times")) c.residual_times = *v;
  if (c.bounds_lambda) require_positive(*c.bounds_lambda, "[bounds] lambda");
  require_positive(c.y0, "[bounds] y0");
  if (!(c.slack >= 0.0)) invalid("[bounds] slack", "must be nonnegative");
  if (c.kink_slack && !(*c.kink_slack >= 0.0)) invalid("[bounds] kink_slack", "must be nonnegative");
  for (double t : c.residual_times) {
    if (!(t >= 0.0)) invalid("[bounds] residual_times", "must be nonnegative");
  }

  // [sweep]
  if (auto v = r.list("sweep", "lambda0")) c.sweep_lambdas = *v;
  for (double v : c.sweep_lambdas) require_positive(v, "[sweep] lambda0");

  // [run]
  if (auto v = r.text("run", "engine")) {
    try {
      c.engine = engine_from_string(lower(*v));
    } catch (const Error& e) {
      invalid("[run] engine", e.what());
    }
  }
  if (auto v = r.flag("run", "strict")) c.strict = *v;
  if (auto v = r.number("run", "jobs")) c.jobs = std::max<std::size_t>(1, to_count(*v, "[run] jobs"));
  if (auto v = r.number("run", "seed")) c.seed = to_count(*v, "[run] seed");
  if (auto v = r.text("run", "snapshot_format")) {
    const std::string f = lower(*v);
    if (f != "csv" && f != "binary") invalid("[run] snapshot_format", "expects csv or binary");
    c.binary_snapshots = f == "binary";
  }

  r.reject_unused();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace frontlab
