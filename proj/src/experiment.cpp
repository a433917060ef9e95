#include "fgmtail/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fgmtail/errors.hpp"
#include "fgmtail/montecarlo.hpp"
#include "fgmtail/tail_math.hpp"

namespace fgmtail {

namespace {

const std::vector<std::pair<std::string, ExperimentKind>>& kind_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names{
      {"table1", ExperimentKind::kTable1}, {"table2", ExperimentKind::kTable2},
      {"table3", ExperimentKind::kTable3}, {"table4", ExperimentKind::kTable4},
      {"table5", ExperimentKind::kTable5}, {"table6", ExperimentKind::kTable6},
      {"fig_ig", ExperimentKind::kFigIg},  {"fig_pareto", ExperimentKind::kFigPareto},
      {"custom", ExperimentKind::kCustom}};
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  auto parse_plain = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + text + "' is not a number");
    }
    if (used != t.size() || !std::isfinite(v)) {
      throw ConfigError("config key '" + key + "': '" + text + "' is not a finite number");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double den = parse_plain(trim(text.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("config key '" + key + "': division by zero in '" + text + "'");
    return parse_plain(trim(text.substr(0, slash))) / den;
  }
  return parse_plain(text);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) {
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list entry");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_number(key, parts[0]));
    } else if (parts.size() == 3) {
      const double a = parse_number(key, parts[0]);
      const double b = parse_number(key, parts[1]);
      const double step = parse_number(key, parts[2]);
      if (!(step > 0.0) || b < a) throw ConfigError("config key '" + key + "': range needs start <= stop and step > 0");
      const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
      if (count > 100000) throw ConfigError("config key '" + key + "': range has too many points");
      for (long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    } else {
      throw ConfigError("config key '" + key + "': '" + item + "' is neither a number nor start:stop:step");
    }
  }
  return out;
}

std::int64_t parse_integer(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (std::floor(v) != v || std::abs(v) > 9e15) throw ConfigError("config key '" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::uint64_t parse_seed(const std::string& value) {
  const std::string t = trim(value);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("config key 'seed' must be a nonnegative integer");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("config key 'seed' does not fit in 64 bits");
  }
}

const std::vector<double> kTableXs{2.0, 2.1, 2.2, 2.3, 2.4};
const std::vector<double> kTableQs{0.985, 0.987, 0.989, 0.991, 0.993};
const std::vector<double> kThetaGrid{-1.0, -0.5, 0.0, 0.5, 1.0};
const std::vector<double> kBetaGrid{1.0, 1.5, 2.0};

// RFC 4180 quoting; margin labels contain commas
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Variant {
  std::string label;
  Margin f;
  Margin g;
  double alpha_or_gamma;
};

std::vector<Variant> variants(const ExperimentConfig& cfg) {
  std::vector<Variant> out;
  if (cfg.family == MarginFamily::kInverseGaussian) {
    const Margin f = Margin::inverse_gaussian(cfg.mu, cfg.nu);
    for (const auto& [mu, nu] : cfg.g_params) {
      const Margin g = Margin::inverse_gaussian(mu, nu);
      out.push_back({"F=" + f.label() + ";G=" + g.label(), f, g, f.convolution_gamma()});
    }
  } else {
    for (double alpha : cfg.alphas) {
      const Margin m = Margin::shifted_pareto(alpha);
      out.push_back({"F=G=" + m.label(), m, m, alpha});
    }
  }
  return out;
}

std::vector<std::pair<double, std::optional<double>>> thresholds(const ExperimentConfig& cfg, const Margin& f) {
  std::vector<std::pair<double, std::optional<double>>> out;
  if (!cfg.qs.empty()) {
    for (double q : cfg.qs) out.emplace_back(f.quantile(q), q);
  } else {
    for (double x : cfg.xs) out.emplace_back(x, std::nullopt);
  }
  return out;
}

std::optional<double> asymptote(const ExperimentConfig& cfg, const Variant& v, double theta, double beta, double x) {
  if (beta == 0.0) return std::nullopt;
  return asym_rho({x, x, beta, cfg.zeta, cfg.k, cfg.n}, v.f, v.g, theta);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kind_names())
    if (k == kind) return name;
  return "custom";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [n, k] : kind_names())
    if (n == name) return k;
  throw ConfigError("unknown experiment '" + name +
                    "' (expected table1..table6, fig_ig, fig_pareto or custom)");
}

ExperimentConfig preset(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kTable1:
      c.thetas = {0.5};
      c.betas = kBetaGrid;
      c.zeta = 1.0 / 3.0;
      c.xs = kTableXs;
      break;
    case ExperimentKind::kTable2:
      c.thetas = kThetaGrid;
      c.betas = {2.0};
      c.zeta = 1.0 / 3.0;
      c.xs = kTableXs;
      break;
    case ExperimentKind::kTable3:
      c.g_params = {{1.0, 1.0}, {1.2, 1.44}, {1.4, 1.96}};
      c.thetas = {0.5};
      c.betas = {2.0};
      c.zeta = 1.0 / 3.0;
      c.xs = kTableXs;
      break;
    case ExperimentKind::kTable4:
      c.family = MarginFamily::kPareto;
      c.alphas = {2.8};
      c.thetas = {0.5};
      c.betas = kBetaGrid;
      c.zeta = 0.0;
      c.qs = kTableQs;
      break;
    case ExperimentKind::kTable5:
      c.family = MarginFamily::kPareto;
      c.alphas = {2.8};
      c.thetas = kThetaGrid;
      c.betas = {2.0};
      c.zeta = 0.0;
      c.qs = kTableQs;
      break;
    case ExperimentKind::kTable6:
      c.family = MarginFamily::kPareto;
      c.alphas = {2.5, 3.0, 3.5};
      c.thetas = {0.5};
      c.betas = {2.0};
      c.zeta = 0.0;
      c.qs = kTableQs;
      break;
    case ExperimentKind::kFigIg:
      // x-axis is not tabulated; 4.0..6.0 brackets the 4.8-5.2 accuracy window
      c.thetas = {0.5};
      c.betas = kBetaGrid;
      c.zeta = 0.0;
      c.xs = parse_list("x", "4.0:6.0:0.1");
      break;
    case ExperimentKind::kFigPareto:
      c.family = MarginFamily::kPareto;
      c.alphas = {2.8};
      c.thetas = {0.5};
      c.betas = kBetaGrid;
      c.zeta = 1.0 / 3.0;
      c.qs = parse_list("q", "0.980:0.995:0.001");
      break;
    case ExperimentKind::kCustom:
      c.xs = kTableXs;
      break;
  }
  return c;
}

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (entries.contains(key)) throw ConfigError("config key '" + key + "' given twice");
    entries[key] = trim(line.substr(eq + 1));
  }

  const ExperimentKind kind =
      entries.contains("experiment") ? parse_experiment_kind(entries.at("experiment")) : ExperimentKind::kCustom;
  ExperimentConfig cfg = preset(kind);
  static const std::set<std::string> run_keys{"experiment", "samples", "seed", "workers", "out"};

  bool saw_x = false;
  bool saw_q = false;
  for (const auto& [key, value] : entries) {
    if (kind != ExperimentKind::kCustom && !run_keys.contains(key)) {
      throw ConfigError("config key '" + key + "' cannot override preset '" + to_string(kind) +
                        "'; use experiment = custom to change model parameters");
    }
    if (key == "experiment") {
      continue;
    } else if (key == "samples") {
      cfg.samples = parse_integer(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_seed(value);
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_integer(key, value));
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "family") {
      if (value == "inverse_gaussian" || value == "ig") {
        cfg.family = MarginFamily::kInverseGaussian;
      } else if (value == "pareto") {
        cfg.family = MarginFamily::kPareto;
      } else {
        throw ConfigError("config key 'family' must be inverse_gaussian or pareto");
      }
    } else if (key == "mu") {
      cfg.mu = parse_number(key, value);
    } else if (key == "nu") {
      cfg.nu = parse_number(key, value);
    } else if (key == "g_params") {
      cfg.g_params.clear();
      for (const auto& item : split(value, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("config key 'g_params' expects mu:nu pairs");
        cfg.g_params.emplace_back(parse_number(key, parts[0]), parse_number(key, parts[1]));
      }
    } else if (key == "alpha") {
      cfg.alphas = parse_list(key, value);
    } else if (key == "theta") {
      cfg.thetas = parse_list(key, value);
    } else if (key == "beta") {
      cfg.betas = parse_list(key, value);
    } else if (key == "zeta") {
      cfg.zeta = parse_number(key, value);
    } else if (key == "x") {
      cfg.xs = parse_list(key, value);
      saw_x = true;
    } else if (key == "q") {
      cfg.qs = parse_list(key, value);
      saw_q = true;
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_integer(key, value));
    } else if (key == "k") {
      cfg.k = static_cast<int>(parse_integer(key, value));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (saw_x && saw_q) throw ConfigError("give thresholds either as x or as q, not both");
  if (saw_q) cfg.xs.clear();
  if (saw_x) cfg.qs.clear();
  // a custom Pareto run without explicit thresholds uses the table quantile levels
  if (kind == ExperimentKind::kCustom && !saw_x && !saw_q && cfg.family == MarginFamily::kPareto) {
    cfg.xs.clear();
    cfg.qs = kTableQs;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("n must be at least 1");
  if (cfg.k < 1 || cfg.k > cfg.n) throw ConfigError("k must lie in [1, n]");
  if (cfg.samples < 1) throw ConfigError("samples must be at least 1");
  if (cfg.workers < 0) throw ConfigError("workers must be nonnegative (0 = all cores)");
  if (cfg.thetas.empty() || cfg.betas.empty()) throw ConfigError("theta and beta lists must not be empty");
  for (double t : cfg.thetas)
    if (!(t >= -1.0 && t <= 1.0)) throw ConfigError("theta values must lie in [-1, 1]");
  for (double b : cfg.betas)
    if (!(b >= 0.0)) throw ConfigError("beta values must be nonnegative");
  if (!(cfg.zeta >= 0.0 && cfg.zeta <= 1.0)) throw ConfigError("zeta must lie in [0, 1]");
  if (cfg.xs.empty() == cfg.qs.empty()) throw ConfigError("give exactly one of the threshold lists x or q");
  for (double q : cfg.qs)
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile levels q must lie in (0, 1)");

  if (cfg.family == MarginFamily::kInverseGaussian) {
    if (!(cfg.mu > 0.0) || !(cfg.nu > 0.0)) throw ConfigError("inverse Gaussian needs mu > 0 and nu > 0");
    if (cfg.g_params.empty()) throw ConfigError("g_params must list at least one mu:nu pair");
    for (const auto& [mu, nu] : cfg.g_params)
      if (!(mu > 0.0) || !(nu > 0.0)) throw ConfigError("inverse Gaussian needs mu > 0 and nu > 0");
    if (cfg.kind != ExperimentKind::kCustom) {
      auto square_shape = [](double mu, double nu) { return std::abs(nu - mu * mu) <= 1e-9 * nu; };
      bool ok = square_shape(cfg.mu, cfg.nu);
      for (const auto& [mu, nu] : cfg.g_params) ok = ok && square_shape(mu, nu);
      if (!ok) throw ConfigError("inverse Gaussian presets require nu = mu^2");
    }
  } else {
    if (cfg.alphas.empty()) throw ConfigError("alpha list must not be empty");
    for (double a : cfg.alphas)
      if (!(a > 0.0)) throw ConfigError("alpha values must be positive");
  }

  try {
    for (const auto& v : variants(cfg))
      for (const auto& [x, q] : thresholds(cfg, v.f))
        for (double theta : cfg.thetas)
          for (double beta : cfg.betas) asymptote(cfg, v, theta, beta, x);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("no asymptote for this configuration: ") + e.what());
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  for (const auto& v : variants(cfg)) {
    const auto ths = thresholds(cfg, v.f);
    for (double theta : cfg.thetas) {
      SimulationPlan plan{.n = cfg.n,
                          .k = cfg.k,
                          .model = FgmModel(v.f, v.g, theta),
                          .samples = cfg.samples,
                          .seed = cfg.seed,
                          .link_thresholds = true,
                          .queries = {},
                          .workers = cfg.workers};
      for (double beta : cfg.betas)
        for (const auto& th : ths) plan.queries.push_back({th.first, th.first, beta, cfg.zeta, cfg.k, cfg.n});
      const auto reports = run_plan(plan);
      ++result.plans;

      std::size_t i = 0;
      for (double beta : cfg.betas) {
        for (const auto& [x, q] : ths) {
          const auto& r = reports[i++];
          ResultRow row;
          row.variant = v.label;
          row.x = x;
          row.q = q;
          row.beta = beta;
          row.theta = theta;
          row.zeta = cfg.zeta;
          row.alpha_or_gamma = v.alpha_or_gamma;
          row.asymptotic = asymptote(cfg, v, theta, beta, x);
          row.hits = r.denominator_hits;
          row.no_hits = r.no_hits();
          if (!row.no_hits) {
            row.empirical = r.estimate;
            row.std_error = r.std_error;
            if (row.asymptotic) row.ratio = *row.asymptotic / *r.estimate;
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << csv_field(r.variant) << ',' << fmt17(r.x) << ',' << opt(r.q) << ',' << fmt17(r.beta) << ',' << fmt17(r.theta) << ','
       << fmt17(r.zeta) << ',' << fmt17(r.alpha_or_gamma) << ',' << opt(r.empirical) << ',' << opt(r.asymptotic)
       << ',' << opt(r.ratio) << ',' << opt(r.std_error) << ',' << r.hits << ',' << (r.no_hits ? 1 : 0) << '\n';
  }
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

std::string format_metadata(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(cfg.kind);
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["workers"] = cfg.workers;
  j["plans"] = result.plans;
  j["pool_policy"] = "one shared sample pool per (margin variant, theta); every plan uses the configured seed";
  j["rng"] = "philox4x32-10, one stream per chunk of " + std::to_string(kChunkSize) + " samples";
  j["wall_time_seconds"] = result.wall_seconds;
  j["versions"] = {{"fgmtail", FGMTAIL_VERSION}, {"compiler", __VERSION__}, {"cxx_standard", __cplusplus}};
  const auto no_hits = std::count_if(result.rows.begin(), result.rows.end(), [](const auto& r) { return r.no_hits; });
  j["no_hits_cells"] = no_hits;
  if (no_hits > 0) j["advice"] = "some cells had no hits: raise samples or lower the thresholds / quantile levels";
  return j.dump(2) + "\n";
}

}  // namespace fgmtail
