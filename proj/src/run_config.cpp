#include "fmsos/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": '" + v + "' is not a finite number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": '" + v + "' is not a nonnegative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, v, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

std::string real_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += real_str(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FMSOS_REAL(name, member)                                                                     \
  {name, Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_real(k, v); }, \
               [](const RunConfig& c) { return real_str(c.member); }}}
#define FMSOS_UINT(name, member)                                                                     \
  {name, Field{[](RunConfig& c, const std::string& k, const std::string& v) {                         \
                 c.member = static_cast<decltype(c.member)>(to_uint(k, v));                           \
               },                                                                                     \
               [](const RunConfig& c) { return std::to_string(c.member); }}}
#define FMSOS_BOOL(name, member)                                                                     \
  {name, Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }, \
               [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}}
#define FMSOS_PATH(name, member)                                                                     \
  {name, Field{[](RunConfig& c, const std::string&, const std::string& v) { c.member = v; },           \
               [](const RunConfig& c) { return c.member; }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      FMSOS_UINT("seed", sampler.seed),
      FMSOS_UINT("iters", sampler.iters),
      FMSOS_UINT("burn_in", sampler.burn_in),
      FMSOS_UINT("thin", sampler.thin),
      FMSOS_REAL("sigma_eps", sampler.sigma_eps),
      FMSOS_REAL("sigma_kappa", sampler.sigma_kappa),
      FMSOS_REAL("kappa_vmf_atom", sampler.kappa_vmf_atom),
      FMSOS_REAL("q_atom", sampler.move_probs.q_atom),
      FMSOS_REAL("q_psi", sampler.move_probs.q_psi),
      FMSOS_REAL("q_add", sampler.move_probs.q_add),
      FMSOS_REAL("q_remove", sampler.move_probs.q_remove),
      {"ratio_form",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "balanced") {
                 c.sampler.ratio_form = RatioForm::kBalanced;
               } else if (v == "printed") {
                 c.sampler.ratio_form = RatioForm::kPrinted;
               } else {
                 throw ConfigError(k + ": expected balanced or printed, got '" + v + "'");
               }
             },
             [](const RunConfig& c) {
               return std::string(c.sampler.ratio_form == RatioForm::kBalanced ? "balanced" : "printed");
             }}},
      FMSOS_BOOL("rotation_only", sampler.rotation_only),
      FMSOS_BOOL("update_rotation", sampler.update_rotation),
      FMSOS_BOOL("update_kappa", sampler.update_kappa),
      FMSOS_UINT("anneal_iters", sampler.anneal_iters),
      FMSOS_REAL("anneal_start", sampler.anneal_start),
      FMSOS_REAL("lambda", sampler.prior.lambda),
      {"p", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                    c.sampler.prior.p = static_cast<int>(to_uint(k, v));
                  },
                  [](const RunConfig& c) { return std::to_string(c.sampler.prior.p); }}},
      FMSOS_UINT("cloud_size", sampler.prior.cloud_size),
      FMSOS_UINT("k_max", sampler.prior.k_max),
      FMSOS_UINT("rejection_budget", sampler.prior.rejection_budget),
      FMSOS_REAL("kappa_init_low", sampler.prior.kappa_init_low),
      FMSOS_REAL("kappa_init_high", sampler.prior.kappa_init_high),
      FMSOS_PATH("data", data),
      FMSOS_PATH("test", test),
      FMSOS_PATH("truth", truth),
      FMSOS_PATH("trace", trace),
      FMSOS_PATH("out", out),
      {"data_format", Field{[](RunConfig& c, const std::string&, const std::string& v) {
                              c.data_format = pairs_format_from_name(v);
                            },
                            [](const RunConfig& c) { return std::string(pairs_format_name(c.data_format)); }}},
      FMSOS_UINT("chains", chains),
      {"init", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                       if (v == "prior") {
                         c.init = InitMethod::kPrior;
                       } else if (v == "clustered") {
                         c.init = InitMethod::kClustered;
                       } else {
                         throw ConfigError(k + ": expected prior or clustered, got '" + v + "'");
                       }
                     },
                     [](const RunConfig& c) {
                       return std::string(c.init == InitMethod::kPrior ? "prior" : "clustered");
                     }}},
      FMSOS_UINT("init_candidates", init_candidates),
      FMSOS_UINT("probe_points", probe_points),
      FMSOS_UINT("distance_records", distance_records),
      FMSOS_REAL("test_fraction", test_fraction),
      FMSOS_UINT("k", k),
      FMSOS_REAL("kappa", kappa),
      FMSOS_UINT("n", n),
      {"truth_model",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "transport") {
                 c.truth_model = TruthModel::kTransport;
               } else if (v == "rotation") {
                 c.truth_model = TruthModel::kRotation;
               } else {
                 throw ConfigError(k + ": expected transport or rotation, got '" + v + "'");
               }
             },
             [](const RunConfig& c) {
               return std::string(c.truth_model == TruthModel::kTransport ? "transport" : "rotation");
             }}},
      {"grid_k", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.grid_k.clear();
                         for (const auto& s : to_list(v)) c.grid_k.push_back(to_uint(k, s));
                       },
                       [](const RunConfig& c) { return join(c.grid_k); }}},
      {"grid_kappa", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                             c.grid_kappa.clear();
                             for (const auto& s : to_list(v)) c.grid_kappa.push_back(to_real(k, s));
                           },
                           [](const RunConfig& c) { return join(c.grid_kappa); }}},
      {"grid_n", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.grid_n.clear();
                         for (const auto& s : to_list(v)) c.grid_n.push_back(to_uint(k, s));
                       },
                       [](const RunConfig& c) { return join(c.grid_n); }}},
  };
  return table;
}

#undef FMSOS_REAL
#undef FMSOS_UINT
#undef FMSOS_BOOL
#undef FMSOS_PATH

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

} // namespace

void RunConfig::validate() const {
  sampler.validate();
  if (chains < 1) throw ConfigError("chains must be >= 1");
  if (init_candidates < 1) throw ConfigError("init_candidates must be >= 1");
  if (probe_points < 1) throw ConfigError("probe_points must be >= 1");
  if (distance_records < 1) throw ConfigError("distance_records must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (k < 1 || k > sampler.prior.k_max) throw ConfigError("k must lie in [1, k_max]");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (grid_k.empty() || grid_kappa.empty() || grid_n.empty()) throw ConfigError("grid lists must be nonempty");
  for (auto gk : grid_k) {
    if (gk < 1 || gk > sampler.prior.k_max) throw ConfigError("grid_k entries must lie in [1, k_max]");
  }
  for (auto gkappa : grid_kappa) {
    if (!(gkappa > 0.0)) throw ConfigError("grid_kappa entries must be positive");
  }
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, key, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return field(key).get(config); }

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
    const std::string value = boost::algorithm::trim_copy(line.substr(eq + 1));
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, std::move(base));
}

Prologue resolved_config(const RunConfig& config) {
  Prologue out;
  for (const auto& [name, f] : fields()) out.emplace_back(name, f.get(config));
  return out;
}

} // namespace fmsos
