#include "certiscope/harness/config.hpp"

#include "certiscope/errors.hpp"

#include <fstream>
#include <set>

namespace certiscope::harness {

namespace {

using nlohmann::json;

// Tracks which keys were read so the leftovers can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void kernel(const char* key, KernelConfig& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), where_ + "." + key);
    r.get("kind", out.kind);
    r.get("fc", out.fc);
    r.get("sigma", out.sigma);
    r.get("wraps", out.wraps);
    r.finish();
    const std::string at = where_ + "." + key;
    if (out.kind != "ideal" && out.kind != "gaussian") throw ConfigError(at + ".kind: expected 'ideal' or 'gaussian'");
    if (out.kind == "ideal" && out.fc < 1) throw ConfigError(at + ".fc: must be >= 1");
    if (out.kind == "gaussian" && !(out.sigma > 0.0)) throw ConfigError(at + ".sigma: must be > 0");
    if (out.kind == "gaussian" && out.wraps < 1) throw ConfigError(at + ".wraps: must be >= 1");
  }

  void variant(const char* key, Variant& out) {
    std::string name = to_string(out);
    get(key, name);
    if (name == "lasso") out = Variant::Lasso;
    else if (name == "cbp") out = Variant::Cbp;
    else throw ConfigError(where_ + "." + key + ": expected 'lasso' or 'cbp'");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown field '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check_spikes(const std::vector<double>& positions, const std::vector<double>& amplitudes, const char* what) {
  try {
    spikes_from(positions, amplitudes).validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

void check_grids(const std::vector<int>& grids, const char* what) {
  if (grids.empty()) throw ConfigError(std::string(what) + ".grids: empty");
  for (int P : grids)
    if (P < 2) throw ConfigError(std::string(what) + ".grids: sizes must be >= 2");
}

void read_ensemble(Reader& r, EnsembleConfig& e) {
  std::string law = to_string(e.amplitude_law);
  r.get("P", e.P);
  r.get("Q", e.Q);
  r.get("trials", e.trials);
  r.get("master_seed", e.master_seed);
  r.get("amplitude_law", law);
  try {
    e.amplitude_law = amplitude_law_from_string(law);
  } catch (const DomainError& err) {
    throw ConfigError(err.what());
  }
}

}  // namespace

Profile profile_from_string(const std::string& name) {
  if (name == "fast") return Profile::Fast;
  if (name == "full") return Profile::Full;
  throw ConfigError("unknown profile '" + name + "'");
}

const char* to_string(Profile p) { return p == Profile::Fast ? "fast" : "full"; }

TorusKernel KernelConfig::build() const {
  return kind == "ideal" ? TorusKernel::ideal(fc) : TorusKernel::gaussian(sigma, wraps);
}

nlohmann::json KernelConfig::to_json() const {
  if (kind == "ideal") return {{"kind", kind}, {"fc", fc}};
  return {{"kind", kind}, {"sigma", sigma}, {"wraps", wraps}};
}

SpikeMeasure spikes_from(const std::vector<double>& positions, const std::vector<double>& amplitudes) {
  return SpikeMeasure{positions, amplitudes};
}

CertificatesConfig parse_certificates(const nlohmann::json& j, Profile) {
  CertificatesConfig c;
  Reader r(j, "certificates");
  r.kernel("kernel", c.kernel);
  r.get("positions", c.positions);
  r.get("amplitudes", c.amplitudes);
  r.get("samples", c.samples);
  r.get("scan_points", c.scan_points);
  r.finish();
  check_spikes(c.positions, c.amplitudes, "certificates");
  if (c.samples < 2 || c.scan_points < 16) throw ConfigError("certificates: samples >= 2 and scan_points >= 16");
  return c;
}

PathConfig parse_path(const nlohmann::json& j, Profile) {
  PathConfig c;
  Reader r(j, "path");
  r.kernel("kernel", c.kernel);
  r.get("positions", c.positions);
  r.get("amplitudes", c.amplitudes);
  r.get("P", c.P);
  r.get("lambda_min_rel", c.lambda_min_rel);
  r.finish();
  check_spikes(c.positions, c.amplitudes, "path");
  if (c.P < 4) throw ConfigError("path.P: must be >= 4");
  if (!(c.lambda_min_rel > 0.0 && c.lambda_min_rel < 1.0)) throw ConfigError("path.lambda_min_rel: must lie in (0, 1)");
  return c;
}

CsConfig parse_cs_transition(const nlohmann::json& j, Profile p) {
  CsConfig c;
  if (p == Profile::Fast) {
    c.ensemble.P = 200;
    c.ensemble.Q = 50;
    c.ensemble.trials = 50;
    for (int s = 1; s <= 24; ++s) c.s_values.push_back(s);
  } else {
    for (int s = 1; s <= 40; ++s) c.s_values.push_back(s);
  }
  Reader r(j, "cs");
  read_ensemble(r, c.ensemble);
  r.get("s_values", c.s_values);
  r.finish();
  if (c.s_values.empty()) throw ConfigError("cs.s_values: empty");
  for (int s : c.s_values) {
    EnsembleConfig e = c.ensemble;
    e.s = s;
    try {
      e.validate();
    } catch (const DomainError& err) {
      throw ConfigError(std::string("cs: ") + err.what());
    }
  }
  return c;
}

CsConfig parse_cs_histogram(const nlohmann::json& j, Profile p) {
  CsConfig c;
  if (p == Profile::Fast) {
    c.ensemble.P = 200;
    c.ensemble.Q = 50;
    c.ensemble.trials = 100;
    c.ensemble.s = 7;
  } else {
    c.ensemble.trials = 500;
    c.ensemble.s = 14;
  }
  Reader r(j, "cs");
  read_ensemble(r, c.ensemble);
  r.get("s", c.ensemble.s);
  r.finish();
  try {
    c.ensemble.validate();
  } catch (const DomainError& err) {
    throw ConfigError(std::string("cs: ") + err.what());
  }
  return c;
}

ScalingConfig parse_scaling(const nlohmann::json& j, Profile) {
  ScalingConfig c;
  Reader r(j, "scaling");
  r.kernel("kernel", c.kernel);
  r.get("positions", c.positions);
  r.get("amplitudes", c.amplitudes);
  r.get("grids", c.grids);
  r.variant("variant", c.variant);
  r.finish();
  check_spikes(c.positions, c.amplitudes, "scaling");
  check_grids(c.grids, "scaling");
  return c;
}

GammaConfig parse_gamma(const nlohmann::json& j, Profile) {
  GammaConfig c;
  Reader r(j, "gamma");
  r.kernel("kernel", c.kernel);
  r.get("positions", c.positions);
  r.get("amplitudes", c.amplitudes);
  r.get("lambda_rel", c.lambda_rel);
  r.get("grids", c.grids);
  r.variant("variant", c.variant);
  r.finish();
  check_spikes(c.positions, c.amplitudes, "gamma");
  check_grids(c.grids, "gamma");
  if (!(c.lambda_rel > 0.0)) throw ConfigError("gamma.lambda_rel: must be > 0");
  for (size_t k = 1; k < c.grids.size(); ++k)
    if (c.grids[k] % c.grids[k - 1] != 0) throw ConfigError("gamma.grids: must be nested");
  return c;
}

GramCheckConfig parse_gram_check(const nlohmann::json& j, Profile) {
  GramCheckConfig c;
  Reader r(j, "gram_check");
  r.variant("variant", c.variant);
  if (c.variant == Variant::Cbp) {
    c.positions = {0.359375, 0.640625};
    c.h_list = {1.0 / 128, 1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048};
  }
  r.kernel("kernel", c.kernel);
  r.get("positions", c.positions);
  r.get("signs", c.signs);
  r.get("h_list", c.h_list);
  r.finish();
  check_spikes(c.positions, c.signs, "gram_check");
  if (c.h_list.empty()) throw ConfigError("gram_check.h_list: empty");
  for (double h : c.h_list)
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("gram_check.h_list: entries must lie in (0, 1)");
  return c;
}

nlohmann::json load_config_file(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

}  // namespace certiscope::harness
