#include "ngcn/run_config.hpp"

#include <fstream>
#include <sstream>

#include "ngcn/errors.hpp"
#include "ngcn/text.hpp"

namespace ngcn {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(value, &pos);
    if (pos != value.size() || x < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}


}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::vector<std::string> unknown;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.apply_override(key, value);
    } catch (const ConfigError& err) {
      if (std::string(err.what()).rfind("unknown config key", 0) == 0)
        unknown.push_back(key);
      else
        throw;
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "dataset")
    dataset = value;
  else if (key == "model")
    model = model_kind_from_string(value);
  else if (key == "f")
    feature_dim = parse_count(key, value);
  else if (key == "d")
    latent_dim = parse_count(key, value);
  else if (key == "layers")
    n_layers = parse_count(key, value);
  else if (key == "eta")
    eta = parse_real(key, value);
  else if (key == "lambda")
    lambda = parse_real(key, value);
  else if (key == "batch_size")
    batch_size = parse_count(key, value);
  else if (key == "max_epochs")
    max_epochs = parse_count(key, value);
  else if (key == "patience")
    patience = parse_count(key, value);
  else if (key == "seed")
    seed = static_cast<std::uint64_t>(parse_count(key, value));
  else if (key == "normalize")
    normalize = parse_bool(key, value);
  else if (key == "out_dir")
    out_dir = value;
  else
    throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::apply_set_flags(const std::vector<std::string>& key_value_pairs) {
  std::vector<std::string> unknown;
  for (const std::string& kv : key_value_pairs) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string key = trim(kv.substr(0, eq));
    const std::string value = trim(kv.substr(eq + 1));
    try {
      apply_override(key, value);
    } catch (const ConfigError& err) {
      if (std::string(err.what()).rfind("unknown config key", 0) == 0)
        unknown.push_back(key);
      else
        throw;
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

TrainConfig RunConfig::to_train_config() const {
  TrainConfig cfg;
  cfg.eta = eta;
  cfg.lambda = lambda;
  cfg.batch_size = batch_size;
  cfg.max_epochs = max_epochs;
  cfg.patience = patience;
  cfg.seed = seed;
  cfg.model_kind = model;
  cfg.feature_dim = feature_dim;
  cfg.latent_dim = latent_dim;
  cfg.n_layers = n_layers;
  return cfg;
}

std::string RunConfig::to_key_values() const {
  std::ostringstream out;
  out << "dataset = " << dataset << "\n";
  out << "model = " << to_string(model) << "\n";
  out << "f = " << feature_dim << "\n";
  out << "d = " << latent_dim << "\n";
  out << "layers = " << n_layers << "\n";
  out << "eta = " << fmt_double(eta) << "\n";
  out << "lambda = " << fmt_double(lambda) << "\n";
  out << "batch_size = " << batch_size << "\n";
  out << "max_epochs = " << max_epochs << "\n";
  out << "patience = " << patience << "\n";
  out << "seed = " << seed << "\n";
  out << "normalize = " << (normalize ? "true" : "false") << "\n";
  out << "out_dir = " << out_dir << "\n";
  return out.str();
}

}  // namespace ngcn
