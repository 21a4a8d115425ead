#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ngcn/trainer.hpp"

namespace ngcn {

/// Flat key-value experiment configuration. Recognized keys: dataset, model,
/// f, d, layers, eta, lambda, batch_size, max_epochs, patience, seed,
/// normalize, out_dir. Files hold one "key = value" pair per line; '#' starts
/// a comment. Unknown keys are usage errors naming the offenders.
struct RunConfig {
  std::string dataset;
  ModelKind model = ModelKind::ngcn;
  std::size_t feature_dim = 128;
  std::size_t latent_dim = 128;
  std::size_t n_layers = 2;
  double eta = 1e-3;
  double lambda = 1e-4;
  std::size_t batch_size = 2048;
  std::size_t max_epochs = 1000;
  std::size_t patience = 30;
  std::uint64_t seed = 1;
  bool normalize = true;
  std::string out_dir = "runs/default";

  static RunConfig from_file(const std::string& path);

  /// Applies one "key=value" override; throws ConfigError on unknown keys or
  /// unparsable values.
  void apply_override(const std::string& key, const std::string& value);
  void apply_set_flags(const std::vector<std::string>& key_value_pairs);

  TrainConfig to_train_config() const;
  std::string to_key_values() const;  // echo in file syntax
};

}  // namespace ngcn
