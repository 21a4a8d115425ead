#pragma once

#include <string>

#include "ngcn/model_kind.hpp"

namespace ngcn {

/// Versioned binary checkpoint container.
///
/// Layout (all integers and floats little-endian):
///   "NGCN"            4 magic bytes
///   u32 version       currently 1
///   u8  kind          0 = ngcn, 1 = mf, 2 = gcn
///   u64 n_nodes, u64 feature_dim, u64 latent_dim, u64 n_layers
///   f64 fusion_weight
///   payload           row-major f64 tensors by kind:
///                       ngcn: features, factors, layer weights 0..L-1
///                       mf:   factors               (feature_dim = n_layers = 0)
///                       gcn:  features, layer weights (latent_dim = 0)
///   u64 checksum      FNV-1a 64 over every preceding byte
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace ngcn
