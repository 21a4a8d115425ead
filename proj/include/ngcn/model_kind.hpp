#pragma once

#include <string>
#include <variant>

#include "ngcn/baselines.hpp"
#include "ngcn/model.hpp"

namespace ngcn {

enum class ModelKind { ngcn, mf, gcn };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

/// Trained parameters of any model kind.
using ModelParams = std::variant<NgcnParams, MfParams, GcnParams>;

ModelKind kind_of(const ModelParams& params);

}  // namespace ngcn
