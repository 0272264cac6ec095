#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgcode/adapter.hpp"
#include "hgcode/numerics.hpp"

namespace hgcode {

// Named tensors, e.g. "layer1.W_down", "layer2.q.line", "head.W1".
using TensorMap = std::map<std::string, Matrix>;

// Adds layer{l}.<name> entries for every adapter (l is 1-based).
void add_adapters(TensorMap& out, const std::vector<AdapterParameters>& adapters);
// Copies layer{l}.* entries back; every tensor must be present with the
// matching shape. Throws std::invalid_argument otherwise.
void load_adapters(const TensorMap& in, std::vector<AdapterParameters>& adapters);

// {"name": {"shape": [rows, cols], "data": [row-major f64...]}, ...}
nlohmann::ordered_json tensors_to_json(const TensorMap& tensors);
TensorMap tensors_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap load_checkpoint(const std::filesystem::path& path);

}  // namespace hgcode
