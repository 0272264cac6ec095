#include "hgcode/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace hgcode {

void add_adapters(TensorMap& out, const std::vector<AdapterParameters>& adapters) {
    for (std::size_t l = 0; l < adapters.size(); ++l) {
        adapters[l].for_each([&](const std::string& name, const Matrix& m) {
            out[fmt::format("layer{}.{}", l + 1, name)] = m;
        });
    }
}

void load_adapters(const TensorMap& in, std::vector<AdapterParameters>& adapters) {
    for (std::size_t l = 0; l < adapters.size(); ++l) {
        adapters[l].for_each([&](const std::string& name, Matrix& m) {
            const auto key = fmt::format("layer{}.{}", l + 1, name);
            auto it = in.find(key);
            if (it == in.end()) throw std::invalid_argument(fmt::format("checkpoint lacks tensor '{}'", key));
            if (!it->second.same_shape(m)) {
                throw std::invalid_argument(fmt::format("checkpoint tensor '{}' is {}x{}, expected {}x{}", key,
                                                        it->second.rows(), it->second.cols(), m.rows(), m.cols()));
            }
            m = it->second;
        });
    }
}

nlohmann::ordered_json tensors_to_json(const TensorMap& tensors) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, m] : tensors) {
        nlohmann::ordered_json entry;
        entry["shape"] = {m.rows(), m.cols()};
        entry["data"] = std::vector<double>(m.values().begin(), m.values().end());
        j[name] = std::move(entry);
    }
    return j;
}

TensorMap tensors_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("checkpoint must be a JSON object");
    TensorMap out;
    for (const auto& [name, entry] : j.items()) {
        const auto shape = entry.find("shape");
        const auto data = entry.find("data");
        if (shape == entry.end() || !shape->is_array() || shape->size() != 2 || data == entry.end() ||
            !data->is_array()) {
            throw std::invalid_argument(fmt::format("checkpoint tensor '{}' needs \"shape\" and \"data\"", name));
        }
        const auto rows = (*shape)[0].get<std::size_t>();
        const auto cols = (*shape)[1].get<std::size_t>();
        auto values = data->get<std::vector<double>>();
        if (values.size() != rows * cols) {
            throw std::invalid_argument(fmt::format("checkpoint tensor '{}' has {} values for shape {}x{}", name,
                                                    values.size(), rows, cols));
        }
        out.emplace(name, Matrix(rows, cols, std::move(values)));
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const TensorMap& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write checkpoint {}", path.string()));
    out << tensors_to_json(tensors).dump() << '\n';
}

TensorMap load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read checkpoint {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return tensors_from_json(nlohmann::json::parse(buf.str()));
}

}  // namespace hgcode
