#include "gemesh/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "gemesh/errors.hpp"

namespace gemesh {

namespace {

constexpr const char* kFormat = "gemesh-checkpoint";
constexpr int kVersion = 1;

std::uint64_t to_le_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
    bits = s;
  }
  return bits;
}

double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
    bits = s;
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::vector<int> slot_list(const FeatureType& type) {
  std::vector<int> freqs;
  for (int s = 0; s < type.slots(); ++s) freqs.push_back(type.freq(s));
  return freqs;
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"flavor", flavor_to_string(c.flavor)},
                     {"blocks", c.blocks},
                     {"edge_layers", c.edge_layers},
                     {"node_layers", c.node_layers},
                     {"history", c.history},
                     {"band_limit", c.band_limit},
                     {"hidden_max_freq", c.hidden_max_freq},
                     {"hidden_fields", c.hidden_fields},
                     {"relu_samples", c.relu_samples},
                     {"self_kernels", c.self_kernels},
                     {"edge_features", c.edge_features},
                     {"residual", c.residual},
                     {"identity_sigma", c.identity_sigma},
                     {"predict_delta", c.predict_delta}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.flavor = flavor_from_string(j.value("flavor", flavor_to_string(c.flavor)));
  c.blocks = j.value("blocks", c.blocks);
  c.edge_layers = j.value("edge_layers", c.edge_layers);
  c.node_layers = j.value("node_layers", c.node_layers);
  c.history = j.value("history", c.history);
  c.band_limit = j.value("band_limit", c.band_limit);
  c.hidden_max_freq = j.value("hidden_max_freq", c.hidden_max_freq);
  c.hidden_fields = j.value("hidden_fields", c.hidden_fields);
  c.relu_samples = j.value("relu_samples", c.relu_samples);
  c.self_kernels = j.value("self_kernels", c.self_kernels);
  c.edge_features = j.value("edge_features", c.edge_features);
  c.residual = j.value("residual", c.residual);
  c.identity_sigma = j.value("identity_sigma", c.identity_sigma);
  c.predict_delta = j.value("predict_delta", c.predict_delta);
}

void save_checkpoint(const std::string& path, const Model& model,
                     const std::vector<RowMat>& params, std::uint64_t seed) {
  check(params.size() == model.param_sizes().size(), Err::ShapeMismatch,
        "parameter list does not match the model");
  namespace fs = std::filesystem;
  const fs::path manifest_path(path);
  fs::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");

  nlohmann::json table = nlohmann::json::array();
  long offset = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    check(params[i].rows() == 1 && params[i].cols() == model.param_sizes()[i],
          Err::ShapeMismatch, "parameter '" + model.param_names()[i] + "' has the wrong size");
    table.push_back({{"name", model.param_names()[i]},
                     {"offset", offset},
                     {"rows", params[i].rows()},
                     {"cols", params[i].cols()}});
    offset += params[i].size();
  }

  nlohmann::json manifest{{"format", kFormat},
                          {"version", kVersion},
                          {"seed", seed},
                          {"blob", blob_path.filename().string()},
                          {"model", model.config()},
                          {"input_type", slot_list(model.input_type())},
                          {"hidden_type", slot_list(model.hidden_type())},
                          {"params", table}};

  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  check(blob.good(), Err::IoError, "cannot write " + blob_path.string());
  for (const RowMat& p : params)
    for (long j = 0; j < p.size(); ++j) {
      const std::uint64_t bits = to_le_bits(p(0, j));
      blob.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  blob.close();
  check(blob.good(), Err::IoError, "short write to " + blob_path.string());

  std::ofstream out(manifest_path, std::ios::trunc);
  check(out.good(), Err::IoError, "cannot write " + manifest_path.string());
  out << manifest.dump(2) << "\n";
  out.close();
  check(out.good(), Err::IoError, "short write to " + manifest_path.string());
}

Checkpoint load_checkpoint(const std::string& path) {
  namespace fs = std::filesystem;
  std::ifstream in(path);
  check(in.good(), Err::IoError, "cannot open " + path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(Err::BadCheckpoint, "manifest is not valid JSON: " + std::string(e.what()));
  }

  Checkpoint ck;
  try {
    check(manifest.at("format").get<std::string>() == kFormat, Err::BadCheckpoint,
          "not a checkpoint manifest");
    check(manifest.at("version").get<int>() == kVersion, Err::BadCheckpoint,
          "unsupported checkpoint version");
    ck.config = manifest.at("model").get<ModelConfig>();
    ck.seed = manifest.at("seed").get<std::uint64_t>();

    Model model(ck.config);
    check(slot_list(model.input_type()) == manifest.at("input_type").get<std::vector<int>>() &&
              slot_list(model.hidden_type()) ==
                  manifest.at("hidden_type").get<std::vector<int>>(),
          Err::BadCheckpoint, "declared feature types do not match the architecture");

    const auto& table = manifest.at("params");
    check(table.is_array() && table.size() == model.param_sizes().size(), Err::BadCheckpoint,
          "parameter table does not match the architecture");
    long offset = 0;
    for (size_t i = 0; i < table.size(); ++i) {
      const auto& entry = table[i];
      check(entry.at("name").get<std::string>() == model.param_names()[i] &&
                entry.at("offset").get<long>() == offset &&
                entry.at("rows").get<long>() == 1 &&
                entry.at("cols").get<long>() == model.param_sizes()[i],
            Err::BadCheckpoint, "parameter table entry " + std::to_string(i) + " is invalid");
      offset += model.param_sizes()[i];
    }

    const fs::path blob_path =
        fs::path(path).parent_path() / manifest.at("blob").get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    check(blob.good(), Err::IoError, "cannot open " + blob_path.string());
    blob.seekg(0, std::ios::end);
    const long bytes = static_cast<long>(blob.tellg());
    check(bytes == offset * static_cast<long>(sizeof(double)), Err::BadCheckpoint,
          "blob size does not match the parameter table");
    blob.seekg(0);
    for (long size : model.param_sizes()) {
      RowMat p(1, size);
      for (long j = 0; j < size; ++j) {
        std::uint64_t bits;
        blob.read(reinterpret_cast<char*>(&bits), sizeof(bits));
        p(0, j) = from_le_bits(bits);
      }
      ck.params.push_back(std::move(p));
    }
    check(blob.good(), Err::BadCheckpoint, "blob ended early");
  } catch (const nlohmann::json::exception& e) {
    fail(Err::BadCheckpoint, "manifest is missing fields: " + std::string(e.what()));
  }
  return ck;
}

}  // namespace gemesh
