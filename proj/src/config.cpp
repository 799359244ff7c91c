#include "gemesh/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gemesh/errors.hpp"

namespace gemesh {

using nlohmann::json;

void to_json(json& j, const TrainConfig& c) {
  j = json{{"lr", c.lr},
           {"epochs", c.epochs},
           {"weight_decay", c.weight_decay},
           {"cosine_schedule", c.cosine_schedule},
           {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.cosine_schedule = j.value("cosine_schedule", c.cosine_schedule);
  c.seed = j.value("seed", c.seed);
}

void to_json(json& j, const EvalConfig& c) {
  j = json{{"splits", c.splits}, {"times_1e3", c.times_1e3}};
}

void from_json(const json& j, EvalConfig& c) {
  c.splits = j.value("splits", c.splits);
  c.times_1e3 = j.value("times_1e3", c.times_1e3);
}

void to_json(json& j, const AppConfig& c) {
  j = json{{"dataset", c.dataset},
           {"model", c.model},
           {"optim", c.optim},
           {"eval", c.eval}};
}

void from_json(const json& j, AppConfig& c) {
  if (j.contains("seed")) {
    auto seed = j.at("seed").get<std::uint64_t>();
    c.dataset.seed = seed;
    c.optim.seed = seed;
  }
  if (j.contains("dataset")) from_json(j.at("dataset"), c.dataset);
  if (j.contains("model")) {
    const json& jm = j.at("model");
    if (jm.contains("preset")) {
      Flavor flavor = c.model.flavor;
      if (jm.contains("flavor")) {
        flavor = flavor_from_string(jm.at("flavor").get<std::string>());
      }
      c.model = preset(jm.at("preset").get<std::string>(), flavor);
    }
    from_json(jm, c.model);
  }
  if (j.contains("optim")) from_json(j.at("optim"), c.optim);
  if (j.contains("eval")) from_json(j.at("eval"), c.eval);
}

AppConfig parse_config(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  check(!j.is_discarded(), Err::ParseError, "config is not valid JSON");
  check(j.is_object(), Err::ParseError, "config root must be an object");
  try {
    AppConfig config;
    from_json(j, config);
    return config;
  } catch (const json::exception& e) {
    fail(Err::ParseError, std::string("bad config value: ") + e.what());
  }
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), Err::IoError, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_seed_override(AppConfig& config, std::uint64_t seed) {
  config.dataset.seed = seed;
  config.optim.seed = seed;
}

std::string config_hash(const AppConfig& config) {
  const std::string dump = json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gemesh
