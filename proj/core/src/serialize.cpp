#include "cate/serialize.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cate/errors.hpp"

namespace cate {
namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "deepcate.model";

json to_json(const MlpNetwork& net) {
  json layers = json::array();
  for (const Layer& l : net.layers) {
    layers.push_back({
        {"in", l.spec.in_dim},
        {"out", l.spec.out_dim},
        {"activation", to_string(l.spec.activation)},
        {"dropout", l.spec.dropout_rate},
        {"weights", std::vector<double>(l.weights.values().begin(), l.weights.values().end())},
        {"bias", std::vector<double>(l.bias.values().begin(), l.bias.values().end())},
    });
  }
  return {{"seed", net.seed}, {"layers", std::move(layers)}};
}

MlpNetwork network_from(const json& j) {
  MlpNetwork net;
  net.seed = j.at("seed").get<std::uint64_t>();
  for (const json& jl : j.at("layers")) {
    LayerSpec spec{jl.at("in").get<std::size_t>(), jl.at("out").get<std::size_t>(),
                   activation_from_string(jl.at("activation").get<std::string>()),
                   jl.at("dropout").get<double>()};
    auto w = jl.at("weights").get<std::vector<double>>();
    auto b = jl.at("bias").get<std::vector<double>>();
    if (!net.layers.empty() && net.layers.back().spec.out_dim != spec.in_dim) {
      throw ShapeError("model json: layer dimensions do not chain");
    }
    net.layers.push_back({spec, Matrix(spec.in_dim, spec.out_dim, std::move(w)),
                          Matrix(1, spec.out_dim, std::move(b))});
  }
  if (net.layers.empty()) throw ShapeError("model json: network has no layers");
  return net;
}

}  // namespace

std::string network_to_json(const MlpNetwork& net) { return to_json(net).dump(); }

MlpNetwork network_from_json(std::string_view text) {
  try {
    return network_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
}

std::string model_to_json(const CateModel& model) {
  json j = {{"format", kFormatTag},
            {"version", kModelFormatVersion},
            {"kind", std::string(to_string(method_of(model)))}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SharedNet>) {
          j["networks"] = {{"net", to_json(m.net)}};
        } else if constexpr (std::is_same_v<T, BcfNet>) {
          j["networks"] = {{"alpha", to_json(m.alpha_net)}, {"beta", to_json(m.beta_net)}};
          if (m.propensity) j["networks"]["propensity"] = to_json(m.propensity->net);
        } else if constexpr (std::is_same_v<T, NaiveNets>) {
          j["networks"] = {{"y1", to_json(m.y1_net)}, {"y0", to_json(m.y0_net)}};
        } else {
          j["ols"] = {{"intercept", m.intercept}, {"beta_z", m.beta_z},
                      {"delta", m.delta},         {"gamma", m.gamma},
                      {"rank_deficient", m.rank_deficient}};
        }
      },
      model);
  return j.dump(1);
}

namespace {

CateModel model_from(const json& j) {
  if (j.value("format", "") != kFormatTag) throw DataError("model json: not a deepcate model");
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw DataError("model json: unsupported version " + std::to_string(version));
  }
  const Method kind = method_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case Method::kShared:
      return SharedNet{network_from(j.at("networks").at("net")), {}};
    case Method::kBcf: {
      const json& nets = j.at("networks");
      BcfNet m{network_from(nets.at("alpha")), network_from(nets.at("beta")), std::nullopt, {}};
      if (nets.contains("propensity")) {
        m.propensity = PropensityModel{network_from(nets.at("propensity")), {}};
      }
      return m;
    }
    case Method::kNaive:
      return NaiveNets{network_from(j.at("networks").at("y1")),
                       network_from(j.at("networks").at("y0")), {}, {}};
    case Method::kOls: {
      const json& o = j.at("ols");
      return OlsModel{o.at("intercept").get<double>(), o.at("beta_z").get<double>(),
                      o.at("delta").get<std::vector<double>>(),
                      o.at("gamma").get<std::vector<double>>(),
                      o.at("rank_deficient").get<bool>()};
    }
  }
  throw DataError("model json: unknown kind");
}

}  // namespace

CateModel model_from_json(std::string_view text) {
  try {
    return model_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
}

void save_model(const CateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << model_to_json(model) << '\n';
}

CateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace cate
