#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "json.hpp"

namespace driverid {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "driverid-model";

json nodes_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.label}));
  }
  return nodes;
}

DecisionTree nodes_from_json(const json& j, std::size_t dims, std::size_t n_classes) {
  DecisionTree tree;
  if (!j.is_array() || j.empty()) throw ParseError("tree has no nodes");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 5) throw ParseError("malformed tree node");
    TreeNode n;
    n.feature = e[0].get<int>();
    n.threshold = e[1].get<double>();
    n.left = e[2].get<int>();
    n.right = e[3].get<int>();
    n.label = e[4].get<std::size_t>();
    tree.nodes.push_back(n);
  }
  const auto count = static_cast<int>(tree.nodes.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    if (n.label >= n_classes) throw SchemaMismatch("tree leaf label out of range");
    if (n.is_leaf()) continue;
    if (static_cast<std::size_t>(n.feature) >= dims) {
      throw SchemaMismatch("tree splits on feature " + std::to_string(n.feature) +
                           " but the schema has " + std::to_string(dims));
    }
    if (n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
      throw ParseError("tree node has invalid children");
    }
  }
  return tree;
}

std::vector<double> doubles(const json& j) {
  if (!j.is_array()) throw ParseError("expected a number array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw ParseError("non-numeric entry in number array");
    out.push_back(e.get<double>());
  }
  return out;
}

json to_json(const TrainedModel& model) {
  json j;
  j["format"] = kFormatTag;
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(model_kind_name(model.kind));
  j["class_list"] = model.class_list;
  json labels = json::array();
  for (const auto& d : model.schema) labels.push_back(d.label());
  j["schema"] = labels;
  if (model.standardizer) {
    j["standardizer"] = {{"mean", model.standardizer->mean()},
                         {"stddev", model.standardizer->stddev()},
                         {"fitted_rows", model.standardizer->fitted_rows()}};
  } else {
    j["standardizer"] = nullptr;
  }

  json p;
  switch (model.kind) {
    case ModelKind::knn: {
      const auto& m = std::get<KnnModel>(model.params);
      p["k"] = m.k;
      p["n_classes"] = m.n_classes;
      p["rows"] = m.train.rows;
      p["cols"] = m.train.cols;
      p["labels"] = m.labels;
      p["train"] = m.train.data;
      break;
    }
    case ModelKind::dtree:
      p["nodes"] = nodes_to_json(std::get<DecisionTree>(model.params));
      break;
    case ModelKind::rforest: {
      const auto& f = std::get<RandomForest>(model.params);
      p["n_classes"] = f.n_classes;
      json trees = json::array();
      for (const auto& t : f.trees) trees.push_back(nodes_to_json(t));
      p["trees"] = trees;
      break;
    }
    case ModelKind::mlp: {
      const auto& net = std::get<MlpNetwork>(model.params);
      p["activation"] = std::string(activation_name(net.activation));
      p["layers"] = net.layer_sizes();
      p["parameters"] = net.flatten();
      break;
    }
  }
  j["params"] = p;
  return j;
}

TrainedModel from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kFormatTag) {
    throw ParseError("not a driverid model file");
  }
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version));
  }
  TrainedModel model;
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) throw ParseError("unknown model kind");
  model.kind = *kind;
  model.class_list = j.at("class_list").get<std::vector<std::string>>();
  if (model.class_list.size() < 2) throw ParseError("model needs at least two classes");
  for (const auto& label : j.at("schema")) {
    auto d = parse_descriptor(label.get<std::string>());
    if (!d) throw ParseError("bad feature label '" + label.get<std::string>() + "'");
    model.schema.push_back(*d);
  }
  const std::size_t dims = model.schema.size();
  const std::size_t n_classes = model.class_list.size();

  const auto& s = j.at("standardizer");
  if (!s.is_null()) {
    Standardizer st(doubles(s.at("mean")), doubles(s.at("stddev")),
                    s.at("fitted_rows").get<std::size_t>());
    if (st.dimension() != dims) {
      throw SchemaMismatch("standardizer has " + std::to_string(st.dimension()) +
                           " dimensions, schema has " + std::to_string(dims));
    }
    model.standardizer = std::move(st);
  }

  const auto& p = j.at("params");
  switch (model.kind) {
    case ModelKind::knn: {
      KnnModel m;
      m.k = p.at("k").get<std::size_t>();
      m.n_classes = p.at("n_classes").get<std::size_t>();
      m.train.rows = p.at("rows").get<std::size_t>();
      m.train.cols = p.at("cols").get<std::size_t>();
      m.train.data = doubles(p.at("train"));
      m.labels = p.at("labels").get<std::vector<std::size_t>>();
      if (m.k == 0 || m.train.rows == 0) throw ParseError("invalid k-NN parameters");
      if (m.train.cols != dims || m.n_classes != n_classes) {
        throw SchemaMismatch("k-NN parameters disagree with the schema");
      }
      if (m.train.data.size() != m.train.rows * m.train.cols || m.labels.size() != m.train.rows) {
        throw ParseError("k-NN training matrix is truncated");
      }
      for (auto l : m.labels) {
        if (l >= n_classes) throw SchemaMismatch("k-NN label out of range");
      }
      model.params = std::move(m);
      break;
    }
    case ModelKind::dtree:
      model.params = nodes_from_json(p.at("nodes"), dims, n_classes);
      break;
    case ModelKind::rforest: {
      RandomForest f;
      f.n_classes = p.at("n_classes").get<std::size_t>();
      if (f.n_classes != n_classes) throw SchemaMismatch("forest class count disagrees");
      for (const auto& t : p.at("trees")) f.trees.push_back(nodes_from_json(t, dims, n_classes));
      if (f.trees.empty()) throw ParseError("forest has no trees");
      model.params = std::move(f);
      break;
    }
    case ModelKind::mlp: {
      const auto act = parse_activation(p.at("activation").get<std::string>());
      if (!act) throw ParseError("unknown activation");
      const auto layers = p.at("layers").get<std::vector<std::size_t>>();
      if (layers.size() < 2) throw ParseError("network needs at least two layers");
      if (layers.front() != dims || layers.back() != n_classes) {
        throw SchemaMismatch("network layer sizes disagree with the schema");
      }
      MlpNetwork net = MlpNetwork::init(layers, *act, 0);
      const auto params = doubles(p.at("parameters"));
      if (params.size() != net.parameter_count()) throw ParseError("network parameters truncated");
      net.unflatten(params);
      model.params = std::move(net);
      break;
    }
  }
  return model;
}

}  // namespace

void save_model(std::ostream& sink, const TrainedModel& model) {
  sink << to_json(model).dump(1) << '\n';
  if (!sink) throw Error("failed to write model");
}

void save_model_file(const std::filesystem::path& path, const TrainedModel& model) {
  std::ostringstream buf;
  save_model(buf, model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << buf.str();
  if (!out) throw Error("failed to write " + path.string());
}

TrainedModel load_model(std::istream& source, const FeatureSchema* expected) {
  TrainedModel model;
  try {
    const json j = json::parse(source);
    model = from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  if (expected != nullptr) check_schema(model, *expected);
  return model;
}

TrainedModel load_model_file(const std::filesystem::path& path, const FeatureSchema* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in, expected);
}

}  // namespace driverid
