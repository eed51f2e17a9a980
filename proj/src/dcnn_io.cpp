#include <span>

#include "dcrec/dcnn.hpp"
#include "dcrec/error.hpp"
#include "dcrec/model_io.hpp"

namespace dcrec {

using json = nlohmann::json;

void save_model(const DcnnModel& model, const std::filesystem::path& manifest, const json& meta) {
  const auto& c = model.config();
  Archive a;
  a.meta = meta;
  a.meta["kind"] = "dcnn";
  a.meta["network"] = {{"seq_len", c.seq_len},          {"word_dim", c.word_dim},
                       {"pos_dim", c.pos_dim},          {"widths", c.widths},
                       {"word_filters", c.word_filters}, {"pos_filters", c.pos_filters},
                       {"dropout", c.dropout}};
  model.params().visit([&](const std::string& name, std::span<const double> v) {
    a.tensors.push_back({name, {v.size()}, {v.begin(), v.end()}});
  });
  save_archive(manifest, a);
}

DcnnModel load_model(const std::filesystem::path& manifest, json* meta) {
  const auto a = load_archive(manifest);
  if (a.meta.value("kind", "") != "dcnn")
    throw IoError(manifest.string() + " is not a network artifact");
  DcnnConfig c;
  try {
    const auto& n = a.meta.at("network");
    c.seq_len = n.at("seq_len").get<std::size_t>();
    c.word_dim = n.at("word_dim").get<std::size_t>();
    c.pos_dim = n.at("pos_dim").get<std::size_t>();
    c.widths = n.at("widths").get<std::vector<std::size_t>>();
    c.word_filters = n.at("word_filters").get<std::size_t>();
    c.pos_filters = n.at("pos_filters").get<std::size_t>();
    c.dropout = n.at("dropout").get<double>();
  } catch (const json::exception& e) {
    throw IoError("bad network description in " + manifest.string() + ": " + e.what());
  }
  auto model = DcnnModel::zeros(c);
  model.mutable_params().visit([&](const std::string& name, std::span<double> v) {
    const auto& t = a.get(name);
    if (t.values.size() != v.size()) throw IoError("tensor '" + name + "' has the wrong size");
    std::copy(t.values.begin(), t.values.end(), v.begin());
  });
  if (meta) *meta = a.meta;
  return model;
}

}  // namespace dcrec
