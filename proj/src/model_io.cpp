#include "dsetp/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace dsetp {

using nlohmann::json;

namespace {

json vocabulary_json(const Vocabulary& v) {
  json entries = json::array();
  for (std::size_t id = v.has_unknown() ? 1 : 0; id < v.size(); ++id)
    entries.push_back(json::array({v.symbol(id), v.count(id)}));
  return {{"unknown", v.has_unknown()}, {"entries", entries}};
}

Vocabulary vocabulary_from(const json& j) {
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& e : j.at("entries")) entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
  return Vocabulary::from_entries(std::move(entries), j.at("unknown").get<bool>());
}

void write_floats(std::ostream& out, const nn::Matrix<float>& m) {
  std::string buf(static_cast<std::size_t>(m.size()) * 4, '\0');
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    auto bits = std::bit_cast<std::uint32_t>(m.data()[k]);
    for (int b = 0; b < 4; ++b) buf[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_floats(std::istream& in, nn::Matrix<float>& m, const std::string& name) {
  std::string buf(static_cast<std::size_t>(m.size()) * 4, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw ModelFormatError("model file truncated in parameter " + name);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t(static_cast<unsigned char>(buf[4 * k + b])) << (8 * b);
    m.data()[k] = std::bit_cast<float>(bits);
  }
}

}  // namespace

void save_model(const Model<float>& model, std::ostream& out) {
  const auto& inv = model.inventories();
  json header;
  header["version"] = kModelFormatVersion;
  header["config"] = model.config().fields();
  json rare = json::array();
  for (std::size_t id = 0; id < inv.unk_replaceable.size(); ++id)
    if (inv.unk_replaceable[id]) rare.push_back(id);
  header["inventories"] = {{"words", vocabulary_json(inv.words)},
                           {"chars", vocabulary_json(inv.chars)},
                           {"pos", vocabulary_json(inv.pos)},
                           {"nonterminals", vocabulary_json(inv.nonterminals)},
                           {"rare_words", rare}};
  json params = json::array();
  const auto& w = model.weights();
  for (nn::ParamId id = 0; id < w.size(); ++id)
    params.push_back({{"name", w.name(id)}, {"rows", w.value(id).rows()}, {"cols", w.value(id).cols()}});
  header["params"] = params;

  out << kModelMagic << '\n' << header.dump() << '\n';
  for (nn::ParamId id = 0; id < w.size(); ++id) write_floats(out, w.value(id));
  const auto& a = model.averaged();
  for (nn::ParamId id = 0; id < a.size(); ++id) write_floats(out, a.value(id));
  if (!out) throw std::runtime_error("failed writing model");
}

void save_model(const Model<float>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_model(model, out);
}

Model<float> load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelMagic) throw ModelFormatError("not a model file (bad magic)");
  if (!std::getline(in, line)) throw ModelFormatError("model file truncated in header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model header: ") + e.what());
  }
  ModelConfig config;
  Inventories inv;
  nn::ParamSet<float> weights;
  try {
    const int version = header.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
    for (const auto& [k, v] : header.at("config").items()) config.set(k, v.get<std::string>());
    const auto& ji = header.at("inventories");
    inv.words = vocabulary_from(ji.at("words"));
    inv.chars = vocabulary_from(ji.at("chars"));
    inv.pos = vocabulary_from(ji.at("pos"));
    inv.nonterminals = vocabulary_from(ji.at("nonterminals"));
    inv.unk_replaceable.assign(inv.words.size(), false);
    for (const auto& id : ji.at("rare_words")) inv.unk_replaceable.at(id.get<std::size_t>()) = true;
    for (const auto& p : header.at("params"))
      weights.add(p.at("name").get<std::string>(), p.at("rows").get<Eigen::Index>(), p.at("cols").get<Eigen::Index>());
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("malformed model header: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ModelFormatError(std::string("malformed model header: ") + e.what());
  }
  auto averaged = weights;
  for (nn::ParamId id = 0; id < weights.size(); ++id) read_floats(in, weights.value(id), weights.name(id));
  for (nn::ParamId id = 0; id < averaged.size(); ++id) read_floats(in, averaged.value(id), averaged.name(id));
  if (in.peek() != std::char_traits<char>::eof()) throw ModelFormatError("trailing bytes after model parameters");
  try {
    return Model<float>(std::move(config), std::move(inv), std::move(weights), std::move(averaged));
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("model does not match its header: ") + e.what());
  }
}

Model<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  return load_model(in);
}

}  // namespace dsetp
