#include "sgforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgforge/error.hpp"

namespace sgforge {

namespace {

constexpr const char* kFormat = "sgforge-checkpoint";
constexpr int kFormatVersion = 1;

void put_le32(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((bits >> shift) & 0xFFu));
}

float get_le32(const std::string& in, std::size_t offset) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k)
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(k)])) << (8 * k);
  return std::bit_cast<float>(bits);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

}  // namespace

std::string encode_tensors(const Parameters& params, nlohmann::json& table) {
  std::string payload;
  table = nlohmann::json::array();
  params.for_each([&](const std::string& name, const Matrix& m) {
    table.push_back({{"name", name},
                     {"shape", {m.rows(), m.cols()}},
                     {"offset", payload.size()},
                     {"count", m.size()}});
    for (Eigen::Index i = 0; i < m.size(); ++i) put_le32(payload, static_cast<float>(m.data()[i]));
  });
  return payload;
}

Parameters decode_tensors(const std::string& payload, const nlohmann::json& table, const ModelConfig& config) {
  Parameters params = Parameters::zeros(config);
  if (!table.is_array()) throw Error(ErrorKind::ParseError, "manifest tensor table must be an array");
  std::size_t k = 0;
  params.for_each([&](const std::string& name, Matrix& m) {
    if (k >= table.size()) throw Error(ErrorKind::ShapeMismatch, "manifest is missing tensor " + name);
    const auto& entry = table[k++];
    const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
    if (entry.at("name").get<std::string>() != name || shape.size() != 2 || shape[0] != m.rows() ||
        shape[1] != m.cols())
      throw Error(ErrorKind::ShapeMismatch, "tensor " + entry.at("name").get<std::string>() +
                                                " does not match the model config at " + name);
    const auto offset = entry.at("offset").get<std::size_t>();
    if (offset + 4 * static_cast<std::size_t>(m.size()) > payload.size())
      throw Error(ErrorKind::ShapeMismatch, "tensor payload truncated at " + name);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = static_cast<double>(get_le32(payload, offset + 4 * static_cast<std::size_t>(i)));
  });
  if (k != table.size()) throw Error(ErrorKind::ShapeMismatch, "manifest lists extra tensors");
  return params;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json table;
  const std::string payload = encode_tensors(ckpt.params, table);

  nlohmann::json merges = nlohmann::json::array();
  for (const auto& [l, r] : ckpt.tokenizer.merges().merges()) merges.push_back({l, r});

  nlohmann::json manifest = {
      {"format", kFormat},
      {"format_version", kFormatVersion},
      {"model_config", ckpt.model_config.to_json()},
      {"train_config", ckpt.train_config},
      {"tokenizer", {{"mode", std::string(to_string(ckpt.tokenizer.mode()))},
                     {"vocab", ckpt.tokenizer.vocab().tokens()},
                     {"merges", merges}}},
      {"step", ckpt.step},
      {"metrics", ckpt.metrics},
      {"tensors", table},
      {"payload_bytes", payload.size()},
  };
  write_file(std::filesystem::path(dir) / kTensorFile, payload);
  write_file(std::filesystem::path(dir) / kManifestFile, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& dir) {
  const std::string text = read_file(std::filesystem::path(dir) / kManifestFile);
  Checkpoint ckpt;
  try {
    const auto manifest = nlohmann::json::parse(text);
    if (manifest.value("format", std::string()) != kFormat)
      throw Error(ErrorKind::ParseError, dir + " is not an sgforge checkpoint");
    if (manifest.value("format_version", 0) != kFormatVersion)
      throw Error(ErrorKind::ParseError, "unsupported checkpoint version");
    ckpt.model_config = ModelConfig::from_json(manifest.at("model_config"));
    ckpt.train_config = manifest.at("train_config");
    const auto& tok = manifest.at("tokenizer");
    std::vector<std::pair<std::string, std::string>> merges;
    for (const auto& m : tok.at("merges")) merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
    ckpt.tokenizer = Tokenizer(parse_tokenizer_mode(tok.at("mode").get<std::string>()),
                               Vocabulary(tok.at("vocab").get<std::vector<std::string>>()), BpeMerges(std::move(merges)));
    ckpt.step = manifest.at("step").get<std::uint64_t>();
    ckpt.metrics = manifest.at("metrics");
    const std::string payload = read_file(std::filesystem::path(dir) / kTensorFile);
    if (payload.size() != manifest.at("payload_bytes").get<std::size_t>())
      throw Error(ErrorKind::ShapeMismatch, "payload size disagrees with manifest");
    ckpt.params = decode_tensors(payload, manifest.at("tensors"), ckpt.model_config);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, dir + "/" + kManifestFile + ": " + e.what());
  }
  return ckpt;
}

}  // namespace sgforge
