#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "ncdlab/errors.hpp"
#include "ncdlab/nnet.hpp"

namespace ncdlab::nnet {

namespace {

constexpr char kMagic[8] = {'N', 'C', 'D', 'L', 'M', 'L', 'P', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw IoError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

nlohmann::json config_to_json(const NetConfig& c) {
  return {{"input_dim", c.input_dim},
          {"hidden_widths", c.hidden_widths},
          {"n_outputs", c.n_outputs},
          {"seed", c.seed},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"target_train_accuracy", c.target_train_accuracy}};
}

NetConfig config_from_json(const nlohmann::json& j) {
  NetConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  c.n_outputs = j.at("n_outputs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.target_train_accuracy = j.at("target_train_accuracy").get<double>();
  return c;
}

}  // namespace

void save_checkpoint(const Model& model, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  std::string config = config_to_json(model.config()).dump();
  put_u64(out, config.size());
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  put_u32(out, static_cast<std::uint32_t>(model.layer_count()));
  for (const auto& l : model.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.fan_in));
    put_u32(out, static_cast<std::uint32_t>(l.fan_out));
  }
  put_u64(out, model.param_count());
  const auto& p = model.parameters();
  for (Eigen::Index i = 0; i < p.size(); ++i) put_f64(out, p[i]);
  put_u32(out, static_cast<std::uint32_t>(model.training_log.size()));
  for (const auto& rec : model.training_log) {
    put_u32(out, static_cast<std::uint32_t>(rec.epoch));
    put_f64(out, rec.loss);
    put_f64(out, rec.accuracy);
  }
  if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  save_checkpoint(model, f);
}

Model load_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("not an ncdlab MLP checkpoint");
  auto version = get_u32(in);
  if (version != kFormatVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  auto config_len = get_u64(in);
  if (config_len > (1u << 20)) throw IoError("corrupt checkpoint config block");
  std::string config(config_len, '\0');
  if (!in.read(config.data(), static_cast<std::streamsize>(config_len)))
    throw IoError("truncated checkpoint");
  NetConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(config));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad checkpoint config: ") + e.what());
  }
  Model model(cfg);

  auto n_layers = get_u32(in);
  if (n_layers != static_cast<std::uint32_t>(model.layer_count()))
    throw IoError("checkpoint layer count disagrees with its config");
  for (const auto& l : model.layers()) {
    auto fan_in = get_u32(in);
    auto fan_out = get_u32(in);
    if (fan_in != static_cast<std::uint32_t>(l.fan_in) ||
        fan_out != static_cast<std::uint32_t>(l.fan_out))
      throw IoError("checkpoint layer dimensions disagree with its config");
  }
  if (get_u64(in) != model.param_count()) throw IoError("checkpoint parameter count mismatch");
  auto& p = model.parameters();
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = get_f64(in);
  auto n_log = get_u32(in);
  for (std::uint32_t i = 0; i < n_log; ++i) {
    EpochRecord rec;
    rec.epoch = static_cast<int>(get_u32(in));
    rec.loss = get_f64(in);
    rec.accuracy = get_f64(in);
    model.training_log.push_back(rec);
  }
  return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return load_checkpoint(f);
}

}  // namespace ncdlab::nnet
