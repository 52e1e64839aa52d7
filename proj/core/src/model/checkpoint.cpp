#include "mobcl/model/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace mobcl {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'B', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw DataError("checkpoint: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  auto n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError("checkpoint: truncated stream");
  return s;
}

}  // namespace

std::string config_to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["grid"] = {{"width", cfg.grid.width},
               {"height", cfg.grid.height},
               {"cell_size_m", cfg.grid.cell_size_m}};
  j["time"] = {{"slots_per_day", cfg.time.slots_per_day},
               {"num_days", cfg.time.num_days}};
  j["features"] = {{"top_k", cfg.features.top_k},
                   {"day_slot_lo", cfg.features.day_slot_lo},
                   {"day_slot_hi", cfg.features.day_slot_hi},
                   {"timedelta_cap", cfg.features.timedelta_cap},
                   {"week_anchor", cfg.features.week_anchor}};
  j["poi_categories"] = cfg.poi_categories;
  j["embed_dim"] = cfg.embed_dim;
  j["num_layers"] = cfg.num_layers;
  j["num_heads"] = cfg.num_heads;
  j["ffn_dim"] = cfg.ffn_dim;
  j["lambda_dist"] = cfg.lambda_dist;
  j["lambda_dir"] = cfg.lambda_dir;
  j["dropout"] = cfg.dropout;
  j["seed"] = cfg.seed;
  return j.dump();
}

ModelConfig config_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  ModelConfig cfg;
  cfg.grid.width = j.at("grid").at("width");
  cfg.grid.height = j.at("grid").at("height");
  cfg.grid.cell_size_m = j.at("grid").at("cell_size_m");
  cfg.time.slots_per_day = j.at("time").at("slots_per_day");
  cfg.time.num_days = j.at("time").at("num_days");
  cfg.features.top_k = j.at("features").at("top_k");
  cfg.features.day_slot_lo = j.at("features").at("day_slot_lo");
  cfg.features.day_slot_hi = j.at("features").at("day_slot_hi");
  cfg.features.timedelta_cap = j.at("features").at("timedelta_cap");
  cfg.features.week_anchor = j.at("features").at("week_anchor");
  cfg.poi_categories = j.at("poi_categories");
  cfg.embed_dim = j.at("embed_dim");
  cfg.num_layers = j.at("num_layers");
  cfg.num_heads = j.at("num_heads");
  cfg.ffn_dim = j.at("ffn_dim");
  cfg.lambda_dist = j.at("lambda_dist");
  cfg.lambda_dir = j.at("lambda_dir");
  cfg.dropout = j.at("dropout");
  cfg.seed = j.at("seed");
  return cfg;
}

void save_checkpoint(const Network& model, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  write_string(out, config_to_json(model.config()));
  const ParamStore& ps = model.params();
  write_u64(out, ps.names().size());
  for (const auto& name : ps.names()) {
    const Matrix& v = ps.at(name).value;
    write_string(out, name);
    write_u64(out, static_cast<std::uint64_t>(v.rows()));
    write_u64(out, static_cast<std::uint64_t>(v.cols()));
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      out.write(reinterpret_cast<const char*>(v.row(i).eval().data()),
                static_cast<std::streamsize>(sizeof(double) * v.cols()));
  }
  if (!out) throw DataError("checkpoint: write failed");
}

std::shared_ptr<Network> load_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw DataError("checkpoint: bad magic");
  ModelConfig cfg = config_from_json(read_string(in));
  auto model = std::make_shared<Network>(cfg);
  auto count = read_u64(in);
  if (count != model->params().names().size())
    throw DataError("checkpoint: tensor count mismatch");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = read_string(in);
    auto rows = static_cast<Eigen::Index>(read_u64(in));
    auto cols = static_cast<Eigen::Index>(read_u64(in));
    Tensor& t = model->params().at(name);
    if (t.value.rows() != rows || t.value.cols() != cols)
      throw DataError("checkpoint: shape mismatch for " + name);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * cols));
      if (!in) throw DataError("checkpoint: truncated tensor " + name);
      for (Eigen::Index c = 0; c < cols; ++c)
        t.value(r, c) = row[static_cast<std::size_t>(c)];
    }
  }
  return model;
}

void save_checkpoint_file(const Network& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  save_checkpoint(model, out);
}

std::shared_ptr<Network> load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace mobcl
