/* Copyright 2026 The xddpm Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "xddpm/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace xddpm {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << bytes;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// Typed accessors that name the key on failure.
double get_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw Error("config key '" + key + "': expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw Error("config key '" + key + "': expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_unsigned(const Json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw Error("config key '" + key + "': expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) throw Error("config key '" + key + "': expected true or false");
  return v.get<bool>();
}

std::string get_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw Error("config key '" + key + "': expected a string");
  return v.get<std::string>();
}

std::vector<Eigen::Index> get_widths(const Json& v, const std::string& key) {
  if (!v.is_array()) throw Error("config key '" + key + "': expected an array of integers");
  std::vector<Eigen::Index> out;
  for (const auto& e : v) out.push_back(static_cast<Eigen::Index>(get_integer(e, key)));
  return out;
}

using Setter = std::function<void(TrainConfig&, const Json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"lambda_vib", [](TrainConfig& c, const Json& v) { c.lambda_vib = get_number(v, "lambda_vib"); }},
      {"beta_ib", [](TrainConfig& c, const Json& v) { c.beta_ib = get_number(v, "beta_ib"); }},
      {"lr", [](TrainConfig& c, const Json& v) { c.lr = get_number(v, "lr"); }},
      {"batch_size", [](TrainConfig& c, const Json& v) { c.batch_size = get_integer(v, "batch_size"); }},
      {"total_steps", [](TrainConfig& c, const Json& v) { c.total_steps = get_integer(v, "total_steps"); }},
      {"seed", [](TrainConfig& c, const Json& v) { c.seed = get_unsigned(v, "seed"); }},
      {"D", [](TrainConfig& c, const Json& v) { c.dim = get_integer(v, "D"); }},
      {"d", [](TrainConfig& c, const Json& v) { c.signal_dim = get_integer(v, "d"); }},
      {"schedule", [](TrainConfig& c, const Json& v) {
         try {
           c.schedule_kind = parse_schedule_kind(get_string(v, "schedule"));
         } catch (const Error& e) {
           throw Error(std::string("config key 'schedule': ") + e.what());
         }
       }},
      {"T", [](TrainConfig& c, const Json& v) { c.steps_T = static_cast<int>(get_integer(v, "T")); }},
      {"beta_start", [](TrainConfig& c, const Json& v) {
         c.beta_start = v.is_null() ? std::nullopt : std::optional<double>(get_number(v, "beta_start"));
       }},
      {"beta_end", [](TrainConfig& c, const Json& v) {
         c.beta_end = v.is_null() ? std::nullopt : std::optional<double>(get_number(v, "beta_end"));
       }},
      {"denoiser_hidden", [](TrainConfig& c, const Json& v) { c.denoiser_hidden = get_widths(v, "denoiser_hidden"); }},
      {"mask_hidden", [](TrainConfig& c, const Json& v) { c.mask_hidden = get_widths(v, "mask_hidden"); }},
      {"decoder_hidden", [](TrainConfig& c, const Json& v) { c.decoder_hidden = get_widths(v, "decoder_hidden"); }},
      {"time_width", [](TrainConfig& c, const Json& v) { c.time_width = get_integer(v, "time_width"); }},
      {"loss_threshold", [](TrainConfig& c, const Json& v) { c.loss_threshold = get_number(v, "loss_threshold"); }},
      {"log_every", [](TrainConfig& c, const Json& v) { c.log_every = get_integer(v, "log_every"); }},
      {"record_wall_ms", [](TrainConfig& c, const Json& v) { c.record_wall_ms = get_bool(v, "record_wall_ms"); }},
      {"dataset", [](TrainConfig& c, const Json& v) { c.dataset.kind = get_string(v, "dataset"); }},
      {"N", [](TrainConfig& c, const Json& v) { c.dataset.n = get_integer(v, "N"); }},
      {"k", [](TrainConfig& c, const Json& v) { c.dataset.relevant = get_integer(v, "k"); }},
      {"signal_noise", [](TrainConfig& c, const Json& v) { c.dataset.signal_noise = get_number(v, "signal_noise"); }},
      {"data_seed", [](TrainConfig& c, const Json& v) { c.dataset.seed = get_unsigned(v, "data_seed"); }},
  };
  return table;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json config_to_json(const TrainConfig& c) {
  Json j;
  j["lambda_vib"] = c.lambda_vib;
  j["beta_ib"] = c.beta_ib;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["total_steps"] = c.total_steps;
  j["seed"] = c.seed;
  j["D"] = c.dim;
  j["d"] = c.signal_dim;
  j["schedule"] = to_string(c.schedule_kind);
  j["T"] = c.steps_T;
  j["beta_start"] = optional_number(c.beta_start);
  j["beta_end"] = optional_number(c.beta_end);
  j["denoiser_hidden"] = c.denoiser_hidden;
  j["mask_hidden"] = c.mask_hidden;
  j["decoder_hidden"] = c.decoder_hidden;
  j["time_width"] = c.time_width;
  j["loss_threshold"] = c.loss_threshold;
  j["log_every"] = c.log_every;
  j["record_wall_ms"] = c.record_wall_ms;
  j["dataset"] = c.dataset.kind;
  j["N"] = c.dataset.n;
  j["k"] = c.dataset.relevant;
  j["signal_noise"] = c.dataset.signal_noise;
  j["data_seed"] = c.dataset.seed;
  return j;
}

TrainConfig config_from_json(const Json& j, std::ostream* notices) {
  if (!j.is_object()) throw Error("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!setters().contains(key)) throw Error("config key '" + key + "': unknown key");
  TrainConfig cfg;
  for (const auto& [key, set] : setters()) {
    if (auto it = j.find(key); it != j.end()) {
      set(cfg, *it);
    } else if (notices) {
      *notices << "config: '" << key << "' not set, using default " << config_to_json(cfg)[key].dump()
               << "\n";
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const fs::path& path, std::ostream* notices) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error("config '" + path.string() + "': malformed JSON: " + e.what());
  }
  return config_from_json(j, notices);
}

std::string config_hash(const TrainConfig& cfg) {
  const std::string bytes = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---- checkpoints ---------------------------------------------------------

namespace {

Json params_to_json(const ParamVector& p) {
  Json j = Json::object();
  for (const auto& b : p.layout().blocks()) {
    std::vector<double> flat(p.values().data() + b.offset, p.values().data() + b.offset + b.size());
    j[b.name] = flat;
  }
  return j;
}

ParamVector params_from_json(const Json& j, const Layout& layout, const std::string& what) {
  if (!j.is_object()) throw Error("checkpoint: '" + what + "' must be an object");
  ParamVector p(layout);
  for (const auto& b : layout.blocks()) {
    auto it = j.find(b.name);
    if (it == j.end() || !it->is_array())
      throw Error("checkpoint: '" + what + "' is missing block '" + b.name + "'");
    if (static_cast<Eigen::Index>(it->size()) != b.size())
      throw Error("checkpoint: block '" + what + "." + b.name + "' has " +
                  std::to_string(it->size()) + " values, expected " + std::to_string(b.size()));
    Eigen::Index i = 0;
    for (const auto& v : *it) {
      if (!v.is_number()) throw Error("checkpoint: non-numeric value in '" + what + "." + b.name + "'");
      p.values()[b.offset + i++] = v.get<double>();
    }
  }
  if (j.size() != layout.blocks().size())
    throw Error("checkpoint: '" + what + "' has unexpected blocks");
  return p;
}

Json moments_to_json(const AdamMoments& m) {
  return Json{{"m", params_to_json(m.m)}, {"v", params_to_json(m.v)}};
}

AdamMoments moments_from_json(const Json& j, const Layout& layout, const std::string& what) {
  if (!j.is_object() || !j.contains("m") || !j.contains("v"))
    throw Error("checkpoint: optimizer entry '" + what + "' malformed");
  return {params_from_json(j.at("m"), layout, what + ".m"),
          params_from_json(j.at("v"), layout, what + ".v")};
}

}  // namespace

Json checkpoint_to_json(const Checkpoint& c) {
  Json j;
  j["format_version"] = c.format_version;
  j["mode"] = to_string(c.mode);
  j["step"] = c.state.step;
  j["config"] = config_to_json(c.config);
  j["theta"] = params_to_json(c.state.model.theta);
  j["phi_mask"] = params_to_json(c.state.model.phi_mask);
  j["phi_sig"] = params_to_json(c.state.model.phi_sig);
  j["optimizer"] = {{"step", c.state.optimizer.step},
                    {"theta", moments_to_json(c.state.optimizer.theta)},
                    {"phi_mask", moments_to_json(c.state.optimizer.phi_mask)},
                    {"phi_sig", moments_to_json(c.state.optimizer.phi_sig)}};
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format_version"))
    throw Error("checkpoint: missing format_version");
  const auto& ver = j.at("format_version");
  if (!ver.is_number_integer() || ver.get<int>() != kCheckpointFormatVersion)
    throw Error("checkpoint: unsupported format_version " + ver.dump() + " (expected " +
                std::to_string(kCheckpointFormatVersion) + ")");
  for (const char* key : {"mode", "step", "config", "theta", "phi_mask", "phi_sig", "optimizer"})
    if (!j.contains(key)) throw Error(std::string("checkpoint: missing '") + key + "'");

  Checkpoint c;
  c.config = config_from_json(j.at("config"));
  c.mode = parse_train_mode(j.at("mode").get<std::string>());
  const Model shape = make_model_shape(c.config);
  c.state.model = shape;
  c.state.step = j.at("step").get<std::int64_t>();
  c.state.model.theta = params_from_json(j.at("theta"), shape.theta.layout(), "theta");
  c.state.model.phi_mask = params_from_json(j.at("phi_mask"), shape.phi_mask.layout(), "phi_mask");
  c.state.model.phi_sig = params_from_json(j.at("phi_sig"), shape.phi_sig.layout(), "phi_sig");
  const Json& opt = j.at("optimizer");
  c.state.optimizer.step = opt.at("step").get<std::int64_t>();
  c.state.optimizer.theta = moments_from_json(opt.at("theta"), shape.theta.layout(), "theta");
  c.state.optimizer.phi_mask =
      moments_from_json(opt.at("phi_mask"), shape.phi_mask.layout(), "phi_mask");
  c.state.optimizer.phi_sig = moments_from_json(opt.at("phi_sig"), shape.phi_sig.layout(), "phi_sig");
  return c;
}

std::string dump_checkpoint(const Checkpoint& ckpt) { return checkpoint_to_json(ckpt).dump(1) + "\n"; }

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  write_file(path, dump_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error("checkpoint '" + path.string() + "': malformed JSON: " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const Json::exception& e) {
    throw Error("checkpoint '" + path.string() + "': " + e.what());
  }
}

// ---- tables --------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const TrainTrace& trace, const fs::path& path) {
  std::string out = "step,denoise,kl,signal_mse,total,ema_denoise,wall_ms\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.loss.step) + ',' + format_double(r.loss.denoise) + ',' +
           format_double(r.loss.kl) + ',' + format_double(r.loss.signal_mse) + ',' +
           format_double(r.loss.total) + ',' + format_double(r.ema_denoise) + ',' +
           format_double(r.wall_ms) + '\n';
  }
  write_file(path, out);
}

void write_samples_csv(const Matrix& w, const fs::path& path) {
  std::string out;
  for (Eigen::Index j = 0; j < w.rows(); ++j) out += (j ? ",x" : "x") + std::to_string(j);
  out += '\n';
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      if (j) out += ',';
      out += format_double(w(j, c));
    }
    out += '\n';
  }
  write_file(path, out);
}

Matrix read_samples_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error("samples csv '" + path.string() + "' is empty");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix();
  Matrix w(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != rows.front().size()) throw Error("samples csv: ragged rows");
    for (std::size_t j = 0; j < rows[c].size(); ++j)
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = rows[c][j];
  }
  return w;
}

void write_mask_csv(const Vector& mask_mean, const fs::path& path) {
  std::string out = "coordinate,mask_mean\n";
  for (Eigen::Index j = 0; j < mask_mean.size(); ++j)
    out += std::to_string(j) + ',' + format_double(mask_mean[j]) + '\n';
  write_file(path, out);
}

Json eval_report_to_json(const EvalReport& rep) {
  Json coords = Json::array();
  for (const auto& c : rep.coordinates) {
    coords.push_back({{"index", c.index},
                      {"relevant", c.relevant},
                      {"mask_mean", c.mask_mean},
                      {"mean", c.moments.mean},
                      {"var", c.moments.var},
                      {"skewness", c.moments.skewness},
                      {"excess_kurtosis", c.moments.excess_kurtosis},
                      {"ks_standardized", c.ks_standardized},
                      {"positive_fraction", c.positive_fraction},
                      {"data_var", c.data_var}});
  }
  return Json{{"mask_auc", rep.mask_auc},
              {"max_abs_cross_corr", rep.max_abs_cross_corr},
              {"predicted_irrelevant_var", rep.predicted_irrelevant_var},
              {"empirical_irrelevant_var", rep.empirical_irrelevant_var},
              {"max_irrelevant_ks", rep.max_irrelevant_ks},
              {"ks_critical", rep.ks_critical},
              {"n_gen", rep.n_gen},
              {"coordinates", coords}};
}

void write_per_coordinate_csv(const EvalReport& rep, const fs::path& path) {
  std::string out =
      "coordinate,relevant,mask_mean,mean,var,skewness,excess_kurtosis,ks_standardized,"
      "positive_fraction,data_var\n";
  for (const auto& c : rep.coordinates) {
    out += std::to_string(c.index) + ',' + (c.relevant ? "1" : "0") + ',' +
           format_double(c.mask_mean) + ',' + format_double(c.moments.mean) + ',' +
           format_double(c.moments.var) + ',' + format_double(c.moments.skewness) + ',' +
           format_double(c.moments.excess_kurtosis) + ',' + format_double(c.ks_standardized) +
           ',' + format_double(c.positive_fraction) + ',' + format_double(c.data_var) + '\n';
  }
  write_file(path, out);
}

void write_json(const Json& j, const fs::path& path) { write_file(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error("'" + path.string() + "': malformed JSON: " + e.what());
  }
}

// ---- run bookkeeping -----------------------------------------------------

Json RunManifest::to_json() const {
  Json j{{"command_line", command_line}, {"command", command},   {"config_hash", config_hash},
         {"seed", seed},                 {"started", started},   {"finished", finished},
         {"artifacts", artifacts}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OutDirLock::OutDirLock(const fs::path& dir) : lock_path_(dir / ".lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (!f) throw Error("output directory '" + dir.string() + "' is locked by another run");
  std::fclose(f);
}

OutDirLock::~OutDirLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

}  // namespace xddpm
