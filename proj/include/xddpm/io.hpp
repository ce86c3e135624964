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

#ifndef XDDPM_IO_HPP_
#define XDDPM_IO_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xddpm/config.hpp"
#include "xddpm/eval.hpp"
#include "xddpm/sampler.hpp"
#include "xddpm/trainer.hpp"

namespace xddpm {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kCheckpointFormatVersion = 1;

// ---- configuration -------------------------------------------------------

/// Parses a flat JSON object. Unknown keys and invalid values raise Error
/// naming the key; each missing key is reported on `notices` (if non-null)
/// and filled from its default.
TrainConfig config_from_json(const Json& j, std::ostream* notices = nullptr);
Json config_to_json(const TrainConfig& cfg);
TrainConfig load_config(const fs::path& path, std::ostream* notices = nullptr);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const TrainConfig& cfg);

// ---- checkpoints ---------------------------------------------------------

struct Checkpoint {
  TrainConfig config;
  TrainMode mode = TrainMode::kXddpm;
  TrainState state;
  int format_version = kCheckpointFormatVersion;
};

Json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const Json& j);
/// Serialized bytes; save -> load -> save is byte-stable.
std::string dump_checkpoint(const Checkpoint& ckpt);
void save_checkpoint(const Checkpoint& ckpt, const fs::path& path);
Checkpoint load_checkpoint(const fs::path& path);

// ---- tables --------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_trace_csv(const TrainTrace& trace, const fs::path& path);
/// One row per sample (column of `w`), D columns.
void write_samples_csv(const Matrix& w, const fs::path& path);
Matrix read_samples_csv(const fs::path& path);
void write_mask_csv(const Vector& mask_mean, const fs::path& path);

Json eval_report_to_json(const EvalReport& rep);
void write_per_coordinate_csv(const EvalReport& rep, const fs::path& path);

void write_json(const Json& j, const fs::path& path);
Json read_json(const fs::path& path);

// ---- run bookkeeping -----------------------------------------------------

struct RunManifest {
  std::string command_line;
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> artifacts;
  Json extra = Json::object();

  Json to_json() const;
};

/// ISO-8601 UTC timestamp.
std::string utc_now();

/// Exclusive lock on an output directory via a `.lock` file; released on
/// destruction. Throws Error if the directory is already locked.
class OutDirLock {
 public:
  explicit OutDirLock(const fs::path& dir);
  ~OutDirLock();
  OutDirLock(const OutDirLock&) = delete;
  OutDirLock& operator=(const OutDirLock&) = delete;

 private:
  fs::path lock_path_;
};

}  // namespace xddpm

#endif  // XDDPM_IO_HPP_
