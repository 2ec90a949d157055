#pragma once

// Persistence of demonstrations, situations, models and run logs in one
// versioned JSON container format, plus scripted expert-task generators.
//
// Container layout (all matrices row-major):
//
//   {"format": "tpaug", "kind": "<dataset|model|situation>", "version": 1, ...}
//
//   dataset:   "mode": "time"|"trajectory", "p", "n_frames",
//              "demos": [{"frames": [FRAME...], "inputs": MAT, "outputs": MAT}]
//   model:     "mode", "input_dim", "dim", "weights": [K],
//              "frames": [[{"mean": [D], "cov": [D*D]} x K] x N]
//   situation: "p", "frames": [FRAME...]
//
//   FRAME = {"rotation": [p*p], "translation": [p]}
//   MAT   = {"rows": T, "cols": d, "data": [T*d]}
//
// Run logs are JSON lines: a header record (kind "runlog"), one record per
// iteration, and a closing summary record.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tpaug/augment.hpp"
#include "tpaug/frames.hpp"
#include "tpaug/tpgmm.hpp"

namespace tpaug {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kFormatTag = "tpaug";

struct DatasetFile {
  int version = kFormatVersion;
  Mode mode = Mode::TimeBased;
  int p = 2;
  int n_frames = 1;
  std::vector<Demonstration> demos;

  /// Builds a dataset from demonstrations, inferring mode, p and N.
  static DatasetFile from_demos(std::vector<Demonstration> demos);
  /// Throws ArgumentError when demos disagree with the header fields.
  void validate() const;

  bool operator==(const DatasetFile&) const = default;
};

std::string encode(const DatasetFile& data);
std::string encode(const TpGmm& model);
std::string encode(const Situation& situation);
std::string encode(const RunLog& log);

DatasetFile decode_dataset(std::string_view text);
TpGmm decode_model(std::string_view text);
Situation decode_situation(std::string_view text);
RunLog decode_run_log(std::string_view text);

/// Whole-file write to a sibling temporary, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

void save(const DatasetFile& data, const std::filesystem::path& path);
void save(const TpGmm& model, const std::filesystem::path& path);
void save(const Situation& situation, const std::filesystem::path& path);
void save(const RunLog& log, const std::filesystem::path& path);

DatasetFile load_dataset(const std::filesystem::path& path);
TpGmm load_model(const std::filesystem::path& path);
Situation load_situation(const std::filesystem::path& path);
RunLog load_run_log(const std::filesystem::path& path);

/// Comma-separated matrix with an optional header line.
std::string to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});

// Scripted 2D start-to-goal task.
//
// Start frame: identity at the origin. Goal frame: translation uniform in
// [2,4] x [0,2], orientation uniform in [-60, 60] degrees. Each demo is a
// cubic Hermite curve leaving the start along its local +y and entering the
// goal along its local -y, plus a seeded bump that vanishes (with its
// derivative) at both ends. Times are uniform on [0, 1].
struct Task2dBounds {
  static constexpr double goal_x_min = 2.0;
  static constexpr double goal_x_max = 4.0;
  static constexpr double goal_y_min = 0.0;
  static constexpr double goal_y_max = 2.0;
  static constexpr double goal_angle_max = 1.0471975511965976;  // 60 degrees
  static constexpr double tangent_scale = 1.2;                  // x start-goal distance
  static constexpr double jitter_scale = 0.08;                  // x start-goal distance
};

DatasetFile generate_2d_task(int n_situations, int samples_per_demo, std::uint64_t seed);

// Scripted 3D reach-over-an-arm task (trajectory mode), two frames at the
// wrist and the shoulder with x axes pointing toward the elbow. The path
// runs from above the wrist over the elbow to above the shoulder.
DatasetFile generate_3d_task(int n_situations, int samples_per_demo, std::uint64_t seed);

}  // namespace tpaug
