#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "chac/sim.hpp"

namespace chac {

std::uint64_t fnv1a64(std::string_view data);

/// Raw little-endian float64 array, row-major; shape lives in the sidecar.
void write_f64_array(const std::filesystem::path& path, const double* data,
                     std::int64_t count);

void write_text(const std::filesystem::path& path, const std::string& text);

std::uint64_t file_digest(const std::filesystem::path& path);

std::string energy_csv(const EnergyReport& report);

/// Snapshot stack + sidecar for one trajectory; returns the written file names.
struct TrajectoryFiles {
  std::string data_file;
  std::string sidecar_file;
  std::string energy_file;
};

TrajectoryFiles write_trajectory(const std::filesystem::path& dir,
                                 const Trajectory& traj, const SimConfig& cfg,
                                 std::uint64_t config_hash);

}  // namespace chac
