#include "chac/io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace chac {

static_assert(std::endian::native == std::endian::little,
              "output format is little-endian; add byte swapping for this target");

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_f64_array(const std::filesystem::path& path, const double* data,
                     std::int64_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data),
            std::streamsize(count * std::int64_t(sizeof(double))));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string s = ss.str();
  return fnv1a64(s);
}

std::string energy_csv(const EnergyReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "t,mass,L2,H1,H2,free_energy\n";
  for (std::size_t i = 0; i < report.t.size(); ++i)
    out << report.t[i] << ',' << report.mass[i] << ',' << report.l2_sq[i] << ','
        << report.h1_sq[i] << ',' << report.h2_sq[i] << ',' << report.free_energy[i]
        << '\n';
  return out.str();
}

TrajectoryFiles write_trajectory(const std::filesystem::path& dir,
                                 const Trajectory& traj, const SimConfig& cfg,
                                 std::uint64_t config_hash) {
  char tag[32];
  std::snprintf(tag, sizeof(tag), "path_%04llu", (unsigned long long)traj.path_id);
  TrajectoryFiles files;
  files.data_file = std::string(tag) + "_snapshots.bin";
  files.sidecar_file = std::string(tag) + "_snapshots.json";
  files.energy_file = std::string(tag) + "_energy.csv";

  const std::int64_t per = pow_int(cfg.modes, cfg.dim);
  std::vector<double> stack;
  stack.reserve(std::size_t(per) * traj.snapshots.size());
  for (const auto& snap : traj.snapshots)
    stack.insert(stack.end(), snap.coeffs.data(), snap.coeffs.data() + per);
  write_f64_array(dir / files.data_file, stack.data(), std::int64_t(stack.size()));

  nlohmann::json side;
  side["kind"] = "spectral_snapshots";
  side["dtype"] = "float64-le";
  side["order"] = "row-major";
  std::vector<std::int64_t> shape{std::int64_t(traj.snapshots.size())};
  for (int i = 0; i < cfg.dim; ++i) shape.push_back(cfg.modes);
  side["shape"] = shape;
  side["times"] = traj.times;
  side["dim"] = cfg.dim;
  side["seed"] = cfg.seed;
  side["path"] = traj.path_id;
  side["config_hash"] = config_hash;
  side["blowup"] = traj.blowup;
  side["frozen"] = traj.frozen;
  if (traj.stopping_time) side["stopping_time"] = *traj.stopping_time;
  write_text(dir / files.sidecar_file, side.dump(2) + "\n");

  write_text(dir / files.energy_file, energy_csv(energy_diagnostics(traj, cfg)));
  return files;
}

}  // namespace chac
