#ifndef SPECHMM_IO_HPP
#define SPECHMM_IO_HPP

#include "spechmm/eval.hpp"
#include "spechmm/inference.hpp"
#include "spechmm/model.hpp"
#include "spechmm/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace spechmm::io {

using nlohmann::json;

// Deterministic 64-bit FNV-1a over bytes; hex-encoded in file headers.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

// %.17g formatting so round-trips are exact and files byte-stable.
std::string format_double(double v);

json mat_to_json(const Mat& a);
Mat mat_from_json(const json& j);
json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);

// HmmSpec config schema: {"k", "q", "pi", "emissions", "stationary"} with
// emissions as per-state lists of {"weight", "alpha", "beta"}.
json hmm_to_json(const model::HmmSpec& hmm);
model::HmmSpec hmm_from_json(const json& j);
model::HmmSpec load_hmm(const std::filesystem::path& path);
void save_hmm(const model::HmmSpec& hmm, const std::filesystem::path& path);

json basis_to_json(const bases::BasisSpec& spec);
bases::BasisSpec basis_from_json(const json& j);

json estimate_to_json(const spectral::SpectralEstimate& est);
spectral::SpectralEstimate estimate_from_json(const json& j);
spectral::SpectralEstimate load_estimate(const std::filesystem::path& path);
void save_estimate(const spectral::SpectralEstimate& est, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
json load_json(const std::filesystem::path& path);
void save_json(const json& j, const std::filesystem::path& path);

// CSV payloads; every file starts with "# config_hash=<hex>".
std::string trajectory_csv(const model::Trajectory& traj, const std::string& config_hash);
model::Trajectory trajectory_from_csv(const std::string& text);

std::string posterior_csv(const inference::PosteriorTrack& track, const std::string& config_hash);
std::string posterior_with_oracle_csv(const inference::PosteriorTrack& plugin,
                                      const inference::PosteriorTrack& oracle,
                                      const std::string& config_hash);

std::string bound_report_csv(const eval::BoundReport& report, const std::string& config_hash);
json bound_report_sidecar(const eval::BoundReport& report);

std::string rate_table_csv(const std::vector<eval::RateRow>& table,
                           const std::string& config_hash);

// Machine-readable (approximately) grid of reconstructed emission estimates.
std::string emission_grid_csv(const spectral::SpectralEstimate& est, int grid_points,
                              const std::string& config_hash);

}  // namespace spechmm::io

#endif  // SPECHMM_IO_HPP
