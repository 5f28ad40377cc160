#include "spechmm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spechmm::io {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

json mat_to_json(const Mat& a) {
  json rows = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("matrix JSON must be a nested array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Mat a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<int>(row.size()) != cols)
      throw ValidationError("matrix JSON rows have unequal lengths");
    for (int c = 0; c < cols; ++c) a(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return a;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("vector JSON must be an array");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

json hmm_to_json(const model::HmmSpec& hmm) {
  json j;
  j["k"] = hmm.num_states;
  j["q"] = mat_to_json(hmm.q);
  j["pi"] = vec_to_json(hmm.pi.vec());
  json emissions = json::array();
  for (const auto& mix : hmm.emissions) {
    json jm = json::array();
    for (const auto& c : mix)
      jm.push_back(json{{"weight", c.weight}, {"alpha", c.alpha}, {"beta", c.beta}});
    emissions.push_back(std::move(jm));
  }
  j["emissions"] = std::move(emissions);
  j["stationary"] = hmm.pi_is_stationary;
  return j;
}

model::HmmSpec hmm_from_json(const json& j) {
  model::HmmSpec hmm;
  try {
    hmm.num_states = j.at("k").get<int>();
    hmm.q = mat_from_json(j.at("q"));
    hmm.pi = ProbVec::normalized(vec_from_json(j.at("pi")));
    for (const json& jm : j.at("emissions")) {
      model::BetaMixture mix;
      for (const json& jc : jm)
        mix.push_back(model::BetaComponent{jc.at("weight").get<double>(),
                                           jc.at("alpha").get<double>(),
                                           jc.at("beta").get<double>()});
      hmm.emissions.push_back(std::move(mix));
    }
    hmm.pi_is_stationary = j.value("stationary", true);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model config: ") + e.what());
  }
  hmm.validate();
  return hmm;
}

model::HmmSpec load_hmm(const std::filesystem::path& path) {
  return hmm_from_json(load_json(path));
}

void save_hmm(const model::HmmSpec& hmm, const std::filesystem::path& path) {
  save_json(hmm_to_json(hmm), path);
}

json basis_to_json(const bases::BasisSpec& spec) {
  return json{{"family", bases::family_name(spec.family)}, {"m", spec.size}};
}

bases::BasisSpec basis_from_json(const json& j) {
  bases::BasisSpec spec;
  try {
    spec.family = bases::family_from_name(j.at("family").get<std::string>());
    spec.size = j.at("m").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed basis config: ") + e.what());
  }
  spec.validate();
  return spec;
}

json estimate_to_json(const spectral::SpectralEstimate& est) {
  json j;
  j["basis"] = basis_to_json(est.basis);
  j["o_hat"] = mat_to_json(est.o_hat);
  j["pi_tilde"] = vec_to_json(est.pi_tilde);
  j["q_hat"] = mat_to_json(est.q_hat);
  j["pi_hat"] = vec_to_json(est.pi_hat.vec());
  j["diagnostics"] = json{{"sigma_k_p", est.diagnostics.sigma_k_p},
                          {"min_eigen_gap", est.diagnostics.min_eigen_gap},
                          {"cond_u_p_u", est.diagnostics.cond_u_p_u},
                          {"cond_u_o", est.diagnostics.cond_u_o},
                          {"offdiag_residual", est.diagnostics.offdiag_residual},
                          {"theta_redraws", est.diagnostics.theta_redraws},
                          {"stationary_fallback", est.diagnostics.stationary_fallback},
                          {"seed", est.diagnostics.seed}};
  return j;
}

spectral::SpectralEstimate estimate_from_json(const json& j) {
  spectral::SpectralEstimate est;
  try {
    est.basis = basis_from_json(j.at("basis"));
    est.o_hat = mat_from_json(j.at("o_hat"));
    est.pi_tilde = vec_from_json(j.at("pi_tilde"));
    est.q_hat = mat_from_json(j.at("q_hat"));
    est.pi_hat = ProbVec::normalized(vec_from_json(j.at("pi_hat")));
    const json& d = j.at("diagnostics");
    est.diagnostics.sigma_k_p = d.at("sigma_k_p").get<double>();
    est.diagnostics.min_eigen_gap = d.at("min_eigen_gap").get<double>();
    est.diagnostics.cond_u_p_u = d.at("cond_u_p_u").get<double>();
    est.diagnostics.cond_u_o = d.at("cond_u_o").get<double>();
    est.diagnostics.offdiag_residual = d.at("offdiag_residual").get<double>();
    est.diagnostics.theta_redraws = d.at("theta_redraws").get<int>();
    est.diagnostics.stationary_fallback = d.value("stationary_fallback", false);
    est.diagnostics.seed = d.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed estimate file: ") + e.what());
  }
  return est;
}

spectral::SpectralEstimate load_estimate(const std::filesystem::path& path) {
  return estimate_from_json(load_json(path));
}

void save_estimate(const spectral::SpectralEstimate& est, const std::filesystem::path& path) {
  save_json(estimate_to_json(est), path);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw ValidationError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void save_json(const json& j, const std::filesystem::path& path) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string trajectory_csv(const model::Trajectory& traj, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "time,hidden_state,observation\n";
  for (std::size_t t = 0; t < traj.obs.size(); ++t)
    out << (t + 1) << ',' << (traj.hidden[t] + 1) << ',' << format_double(traj.obs[t]) << "\n";
  return out.str();
}

model::Trajectory trajectory_from_csv(const std::string& text) {
  model::Trajectory traj;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time,", 0) == 0) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // time, ignored
    if (!std::getline(row, field, ',')) throw ValidationError("malformed trajectory CSV row");
    traj.hidden.push_back(std::stoi(field) - 1);
    if (!std::getline(row, field, ',')) throw ValidationError("malformed trajectory CSV row");
    traj.obs.push_back(std::stod(field));
  }
  if (traj.obs.empty()) throw ValidationError("trajectory CSV contains no rows");
  return traj;
}

namespace {

bool step_degenerate(const std::vector<int>& steps, int t) {
  return std::binary_search(steps.begin(), steps.end(), t);
}

}  // namespace

std::string posterior_csv(const inference::PosteriorTrack& track, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "time,state,filter_prob,smooth_prob,degenerate_flag\n";
  for (int t = 0; t < track.filter.rows(); ++t) {
    const int flag = step_degenerate(track.degenerate_steps, t) ? 1 : 0;
    for (int x = 0; x < track.filter.cols(); ++x)
      out << (t + 1) << ',' << (x + 1) << ',' << format_double(track.filter(t, x)) << ','
          << format_double(track.smooth(t, x)) << ',' << flag << "\n";
  }
  return out.str();
}

std::string posterior_with_oracle_csv(const inference::PosteriorTrack& plugin,
                                      const inference::PosteriorTrack& oracle,
                                      const std::string& config_hash) {
  if (plugin.filter.rows() != oracle.filter.rows() ||
      plugin.filter.cols() != oracle.filter.cols())
    throw DimensionError("posterior_with_oracle_csv: track shape mismatch");
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "time,state,filter_prob,smooth_prob,oracle_filter_prob,oracle_smooth_prob,"
         "degenerate_flag,tv_gap_filter,tv_gap_smooth\n";
  for (int t = 0; t < plugin.filter.rows(); ++t) {
    const int flag = step_degenerate(plugin.degenerate_steps, t) ? 1 : 0;
    const double tv_f = inference::tv_distance(plugin.filter.row(t).transpose(),
                                               oracle.filter.row(t).transpose());
    const double tv_s = inference::tv_distance(plugin.smooth.row(t).transpose(),
                                               oracle.smooth.row(t).transpose());
    for (int x = 0; x < plugin.filter.cols(); ++x)
      out << (t + 1) << ',' << (x + 1) << ',' << format_double(plugin.filter(t, x)) << ','
          << format_double(plugin.smooth(t, x)) << ',' << format_double(oracle.filter(t, x))
          << ',' << format_double(oracle.smooth(t, x)) << ',' << flag << ','
          << format_double(tv_f) << ',' << format_double(tv_s) << "\n";
  }
  return out.str();
}

std::string bound_report_csv(const eval::BoundReport& report, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "time,lhs_filter,rhs_filter,lhs_smooth,rhs_smooth,emission_gap,c_star\n";
  for (int t = 0; t < report.lhs_filter.size(); ++t)
    out << (t + 1) << ',' << format_double(report.lhs_filter(t)) << ','
        << format_double(report.rhs_filter(t)) << ',' << format_double(report.lhs_smooth(t))
        << ',' << format_double(report.rhs_smooth(t)) << ','
        << format_double(report.inputs.emission_gap(t)) << ','
        << format_double(report.inputs.c_star_values(t)) << "\n";
  return out.str();
}

json bound_report_sidecar(const eval::BoundReport& report) {
  json j;
  j["constants"] = json{{"delta_star", report.inputs.delta_star},
                        {"rho_star", report.inputs.rho_star},
                        {"c_big_star", report.inputs.c_big_star},
                        {"delta_hat", report.inputs.delta_hat},
                        {"rho_hat", report.inputs.rho_hat}};
  j["parameter_errors"] =
      json{{"pi_l2", report.inputs.pi_error}, {"q_frobenius", report.inputs.q_error}};
  j["violations"] =
      json{{"filter", report.filter_violations}, {"smooth", report.smooth_violations}};
  j["flags"] = json{{"clean", report.flags_clean},
                    {"delta_hat_positive", report.inputs.delta_hat_positive},
                    {"c_star_floor_steps", report.inputs.c_star_floor_steps}};
  return j;
}

std::string rate_table_csv(const std::vector<eval::RateRow>& table,
                           const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "p,median_p_err,q25_p_err,q75_p_err,median_m3_err,q25_m3_err,q75_m3_err,"
         "median_coeff_err,q25_coeff_err,q75_coeff_err\n";
  for (const auto& row : table) {
    if (row.p < 0)
      out << "population";
    else
      out << row.p;
    out << ',' << format_double(row.median_p_err) << ',' << format_double(row.q25_p_err) << ','
        << format_double(row.q75_p_err) << ',' << format_double(row.median_m3_err) << ','
        << format_double(row.q25_m3_err) << ',' << format_double(row.q75_m3_err) << ','
        << format_double(row.median_coeff_err) << ',' << format_double(row.q25_coeff_err) << ','
        << format_double(row.q75_coeff_err) << "\n";
  }
  return out.str();
}

std::string emission_grid_csv(const spectral::SpectralEstimate& est, int grid_points,
                              const std::string& config_hash) {
  if (grid_points < 1) throw DomainError("emission_grid_csv: grid must be nonempty");
  const auto coeffs = spectral::emission_estimates(est);
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "y";
  for (std::size_t x = 0; x < coeffs.size(); ++x) out << ",f_hat_" << (x + 1);
  out << "\n";
  for (int i = 0; i < grid_points; ++i) {
    const double y = (i + 0.5) / grid_points;
    out << format_double(y);
    for (const auto& c : coeffs) out << ',' << format_double(bases::reconstruct(c, y));
    out << "\n";
  }
  return out.str();
}

}  // namespace spechmm::io
