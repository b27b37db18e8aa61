#include "nlsis/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlsis/error.hpp"

namespace nlsis::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& spectral_csv_columns() {
  static const std::vector<std::string> columns = {
      "d_I",    "lambda_p",       "principal_exists", "mu_p",     "r0_weighted",  "r0_variational",
      "r0_nextgen", "limit_d0", "limit_dinf",       "r0_limit_d0", "r0_limit_dinf"};
  return columns;
}

std::string spectral_csv_header() {
  std::string out;
  for (const auto& c : spectral_csv_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

std::string spectral_csv_row(const SpectralReport& r) {
  std::string out;
  const auto add = [&out](const std::string& s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  add(format_number(r.d_I));
  add(format_number(r.lambda_p));
  add(r.principal_exists ? "true" : "false");
  add(format_number(r.mu_p));
  add(format_number(r.r0_weighted));
  add(format_number(r.r0_variational));
  add(format_number(r.r0_nextgen));
  add(format_number(r.limit_d0));
  add(format_number(r.limit_dinf));
  add(format_number(r.r0_limit_d0));
  add(format_number(r.r0_limit_dinf));
  return out + '\n';
}

std::string spectral_json(const SpectralReport& r) {
  nlohmann::ordered_json j;
  j["d_I"] = r.d_I;
  j["lambda_p"] = r.lambda_p;
  j["principal_exists"] = r.principal_exists;
  j["mu_p"] = r.mu_p;
  j["r0_weighted"] = r.r0_weighted;
  j["r0_variational"] = r.r0_variational;
  j["r0_nextgen"] = r.r0_nextgen;
  j["spectral_bound_M"] = r.spectral_bound_M;
  j["limit_d0"] = r.limit_d0;
  j["limit_dinf"] = r.limit_dinf;
  j["r0_limit_d0"] = r.r0_limit_d0;
  j["r0_limit_dinf"] = r.r0_limit_dinf;
  return j.dump(2) + "\n";
}

const char* to_string(EquilibriumKind kind) {
  return kind == EquilibriumKind::endemic ? "endemic" : "disease_free";
}

std::string equilibrium_csv(const Mesh& mesh, const EquilibriumResult& eq) {
  std::string out = "node,S_tilde,I_tilde\n";
  for (int i = 0; i < mesh.size(); ++i) {
    out += format_number(mesh.node(i)) + ',' + format_number(eq.S_tilde[i]) + ',' +
           format_number(eq.I_tilde[i]) + '\n';
  }
  return out;
}

std::string equilibrium_json(const EquilibriumResult& eq) {
  nlohmann::ordered_json j;
  j["k"] = eq.k;
  j["kind"] = to_string(eq.kind);
  j["iterations"] = eq.iterations;
  j["residual"] = eq.residual;
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,mass,dist_dfe,dist_endemic,lyapunov\n";
  for (const auto& s : traj.samples) {
    out += format_number(s.t) + ',' + format_number(s.mass) + ',' + format_number(s.dist_dfe) + ',';
    if (s.dist_endemic) out += format_number(*s.dist_endemic);
    out += ',';
    if (s.lyapunov) out += format_number(*s.lyapunov);
    out += '\n';
  }
  return out;
}

std::string field_csv(const Mesh& mesh, const Field& values) {
  require_field(mesh, values, "field");
  std::string out = "node,value\n";
  for (int i = 0; i < mesh.size(); ++i) {
    out += format_number(mesh.node(i)) + ',' + format_number(values[i]) + '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace nlsis::io
