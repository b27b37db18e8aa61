#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlsis/dynamics.hpp"
#include "nlsis/equilibria.hpp"
#include "nlsis/spectral.hpp"

namespace nlsis::io {

// Shortest round-trip text is not used: every number is written with 17
// significant digits, '.' decimal point, independent of the C++ locale.
std::string format_number(double value);

const std::vector<std::string>& spectral_csv_columns();
std::string spectral_csv_header();
std::string spectral_csv_row(const SpectralReport& report);
// Flat JSON record (the eigenvector is not included).
std::string spectral_json(const SpectralReport& report);

const char* to_string(EquilibriumKind kind);
// Columns: node, S_tilde, I_tilde.
std::string equilibrium_csv(const Mesh& mesh, const EquilibriumResult& eq);
// k, kind, iterations, residual.
std::string equilibrium_json(const EquilibriumResult& eq);

// Columns: t, mass, dist_dfe, dist_endemic, lyapunov (blank when not applicable).
std::string trajectory_csv(const Trajectory& traj);
// Two columns: node, value.
std::string field_csv(const Mesh& mesh, const Field& values);

// Writes text to path, creating parent directories. Throws Error{io_error}.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace nlsis::io
