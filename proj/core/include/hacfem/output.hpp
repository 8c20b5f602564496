#pragma once

// Legacy ASCII VTK snapshots and the per-increment history table.

#include <filesystem>
#include <span>
#include <string>

#include "hacfem/core.hpp"
#include "hacfem/mesh.hpp"
#include "hacfem/solver.hpp"

namespace hacfem {

/// Unstructured grid with point data "displacement" (3 components, z = 0),
/// "phi", "concentration" and "sigma_h". Floats use %.9e.
std::string format_vtk(const Mesh& mesh, const FieldState& state);
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const FieldState& state);

/// Header time,prescribed,reaction,max_phi,min_c,max_c,passes; one row per
/// record.
std::string format_history_csv(std::span<const IncrementRecord> records);
void write_history_csv(const std::filesystem::path& path, std::span<const IncrementRecord> records);

/// Writes `text` to `path`; throws Error when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace hacfem
