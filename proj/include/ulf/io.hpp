/// @file io.hpp
/// @brief Field file format (ULF1), trajectory directories, CSV output.
///
/// Field files: 32-byte header (magic "ULF1", u32 N, f64 L, f64 time,
/// u32 ncomp, u32 reserved) followed by ncomp * N^3 row-major little-endian
/// f64 samples, component-major. A trajectory is a directory of such files
/// plus an index.json listing times.

#pragma once

#include <filesystem>
#include <string>

#include "ulf/trajectory.hpp"

namespace ulf {

void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const VectorField& f);

struct FieldFile {
    int ncomp = 0;
    double time = 0.0;
    Grid grid;
    std::vector<RealVec> comps;
};

FieldFile read_field(const std::filesystem::path& path);
ScalarField read_scalar_field(const std::filesystem::path& path);
VectorField read_vector_field(const std::filesystem::path& path);

/// Writes snapshots (and pressures when present) plus index.json.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const std::vector<ScalarField>* pressures = nullptr);

struct LoadedTrajectory {
    Trajectory traj;
    std::vector<ScalarField> pressures;  ///< empty when absent
};

LoadedTrajectory read_trajectory(const std::filesystem::path& dir);

/// CSV writer printing floating-point values with 17 significant digits.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    void row_values(const std::vector<double>& values, const std::vector<std::string>& prefix = {});
    static std::string fmt(double v);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// FNV-1a 64-bit content hash (manifest entries).
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t n);

}  // namespace ulf
