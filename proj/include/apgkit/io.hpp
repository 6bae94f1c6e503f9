#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apgkit/operators.hpp"
#include "apgkit/problem.hpp"
#include "apgkit/schedules.hpp"
#include "apgkit/solvers.hpp"

namespace apgkit::io {

/// Shortest round-trip rendering used for every text output.
std::string format_double(double v);

/// Header lines ("# ...") written at the top of CSV outputs.
struct FileHeader {
    std::string tool = "apgkit";
    std::string version;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string line() const;
};

/// CSV: UTF-8, ',' separator, one row per line. Lines starting with '#'
/// and blank lines are skipped on read.
Matrix read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Matrix& M, const FileHeader* header = nullptr);

/// Binary: two little-endian uint32 dims (rows, cols), then rows·cols
/// little-endian float64 values in row-major order.
Matrix read_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, const Matrix& M);

/// Dispatches on extension: ".bin" is binary, anything else CSV.
Matrix read_matrix(const std::filesystem::path& path);
/// A matrix with a single row or column, flattened.
Vector read_vector(const std::filesystem::path& path);

/// One-column CSV of t values.
Schedule read_schedule(const std::filesystem::path& path);

/// Binary PGM (P5, 8-bit); pixel values mapped linearly to [0, 1].
Matrix read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Matrix& image, const FileHeader* header = nullptr);

/// Columns iter,F,gap,xi,dist_S,gradmap,bound_rate,bound_xi,bound_ball.
/// Unavailable values are empty cells; bound flags are 1 (holds), 0
/// (violated) or empty (not checked).
void write_trace_csv(const std::filesystem::path& path, const SolverTrace<double>& trace,
                     const FileHeader* header = nullptr);

/// Problem descriptor:
///   {"A": {"kind": "dense", "file": ...} | {"kind": "row-sampling", "total": n, "indices": [...]}
///         | {"kind": "identity", "n": n} | {"kind": "dct2d", "n": n},
///    "b": {"file": ...} | {"values": [...]},
///    "U": {"representation": "orthonormal-rows", "C": <map>, "d": <vector>}
///         | {"representation": "hyperplane", "normal": <vector>, "offset": c}
///         | {"representation": "basis", "anchor": <vector>, "basis": {"file": ...}}
///         | {"representation": "whole", "dim": n},
///    "lip": number | "auto"}
/// For U, a C map may also be {"kind": "dct-rows", "n": n, "indices": [...]}.
/// A <vector> is {"values": [...]}, {"file": ...} or a bare array.
/// File paths are relative to the descriptor's directory.
Problemd load_problem(const std::filesystem::path& path);

/// Writes A (dense), b and U (orthonormal-rows with dense C, or basis) next
/// to the descriptor.
void save_problem(const Problemd& problem, const std::filesystem::path& path, bool auto_lip = true);

}  // namespace apgkit::io
