#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "herit/grm.hpp"
#include "herit/simulate.hpp"

namespace herit {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Binary dataset container, little-endian:
///   "HERITDS" NUL, u32 version, u32 kind = 1,
///   u64 seed, n, N, population_size, population_cases, target_cases,
///   u32 genotype_kind, u32 reserved,
///   f64 K, P, t, p_case, p_control, eta, sigma_sq,
///   u64 d, u64 dropped_loci[d],
///   u64 indices[n], u8 y[n], f64 w[n],
///   f64 raw[n * N] row-major, f64 z[n * (N - d)] row-major.
std::string encode_dataset(const SimulatedStudy& study);
SimulatedStudy decode_dataset(std::string_view bytes);
void write_dataset(const std::filesystem::path& path, const SimulatedStudy& study);
SimulatedStudy read_dataset(const std::filesystem::path& path);

/// Binary GRM container: "HERITGR" NUL, u32 version, u32 kind = 2, u64 n, u64 N,
/// f64 g[n * n] row-major.
std::string encode_grm(const GrmView& g);
GrmView decode_grm(std::string_view bytes);

/// Plain CSV of a matrix, one row per line, no header.
std::string matrix_to_csv(const Matrix& m);

/// Largest n for which matrices are exported as CSV.
inline constexpr std::size_t kMaxCsvRows = 1000;

}  // namespace herit
