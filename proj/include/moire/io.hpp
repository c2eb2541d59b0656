#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace moire {

struct DisplacementField;

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_double(double x);

/// Writes comma-separated rows terminated by '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  /// Mixed row: strings are emitted verbatim.
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

/**
 * Field file: one text header line
 *   "MOIREFIELD 1 n1 n2 layers 2 grid_basis g00 g01 g10 g11 moire_basis m00 m01 m10 m11 rank r\n"
 * followed by little-endian float64 values ordered layer, component, then the
 * n1 x n2 grid row-major.
 */
void write_field(const std::filesystem::path& path, const DisplacementField& field);
DisplacementField read_field(const std::filesystem::path& path);

/// Binary PPM (P6) with 8-bit channels; `rgb` holds width * height * 3 bytes, row-major from the top.
void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<unsigned char>& rgb);

}  // namespace moire
