#include "moire/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "moire/error.hpp"
#include "moire/relax.hpp"

namespace moire {

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

namespace {


void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_le(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(const std::filesystem::path& path, const DisplacementField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const Mat2& g = field.grid_basis;
  const Mat2& m = field.moire_basis;
  out << "MOIREFIELD 1 " << field.shape.n1 << ' ' << field.shape.n2 << " layers 2 grid_basis "
      << format_double(g(0, 0)) << ' ' << format_double(g(0, 1)) << ' ' << format_double(g(1, 0)) << ' '
      << format_double(g(1, 1)) << " moire_basis " << format_double(m(0, 0)) << ' '
      << format_double(m(0, 1)) << ' ' << format_double(m(1, 0)) << ' ' << format_double(m(1, 1))
      << " rank " << field.rank << '\n';
  for (double v : field.data) put_le(out, v);
  if (!out) throw Error("failed writing " + path.string());
}

DisplacementField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string magic, tag_layers, tag_grid, tag_moire, tag_rank;
  int version = 0, layers = 0;
  DisplacementField f;
  hs >> magic >> version >> f.shape.n1 >> f.shape.n2 >> tag_layers >> layers >> tag_grid;
  auto number = [&] {
    std::string s;
    hs >> s;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error("bad number in field header: " + s);
    return v;
  };
  for (int i = 0; i < 4; ++i) f.grid_basis(i / 2, i % 2) = number();
  hs >> tag_moire;
  for (int i = 0; i < 4; ++i) f.moire_basis(i / 2, i % 2) = number();
  hs >> tag_rank >> f.rank;
  if (magic != "MOIREFIELD" || version != 1 || layers != 2 || tag_layers != "layers" ||
      tag_grid != "grid_basis" || tag_moire != "moire_basis" || tag_rank != "rank" || !hs ||
      f.shape.n1 < 1 || f.shape.n2 < 1)
    throw Error("malformed field header in " + path.string());
  f.data.resize(4 * static_cast<std::size_t>(f.shape.nodes()));
  for (double& v : f.data) v = get_le(in);
  if (!in) throw Error("truncated field data in " + path.string());
  return f;
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<unsigned char>& rgb) {
  if (width < 1 || height < 1 || rgb.size() != 3u * width * height)
    throw InvalidArgument("pixmap size does not match its dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace moire
