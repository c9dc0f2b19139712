#include "ccse/io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ccse::io {
namespace {

constexpr char kMagic[4] = {'C', 'C', 'S', 'E'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

bool get_bytes(std::istream& in, void* dst, std::size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

std::uint16_t get_u16(std::istream& in, const std::string& what) {
  unsigned char b[2];
  if (!get_bytes(in, b, 2)) throw std::runtime_error("truncated file while reading " + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!get_bytes(in, b, 4)) throw std::runtime_error("truncated file while reading " + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& what) {
  unsigned char b[8];
  if (!get_bytes(in, b, 8)) throw std::runtime_error("truncated file while reading " + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_matrix_body(std::ostream& out, const MatrixF& values) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  put_u64(out, static_cast<std::uint64_t>(values.rows()));
  // Disk layout is row-major; stage through a row-major copy.
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rowmajor = values;
  static_assert(sizeof(float) == 4);
  if (rowmajor.size() > 0) {
    out.write(reinterpret_cast<const char*>(rowmajor.data()),
              static_cast<std::streamsize>(rowmajor.size() * sizeof(float)));
  }
}

MatrixF read_matrix_body(std::istream& in, const std::string& context) {
  char magic[4];
  if (!get_bytes(in, magic, 4)) throw std::runtime_error(context + ": truncated file while reading magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(context + ": unrecognized embedding file (bad magic \"" + std::string(magic, 4) + "\")");
  }
  const std::uint32_t version = get_u32(in, context + " version");
  if (version != kVersion) {
    throw std::runtime_error(context + ": unsupported embedding file version " + std::to_string(version));
  }
  const std::uint32_t dim = get_u32(in, context + " dim");
  const std::uint64_t count = get_u64(in, context + " count");
  if (dim == 0) throw std::runtime_error(context + ": bad dim field (0)");
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rowmajor(
      static_cast<Index>(count), static_cast<Index>(dim));
  if (rowmajor.size() > 0 &&
      !get_bytes(in, rowmajor.data(), static_cast<std::size_t>(rowmajor.size()) * sizeof(float))) {
    throw std::runtime_error(context + ": file size does not match count*dim payload (bad count/dim field)");
  }
  return MatrixF(rowmajor);
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const MatrixF& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_matrix_body(out, values);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MatrixF read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path.string());
  MatrixF m = read_matrix_body(in, path.string());
  // A well-formed file ends right after the payload.
  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error(path.string() + ": trailing bytes after count*dim payload (bad count/dim field)");
  }
  return m;
}

void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open id file: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

void write_tensor_blocks(const std::filesystem::path& path, const std::vector<NamedMatrix>& blocks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& block : blocks) {
    put_u16(out, static_cast<std::uint16_t>(block.name.size()));
    out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
    write_matrix_body(out, block.values);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<NamedMatrix> read_tensor_blocks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor file: " + path.string());
  std::vector<NamedMatrix> blocks;
  while (in.peek() != std::char_traits<char>::eof()) {
    const std::uint16_t name_len = get_u16(in, path.string() + " block name length");
    std::string name(name_len, '\0');
    if (name_len > 0 && !get_bytes(in, name.data(), name_len)) {
      throw std::runtime_error(path.string() + ": truncated file while reading block name");
    }
    blocks.push_back({name, read_matrix_body(in, path.string() + " block \"" + name + "\"")});
  }
  return blocks;
}

}  // namespace ccse::io
