#pragma once

#include "ccse/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ccse::io {

// Embedding matrix file layout, little-endian throughout:
//   bytes 0-3   magic "CCSE"
//   u32         format version (1)
//   u32         dim (columns)
//   u64         count (rows)
//   count*dim   IEEE-754 binary32, row-major
void write_matrix(const std::filesystem::path& path, const MatrixF& values);
MatrixF read_matrix(const std::filesystem::path& path);

// Sidecar id list: one UTF-8 id per line, same order and count as the matrix.
void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids);
std::vector<std::string> read_ids(const std::filesystem::path& path);

// Container of named matrices: repeated [u16 name length][name][matrix as above].
struct NamedMatrix {
  std::string name;
  MatrixF values;
};

void write_tensor_blocks(const std::filesystem::path& path, const std::vector<NamedMatrix>& blocks);
std::vector<NamedMatrix> read_tensor_blocks(const std::filesystem::path& path);

}  // namespace ccse::io
