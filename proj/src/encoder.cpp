#include "ccse/encoder.hpp"

#include "ccse/io.hpp"

#include <cmath>
#include <stdexcept>

namespace ccse {
namespace {

std::filesystem::path sidecar_ids_path(std::filesystem::path path) {
  path.replace_extension(".ids");
  return path;
}

MatrixF load_normalized(const std::filesystem::path& path, std::vector<std::string>& ids) {
  MatrixF m = io::read_matrix(path);
  for (Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) {
      throw std::runtime_error(path.string() + ": non-finite value at row " + std::to_string(i));
    }
    const float norm = m.row(i).norm();
    if (norm == 0.0f) {
      throw std::runtime_error(path.string() + ": zero-norm row " + std::to_string(i));
    }
    if (norm != 1.0f) m.row(i) /= norm;
  }
  ids = io::read_ids(sidecar_ids_path(path));
  if (static_cast<Index>(ids.size()) != m.rows()) {
    throw std::runtime_error(path.string() + ": id sidecar has " + std::to_string(ids.size()) +
                             " entries for " + std::to_string(m.rows()) + " rows");
  }
  return m;
}

}  // namespace

ExternalEmbeddings load_external_embeddings(const std::filesystem::path& code_path,
                                            const std::filesystem::path& doc_path) {
  ExternalEmbeddings out;
  out.code = load_normalized(code_path, out.code_ids);
  out.docs = load_normalized(doc_path, out.doc_ids);
  if (out.code.cols() != out.docs.cols()) {
    throw std::runtime_error("embedding dimension mismatch: " + code_path.string() + " has " +
                             std::to_string(out.code.cols()) + ", " + doc_path.string() + " has " +
                             std::to_string(out.docs.cols()));
  }
  return out;
}

}  // namespace ccse
