#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypercd/siamese.hpp"
#include "hypercd/types.hpp"

namespace hypercd::io {

/// Malformed file contents (bad header, ragged rows, unparsable numbers,
/// unknown config keys). The CLI maps this to exit code 2.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

std::string format_g6(double v);   // 6 significant digits, stdout reports
std::string format_g17(double v);  // round-trip precision, file payloads
std::string format_f4(double v);   // fixed 4 decimals, metric reports

/// Embedding CSV: header `id,v0,...,v{n-1}`, one vector per row.
struct EmbeddingData {
  std::vector<std::string> ids;
  Mat vectors;  // one row per id
};

EmbeddingData read_embeddings(std::istream& in);
EmbeddingData read_embeddings_file(const std::string& path);
void write_embeddings(std::ostream& out, const EmbeddingData& data);
void write_embeddings_file(const std::string& path, const EmbeddingData& data);

/// Pair CSV: header `id,label,x0..x{D-1},y0..y{D-1}`, label in {0,1}.
std::vector<PairSample> read_pairs(std::istream& in);
std::vector<PairSample> read_pairs_file(const std::string& path);
void write_pairs(std::ostream& out, const std::vector<PairSample>& samples);
void write_pairs_file(const std::string& path,
                      const std::vector<PairSample>& samples);

/// History CSV: header `epoch,loss,accuracy,f1`, full-precision values.
void write_history(std::ostream& out,
                   const std::vector<siamese::EpochStats>& history);
void write_history_file(const std::string& path,
                        const std::vector<siamese::EpochStats>& history);

/// Versioned text model format. First line `hypercd-model v1`, then
/// metadata key/value lines, then for each parameter a `tensor <name>
/// <dims...>` line followed by one line of values.
void save_model(std::ostream& out, siamese::Model& model);
void save_model_file(const std::string& path, siamese::Model& model);
siamese::Model load_model(std::istream& in);
siamese::Model load_model_file(const std::string& path);

}  // namespace hypercd::io
