#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corank/corpus.hpp"
#include "corank/embedding.hpp"
#include "corank/kernels.hpp"

namespace corank {

/// Lexical index over lowercase alphanumeric tokens of title + text.
struct InvertedIndex {
    std::map<std::string, std::vector<Posting>, std::less<>> postings;  // per term, doc ascending
    std::vector<std::uint32_t> doc_lengths;
    std::vector<std::string> doc_ids;
    double avg_doc_length = 0.0;

    [[nodiscard]] std::size_t doc_count() const noexcept { return doc_lengths.size(); }
    bool operator==(const InvertedIndex&) const = default;
};

InvertedIndex build_index(const Corpus& corpus);

void save_index(const InvertedIndex& index, const std::filesystem::path& path);
/// Throws FormatError on a truncated or foreign file.
InvertedIndex load_index(const std::filesystem::path& path);

/// ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::size_t doc_count, std::size_t df);

/// Top-m documents by BM25 over the distinct query terms. Only documents that
/// contain at least one query term are returned.
CandidateList bm25_search(const InvertedIndex& index, const Query& query, std::size_t m, Bm25Params params = {},
                          Execution execution = Execution::Parallel);

/// Embedding matrix over title + text; documents without any text are left out.
class DenseIndex {
  public:
    DenseIndex(const Corpus& corpus, Embedder& embedder);

    CandidateList search(const Query& query, std::size_t m, Execution execution = Execution::Parallel) const;

    [[nodiscard]] std::size_t size() const noexcept { return doc_ids_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  private:
    Embedder& embedder_;
    std::vector<std::string> doc_ids_;
    std::vector<float> matrix_;  // row-major, size() x dim()
    std::vector<double> norms_;
    std::size_t dim_ = 0;
};

CandidateList dense_search(const Corpus& corpus, Embedder& embedder, const Query& query, std::size_t m);

}  // namespace corank
