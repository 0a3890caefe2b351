#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; the OpenMP versions write disjoint outputs and keep the per-element
// arithmetic order, so both produce bitwise-identical results.

namespace corank {

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

}  // namespace corank

namespace corank::kernels {

/// scores[p.doc] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len))
/// for every posting of one term. Postings of a term name distinct documents.
using Bm25AccumulateFn = void (*)(std::span<const Posting> postings, double idf, Bm25Params params,
                                  std::span<const std::uint32_t> doc_lengths, double avg_len,
                                  std::span<double> scores);

/// out[r] = cosine(query, row r of a row-major matrix) given precomputed row
/// norms; rows with zero norm score 0.
using CosineRowsFn = void (*)(std::span<const float> matrix, std::size_t dim, std::span<const double> row_norms,
                              std::span<const float> query, std::span<double> out);

namespace serial {
void bm25_accumulate(std::span<const Posting> postings, double idf, Bm25Params params,
                     std::span<const std::uint32_t> doc_lengths, double avg_len, std::span<double> scores);
void cosine_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> row_norms,
                 std::span<const float> query, std::span<double> out);
}  // namespace serial

namespace omp {
void bm25_accumulate(std::span<const Posting> postings, double idf, Bm25Params params,
                     std::span<const std::uint32_t> doc_lengths, double avg_len, std::span<double> scores);
void cosine_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> row_norms,
                 std::span<const float> query, std::span<double> out);
}  // namespace omp

/// Dot product accumulated in double, left to right.
double dot(std::span<const float> a, std::span<const float> b);
double norm(std::span<const float> a);

}  // namespace corank::kernels

namespace corank {

enum class Execution { Serial, Parallel };

}  // namespace corank
