#include <cstdint>

#include "corank/kernels.hpp"

namespace corank::kernels::omp {

void bm25_accumulate(std::span<const Posting> postings, double idf, Bm25Params params,
                     std::span<const std::uint32_t> doc_lengths, double avg_len, std::span<double> scores)
{
    const auto n = static_cast<std::int64_t>(postings.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& p = postings[static_cast<std::size_t>(i)];
        const double tf = p.tf;
        const double len = doc_lengths[p.doc];
        scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * len / avg_len));
    }
}

void cosine_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> row_norms,
                 std::span<const float> query, std::span<double> out)
{
    const double qn = norm(query);
    const auto rows = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) if (rows > 256)
    for (std::int64_t r = 0; r < rows; ++r) {
        const auto row = static_cast<std::size_t>(r);
        if (row_norms[row] == 0.0 || qn == 0.0) {
            out[row] = 0.0;
            continue;
        }
        out[row] = dot(matrix.subspan(row * dim, dim), query) / (row_norms[row] * qn);
    }
}

}  // namespace corank::kernels::omp
