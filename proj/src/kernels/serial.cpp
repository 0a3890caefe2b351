#include <cmath>

#include "corank/kernels.hpp"

namespace corank::kernels {

double dot(std::span<const float> a, std::span<const float> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

namespace serial {

void bm25_accumulate(std::span<const Posting> postings, double idf, Bm25Params params,
                     std::span<const std::uint32_t> doc_lengths, double avg_len, std::span<double> scores)
{
    for (const auto& p : postings) {
        const double tf = p.tf;
        const double len = doc_lengths[p.doc];
        scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * len / avg_len));
    }
}

void cosine_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> row_norms,
                 std::span<const float> query, std::span<double> out)
{
    const double qn = norm(query);
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (row_norms[r] == 0.0 || qn == 0.0) {
            out[r] = 0.0;
            continue;
        }
        out[r] = dot(matrix.subspan(r * dim, dim), query) / (row_norms[r] * qn);
    }
}

}  // namespace serial
}  // namespace corank::kernels
