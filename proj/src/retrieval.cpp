#include "corank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/text.hpp"

namespace corank {

namespace {

constexpr std::string_view kIndexMagic = "CRIDX1";

std::string index_text(const Document& doc) { return doc.title() + " " + doc.text(); }

CandidateList top_m(std::string query_id, std::vector<Candidate> scored, std::size_t m)
{
    auto better = [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
    };
    if (scored.size() > m) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end(), better);
        scored.resize(m);
    }
    return make_candidate_list(std::move(query_id), std::move(scored));
}

class BinWriter {
  public:
    explicit BinWriter(std::string& out) : out_(out) {}
    void u64(std::uint64_t v) { out_.append(reinterpret_cast<const char*>(&v), sizeof v); }
    void u32(std::uint32_t v) { out_.append(reinterpret_cast<const char*>(&v), sizeof v); }
    void str(std::string_view s)
    {
        u64(s.size());
        out_.append(s);
    }

  private:
    std::string& out_;
};

class BinReader {
  public:
    BinReader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

    template <class T>
    T pod()
    {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof v);
        pos_ += sizeof v;
        return v;
    }
    std::string str()
    {
        const auto n = pod<std::uint64_t>();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

  private:
    void need(std::uint64_t n) const
    {
        if (n > data_.size() - pos_) {
            throw FormatError(source_, 0, "index file is truncated");
        }
    }
    std::string_view data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace

InvertedIndex build_index(const Corpus& corpus)
{
    InvertedIndex index;
    index.doc_lengths.reserve(corpus.size());
    index.doc_ids.reserve(corpus.size());
    std::uint64_t total = 0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto tokens = word_tokens(index_text(corpus[d]));
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : tokens) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            auto it = index.postings.find(term);
            if (it == index.postings.end()) {
                it = index.postings.emplace(std::string(term), std::vector<Posting>{}).first;
            }
            it->second.push_back({static_cast<std::uint32_t>(d), count});
        }
        index.doc_lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
        index.doc_ids.push_back(corpus[d].doc_id());
        total += tokens.size();
    }
    index.avg_doc_length = corpus.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(corpus.size());
    return index;
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path)
{
    std::string out(kIndexMagic);
    BinWriter w(out);
    w.u64(index.doc_count());
    for (std::size_t d = 0; d < index.doc_count(); ++d) {
        w.str(index.doc_ids[d]);
        w.u32(index.doc_lengths[d]);
    }
    w.u64(index.postings.size());
    for (const auto& [term, list] : index.postings) {
        w.str(term);
        w.u64(list.size());
        for (const auto& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    write_file_atomic(path, out);
}

InvertedIndex load_index(const std::filesystem::path& path)
{
    const auto data = read_file(path);
    if (!std::string_view(data).starts_with(kIndexMagic)) {
        throw FormatError(path.string(), 0, "not a corank index file");
    }
    BinReader r(std::string_view(data).substr(kIndexMagic.size()), path.string());
    InvertedIndex index;
    const auto docs = r.pod<std::uint64_t>();
    std::uint64_t total = 0;
    for (std::uint64_t d = 0; d < docs; ++d) {
        index.doc_ids.push_back(r.str());
        index.doc_lengths.push_back(r.pod<std::uint32_t>());
        total += index.doc_lengths.back();
    }
    const auto terms = r.pod<std::uint64_t>();
    for (std::uint64_t t = 0; t < terms; ++t) {
        auto term = r.str();
        const auto n = r.pod<std::uint64_t>();
        std::vector<Posting> list;
        list.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            Posting p;
            p.doc = r.pod<std::uint32_t>();
            p.tf = r.pod<std::uint32_t>();
            if (p.doc >= docs) {
                throw FormatError(path.string(), 0, "posting references unknown document");
            }
            list.push_back(p);
        }
        index.postings.emplace(std::move(term), std::move(list));
    }
    if (!r.done()) {
        throw FormatError(path.string(), 0, "trailing bytes after index");
    }
    index.avg_doc_length = docs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(docs);
    return index;
}

double bm25_idf(std::size_t doc_count, std::size_t df)
{
    const auto n = static_cast<double>(doc_count);
    const auto f = static_cast<double>(df);
    return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
}

CandidateList bm25_search(const InvertedIndex& index, const Query& query, std::size_t m, Bm25Params params,
                          Execution execution)
{
    if (m == 0) {
        throw Error("bm25_search needs m >= 1");
    }
    const auto accumulate =
        execution == Execution::Parallel ? &kernels::omp::bm25_accumulate : &kernels::serial::bm25_accumulate;
    std::vector<double> scores(index.doc_count(), 0.0);
    std::vector<bool> matched(index.doc_count(), false);
    std::set<std::string, std::less<>> seen;
    for (const auto& term : word_tokens(query.text)) {
        if (!seen.insert(term).second) {
            continue;
        }
        auto it = index.postings.find(term);
        if (it == index.postings.end()) {
            continue;
        }
        const auto& list = it->second;
        accumulate(list, bm25_idf(index.doc_count(), list.size()), params, index.doc_lengths, index.avg_doc_length,
                   scores);
        for (const auto& p : list) {
            matched[p.doc] = true;
        }
    }
    std::vector<Candidate> scored;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (matched[d]) {
            scored.push_back({index.doc_ids[d], scores[d]});
        }
    }
    return top_m(query.query_id, std::move(scored), m);
}

DenseIndex::DenseIndex(const Corpus& corpus, Embedder& embedder) : embedder_(embedder)
{
    for (const auto& doc : corpus) {
        const auto text = trim(index_text(doc));
        if (text.empty()) {
            continue;
        }
        auto v = embedder.embed(text);
        if (dim_ == 0) {
            dim_ = v.dim();
        } else if (v.dim() != dim_) {
            throw EmbeddingError(fmt::format("embedder returned dim {} for {}, expected {}", v.dim(), doc.doc_id(), dim_));
        }
        norms_.push_back(kernels::norm(v.values));
        matrix_.insert(matrix_.end(), v.values.begin(), v.values.end());
        doc_ids_.push_back(doc.doc_id());
    }
}

CandidateList DenseIndex::search(const Query& query, std::size_t m, Execution execution) const
{
    if (m == 0) {
        throw Error("dense search needs m >= 1");
    }
    if (doc_ids_.empty()) {
        return CandidateList{query.query_id, {}};
    }
    const auto q = embedder_.embed(query.text);
    if (q.dim() != dim_) {
        throw EmbeddingError(fmt::format("query embedding dim {} does not match index dim {}", q.dim(), dim_));
    }
    std::vector<double> scores(doc_ids_.size());
    const auto rows = execution == Execution::Parallel ? &kernels::omp::cosine_rows : &kernels::serial::cosine_rows;
    rows(matrix_, dim_, norms_, q.values, scores);
    std::vector<Candidate> scored;
    scored.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scored.push_back({doc_ids_[i], scores[i]});
    }
    return top_m(query.query_id, std::move(scored), m);
}

CandidateList dense_search(const Corpus& corpus, Embedder& embedder, const Query& query, std::size_t m)
{
    return DenseIndex(corpus, embedder).search(query, m);
}

}  // namespace corank
