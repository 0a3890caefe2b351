#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "corank/config.hpp"
#include "corank/corpus.hpp"

// Operator commands behind the CLI. Each returns a process exit code, prints a
// human summary to `out`, and throws corank::Error on unusable input.

namespace corank {

/// First-stage candidates for every query, in query order.
std::vector<CandidateList> retrieve_candidates(const ExperimentConfig& config, const Corpus& corpus,
                                               std::span<const Query> queries, Embedder* embedder);

/// Output path of the run file for a strategy or retriever tag.
std::filesystem::path run_path(const ExperimentConfig& config, std::string_view tag);

int cmd_extract(const ExperimentConfig& config, std::ostream& out);
int cmd_rerank(const ExperimentConfig& config, std::ostream& out);
/// With no run paths, evaluates the run file of every configured strategy.
int cmd_eval(const ExperimentConfig& config, std::vector<std::filesystem::path> run_paths, std::ostream& out);
int cmd_token_stats(const ExperimentConfig& config, std::ostream& out);
int cmd_cost_report(const ExperimentConfig& config, std::vector<std::filesystem::path> run_paths, std::ostream& out);

struct TokenStats {
    std::size_t count = 0;
    double mean = 0;
    double median = 0;
    std::size_t p95 = 0;  // nearest rank
    std::size_t max = 0;
};

TokenStats summarize_tokens(std::vector<std::size_t> values);

}  // namespace corank
