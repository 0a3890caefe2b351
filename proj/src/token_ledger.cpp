#include "corank/token_ledger.hpp"

#include "corank/error.hpp"

namespace corank {

void TokenLedger::record(std::string_view stage, std::int64_t prompt_tokens, std::int64_t completion_tokens)
{
    if (prompt_tokens < 0 || completion_tokens < 0) {
        throw Error("negative token count for stage " + std::string(stage));
    }
    auto it = stages_.find(stage);
    if (it == stages_.end()) {
        it = stages_.emplace(std::string(stage), TokenCount{}).first;
    }
    it->second.prompt += prompt_tokens;
    it->second.completion += completion_tokens;
    total_.prompt += prompt_tokens;
    total_.completion += completion_tokens;
}

void TokenLedger::merge(const TokenLedger& other)
{
    for (const auto& [stage, count] : other.stages_) {
        record(stage, count.prompt, count.completion);
    }
}

nlohmann::json TokenLedger::to_json() const
{
    nlohmann::json stages = nlohmann::json::object();
    for (const auto& [stage, count] : stages_) {
        stages[stage] = {{"prompt_tokens", count.prompt}, {"completion_tokens", count.completion}};
    }
    return {{"prompt_tokens", total_.prompt},
            {"completion_tokens", total_.completion},
            {"total_tokens", total_.total()},
            {"stages", std::move(stages)}};
}

TokenLedger TokenLedger::from_json(const nlohmann::json& j)
{
    TokenLedger ledger;
    if (j.contains("stages")) {
        for (const auto& [stage, count] : j.at("stages").items()) {
            ledger.record(stage, count.at("prompt_tokens").get<std::int64_t>(),
                          count.at("completion_tokens").get<std::int64_t>());
        }
    }
    if (j.contains("total_tokens") && j.at("total_tokens").get<std::int64_t>() != ledger.total_tokens()) {
        throw Error("token ledger totals do not match the sum of its stages");
    }
    return ledger;
}

}  // namespace corank
