#include "overdraft/reputation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace overdraft {

const char* to_string(settlement_outcome o)
{
    switch (o) {
    case settlement_outcome::direct_success: return "direct_success";
    case settlement_outcome::loan_fallback: return "loan_fallback";
    case settlement_outcome::defaulted: return "default";
    }
    return "unknown";
}

double outcome_delta(const reputation_params& params, settlement_outcome outcome)
{
    switch (outcome) {
    case settlement_outcome::direct_success: return params.direct_success_reward;
    case settlement_outcome::loan_fallback: return -params.loan_fallback_penalty;
    case settlement_outcome::defaulted: return -params.default_penalty;
    }
    return 0.0;
}

reputation_ledger::reputation_ledger(reputation_params params) : params_(params)
{
    if (params_.epoch_length == 0)
        throw std::invalid_argument("epoch_length must be positive");
    if (params_.prior < 0.0 || params_.prior > 1.0)
        throw std::invalid_argument("prior must be in [0,1]");
}

void reputation_ledger::register_node(node_id node, double initial)
{
    base_[node] = std::clamp(initial, 0.0, 1.0);
}

bool reputation_ledger::known(node_id node) const
{
    return base_.contains(node) || history_.contains(node);
}

void reputation_ledger::record_outcome(node_id node, settlement_outcome outcome, block_height at)
{
    history_[node].push_back({at, outcome});
}

double reputation_ledger::reputation_of(node_id node, block_height at_block) const
{
    double score = params_.prior;
    if (auto it = base_.find(node); it != base_.end())
        score = it->second;
    if (auto it = history_.find(node); it != history_.end()) {
        for (const auto& event : it->second) {
            if (event.at > at_block)
                continue;
            auto epochs = (at_block - event.at) / params_.epoch_length;
            score += outcome_delta(params_, event.outcome) *
                     std::pow(params_.decay_per_epoch, static_cast<double>(epochs));
        }
    }
    return std::clamp(score, 0.0, 1.0);
}

const std::vector<reputation_event>* reputation_ledger::history(node_id node) const
{
    auto it = history_.find(node);
    return it == history_.end() ? nullptr : &it->second;
}

std::vector<node_id> reputation_ledger::nodes() const
{
    std::vector<node_id> out;
    out.reserve(base_.size() + history_.size());
    for (const auto& [node, _] : base_)
        out.push_back(node);
    for (const auto& [node, _] : history_)
        if (!base_.contains(node))
            out.push_back(node);
    std::sort(out.begin(), out.end());
    return out;
}

const char* to_string(split_verdict v)
{
    return v == split_verdict::profitable ? "profitable" : "unprofitable";
}

split_analysis analyze_split(double R, unsigned K, double epsilon, double loaned)
{
    if (!(R >= 0.0 && R <= 1.0))
        throw std::invalid_argument("reputation must be in [0,1]");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    if (K == 0)
        throw std::invalid_argument("K must be at least 1");
    if (!(loaned >= 0.0))
        throw std::invalid_argument("loaned amount must be non-negative");

    split_analysis out;
    out.baseline_influence = R * loaned;
    // K nodes of reputation R/K each loaning loaned/K.
    out.split_influence = K == 1 ? R * loaned : (R / K) * (loaned / K) * K;
    out.penalty = K == 1 ? 0.0 : epsilon * loaned;
    out.exceeds_penalty = R > static_cast<double>(K) * epsilon;
    out.verdict = (out.split_influence - out.penalty > out.baseline_influence)
                      ? split_verdict::profitable
                      : split_verdict::unprofitable;
    return out;
}

split_verdict sybil_split_profitability(double R, unsigned K, double epsilon)
{
    return analyze_split(R, K, epsilon).verdict;
}

} // namespace overdraft
