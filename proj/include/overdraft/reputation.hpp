#pragma once

#include "overdraft/types.hpp"

#include <unordered_map>
#include <vector>

namespace overdraft {

// How a settled offline payment reflects on the payer.
enum class settlement_outcome
{
    direct_success, // payer covered the transaction from its own funds
    loan_fallback,  // lenders had to cover part of it
    defaulted,      // shortfall remained, or a repayment obligation lapsed
};

const char* to_string(settlement_outcome o);

struct reputation_params
{
    double prior = 0.2;
    double direct_success_reward = 0.01;
    double loan_fallback_penalty = 0.05;
    double default_penalty = 0.10;
    block_height epoch_length = 100;
    double decay_per_epoch = 0.9;
};

// Signed score contribution of one outcome before epoch decay.
double outcome_delta(const reputation_params& params, settlement_outcome outcome);

struct reputation_event
{
    block_height at = 0;
    settlement_outcome outcome = settlement_outcome::direct_success;
};

// Outcome-history scoring provider. Scores are re-derived from history on
// every query: prior + sum of outcome deltas, each damped by
// decay_per_epoch^(whole epochs elapsed since the outcome), clamped to [0,1].
// Stands in for an external graph-based scorer, which would plug in behind
// the same reputation_of surface.
class reputation_ledger
{
public:
    explicit reputation_ledger(reputation_params params = {});

    const reputation_params& params() const { return params_; }

    // Sets the node's base score used in place of the global prior.
    void register_node(node_id node, double initial);
    bool known(node_id node) const;

    void record_outcome(node_id node, settlement_outcome outcome, block_height at);

    // Events after at_block are ignored, so historical queries replay exactly.
    double reputation_of(node_id node, block_height at_block) const;

    const std::vector<reputation_event>* history(node_id node) const;
    std::vector<node_id> nodes() const; // ascending id order

private:
    reputation_params params_;
    std::unordered_map<node_id, double> base_;
    std::unordered_map<node_id, std::vector<reputation_event>> history_;
};

enum class split_verdict
{
    profitable,
    unprofitable,
};

const char* to_string(split_verdict v);

struct split_analysis
{
    double baseline_influence = 0.0; // R·X: one lender of reputation R loaning X
    double split_influence = 0.0;    // K Sybils at R/K loaning X/K each: R·X/K
    double penalty = 0.0;            // ε·X charged against the split
    bool exceeds_penalty = false;    // R > K·ε, the regime where the penalty binds hardest
    split_verdict verdict = split_verdict::unprofitable;
};

// Influence economics of splitting one lender of reputation R into K equal
// Sybils under split penalty epsilon. Splitting divides influence by K and
// then pays the penalty, so no valid input makes it profitable; callers read
// exceeds_penalty for the threshold regime. Throws std::invalid_argument on
// R outside [0,1], epsilon <= 0, or K = 0.
split_analysis analyze_split(double R, unsigned K, double epsilon, double loaned = 1.0);

split_verdict sybil_split_profitability(double R, unsigned K, double epsilon);

} // namespace overdraft
