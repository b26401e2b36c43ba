#pragma once

#include "overdraft/confidence.hpp"
#include "overdraft/reputation.hpp"
#include "overdraft/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace overdraft {

enum class attack_kind
{
    reputation_split, // one lender split into K, with the split penalty applied
    coin_split,       // two loans backed by the same tokens, against a live ledger
    loan_split,       // one lender's loan spread across K Sybils
};

const char* to_string(attack_kind k);

struct attack_params
{
    attack_kind kind = attack_kind::loan_split;
    unsigned sybil_count = 2;        // K
    double lender_reputation = 0.5;  // R
    token loan_amount = 100;         // X, must divide evenly by K
    double epsilon = 0.3;            // split penalty (reputation_split)
    double payer_reputation = 0.2;
    token transaction_amount = 100;
    double decay = 0.95;
    unsigned max_distance = 9;
    std::uint64_t seed = 0;

    // Victim payee's policy: demand the full amount with this confidence, and
    // refuse payers below the reputation floor outright.
    double victim_min_probability = 0.9;
    double min_reputation_floor = 0.05;

    // coin_split: attacker funds and the two loan drafts it tries to open.
    // Zero loan fields default to the full balance each (the Fig. 5a shape).
    token attacker_balance = 100;
    token first_loan = 0;
    token second_loan = 0;
};

// Matched baseline/variant pair the evaluation compares. For coin_split the
// pair is produced by replaying the opens against a real ledger, so the
// locking outcome is part of the scenario.
struct attack_scenario
{
    attack_kind kind = attack_kind::loan_split;
    loan_network_view baseline;
    loan_network_view variant;
    node_id payer;
    std::vector<node_id> baseline_attackers;
    std::vector<node_id> variant_attackers;
    double epsilon = 0.0;
    double lender_reputation = 0.0;
    unsigned sybil_count = 1;
    walk_params walk;
    double victim_min_probability = 0.9;
    double min_reputation_floor = 0.05;

    // coin_split outcome fields
    bool duplicate_rejected = false;
    token attacker_initial_balance = 0;
    token attacker_active_principal = 0;
};

struct attack_report
{
    double baseline_influence = 0.0; // sum of R_i * L_i over attacker lenders
    double variant_influence = 0.0;
    double penalty = 0.0;            // epsilon * X for reputation_split, else 0
    double attacker_advantage = 0.0; // variant - penalty - baseline
    split_verdict verdict = split_verdict::unprofitable;
    bool locking_blocked = false;    // coin_split: duplicate open was rejected
    payment_decision baseline_decision = payment_decision::deny;
    payment_decision variant_decision = payment_decision::deny;
    confidence_estimate baseline_estimate;
    confidence_estimate variant_estimate;
};

// Throws std::invalid_argument on invalid K, amounts that do not split
// evenly, or out-of-range reputations.
attack_scenario build_scenario(const attack_params& params);

attack_report evaluate_attack(const attack_scenario& scenario, std::uint64_t iterations);

// One verdict-table row: kind,K,R,epsilon,baseline_influence,variant_influence,verdict
std::string attack_csv_row(const attack_scenario& scenario, const attack_report& report);

} // namespace overdraft
