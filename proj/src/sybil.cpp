#include "overdraft/sybil.hpp"

#include "overdraft/ledger.hpp"

#include <sstream>
#include <stdexcept>

namespace overdraft {

namespace {

constexpr node_id payer_id{1};
constexpr node_id attacker_base{2};
constexpr block_height scenario_duration = 1'000'000;

loan_network_view split_view(double payer_rep, double lender_rep, token amount, unsigned parts)
{
    loan_network_view view;
    view.as_of_block = 0;
    view.nodes.push_back({payer_id, payer_rep});
    for (unsigned i = 0; i < parts; ++i) {
        node_id sybil{attacker_base.value + i};
        view.nodes.push_back({sybil, lender_rep / parts});
        view.edges.push_back(
            {i + 1, sybil, payer_id, amount / parts, 0, scenario_duration, 0, 0});
    }
    return view;
}

double influence_of(const loan_network_view& view, const std::vector<node_id>& attackers)
{
    double total = 0.0;
    for (const auto& edge : view.edges) {
        bool ours = false;
        for (auto a : attackers)
            if (a == edge.lender) {
                ours = true;
                break;
            }
        if (!ours)
            continue;
        const auto* lender = view.find_node(edge.lender);
        total += lender->reputation * static_cast<double>(edge.amount);
    }
    return total;
}

} // namespace

const char* to_string(attack_kind k)
{
    switch (k) {
    case attack_kind::reputation_split: return "reputation_split";
    case attack_kind::coin_split: return "coin_split";
    case attack_kind::loan_split: return "loan_split";
    }
    return "unknown";
}

attack_scenario build_scenario(const attack_params& params)
{
    if (params.sybil_count == 0)
        throw std::invalid_argument("sybil count must be at least 1");
    if (!(params.lender_reputation >= 0.0 && params.lender_reputation <= 1.0))
        throw std::invalid_argument("lender reputation must be in [0,1]");
    if (!(params.payer_reputation >= 0.0 && params.payer_reputation <= 1.0))
        throw std::invalid_argument("payer reputation must be in [0,1]");
    if (params.kind == attack_kind::reputation_split && !(params.epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");

    attack_scenario scenario;
    scenario.kind = params.kind;
    scenario.payer = payer_id;
    scenario.epsilon = params.epsilon;
    scenario.lender_reputation = params.lender_reputation;
    scenario.sybil_count = params.sybil_count;
    scenario.victim_min_probability = params.victim_min_probability;
    scenario.min_reputation_floor = params.min_reputation_floor;
    scenario.walk.decay = params.decay;
    scenario.walk.max_distance = params.max_distance;
    scenario.walk.transaction_amount = params.transaction_amount;
    scenario.walk.rng_seed = params.seed;

    if (params.kind == attack_kind::coin_split) {
        // Replay the duplicate-collateral opens against a real ledger; the
        // interest and fee knobs are zeroed so locking is the only gate.
        ledger_config config;
        config.interest_enabled = false;
        config.beacon_seed = params.seed;
        ledger lg(config);
        node_id attacker = attacker_base;
        node_id second_borrower{3};
        lg.add_account(payer_id, 0, params.payer_reputation);
        lg.add_account(attacker, params.attacker_balance, params.lender_reputation);
        lg.add_account(second_borrower, 0, params.payer_reputation);

        token first = params.first_loan == 0 ? params.attacker_balance : params.first_loan;
        token second = params.second_loan == 0 ? params.attacker_balance : params.second_loan;

        loan_agreement draft;
        draft.lender = attacker;
        draft.borrower = payer_id;
        draft.amount = first;
        draft.repayment_time = 100;
        draft.agreement_duration = scenario_duration;
        lg.open_loan(draft);
        scenario.baseline = lg.capture_view();

        draft.borrower = second_borrower;
        draft.amount = second;
        auto dup = lg.open_loan(draft);
        scenario.duplicate_rejected = !dup;
        scenario.variant = lg.capture_view();

        scenario.baseline_attackers = {attacker};
        scenario.variant_attackers = {attacker};
        scenario.attacker_initial_balance = params.attacker_balance;
        scenario.attacker_active_principal =
            lg.loaned_amount(attacker, payer_id) + lg.loaned_amount(attacker, second_borrower);
        return scenario;
    }

    if (params.loan_amount == 0 || params.loan_amount % params.sybil_count != 0)
        throw std::invalid_argument("loan amount must split evenly across the Sybils");

    scenario.baseline =
        split_view(params.payer_reputation, params.lender_reputation, params.loan_amount, 1);
    scenario.variant = split_view(params.payer_reputation, params.lender_reputation,
                                  params.loan_amount, params.sybil_count);
    scenario.baseline_attackers = {attacker_base};
    for (unsigned i = 0; i < params.sybil_count; ++i)
        scenario.variant_attackers.push_back(node_id{attacker_base.value + i});
    return scenario;
}

attack_report evaluate_attack(const attack_scenario& scenario, std::uint64_t iterations)
{
    attack_report report;
    report.baseline_influence = influence_of(scenario.baseline, scenario.baseline_attackers);
    report.variant_influence = influence_of(scenario.variant, scenario.variant_attackers);
    if (scenario.kind == attack_kind::reputation_split && scenario.sybil_count > 1) {
        double loaned = 0.0;
        for (const auto& edge : scenario.baseline.edges)
            loaned += static_cast<double>(edge.amount);
        report.penalty = scenario.epsilon * loaned;
    }
    report.attacker_advantage =
        report.variant_influence - report.penalty - report.baseline_influence;
    report.verdict = report.attacker_advantage > 0.0 ? split_verdict::profitable
                                                     : split_verdict::unprofitable;
    report.locking_blocked =
        scenario.kind == attack_kind::coin_split && scenario.duplicate_rejected;

    report.baseline_estimate =
        estimate_confidence(scenario.baseline, scenario.payer, scenario.walk, iterations);
    report.variant_estimate =
        estimate_confidence(scenario.variant, scenario.payer, scenario.walk, iterations);

    acceptance_policy policy{scenario.walk.transaction_amount, scenario.victim_min_probability};
    auto decide = [&](const loan_network_view& view, const confidence_estimate& est) {
        const auto* payer = view.find_node(scenario.payer);
        if (payer && payer->reputation < scenario.min_reputation_floor)
            return payment_decision::deny;
        return accept_payment(est, policy);
    };
    report.baseline_decision = decide(scenario.baseline, report.baseline_estimate);
    report.variant_decision = decide(scenario.variant, report.variant_estimate);
    return report;
}

std::string attack_csv_row(const attack_scenario& scenario, const attack_report& report)
{
    std::ostringstream row;
    row << to_string(scenario.kind) << ',' << scenario.sybil_count << ','
        << scenario.lender_reputation << ',' << scenario.epsilon << ','
        << report.baseline_influence << ',' << report.variant_influence << ',';
    if (report.locking_blocked)
        row << "blocked";
    else
        row << to_string(report.verdict);
    return row.str();
}

} // namespace overdraft
