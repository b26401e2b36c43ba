#pragma once

#include "overdraft/interest.hpp"
#include "overdraft/netformat.hpp"
#include "overdraft/reputation.hpp"
#include "overdraft/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace overdraft {

struct ledger_config
{
    reputation_params reputation{};

    // Interest terms applied at open_loan: amount = L, duration days =
    // T_d / blocks_per_day, reputation = lender's score at opening.
    bool interest_enabled = true;
    double rate_exponent = 0.75; // beta
    double annual_rate = 0.05;   // delta
    double midpoint = 0.5;       // R0
    double steepness = 20.0;     // zeta
    double blocks_per_day = 7200.0;

    // Dispute traversal radius; matches the estimator's default max_distance
    // so offline estimates and online resolution explore the same ring.
    unsigned settlement_depth = 9;

    // Per-hop dispute fee passed through to contributions; 0 keeps the core
    // accounting exact.
    token per_hop_fee = 0;

    // Repayment window applied to agreements loaded from files, whose format
    // does not carry T_r.
    block_height default_repayment_time = 100;

    // Compatibility mode: credit the borrower upfront at opening instead of
    // escrow-locking on the lender. Disables the locking defense; kept for
    // differential tests only.
    bool upfront_transfer_mode = false;

    std::uint64_t beacon_seed = 0;
};

struct open_result
{
    std::optional<std::uint64_t> agreement_id;
    std::string reason; // set when canceled
    explicit operator bool() const { return agreement_id.has_value(); }
};

enum class close_status
{
    closed,
    already_closed, // idempotent no-op
    too_early,      // rejected: offline users may still rely on the agreement
};

struct close_result
{
    close_status status = close_status::closed;
    token unlocked = 0;
};

struct settlement_report
{
    std::string tx_id;
    block_height settled_at = 0;
    token paid_total = 0;    // credited to the payee
    token paid_by_payer = 0;
    std::vector<std::pair<node_id, token>> lender_contributions;
    token shortfall = 0;
    std::vector<std::pair<node_id, settlement_outcome>> reputation_effects;
};

struct repay_result
{
    token paid = 0;
    token outstanding = 0; // remaining after this payment
};

struct ledger_event
{
    block_height block = 0;
    std::string kind;
    std::string payload; // JSON object, pre-serialized
    std::string to_json_line() const;
};

struct repayment_obligation
{
    std::uint64_t agreement_id = 0;
    node_id borrower;
    node_id lender;
    token outstanding = 0;
    block_height due = 0; // defaulted when the clock passes this height
};

// Smart-contract emulator: accounts, loan agreements with escrow locking,
// block clock with per-block interest and expiries, and offline-transaction
// settlement that drains locked loan collateral on shortfall. Single writer;
// captured views are immutable snapshots.
class ledger
{
public:
    explicit ledger(ledger_config config = {});

    const ledger_config& config() const { return config_; }
    block_height height() const { return clock_.height; }
    std::uint64_t beacon() const { return beacon_; }
    token fee_sink() const { return fee_sink_; }

    // Genesis mint; the only operation that changes total supply.
    void add_account(node_id node, token balance, double reputation);
    bool has_account(node_id node) const { return accounts_.contains(node); }
    const account& account_of(node_id node) const;
    std::vector<node_id> account_ids() const;

    token total_supply() const; // sum of balances + locked + fee_sink
    token minted() const { return minted_; }

    double reputation_of(node_id node) const;
    double reputation_of(node_id node, block_height at_block) const;
    const reputation_ledger& reputation_provider() const { return reputation_; }

    // Fills agreement_id, opening_block, active and the reputation snapshot;
    // draft supplies the parties and terms. A draft that fails validation,
    // opens before min_open_time, names unknown parties, or is not fully
    // funded is canceled without touching state.
    open_result open_loan(const loan_agreement& draft);

    const loan_agreement* agreement(std::uint64_t agreement_id) const;
    token remaining_principal(std::uint64_t agreement_id) const;
    token loaned_amount(node_id lender, node_id borrower) const;
    std::vector<std::uint64_t> agreement_ids() const;

    // One block: pays interest installments (delinquency closes the loan and
    // records a default), expires agreements past their window, times out
    // repayment obligations, and refreshes the beacon.
    std::vector<ledger_event> advance_block();

    settlement_report settle_offline_transaction(const offline_transaction& tx);

    close_result close_loan(std::uint64_t agreement_id);

    // Borrower pays down a consumed loan; amount 0 means the full outstanding
    // debt. Throws when the borrower cannot cover the requested payment.
    repay_result repay_loan(std::uint64_t agreement_id, token amount = 0);

    const std::vector<repayment_obligation>& obligations() const { return obligations_; }

    loan_network_view capture_view(block_height at_block) const;
    loan_network_view capture_view() const { return capture_view(clock_.height); }

    network_file dump() const;
    static ledger load(const network_file& file, ledger_config config = {});

    // Receives every emitted event; unset means events are only returned
    // where an operation's signature carries them.
    void set_event_sink(std::function<void(const ledger_event&)> sink);

private:
    struct agreement_state
    {
        loan_agreement info;
        token remaining_principal = 0;
        token interest_reserve = 0;  // unpaid installments still locked
        std::vector<token> schedule; // installment per block of the window
        std::size_t schedule_pos = 0;
        token consumed = 0;
        std::optional<node_id> fee_debtor; // payee of the first consuming settlement
        std::vector<std::pair<block_height, token>> consumption_history;

        token remaining_at(block_height b) const;
    };

    void emit(std::string kind, std::string payload, std::vector<ledger_event>* out = nullptr);
    void unlock_and_close(agreement_state& st, block_height at, bool charge_fee);
    void charge_fee_capped(node_id who, token amount);
    void drain_lenders(node_id debtor, unsigned depth, token& remaining, node_id payee,
                       std::unordered_set<std::uint64_t>& used,
                       std::map<node_id, token>& contributions,
                       std::vector<std::uint64_t>& exhausted, node_id root);
    std::vector<std::uint64_t> active_agreements_of(node_id borrower) const;

    ledger_config config_;
    std::map<node_id, account> accounts_;
    std::map<std::uint64_t, agreement_state> agreements_;
    std::map<node_id, std::vector<std::uint64_t>> active_by_borrower_;
    std::map<std::pair<node_id, node_id>, token> loaned_amounts_;
    block_clock clock_;
    std::uint64_t beacon_ = 0;
    std::uint64_t prev_beacon_ = 0;
    token fee_sink_ = 0;
    token minted_ = 0;
    std::uint64_t next_agreement_id_ = 1;
    reputation_ledger reputation_;
    std::unordered_set<std::string> settled_tx_;
    std::vector<repayment_obligation> obligations_;
    std::function<void(const ledger_event&)> sink_;
};

} // namespace overdraft
