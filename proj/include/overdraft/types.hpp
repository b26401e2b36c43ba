#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace overdraft {

// Smallest indivisible token unit. Amounts are unsigned integers so
// conservation checks are exact; interest is computed in real arithmetic
// and rounded half-up on entry to the ledger.
using token = std::uint64_t;
using block_height = std::uint64_t;

// Stands in for a participant's public key.
struct node_id
{
    std::uint64_t value = 0;
    auto operator<=>(const node_id&) const = default;
};

struct account
{
    node_id node;
    token balance = 0;
    token locked = 0;          // sum over active outgoing loans of principal + remaining interest
    double reputation = 0.0;   // in [0,1]
};

struct loan_agreement
{
    std::uint64_t agreement_id = 0;
    node_id lender;
    node_id borrower;
    token amount = 0;                     // L
    block_height repayment_time = 0;      // T_r: blocks allowed to repay a consumed loan
    block_height agreement_duration = 0;  // T_d: validity window length
    block_height min_open_time = 0;       // T_o: earliest block the agreement may open
    std::optional<block_height> close_time;
    token opening_fee = 0;                // F_o, split between the parties
    token closing_fee = 0;
    block_height opening_block = 0;
    std::optional<block_height> closing_block;
    bool active = false;
    std::pair<double, double> reputation_snapshot{0.0, 0.0}; // (lender, borrower) at opening
    std::string dispute_tag = "loan-network-traversal";      // opaque mechanism tag

    // Eligible for settlement and confidence decisions at block b.
    bool usable_at(block_height b) const
    {
        return active && opening_block <= b && b < opening_block + agreement_duration;
    }
};

// Edge of a captured network view: exactly the fields of the network file
// format's L line. Amount is the principal still usable at capture time.
struct view_edge
{
    std::uint64_t agreement_id = 0;
    node_id lender;
    node_id borrower;
    token amount = 0;
    block_height opening_block = 0;
    block_height duration = 0;
    token opening_fee = 0;
    token closing_fee = 0;

    bool operator==(const view_edge&) const = default;
};

struct view_node
{
    node_id id;
    double reputation = 0.0;

    bool operator==(const view_node&) const = default;
};

// Point-in-time snapshot of the loan network: the last-known-online view an
// offline payee decides against. Immutable once captured.
struct loan_network_view
{
    block_height as_of_block = 0;
    std::vector<view_node> nodes;
    std::vector<view_edge> edges;

    bool operator==(const loan_network_view&) const = default;

    const view_node* find_node(node_id id) const
    {
        for (const auto& n : nodes)
            if (n.id == id)
                return &n;
        return nullptr;
    }
};

struct offline_transaction
{
    std::string tx_id;
    node_id payer;
    node_id payee;
    token amount = 0;                      // A_t
    block_height agreed_at_view = 0;       // as_of_block of the view the payee used
    std::optional<block_height> submitted_at;
};

// All time-dependent logic reads this clock; height only increases.
struct block_clock
{
    block_height height = 0;
};

enum class agreement_violation
{
    self_loan,
    non_positive_amount,
    non_positive_duration,
};

const char* to_string(agreement_violation v);

// Total function: returns every violated draft invariant, empty when well formed.
// Fees and amounts are unsigned by construction, so negative values are
// unrepresentable and not checked.
std::vector<agreement_violation> validate_agreement(const loan_agreement& draft);

// Structural well-formedness of a view: every edge endpoint present in nodes
// and every edge window containing as_of_block.
bool view_well_formed(const loan_network_view& view);

} // namespace overdraft

template <>
struct std::hash<overdraft::node_id>
{
    std::size_t operator()(const overdraft::node_id& n) const noexcept
    {
        return std::hash<std::uint64_t>{}(n.value);
    }
};
