#pragma once

#include "overdraft/rng.hpp"
#include "overdraft/types.hpp"

#include <cstdint>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace overdraft {

struct walk_params
{
    double decay = 0.95;               // D, per-hop reputation multiplier
    unsigned max_distance = 9;         // H, hop ceiling
    token transaction_amount = 0;      // A_t
    std::uint64_t rng_seed = 0;
    bool enable_min_cap = true;        // cap a node's contribution at its loaned amount
    bool enable_early_stop = true;     // stop collecting once the target is reached
};

// Success probability drawn at a node visit.
inline double decayed_probability(double reputation, double decay, unsigned distance)
{
    double p = reputation;
    for (unsigned i = 0; i < distance; ++i)
        p *= decay;
    return p;
}

struct confidence_estimate
{
    std::uint64_t iterations = 0;
    std::map<token, std::uint64_t> samples; // settled amount -> walk count
    double mean = 0.0;
    double ci95_width = 0.0; // 2 * 1.96 * sample_stddev / sqrt(iterations)

    // Empirical P(settled >= threshold).
    double prob_at_least(token threshold) const;
};

// In-edge adjacency for a view, indexed by borrower, preserving the view's
// edge order within each node. The view must outlive the index.
class network_index
{
public:
    explicit network_index(const loan_network_view& view);

    const loan_network_view& view() const { return *view_; }
    std::size_t node_count() const { return reputations_.size(); }
    std::size_t edge_count() const { return edge_refs_.size(); }

    bool has_node(node_id id) const { return positions_.contains(id); }
    std::uint32_t position_of(node_id id) const { return positions_.at(id); }
    double reputation_at(std::uint32_t pos) const { return reputations_[pos]; }

    // In-edges of the node at pos, as indices into view().edges.
    std::pair<const std::uint32_t*, const std::uint32_t*> in_edges(std::uint32_t pos) const
    {
        return {edge_refs_.data() + offsets_[pos], edge_refs_.data() + offsets_[pos + 1]};
    }

    std::uint32_t lender_pos(std::uint32_t edge) const { return lender_pos_[edge]; }
    token amount_of(std::uint32_t edge) const { return amounts_[edge]; }

private:
    const loan_network_view* view_;
    std::unordered_map<node_id, std::uint32_t> positions_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> edge_refs_;
    std::vector<std::uint32_t> lender_pos_;
    std::vector<token> amounts_;
    std::vector<double> reputations_;
};

// One randomized exploration of the payer's loan network. visited_edges holds
// indices into view.edges and is shared down the recursion, so an edge is
// crossed at most once per walk; path carries the node chain (the current
// node is appended on entry). steps, when given, counts edge traversals.
// Throws std::invalid_argument when node is absent or loaned_amount is zero.
token random_walk(const loan_network_view& view, node_id node, token loaned_amount,
                  std::unordered_set<std::size_t>& visited_edges, std::vector<node_id>& path,
                  const walk_params& params, node_id root, rng_stream& rng,
                  std::uint64_t* steps = nullptr);

struct estimate_options
{
    // The tuned configuration keeps one adjacency index across all walks,
    // reuses an epoch-stamped visited array, and iterates in-edges in place.
    // The plain configuration rebuilds the index per call, tracks visited
    // edges in a hash set, and materializes the unvisited-edge list at every
    // node visit.
    bool optimized = true;
    unsigned workers = 1;
};

// K independent walks from payer with loaned_amount = transaction_amount.
// Walk i draws from a substream derived from (rng_seed, i), so results do
// not depend on how walks are partitioned across workers.
confidence_estimate estimate_confidence(const loan_network_view& view, node_id payer,
                                        const walk_params& params, std::uint64_t iterations,
                                        const estimate_options& options = {});

// Same, reusing a caller-held index (skips the per-call build; only
// meaningful for the optimized configuration).
confidence_estimate estimate_confidence(const network_index& index, node_id payer,
                                        const walk_params& params, std::uint64_t iterations,
                                        const estimate_options& options = {});

// Exact E[walk value] by linearity of expectation, mirroring the walk's edge
// order and stop rules. Only valid when branches cannot interact through the
// shared visited set, so it requires the lender-ward reachable subgraph to be
// a tree with at most 20 edges and rejects early-stop or min-cap params.
// Throws std::invalid_argument when those guards fail.
double exact_expectation(const loan_network_view& view, node_id payer,
                         const walk_params& params);

enum class payment_decision
{
    accept,
    deny,
};

const char* to_string(payment_decision d);

struct acceptance_policy
{
    token threshold = 0;          // amount that must arrive
    double min_probability = 0.9; // required empirical P(settled >= threshold)
};

payment_decision accept_payment(const confidence_estimate& estimate,
                                const acceptance_policy& policy);

} // namespace overdraft
