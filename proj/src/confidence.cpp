#include "overdraft/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace overdraft {

double confidence_estimate::prob_at_least(token threshold) const
{
    if (iterations == 0)
        return 0.0;
    std::uint64_t hits = 0;
    for (auto it = samples.lower_bound(threshold); it != samples.end(); ++it)
        hits += it->second;
    return static_cast<double>(hits) / static_cast<double>(iterations);
}

network_index::network_index(const loan_network_view& view) : view_(&view)
{
    positions_.reserve(view.nodes.size());
    reputations_.reserve(view.nodes.size());
    for (const auto& n : view.nodes) {
        auto [it, fresh] = positions_.emplace(n.id, static_cast<std::uint32_t>(reputations_.size()));
        if (!fresh)
            throw std::invalid_argument("duplicate node id in view");
        reputations_.push_back(n.reputation);
    }

    std::vector<std::uint32_t> degree(reputations_.size(), 0);
    lender_pos_.resize(view.edges.size());
    amounts_.resize(view.edges.size());
    for (std::size_t e = 0; e < view.edges.size(); ++e) {
        auto borrower = positions_.find(view.edges[e].borrower);
        auto lender = positions_.find(view.edges[e].lender);
        if (borrower == positions_.end() || lender == positions_.end())
            throw std::invalid_argument("edge endpoint missing from view nodes");
        ++degree[borrower->second];
        lender_pos_[e] = lender->second;
        amounts_[e] = view.edges[e].amount;
    }

    offsets_.assign(reputations_.size() + 1, 0);
    for (std::size_t i = 0; i < degree.size(); ++i)
        offsets_[i + 1] = offsets_[i] + degree[i];

    // Fill in view order so each node's in-edges keep their file order.
    edge_refs_.resize(view.edges.size());
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t e = 0; e < view.edges.size(); ++e) {
        auto pos = positions_.find(view.edges[e].borrower)->second;
        edge_refs_[cursor[pos]++] = static_cast<std::uint32_t>(e);
    }
}

namespace {

void validate_walk_params(const walk_params& params)
{
    if (!(params.decay >= 0.0 && params.decay <= 1.0))
        throw std::invalid_argument("decay must be in [0,1]");
    if (params.transaction_amount == 0)
        throw std::invalid_argument("transaction_amount must be positive");
}

// Visited-edge tracking reused across all of an estimate's walks: bumping the
// epoch invalidates every mark without touching the array.
class stamp_visited
{
public:
    explicit stamp_visited(std::size_t edges) : stamps_(edges, 0) {}

    void next_walk()
    {
        if (++epoch_ == 0) {
            std::fill(stamps_.begin(), stamps_.end(), 0);
            epoch_ = 1;
        }
    }
    bool test(std::uint32_t e) const { return stamps_[e] == epoch_; }
    void mark(std::uint32_t e) { stamps_[e] = epoch_; }

private:
    std::vector<std::uint32_t> stamps_;
    std::uint32_t epoch_ = 0;
};

class set_visited
{
public:
    explicit set_visited(std::size_t) {}

    void next_walk() { seen_.clear(); }
    bool test(std::uint32_t e) const { return seen_.contains(e); }
    void mark(std::uint32_t e) { seen_.insert(e); }

private:
    std::unordered_set<std::uint32_t> seen_;
};

// One recursion shared by both configurations so they draw the same number
// of randoms per visit in the same order. materialize_lists reproduces the
// plain configuration's up-front unvisited-edge listing per visit; marks made
// deeper in the recursion are still honored at use time, so an edge crosses
// at most once per walk in either mode.
template <bool materialize_lists, class Visited>
class walk_engine
{
public:
    walk_engine(const network_index& index, const walk_params& params, std::uint32_t root_pos)
        : index_(index), params_(params), root_pos_(root_pos), visited_(index.edge_count())
    {
    }

    token run_walk(rng_stream& rng)
    {
        visited_.next_walk();
        return walk(root_pos_, params_.transaction_amount, 0, rng);
    }

    std::uint64_t steps() const { return steps_; }

private:
    token walk(std::uint32_t pos, token loaned_amount, unsigned distance, rng_stream& rng)
    {
        if (pos == root_pos_ && distance > 0)
            return 0;
        double p = decayed_probability(index_.reputation_at(pos), params_.decay, distance);
        if (rng.bernoulli(p))
            return loaned_amount;

        token stop = params_.transaction_amount;
        if (params_.enable_min_cap && loaned_amount < stop)
            stop = loaned_amount;

        token amount = 0;
        auto [first, last] = index_.in_edges(pos);
        if constexpr (materialize_lists) {
            std::vector<std::uint32_t> pending;
            pending.reserve(static_cast<std::size_t>(last - first));
            for (auto it = first; it != last; ++it)
                if (!visited_.test(*it))
                    pending.push_back(*it);
            for (std::uint32_t e : pending)
                if (!visit_edge(e, stop, distance, amount, rng))
                    break;
        } else {
            for (auto it = first; it != last; ++it)
                if (!visit_edge(*it, stop, distance, amount, rng))
                    break;
        }

        if (params_.enable_min_cap && amount > loaned_amount)
            amount = loaned_amount;
        return amount;
    }

    // Returns false to stop iterating this node's edges.
    bool visit_edge(std::uint32_t e, token stop, unsigned distance, token& amount, rng_stream& rng)
    {
        if (visited_.test(e))
            return true;
        if ((params_.enable_early_stop && amount >= stop) || distance >= params_.max_distance)
            return false;
        visited_.mark(e);
        ++steps_;
        std::uint32_t lender = index_.lender_pos(e);
        if (lender == root_pos_)
            return false;
        amount += walk(lender, index_.amount_of(e), distance + 1, rng);
        return true;
    }

    const network_index& index_;
    const walk_params& params_;
    std::uint32_t root_pos_;
    Visited visited_;
    std::uint64_t steps_ = 0;
};

void finalize_stats(confidence_estimate& est)
{
    long double sum = 0.0L;
    long double sum_sq = 0.0L;
    for (const auto& [value, count] : est.samples) {
        long double x = static_cast<long double>(value);
        long double c = static_cast<long double>(count);
        sum += x * c;
        sum_sq += x * x * c;
    }
    auto k = static_cast<long double>(est.iterations);
    est.mean = static_cast<double>(sum / k);
    if (est.iterations >= 2) {
        long double var = (sum_sq - sum * sum / k) / (k - 1.0L);
        if (var < 0.0L)
            var = 0.0L;
        est.ci95_width = static_cast<double>(2.0L * 1.96L * std::sqrt(var) / std::sqrt(k));
    } else {
        est.ci95_width = 0.0;
    }
}

template <bool materialize_lists, class Visited>
std::map<token, std::uint64_t> run_walk_range(const network_index& index, std::uint32_t root_pos,
                                              const walk_params& params, std::uint64_t begin,
                                              std::uint64_t end)
{
    walk_engine<materialize_lists, Visited> engine(index, params, root_pos);
    std::map<token, std::uint64_t> histogram;
    for (std::uint64_t i = begin; i < end; ++i) {
        auto rng = rng_stream::substream(params.rng_seed, i);
        ++histogram[engine.run_walk(rng)];
    }
    return histogram;
}

template <bool materialize_lists, class Visited>
confidence_estimate estimate_with(const network_index& index, std::uint32_t root_pos,
                                  const walk_params& params, std::uint64_t iterations,
                                  unsigned workers)
{
    confidence_estimate est;
    est.iterations = iterations;

    if (workers <= 1 || iterations < 2 * workers) {
        est.samples = run_walk_range<materialize_lists, Visited>(index, root_pos, params, 0,
                                                                 iterations);
    } else {
        std::vector<std::map<token, std::uint64_t>> parts(workers);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            std::uint64_t begin = iterations * w / workers;
            std::uint64_t end = iterations * (w + 1) / workers;
            threads.emplace_back([&, w, begin, end] {
                parts[w] = run_walk_range<materialize_lists, Visited>(index, root_pos, params,
                                                                      begin, end);
            });
        }
        for (auto& t : threads)
            t.join();
        for (const auto& part : parts)
            for (const auto& [value, count] : part)
                est.samples[value] += count;
    }

    finalize_stats(est);
    return est;
}

} // namespace

token random_walk(const loan_network_view& view, node_id node, token loaned_amount,
                  std::unordered_set<std::size_t>& visited_edges, std::vector<node_id>& path,
                  const walk_params& params, node_id root, rng_stream& rng, std::uint64_t* steps)
{
    if (!view.find_node(node))
        throw std::invalid_argument("walk node not in view");
    // Recursive calls legitimately carry zero-capacity agreements; only the
    // payer's own transfer must be positive.
    if (path.empty() && loaned_amount == 0)
        throw std::invalid_argument("loaned_amount must be positive");

    path.push_back(node);
    struct path_pop
    {
        std::vector<node_id>& p;
        ~path_pop() { p.pop_back(); }
    } guard{path};

    if (node == root && path.size() > 1)
        return 0;
    auto distance = static_cast<unsigned>(path.size() - 1);
    double p = decayed_probability(view.find_node(node)->reputation, params.decay, distance);
    if (rng.bernoulli(p))
        return loaned_amount;

    token stop = params.transaction_amount;
    if (params.enable_min_cap && loaned_amount < stop)
        stop = loaned_amount;

    token amount = 0;
    for (std::size_t e = 0; e < view.edges.size(); ++e) {
        const auto& edge = view.edges[e];
        if (edge.borrower != node || visited_edges.contains(e))
            continue;
        if ((params.enable_early_stop && amount >= stop) || distance >= params.max_distance)
            break;
        visited_edges.insert(e);
        if (steps)
            ++*steps;
        if (edge.lender == root)
            break;
        amount += random_walk(view, edge.lender, edge.amount, visited_edges, path, params, root,
                              rng, steps);
    }

    if (params.enable_min_cap && amount > loaned_amount)
        amount = loaned_amount;
    return amount;
}

confidence_estimate estimate_confidence(const network_index& index, node_id payer,
                                        const walk_params& params, std::uint64_t iterations,
                                        const estimate_options& options)
{
    validate_walk_params(params);
    if (iterations == 0)
        throw std::invalid_argument("iterations must be at least 1");
    if (!index.has_node(payer))
        throw std::invalid_argument("payer not in view");

    std::uint32_t root_pos = index.position_of(payer);
    unsigned workers = std::max(1u, options.workers);
    if (options.optimized)
        return estimate_with<false, stamp_visited>(index, root_pos, params, iterations, workers);
    return estimate_with<true, set_visited>(index, root_pos, params, iterations, workers);
}

confidence_estimate estimate_confidence(const loan_network_view& view, node_id payer,
                                        const walk_params& params, std::uint64_t iterations,
                                        const estimate_options& options)
{
    network_index index(view);
    return estimate_confidence(index, payer, params, iterations, options);
}

double exact_expectation(const loan_network_view& view, node_id payer, const walk_params& params)
{
    validate_walk_params(params);
    if (params.enable_early_stop || params.enable_min_cap)
        throw std::invalid_argument("oracle requires early stop and min cap disabled");
    if (view.edges.size() > 20)
        throw std::invalid_argument("oracle guard: more than 20 edges");

    network_index index(view);
    if (!index.has_node(payer))
        throw std::invalid_argument("payer not in view");
    std::uint32_t root_pos = index.position_of(payer);

    // The walk's shared visited set couples branches unless the lender-ward
    // reachable subgraph (after the root-lender break) is a tree.
    {
        std::vector<bool> seen(index.node_count(), false);
        seen[root_pos] = true;
        auto expand = [&](auto&& self, std::uint32_t pos, unsigned distance) -> void {
            if (distance >= params.max_distance)
                return;
            auto [first, last] = index.in_edges(pos);
            for (auto it = first; it != last; ++it) {
                std::uint32_t lender = index.lender_pos(*it);
                if (lender == root_pos)
                    break;
                if (seen[lender])
                    throw std::invalid_argument(
                        "oracle guard: lender-ward subgraph is not a tree");
                seen[lender] = true;
                self(self, lender, distance + 1);
            }
        };
        expand(expand, root_pos, 0);
    }

    auto expectation = [&](auto&& self, std::uint32_t pos, token amt, unsigned distance) -> double {
        double p = decayed_probability(index.reputation_at(pos), params.decay, distance);
        double continuation = 0.0;
        if (distance < params.max_distance) {
            auto [first, last] = index.in_edges(pos);
            for (auto it = first; it != last; ++it) {
                std::uint32_t lender = index.lender_pos(*it);
                if (lender == root_pos)
                    break;
                continuation += self(self, lender, index.amount_of(*it), distance + 1);
            }
        }
        return p * static_cast<double>(amt) + (1.0 - p) * continuation;
    };
    return expectation(expectation, root_pos, params.transaction_amount, 0);
}

const char* to_string(payment_decision d)
{
    return d == payment_decision::accept ? "accept" : "deny";
}

payment_decision accept_payment(const confidence_estimate& estimate,
                                const acceptance_policy& policy)
{
    return estimate.prob_at_least(policy.threshold) >= policy.min_probability
               ? payment_decision::accept
               : payment_decision::deny;
}

} // namespace overdraft
