#include "overdraft/netgen.hpp"

#include "overdraft/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace overdraft {

namespace {

double quantize_reputation(double r)
{
    return std::round(r * 1e6) / 1e6;
}

} // namespace

loan_network_view generate_random_network(std::uint64_t n, const netgen_config& config)
{
    if (n == 0)
        throw std::invalid_argument("node count must be at least 1");
    if (config.loan_capacities.empty())
        throw std::invalid_argument("loan_capacities must not be empty");
    if (!(config.root_reputation >= 0.0 && config.root_reputation <= 1.0))
        throw std::invalid_argument("root_reputation must be in [0,1]");

    unsigned degree = config.out_degree;
    if (n <= degree)
        degree = static_cast<unsigned>(n - 1);

    loan_network_view view;
    view.as_of_block = 0;
    view.nodes.reserve(n);
    view.edges.reserve(n * degree);

    for (std::uint64_t v = 0; v < n; ++v) {
        auto rng = rng_stream::substream(config.seed, v);
        double rep = v == 0 ? quantize_reputation(config.root_reputation)
                            : quantize_reputation(rng.next_unit());
        view.nodes.push_back({node_id{v}, rep});
    }

    std::uint64_t next_agreement = 1;
    // Long validity window so every edge is usable at the snapshot block.
    constexpr block_height duration = 1'000'000;
    std::vector<std::uint64_t> picked;
    picked.reserve(degree);
    for (std::uint64_t v = 0; v < n; ++v) {
        auto rng = rng_stream::substream(config.seed, hash64(0x6c656e64, v));
        picked.clear();
        while (picked.size() < degree) {
            std::uint64_t lender = rng.next_below(n);
            if (lender == v)
                continue;
            bool seen = false;
            for (auto p : picked)
                if (p == lender) {
                    seen = true;
                    break;
                }
            if (seen)
                continue;
            picked.push_back(lender);
            token capacity =
                config.loan_capacities[rng.next_below(config.loan_capacities.size())];
            view.edges.push_back({next_agreement++, node_id{lender}, node_id{v}, capacity, 0,
                                  duration, 0, 0});
        }
    }
    return view;
}

} // namespace overdraft
