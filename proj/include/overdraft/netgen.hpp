#pragma once

#include "overdraft/types.hpp"

#include <cstdint>
#include <vector>

namespace overdraft {

// Random-network shape used by the benchmarks: every node gets a fixed
// number of incoming loan edges from distinct other nodes, capacities drawn
// from a small set, and node 0 is the designated payer.
struct netgen_config
{
    unsigned out_degree = 9;
    std::vector<token> loan_capacities{0, 10, 20};
    double root_reputation = 0.2;
    std::uint64_t seed = 0;
};

// Reputations are uniform in [0,1] quantized to six fractional digits so a
// serialize/parse round trip reproduces the view exactly; the root keeps its
// configured score. Degree clips to n-1 when fewer distinct lenders exist.
// Deterministic for a fixed seed regardless of build order.
loan_network_view generate_random_network(std::uint64_t n, const netgen_config& config);

} // namespace overdraft
