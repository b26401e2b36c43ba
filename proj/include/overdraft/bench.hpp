#pragma once

#include "overdraft/netgen.hpp"
#include "overdraft/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace overdraft {

struct bench_config
{
    std::vector<std::uint64_t> node_counts{10, 100, 1000, 10000, 100000, 1000000};
    std::vector<std::uint64_t> iteration_counts{100, 1000, 10000, 100000};
    unsigned out_degree = 9;
    unsigned max_distance = 9;
    double decay = 0.95;
    std::vector<token> loan_capacities{0, 10, 20};
    double root_reputation = 0.2;
    token transaction_amount = 100;
    std::uint64_t seed = 0;
    bool optimized = true; // default configuration for single estimates
};

// Throws std::invalid_argument when counts are zero or decay leaves [0,1].
void validate_bench_config(const bench_config& config);

// Flat key=value text, keys named after bench_config fields; lists are
// comma-separated, blank lines and #-comments ignored. Unknown keys and
// malformed values throw std::invalid_argument.
bench_config parse_bench_config(const std::string& text, bench_config base = {});
bench_config load_bench_config(const std::string& path, bench_config base = {});

netgen_config netgen_from(const bench_config& config);

struct bench_result
{
    std::size_t rows = 0;
    std::size_t skipped = 0;
};

// Sweeps (node count x iterations x both optimization settings) and writes
// one CSV row per cell: nodes,iterations,optimized,wall_ms,mean,ci95_width.
// A cell that exhausts memory is emitted with wall_ms=skipped instead of
// aborting the sweep.
bench_result run_benchmark(const bench_config& config, std::ostream& out);

} // namespace overdraft
