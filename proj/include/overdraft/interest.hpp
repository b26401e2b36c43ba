#pragma once

#include "overdraft/types.hpp"

#include <vector>

namespace overdraft {

// Inputs of the interest formula
//   I = max(0, loan_amount^rate_exponent * sigmoid(steepness * (R - midpoint))
//             + (duration_days / 365) * annual_rate)
struct interest_params
{
    double loan_amount = 0.0;          // alpha, in tokens (real for the formula)
    double rate_exponent = 1.0;        // beta, in (0,1]
    double loan_duration_days = 0.0;   // gamma
    double annual_rate = 0.0;          // delta, as a fraction
    double lender_reputation = 0.0;    // R in [0,1]
    double midpoint = 0.5;             // R0 in [0,1]
    double steepness = 1.0;            // zeta > 0
};

double sigmoid(double x);

// Throws std::invalid_argument when params leave their stated ranges.
double total_interest(const interest_params& p);

// Nearest integer, ties away from zero toward +inf; domain x >= 0.
token round_half_up(double x);

token rounded_total_interest(const interest_params& p);

// round_half_up(total / duration). Throws on duration = 0.
token per_block_interest(const interest_params& p, block_height duration_blocks);

// Installments for blocks 1..duration: blocks before the last pay
// min(per_block, still owed), the final block pays the rest, so the sum is
// exactly rounded_total_interest.
std::vector<token> interest_schedule(const interest_params& p, block_height duration_blocks);

} // namespace overdraft
