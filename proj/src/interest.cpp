#include "overdraft/interest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace overdraft {

double sigmoid(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

double total_interest(const interest_params& p)
{
    if (!(p.loan_amount >= 0.0))
        throw std::invalid_argument("loan_amount must be non-negative");
    if (!(p.rate_exponent > 0.0 && p.rate_exponent <= 1.0))
        throw std::invalid_argument("rate_exponent must be in (0,1]");
    if (!(p.loan_duration_days >= 0.0))
        throw std::invalid_argument("loan_duration_days must be non-negative");
    if (!(p.annual_rate >= 0.0))
        throw std::invalid_argument("annual_rate must be non-negative");
    if (!(p.lender_reputation >= 0.0 && p.lender_reputation <= 1.0))
        throw std::invalid_argument("lender_reputation must be in [0,1]");
    if (!(p.midpoint >= 0.0 && p.midpoint <= 1.0))
        throw std::invalid_argument("midpoint must be in [0,1]");
    if (!(p.steepness > 0.0))
        throw std::invalid_argument("steepness must be positive");

    double amount_term =
        std::pow(p.loan_amount, p.rate_exponent) *
        sigmoid(p.steepness * (p.lender_reputation - p.midpoint));
    double duration_term = (p.loan_duration_days / 365.0) * p.annual_rate;
    return std::max(0.0, amount_term + duration_term);
}

token round_half_up(double x)
{
    return static_cast<token>(std::floor(x + 0.5));
}

token rounded_total_interest(const interest_params& p)
{
    return round_half_up(total_interest(p));
}

token per_block_interest(const interest_params& p, block_height duration_blocks)
{
    if (duration_blocks == 0)
        throw std::invalid_argument("duration_blocks must be positive");
    return round_half_up(total_interest(p) / static_cast<double>(duration_blocks));
}

std::vector<token> interest_schedule(const interest_params& p, block_height duration_blocks)
{
    token per = per_block_interest(p, duration_blocks);
    token owed = rounded_total_interest(p);
    std::vector<token> out;
    out.reserve(duration_blocks);
    for (block_height b = 0; b + 1 < duration_blocks; ++b) {
        token pay = std::min(per, owed);
        out.push_back(pay);
        owed -= pay;
    }
    out.push_back(owed);
    return out;
}

} // namespace overdraft
