#pragma once

#include "overdraft/types.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace overdraft {

// Text format for loan networks and ledger dumps:
//
//   overdraft-net v1 as_of=<block>
//   N <id> <reputation>
//   A <id> <balance> <locked>
//   L <agreement_id> <lender> <borrower> <amount> <opening_block> <T_d> <F_o> <closing_fee>
//
// A lines appear only in ledger dumps. Reputations carry at most six
// fractional digits. One record per line, fields space-separated.

struct account_line
{
    node_id id;
    token balance = 0;
    token locked = 0;

    bool operator==(const account_line&) const = default;
};

struct network_file
{
    loan_network_view view;
    std::vector<account_line> accounts; // empty for plain network files
};

struct netformat_error : std::runtime_error
{
    explicit netformat_error(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-point with up to six fractional digits, trailing zeros trimmed.
std::string format_reputation(double r);

void write_network_file(const network_file& file, std::ostream& out);
std::string write_network_file(const network_file& file);

// Throws netformat_error with a line number on malformed input, unknown
// record types, duplicate ids, or dangling edge endpoints.
network_file read_network_file(std::istream& in);
network_file read_network_file(const std::string& text);

network_file load_network_file(const std::string& path);
void save_network_file(const network_file& file, const std::string& path);

} // namespace overdraft
