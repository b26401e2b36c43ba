#include "overdraft/netformat.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace overdraft {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& why)
{
    throw netformat_error("line " + std::to_string(line_no) + ": " + why);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ')
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no, const char* what)
{
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(line_no, std::string("bad ") + what + " '" + s + "'");
    return value;
}

double parse_reputation(const std::string& s, std::size_t line_no)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(line_no, "bad reputation '" + s + "'");
    if (!(value >= 0.0 && value <= 1.0))
        fail(line_no, "reputation out of [0,1]: '" + s + "'");
    return value;
}

} // namespace

std::string format_reputation(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", r);
    std::string s = buf;
    while (s.size() > 1 && s.back() == '0')
        s.pop_back();
    if (s.back() == '.')
        s.pop_back();
    return s;
}

void write_network_file(const network_file& file, std::ostream& out)
{
    out << "overdraft-net v1 as_of=" << file.view.as_of_block << '\n';
    for (const auto& n : file.view.nodes)
        out << "N " << n.id.value << ' ' << format_reputation(n.reputation) << '\n';
    for (const auto& a : file.accounts)
        out << "A " << a.id.value << ' ' << a.balance << ' ' << a.locked << '\n';
    for (const auto& e : file.view.edges)
        out << "L " << e.agreement_id << ' ' << e.lender.value << ' ' << e.borrower.value
            << ' ' << e.amount << ' ' << e.opening_block << ' ' << e.duration << ' '
            << e.opening_fee << ' ' << e.closing_fee << '\n';
}

std::string write_network_file(const network_file& file)
{
    std::ostringstream os;
    write_network_file(file, os);
    return os.str();
}

network_file read_network_file(std::istream& in)
{
    network_file file;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw netformat_error("empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    constexpr const char* prefix = "overdraft-net v1 as_of=";
    if (line.rfind(prefix, 0) != 0)
        fail(line_no, "expected header 'overdraft-net v1 as_of=<block>'");
    file.view.as_of_block = parse_u64(line.substr(std::string(prefix).size()), line_no, "as_of");

    std::unordered_set<std::uint64_t> node_ids;
    std::unordered_set<std::uint64_t> agreement_ids;
    std::unordered_set<std::uint64_t> account_ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_fields(line);
        if (fields.empty())
            continue;
        const std::string& tag = fields[0];
        if (tag == "N") {
            if (fields.size() != 3)
                fail(line_no, "N line needs 2 fields");
            view_node n;
            n.id.value = parse_u64(fields[1], line_no, "node id");
            n.reputation = parse_reputation(fields[2], line_no);
            if (!node_ids.insert(n.id.value).second)
                fail(line_no, "duplicate node id " + fields[1]);
            file.view.nodes.push_back(n);
        } else if (tag == "A") {
            if (fields.size() != 4)
                fail(line_no, "A line needs 3 fields");
            account_line a;
            a.id.value = parse_u64(fields[1], line_no, "node id");
            a.balance = parse_u64(fields[2], line_no, "balance");
            a.locked = parse_u64(fields[3], line_no, "locked");
            if (!account_ids.insert(a.id.value).second)
                fail(line_no, "duplicate account id " + fields[1]);
            file.accounts.push_back(a);
        } else if (tag == "L") {
            if (fields.size() != 9)
                fail(line_no, "L line needs 8 fields");
            view_edge e;
            e.agreement_id = parse_u64(fields[1], line_no, "agreement id");
            e.lender.value = parse_u64(fields[2], line_no, "lender");
            e.borrower.value = parse_u64(fields[3], line_no, "borrower");
            e.amount = parse_u64(fields[4], line_no, "amount");
            e.opening_block = parse_u64(fields[5], line_no, "opening block");
            e.duration = parse_u64(fields[6], line_no, "duration");
            e.opening_fee = parse_u64(fields[7], line_no, "opening fee");
            e.closing_fee = parse_u64(fields[8], line_no, "closing fee");
            if (!agreement_ids.insert(e.agreement_id).second)
                fail(line_no, "duplicate agreement id " + fields[1]);
            if (e.lender == e.borrower)
                fail(line_no, "self-loan on agreement " + fields[1]);
            file.view.edges.push_back(e);
        } else {
            fail(line_no, "unknown record type '" + tag + "'");
        }
    }

    for (const auto& e : file.view.edges) {
        if (!node_ids.contains(e.lender.value))
            fail(line_no, "agreement " + std::to_string(e.agreement_id) +
                              " references undeclared lender " + std::to_string(e.lender.value));
        if (!node_ids.contains(e.borrower.value))
            fail(line_no, "agreement " + std::to_string(e.agreement_id) +
                              " references undeclared borrower " + std::to_string(e.borrower.value));
    }
    for (const auto& a : file.accounts)
        if (!node_ids.contains(a.id.value))
            fail(line_no, "account for undeclared node " + std::to_string(a.id.value));

    return file;
}

network_file read_network_file(const std::string& text)
{
    std::istringstream is(text);
    return read_network_file(is);
}

network_file load_network_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw netformat_error("cannot open '" + path + "'");
    return read_network_file(in);
}

void save_network_file(const network_file& file, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw netformat_error("cannot write '" + path + "'");
    write_network_file(file, out);
    if (!out)
        throw netformat_error("write failed for '" + path + "'");
}

} // namespace overdraft
