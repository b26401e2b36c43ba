// Command-line front end: graph generation, confidence estimation, ledger
// settlement and block advancement, interest quotes, Sybil-attack evaluation,
// and the benchmark sweep. Exit codes: 0 success, 2 invalid input, 3 benchmark
// finished but skipped cells.
#include "CLI11.hpp"

#include "overdraft/bench.hpp"
#include "overdraft/confidence.hpp"
#include "overdraft/interest.hpp"
#include "overdraft/ledger.hpp"
#include "overdraft/netformat.hpp"
#include "overdraft/netgen.hpp"
#include "overdraft/sybil.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace overdraft;

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_skipped = 3;

// Routes primary output to --out when given, stdout otherwise.
class out_stream
{
public:
    explicit out_stream(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::invalid_argument("cannot open output file " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_histogram_csv(const confidence_estimate& estimate, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open histogram file " + path);
    out << "amount,count\n";
    for (const auto& [amount, count] : estimate.samples)
        out << amount << ',' << count << '\n';
}

void write_reputation_csv(const ledger& led, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open reputation file " + path);
    out << "node,block,reputation\n";
    for (node_id id : led.account_ids())
        out << id.value << ',' << led.height() << ','
            << format_reputation(led.reputation_of(id)) << '\n';
}

std::unique_ptr<std::ofstream> open_event_log(ledger& led, const std::string& path)
{
    if (path.empty()) return nullptr;
    auto log = std::make_unique<std::ofstream>(path);
    if (!*log) throw std::invalid_argument("cannot open event log " + path);
    led.set_event_sink([log = log.get()](const ledger_event& event) {
        *log << event.to_json_line() << '\n';
    });
    return log;
}

void print_estimate(std::ostream& out, const confidence_estimate& estimate, token amount,
                    const acceptance_policy& policy)
{
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "iterations: " << estimate.iterations << '\n'
        << "mean: " << estimate.mean << '\n'
        << "ci95_width: " << estimate.ci95_width << '\n'
        << "p_full_amount: " << estimate.prob_at_least(amount) << '\n'
        << "decision: " << to_string(accept_payment(estimate, policy)) << '\n';
}

struct ledger_flags
{
    bool no_interest = false;
    unsigned settlement_depth = 9;
    std::uint64_t repayment_time = 100;
    double blocks_per_day = 7200.0;
    std::uint64_t per_hop_fee = 0;
};

void add_ledger_flags(CLI::App* cmd, ledger_flags& flags)
{
    cmd->add_flag("--no-interest", flags.no_interest, "disable per-block interest installments");
    cmd->add_option("--settlement-depth", flags.settlement_depth, "dispute traversal radius");
    cmd->add_option("--repayment-time", flags.repayment_time,
                    "repayment window for loaded agreements (blocks)");
    cmd->add_option("--blocks-per-day", flags.blocks_per_day, "block cadence for interest terms");
    cmd->add_option("--per-hop-fee", flags.per_hop_fee, "dispute fee charged per traversal hop");
}

ledger_config ledger_config_from(const ledger_flags& flags, std::uint64_t seed)
{
    ledger_config config;
    config.interest_enabled = !flags.no_interest;
    config.settlement_depth = flags.settlement_depth;
    config.default_repayment_time = flags.repayment_time;
    config.blocks_per_day = flags.blocks_per_day;
    config.per_hop_fee = flags.per_hop_fee;
    config.beacon_seed = seed;
    return config;
}

void print_settlement(std::ostream& out, const settlement_report& report)
{
    out << "tx_id: " << report.tx_id << '\n'
        << "settled_at: " << report.settled_at << '\n'
        << "paid_total: " << report.paid_total << '\n'
        << "paid_by_payer: " << report.paid_by_payer << '\n'
        << "shortfall: " << report.shortfall << '\n';
    for (const auto& [lender, amount] : report.lender_contributions)
        out << "contribution: " << lender.value << ' ' << amount << '\n';
    for (const auto& [node, outcome] : report.reputation_effects)
        out << "outcome: " << node.value << ' ' << to_string(outcome) << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"offline-payment loan network simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // lets the global --seed/--config/--out follow the subcommand

    std::uint64_t seed = 0;
    std::string config_path;
    std::string out_path;
    app.add_option("--seed", seed, "root seed for all randomized behavior");
    app.add_option("--config", config_path, "key=value defaults file")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "primary output file (default: stdout)");

    // gen-graph
    auto* gen_cmd = app.add_subcommand("gen-graph", "generate a synthetic loan network file");
    std::uint64_t gen_nodes = 0;
    std::optional<unsigned> gen_degree;
    std::optional<double> gen_root_rep;
    std::optional<std::vector<token>> gen_capacities;
    gen_cmd->add_option("--nodes", gen_nodes, "node count")->required();
    gen_cmd->add_option("--degree", gen_degree, "incoming lenders per node");
    gen_cmd->add_option("--root-reputation", gen_root_rep, "payer node reputation");
    gen_cmd->add_option("--capacities", gen_capacities, "loan capacity choices")->delimiter(',');

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "estimate settlement confidence for a payment");
    std::string est_net;
    std::optional<std::uint64_t> est_payer;
    std::optional<token> est_amount;
    std::uint64_t est_iterations = 10000;
    std::optional<double> est_decay;
    std::optional<unsigned> est_max_distance;
    bool est_no_min_cap = false;
    bool est_no_early_stop = false;
    bool est_unoptimized = false;
    unsigned est_workers = 1;
    double est_min_probability = 0.9;
    std::string est_hist;
    est_cmd->add_option("--net", est_net, "network file")->required()->check(CLI::ExistingFile);
    est_cmd->add_option("--payer", est_payer, "payer node id (default: first node)");
    est_cmd->add_option("--amount", est_amount, "transaction amount");
    est_cmd->add_option("--iterations", est_iterations, "walk count");
    est_cmd->add_option("--decay", est_decay, "per-hop reputation decay");
    est_cmd->add_option("--max-distance", est_max_distance, "hop ceiling");
    est_cmd->add_flag("--no-min-cap", est_no_min_cap, "lift the per-node loaned-amount cap");
    est_cmd->add_flag("--no-early-stop", est_no_early_stop, "collect past the target amount");
    est_cmd->add_flag("--unoptimized", est_unoptimized, "use the plain walk configuration");
    est_cmd->add_option("--workers", est_workers, "worker threads");
    est_cmd->add_option("--min-probability", est_min_probability, "acceptance threshold");
    est_cmd->add_option("--hist", est_hist, "write the settled-amount histogram CSV here");

    // settle
    auto* settle_cmd = app.add_subcommand("settle", "settle an offline transaction on a ledger");
    std::string settle_ledger_path;
    std::uint64_t settle_payer = 0;
    std::uint64_t settle_payee = 0;
    token settle_amount = 0;
    std::string settle_tx_id;
    std::string settle_events;
    std::string settle_rep_out;
    ledger_flags settle_flags;
    settle_cmd->add_option("--ledger", settle_ledger_path, "ledger network file")
        ->required()
        ->check(CLI::ExistingFile);
    settle_cmd->add_option("--payer", settle_payer, "payer node id")->required();
    settle_cmd->add_option("--payee", settle_payee, "payee node id")->required();
    settle_cmd->add_option("--amount", settle_amount, "transaction amount")->required();
    settle_cmd->add_option("--tx-id", settle_tx_id, "transaction id (default: derived)");
    settle_cmd->add_option("--events", settle_events, "JSON-lines event log");
    settle_cmd->add_option("--rep-out", settle_rep_out, "reputation CSV (node,block,reputation)");
    add_ledger_flags(settle_cmd, settle_flags);

    // advance
    auto* adv_cmd = app.add_subcommand("advance", "advance the block clock on a ledger");
    std::string adv_ledger_path;
    std::uint64_t adv_blocks = 1;
    std::string adv_events;
    std::string adv_rep_out;
    ledger_flags adv_flags;
    adv_cmd->add_option("--ledger", adv_ledger_path, "ledger network file")
        ->required()
        ->check(CLI::ExistingFile);
    adv_cmd->add_option("--blocks", adv_blocks, "blocks to advance");
    adv_cmd->add_option("--events", adv_events, "JSON-lines event log");
    adv_cmd->add_option("--rep-out", adv_rep_out, "reputation CSV (node,block,reputation)");
    add_ledger_flags(adv_cmd, adv_flags);

    // interest
    auto* int_cmd = app.add_subcommand("interest", "quote interest for loan terms");
    interest_params int_params;
    int_params.rate_exponent = 0.75;
    int_params.annual_rate = 0.05;
    int_params.midpoint = 0.5;
    int_params.steepness = 20.0;
    int_params.loan_duration_days = 1.0;
    std::optional<std::uint64_t> int_blocks;
    unsigned int_sweep_points = 0;
    int_cmd->add_option("--amount", int_params.loan_amount, "loan amount")->required();
    int_cmd->add_option("--reputation", int_params.lender_reputation, "lender reputation")
        ->required();
    int_cmd->add_option("--rate-exponent", int_params.rate_exponent, "amount exponent");
    int_cmd->add_option("--duration-days", int_params.loan_duration_days, "loan duration in days");
    int_cmd->add_option("--annual-rate", int_params.annual_rate, "flat annual rate");
    int_cmd->add_option("--midpoint", int_params.midpoint, "reputation sigmoid midpoint");
    int_cmd->add_option("--steepness", int_params.steepness, "reputation sigmoid steepness");
    int_cmd->add_option("--blocks", int_blocks, "agreement window; prints the per-block schedule");
    int_cmd->add_option("--sweep-reputation", int_sweep_points,
                        "emit CSV reputation,total_interest over this many steps");

    // attack
    auto* atk_cmd = app.add_subcommand("attack", "evaluate a Sybil strategy");
    std::string atk_kind;
    attack_params atk;
    std::uint64_t atk_iterations = 20000;
    atk_cmd
        ->add_option("--kind", atk_kind, "reputation_split | coin_split | loan_split")
        ->required()
        ->check(CLI::IsMember({"reputation_split", "coin_split", "loan_split"}));
    atk_cmd->add_option("--sybils", atk.sybil_count, "identities after the split");
    atk_cmd->add_option("--reputation", atk.lender_reputation, "attacker reputation");
    atk_cmd->add_option("--loan", atk.loan_amount, "attacker loan capacity");
    atk_cmd->add_option("--epsilon", atk.epsilon, "reputation split penalty");
    atk_cmd->add_option("--payer-reputation", atk.payer_reputation, "payer reputation");
    atk_cmd->add_option("--amount", atk.transaction_amount, "transaction amount");
    atk_cmd->add_option("--iterations", atk_iterations, "walks per estimate");
    atk_cmd->add_option("--balance", atk.attacker_balance, "coin_split attacker balance");
    atk_cmd->add_option("--first-loan", atk.first_loan, "coin_split first loan amount");
    atk_cmd->add_option("--second-loan", atk.second_loan, "coin_split second loan amount");
    atk_cmd->add_option("--min-probability", atk.victim_min_probability,
                        "victim acceptance threshold");
    atk_cmd->add_option("--reputation-floor", atk.min_reputation_floor,
                        "victim minimum payer reputation");
    bool atk_csv = false;
    atk_cmd->add_flag("--csv", atk_csv, "emit the verdict-table row instead of the report");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run the estimator benchmark sweep");
    std::optional<std::vector<std::uint64_t>> bench_nodes;
    std::optional<std::vector<std::uint64_t>> bench_iterations;
    bench_cmd->add_option("--nodes", bench_nodes, "node counts")->delimiter(',');
    bench_cmd->add_option("--iterations", bench_iterations, "iteration counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        bench_config defaults;
        if (!config_path.empty()) defaults = load_bench_config(config_path);
        if (app.count("--seed") > 0) defaults.seed = seed;

        if (app.got_subcommand(gen_cmd)) {
            netgen_config gen = netgen_from(defaults);
            if (gen_degree) gen.out_degree = *gen_degree;
            if (gen_root_rep) gen.root_reputation = *gen_root_rep;
            if (gen_capacities) gen.loan_capacities = *gen_capacities;
            loan_network_view view = generate_random_network(gen_nodes, gen);
            out_stream out(out_path);
            write_network_file(network_file{std::move(view), {}}, out.get());
            return exit_ok;
        }

        if (app.got_subcommand(est_cmd)) {
            network_file net = load_network_file(est_net);
            if (net.view.nodes.empty()) throw std::invalid_argument("network file has no nodes");
            node_id payer{est_payer.value_or(net.view.nodes.front().id.value)};

            walk_params params;
            params.decay = est_decay.value_or(defaults.decay);
            params.max_distance = est_max_distance.value_or(defaults.max_distance);
            params.transaction_amount = est_amount.value_or(defaults.transaction_amount);
            params.rng_seed = defaults.seed;
            params.enable_min_cap = !est_no_min_cap;
            params.enable_early_stop = !est_no_early_stop;

            estimate_options options;
            options.optimized = est_unoptimized ? false : defaults.optimized;
            options.workers = est_workers;

            confidence_estimate estimate =
                estimate_confidence(net.view, payer, params, est_iterations, options);
            if (!est_hist.empty()) write_histogram_csv(estimate, est_hist);

            acceptance_policy policy{params.transaction_amount, est_min_probability};
            out_stream out(out_path);
            print_estimate(out.get(), estimate, params.transaction_amount, policy);
            return exit_ok;
        }

        if (app.got_subcommand(settle_cmd)) {
            ledger led = ledger::load(load_network_file(settle_ledger_path),
                                      ledger_config_from(settle_flags, defaults.seed));
            auto log = open_event_log(led, settle_events);

            offline_transaction tx;
            tx.payer = node_id{settle_payer};
            tx.payee = node_id{settle_payee};
            tx.amount = settle_amount;
            tx.agreed_at_view = led.height();
            tx.submitted_at = led.height();
            if (settle_tx_id.empty()) {
                std::ostringstream derived;
                derived << "tx-" << settle_payer << '-' << settle_payee << '-' << led.height();
                tx.tx_id = derived.str();
            } else {
                tx.tx_id = settle_tx_id;
            }

            settlement_report report = led.settle_offline_transaction(tx);
            if (!settle_rep_out.empty()) write_reputation_csv(led, settle_rep_out);
            out_stream out(out_path);
            print_settlement(out.get(), report);
            return exit_ok;
        }

        if (app.got_subcommand(adv_cmd)) {
            ledger led = ledger::load(load_network_file(adv_ledger_path),
                                      ledger_config_from(adv_flags, defaults.seed));
            auto log = open_event_log(led, adv_events);
            std::size_t events = 0;
            for (std::uint64_t i = 0; i < adv_blocks; ++i)
                events += led.advance_block().size();
            if (!adv_rep_out.empty()) write_reputation_csv(led, adv_rep_out);
            out_stream out(out_path);
            write_network_file(led.dump(), out.get());
            std::cerr << "height " << led.height() << ", " << events << " events\n";
            return exit_ok;
        }

        if (app.got_subcommand(int_cmd)) {
            out_stream out(out_path);
            if (int_sweep_points > 0) {
                out.get() << "reputation,total_interest\n";
                interest_params p = int_params;
                for (unsigned i = 0; i <= int_sweep_points; ++i) {
                    p.lender_reputation = static_cast<double>(i) / int_sweep_points;
                    out.get() << format_reputation(p.lender_reputation) << ','
                              << total_interest(p) << '\n';
                }
                return exit_ok;
            }
            out.get().setf(std::ios::fixed);
            out.get().precision(6);
            out.get() << "total_interest: " << total_interest(int_params) << '\n'
                      << "rounded: " << rounded_total_interest(int_params) << '\n';
            if (int_blocks) {
                out.get() << "per_block: " << per_block_interest(int_params, *int_blocks) << '\n';
                auto schedule = interest_schedule(int_params, *int_blocks);
                out.get() << "schedule:";
                for (token inst : schedule) out.get() << ' ' << inst;
                out.get() << '\n';
            }
            return exit_ok;
        }

        if (app.got_subcommand(atk_cmd)) {
            if (atk_kind == "reputation_split") atk.kind = attack_kind::reputation_split;
            else if (atk_kind == "coin_split") atk.kind = attack_kind::coin_split;
            else atk.kind = attack_kind::loan_split;
            atk.decay = defaults.decay;
            atk.max_distance = defaults.max_distance;
            atk.seed = defaults.seed;

            attack_scenario scenario = build_scenario(atk);
            attack_report report = evaluate_attack(scenario, atk_iterations);
            out_stream out(out_path);
            std::ostream& os = out.get();
            if (atk_csv) {
                os << "kind,sybil_count,lender_reputation,epsilon,"
                      "baseline_influence,variant_influence,verdict\n"
                   << attack_csv_row(scenario, report) << '\n';
                return exit_ok;
            }
            os.setf(std::ios::fixed);
            os.precision(6);
            os << "kind: " << to_string(scenario.kind) << '\n'
               << "sybils: " << scenario.sybil_count << '\n'
               << "baseline_influence: " << report.baseline_influence << '\n'
               << "variant_influence: " << report.variant_influence << '\n'
               << "penalty: " << report.penalty << '\n'
               << "attacker_advantage: " << report.attacker_advantage << '\n'
               << "verdict: " << to_string(report.verdict) << '\n';
            if (scenario.kind == attack_kind::coin_split)
                os << "locking_blocked: " << (report.locking_blocked ? "true" : "false") << '\n';
            os << "baseline_decision: " << to_string(report.baseline_decision) << '\n'
               << "variant_decision: " << to_string(report.variant_decision) << '\n'
               << "baseline_mean: " << report.baseline_estimate.mean << '\n'
               << "variant_mean: " << report.variant_estimate.mean << '\n';
            return exit_ok;
        }

        if (app.got_subcommand(bench_cmd)) {
            bench_config config = defaults;
            if (bench_nodes) config.node_counts = *bench_nodes;
            if (bench_iterations) config.iteration_counts = *bench_iterations;
            out_stream out(out_path);
            bench_result result = run_benchmark(config, out.get());
            std::cerr << result.rows << " cells, " << result.skipped << " skipped\n";
            return result.skipped > 0 ? exit_skipped : exit_ok;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_ok;
}
