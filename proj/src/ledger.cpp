#include "overdraft/ledger.hpp"

#include "overdraft/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>

namespace overdraft {

namespace {

using nlohmann::json;

token checked_sub(token value, token amount, const char* what)
{
    if (amount > value)
        throw std::logic_error(std::string("token underflow in ") + what);
    return value - amount;
}

} // namespace

std::string ledger_event::to_json_line() const
{
    std::string out = "{\"block\":";
    out += std::to_string(block);
    out += ",\"kind\":\"";
    out += kind;
    out += "\",\"payload\":";
    out += payload.empty() ? "{}" : payload;
    out += "}";
    return out;
}

token ledger::agreement_state::remaining_at(block_height b) const
{
    token remaining = info.amount;
    for (const auto& [at, used] : consumption_history)
        if (at <= b)
            remaining = checked_sub(remaining, used, "consumption history");
    return remaining;
}

ledger::ledger(ledger_config config)
    : config_(std::move(config)), reputation_(config_.reputation)
{
    beacon_ = mix64(config_.beacon_seed);
}

void ledger::set_event_sink(std::function<void(const ledger_event&)> sink)
{
    sink_ = std::move(sink);
}

void ledger::emit(std::string kind, std::string payload, std::vector<ledger_event>* out)
{
    ledger_event event{clock_.height, std::move(kind), std::move(payload)};
    if (sink_)
        sink_(event);
    if (out)
        out->push_back(std::move(event));
}

void ledger::add_account(node_id node, token balance, double reputation)
{
    if (accounts_.contains(node))
        throw std::invalid_argument("account already exists");
    if (reputation < 0.0 || reputation > 1.0)
        throw std::invalid_argument("reputation must be in [0,1]");
    accounts_[node] = account{node, balance, 0, reputation};
    reputation_.register_node(node, reputation);
    minted_ += balance;
    emit("account_created",
         json{{"node", node.value}, {"balance", balance}, {"reputation", reputation}}.dump());
}

const account& ledger::account_of(node_id node) const
{
    auto it = accounts_.find(node);
    if (it == accounts_.end())
        throw std::invalid_argument("unknown account");
    return it->second;
}

std::vector<node_id> ledger::account_ids() const
{
    std::vector<node_id> out;
    out.reserve(accounts_.size());
    for (const auto& [id, _] : accounts_)
        out.push_back(id);
    return out;
}

token ledger::total_supply() const
{
    token total = fee_sink_;
    for (const auto& [_, acct] : accounts_)
        total += acct.balance + acct.locked;
    return total;
}

double ledger::reputation_of(node_id node) const
{
    return reputation_.reputation_of(node, clock_.height);
}

double ledger::reputation_of(node_id node, block_height at_block) const
{
    return reputation_.reputation_of(node, at_block);
}

open_result ledger::open_loan(const loan_agreement& draft)
{
    auto violations = validate_agreement(draft);
    if (!violations.empty()) {
        std::string reason = "invalid draft:";
        for (auto v : violations) {
            reason += ' ';
            reason += to_string(v);
        }
        return {std::nullopt, reason};
    }
    if (!accounts_.contains(draft.lender))
        return {std::nullopt, "unknown lender"};
    if (!accounts_.contains(draft.borrower))
        return {std::nullopt, "unknown borrower"};
    if (clock_.height < draft.min_open_time)
        return {std::nullopt, "before min open time"};

    auto& lender = accounts_.at(draft.lender);
    auto& borrower = accounts_.at(draft.borrower);

    double lender_rep = reputation_of(draft.lender);
    double borrower_rep = reputation_of(draft.borrower);

    agreement_state st;
    st.info = draft;
    st.info.agreement_id = next_agreement_id_;
    st.info.opening_block = clock_.height;
    st.info.close_time.reset();
    st.info.closing_block.reset();
    st.info.active = true;
    st.info.reputation_snapshot = {lender_rep, borrower_rep};
    st.remaining_principal = draft.amount;

    if (config_.upfront_transfer_mode) {
        // Compatibility path: immediate transfer, no escrow. The lender pays
        // the whole opening fee and the borrower is credited upfront.
        if (lender.balance < draft.amount + draft.opening_fee)
            return {std::nullopt, "insufficient lender funds"};
        lender.balance -= draft.amount + draft.opening_fee;
        borrower.balance += draft.amount;
        fee_sink_ += draft.opening_fee;
    } else {
        token interest = 0;
        if (config_.interest_enabled) {
            interest_params terms;
            terms.loan_amount = static_cast<double>(draft.amount);
            terms.rate_exponent = config_.rate_exponent;
            terms.loan_duration_days =
                static_cast<double>(draft.agreement_duration) / config_.blocks_per_day;
            terms.annual_rate = config_.annual_rate;
            terms.lender_reputation = lender_rep;
            terms.midpoint = config_.midpoint;
            terms.steepness = config_.steepness;
            st.schedule = interest_schedule(terms, draft.agreement_duration);
            interest = rounded_total_interest(terms);
        }
        token lender_fee = draft.opening_fee - draft.opening_fee / 2;
        token borrower_fee = draft.opening_fee / 2;
        if (lender.balance < draft.amount + draft.opening_fee + interest)
            return {std::nullopt, "insufficient lender funds"};
        if (borrower.balance < borrower_fee)
            return {std::nullopt, "insufficient borrower funds for opening fee"};

        lender.balance -= draft.amount + interest + lender_fee;
        lender.locked += draft.amount + interest;
        borrower.balance -= borrower_fee;
        fee_sink_ += draft.opening_fee;
        st.interest_reserve = interest;
    }

    std::uint64_t id = next_agreement_id_++;
    loaned_amounts_[{draft.lender, draft.borrower}] += draft.amount;
    active_by_borrower_[draft.borrower].push_back(id);
    emit("loan_opened", json{{"agreement", id},
                             {"lender", draft.lender.value},
                             {"borrower", draft.borrower.value},
                             {"amount", draft.amount},
                             {"interest", st.interest_reserve},
                             {"duration", draft.agreement_duration}}
                            .dump());
    agreements_.emplace(id, std::move(st));
    return {id, {}};
}

const loan_agreement* ledger::agreement(std::uint64_t agreement_id) const
{
    auto it = agreements_.find(agreement_id);
    return it == agreements_.end() ? nullptr : &it->second.info;
}

token ledger::remaining_principal(std::uint64_t agreement_id) const
{
    auto it = agreements_.find(agreement_id);
    return it == agreements_.end() ? 0 : it->second.remaining_principal;
}

token ledger::loaned_amount(node_id lender, node_id borrower) const
{
    auto it = loaned_amounts_.find({lender, borrower});
    return it == loaned_amounts_.end() ? 0 : it->second;
}

std::vector<std::uint64_t> ledger::agreement_ids() const
{
    std::vector<std::uint64_t> out;
    out.reserve(agreements_.size());
    for (const auto& [id, _] : agreements_)
        out.push_back(id);
    return out;
}

void ledger::charge_fee_capped(node_id who, token amount)
{
    auto& acct = accounts_.at(who);
    token take = std::min(acct.balance, amount);
    acct.balance -= take;
    fee_sink_ += take;
}

void ledger::unlock_and_close(agreement_state& st, block_height at, bool charge_fee)
{
    auto& lender = accounts_.at(st.info.lender);
    token release = st.remaining_principal + st.interest_reserve;
    if (!config_.upfront_transfer_mode && release > 0) {
        lender.locked = checked_sub(lender.locked, release, "unlock");
        lender.balance += release;
    }
    auto loaned = loaned_amounts_.find({st.info.lender, st.info.borrower});
    if (loaned != loaned_amounts_.end()) {
        loaned->second = checked_sub(loaned->second, st.remaining_principal, "loaned amounts");
        if (loaned->second == 0)
            loaned_amounts_.erase(loaned);
    }
    st.remaining_principal = 0;
    st.interest_reserve = 0;
    st.info.active = false;
    st.info.closing_block = at;
    st.info.close_time = at;

    auto& ids = active_by_borrower_[st.info.borrower];
    std::erase(ids, st.info.agreement_id);

    if (charge_fee && st.info.closing_fee > 0) {
        if (st.fee_debtor) {
            // Consumed in an offline payment: the recipient pays the fee.
            charge_fee_capped(*st.fee_debtor, st.info.closing_fee);
        } else {
            token lender_share = st.info.closing_fee - st.info.closing_fee / 2;
            charge_fee_capped(st.info.lender, lender_share);
            charge_fee_capped(st.info.borrower, st.info.closing_fee / 2);
        }
    }
}

std::vector<ledger_event> ledger::advance_block()
{
    std::vector<ledger_event> events;
    ++clock_.height;
    prev_beacon_ = beacon_;
    beacon_ = hash64(beacon_, clock_.height);
    block_height h = clock_.height;

    // Interest installments precede expiries so a loan's final installment
    // lands on its closing block.
    for (auto& [id, st] : agreements_) {
        if (!st.info.active || st.schedule.empty())
            continue;
        if (h <= st.info.opening_block || h > st.info.opening_block + st.info.agreement_duration)
            continue;
        auto pos = static_cast<std::size_t>(h - st.info.opening_block - 1);
        if (pos >= st.schedule.size())
            continue;
        token installment = st.schedule[pos];
        if (installment == 0)
            continue;
        auto& borrower = accounts_.at(st.info.borrower);
        auto& lender = accounts_.at(st.info.lender);
        if (borrower.balance < installment) {
            // Delinquent: close early, return the collateral, score a default.
            reputation_.record_outcome(st.info.borrower, settlement_outcome::defaulted, h);
            unlock_and_close(st, h, false);
            emit("loan_delinquent",
                 json{{"agreement", id}, {"missed_installment", installment}}.dump(), &events);
            continue;
        }
        borrower.balance -= installment;
        lender.balance += 2 * installment; // installment income + released reserve
        lender.locked = checked_sub(lender.locked, installment, "interest reserve");
        st.interest_reserve = checked_sub(st.interest_reserve, installment, "interest schedule");
        emit("interest_paid", json{{"agreement", id}, {"amount", installment}}.dump(), &events);
    }

    for (auto& [id, st] : agreements_) {
        if (!st.info.active || h < st.info.opening_block + st.info.agreement_duration)
            continue;
        token released = st.remaining_principal + st.interest_reserve;
        unlock_and_close(st, h, true);
        emit("loan_closed", json{{"agreement", id}, {"released", released}}.dump(), &events);
    }

    for (auto it = obligations_.begin(); it != obligations_.end();) {
        if (it->outstanding > 0 && h > it->due) {
            reputation_.record_outcome(it->borrower, settlement_outcome::defaulted, h);
            emit("repayment_defaulted",
                 json{{"agreement", it->agreement_id},
                      {"borrower", it->borrower.value},
                      {"written_off", it->outstanding}}
                     .dump(),
                 &events);
            it = obligations_.erase(it);
        } else {
            ++it;
        }
    }

    emit("block_advanced", json{{"height", h}, {"beacon", beacon_}}.dump(), &events);
    return events;
}

std::vector<std::uint64_t> ledger::active_agreements_of(node_id borrower) const
{
    std::vector<std::uint64_t> out;
    auto it = active_by_borrower_.find(borrower);
    if (it == active_by_borrower_.end())
        return out;
    for (auto id : it->second) {
        const auto& st = agreements_.at(id);
        if (st.info.active && st.info.usable_at(clock_.height) && st.remaining_principal > 0)
            out.push_back(id);
    }
    return out;
}

void ledger::drain_lenders(node_id debtor, unsigned depth, token& remaining, node_id payee,
                           std::unordered_set<std::uint64_t>& used,
                           std::map<node_id, token>& contributions,
                           std::vector<std::uint64_t>& exhausted, node_id root)
{
    if (depth > config_.settlement_depth || remaining == 0)
        return;

    auto ids = active_agreements_of(debtor);
    std::map<node_id, std::vector<std::uint64_t>> by_lender;
    for (auto id : ids)
        by_lender[agreements_.at(id).info.lender].push_back(id);
    std::vector<node_id> order;
    order.reserve(by_lender.size());
    for (const auto& [lender, _] : by_lender)
        order.push_back(lender);

    // Random lender selection seeded per the contract's dispute rule:
    // block height, previous block's beacon, and the debtor's address.
    rng_stream perm_rng(hash64(clock_.height, prev_beacon_, debtor.value));
    shuffle(std::span<node_id>(order), perm_rng);

    block_height h = clock_.height;
    for (auto lender_id : order) {
        if (remaining == 0)
            break;
        if (lender_id == root)
            break; // the insolvent payer cannot vouch for itself
        for (auto id : by_lender[lender_id]) {
            if (remaining == 0)
                break;
            if (used.contains(id))
                continue;
            auto& st = agreements_.at(id);
            if (!st.info.active || !st.info.usable_at(h) || st.remaining_principal == 0)
                continue;
            used.insert(id);
            auto& lender = accounts_.at(lender_id);
            token avail = st.remaining_principal;
            if (config_.upfront_transfer_mode)
                avail = std::min(avail, lender.balance);
            token take = std::min(remaining, avail);
            if (take == 0)
                continue;
            if (config_.upfront_transfer_mode)
                lender.balance -= take;
            else
                lender.locked = checked_sub(lender.locked, take, "contribution");
            accounts_.at(payee).balance += take;
            st.remaining_principal -= take;
            st.consumed += take;
            st.consumption_history.push_back({h, take});
            auto loaned = loaned_amounts_.find({lender_id, debtor});
            if (loaned != loaned_amounts_.end()) {
                loaned->second = checked_sub(loaned->second, take, "loaned amounts");
                if (loaned->second == 0)
                    loaned_amounts_.erase(loaned);
            }
            if (!st.fee_debtor)
                st.fee_debtor = payee;
            obligations_.push_back(
                {id, debtor, lender_id, take, h + st.info.repayment_time});
            contributions[lender_id] += take;
            remaining -= take;
            if (config_.per_hop_fee > 0) {
                // Traversal cost borne by the vouching side, on top of the
                // contribution itself.
                token fee = config_.per_hop_fee;
                if (config_.upfront_transfer_mode) {
                    fee = std::min(fee, lender.balance);
                    lender.balance -= fee;
                } else {
                    fee = std::min(fee, st.remaining_principal + st.interest_reserve);
                    lender.locked = checked_sub(lender.locked, fee, "hop fee");
                    if (fee <= st.interest_reserve)
                        st.interest_reserve -= fee;
                    else {
                        token from_principal = fee - st.interest_reserve;
                        st.interest_reserve = 0;
                        st.remaining_principal -= from_principal;
                        st.consumption_history.push_back({h, from_principal});
                        auto pair = loaned_amounts_.find({lender_id, debtor});
                        if (pair != loaned_amounts_.end()) {
                            pair->second =
                                checked_sub(pair->second, from_principal, "hop fee principal");
                            if (pair->second == 0)
                                loaned_amounts_.erase(pair);
                        }
                    }
                }
                fee_sink_ += fee;
            }
            emit("loan_tokens_used", json{{"agreement", id},
                                          {"lender", lender_id.value},
                                          {"debtor", debtor.value},
                                          {"amount", take}}
                                         .dump());
            if (st.remaining_principal == 0) {
                unlock_and_close(st, h, false);
                exhausted.push_back(id);
                emit("loan_exhausted", json{{"agreement", id}}.dump());
            }
        }
    }

    for (auto lender_id : order) {
        if (remaining == 0)
            break;
        if (lender_id == root)
            break;
        drain_lenders(lender_id, depth + 1, remaining, payee, used, contributions, exhausted,
                      root);
    }
}

settlement_report ledger::settle_offline_transaction(const offline_transaction& tx)
{
    if (tx.tx_id.empty())
        throw std::invalid_argument("tx_id must be set");
    if (settled_tx_.contains(tx.tx_id))
        throw std::invalid_argument("tx_id already settled: " + tx.tx_id);
    if (!accounts_.contains(tx.payer))
        throw std::invalid_argument("unknown payer");
    if (!accounts_.contains(tx.payee))
        throw std::invalid_argument("unknown payee");
    if (tx.payer == tx.payee)
        throw std::invalid_argument("payer equals payee");
    if (tx.amount == 0)
        throw std::invalid_argument("amount must be positive");

    settled_tx_.insert(tx.tx_id);
    block_height h = clock_.height;

    settlement_report report;
    report.tx_id = tx.tx_id;
    report.settled_at = h;

    auto& payer = accounts_.at(tx.payer);
    auto& payee = accounts_.at(tx.payee);

    if (payer.balance >= tx.amount) {
        payer.balance -= tx.amount;
        payee.balance += tx.amount;
        report.paid_by_payer = tx.amount;
        report.paid_total = tx.amount;
        reputation_.record_outcome(tx.payer, settlement_outcome::direct_success, h);
        report.reputation_effects.emplace_back(tx.payer, settlement_outcome::direct_success);
    } else {
        report.paid_by_payer = payer.balance;
        payee.balance += payer.balance;
        token remaining = tx.amount - payer.balance;
        payer.balance = 0;

        std::unordered_set<std::uint64_t> used;
        std::map<node_id, token> contributions;
        std::vector<std::uint64_t> exhausted;
        drain_lenders(tx.payer, 1, remaining, tx.payee, used, contributions, exhausted, tx.payer);

        for (const auto& [lender, amount] : contributions)
            report.lender_contributions.emplace_back(lender, amount);
        report.shortfall = remaining;
        report.paid_total = tx.amount - remaining;

        // A consumed agreement's termination fee falls on the recipient.
        for (auto id : exhausted)
            if (agreements_.at(id).info.closing_fee > 0)
                charge_fee_capped(tx.payee, agreements_.at(id).info.closing_fee);

        auto outcome = remaining > 0 ? settlement_outcome::defaulted
                                     : settlement_outcome::loan_fallback;
        reputation_.record_outcome(tx.payer, outcome, h);
        report.reputation_effects.emplace_back(tx.payer, outcome);
    }

    emit("settlement", json{{"tx", tx.tx_id},
                            {"payer", tx.payer.value},
                            {"payee", tx.payee.value},
                            {"amount", tx.amount},
                            {"paid_by_payer", report.paid_by_payer},
                            {"shortfall", report.shortfall}}
                           .dump());
    return report;
}

close_result ledger::close_loan(std::uint64_t agreement_id)
{
    auto it = agreements_.find(agreement_id);
    if (it == agreements_.end())
        throw std::invalid_argument("unknown agreement");
    auto& st = it->second;
    if (!st.info.active)
        return {close_status::already_closed, 0};
    if (clock_.height < st.info.opening_block + st.info.agreement_duration)
        return {close_status::too_early, 0};
    token released = st.remaining_principal + st.interest_reserve;
    unlock_and_close(st, clock_.height, true);
    emit("loan_closed", json{{"agreement", agreement_id}, {"released", released}}.dump());
    return {close_status::closed, released};
}

repay_result ledger::repay_loan(std::uint64_t agreement_id, token amount)
{
    token outstanding_total = 0;
    for (const auto& ob : obligations_)
        if (ob.agreement_id == agreement_id)
            outstanding_total += ob.outstanding;
    if (outstanding_total == 0)
        return {0, 0};

    token pay = amount == 0 ? outstanding_total : std::min(amount, outstanding_total);
    node_id borrower_id;
    node_id lender_id;
    for (const auto& ob : obligations_)
        if (ob.agreement_id == agreement_id) {
            borrower_id = ob.borrower;
            lender_id = ob.lender;
            break;
        }
    auto& borrower = accounts_.at(borrower_id);
    if (borrower.balance < pay)
        throw std::invalid_argument("insufficient balance to repay");

    borrower.balance -= pay;
    accounts_.at(lender_id).balance += pay;

    token left = pay;
    for (auto it = obligations_.begin(); it != obligations_.end() && left > 0;) {
        if (it->agreement_id != agreement_id) {
            ++it;
            continue;
        }
        token cut = std::min(left, it->outstanding);
        it->outstanding -= cut;
        left -= cut;
        if (it->outstanding == 0)
            it = obligations_.erase(it);
        else
            ++it;
    }

    token remaining_debt = outstanding_total - pay;
    if (remaining_debt == 0) {
        reputation_.record_outcome(borrower_id, settlement_outcome::direct_success,
                                   clock_.height);
    }
    emit("repayment_made", json{{"agreement", agreement_id},
                                {"borrower", borrower_id.value},
                                {"amount", pay},
                                {"outstanding", remaining_debt}}
                               .dump());
    return {pay, remaining_debt};
}

loan_network_view ledger::capture_view(block_height at_block) const
{
    if (at_block > clock_.height)
        throw std::invalid_argument("cannot snapshot a future block");

    loan_network_view view;
    view.as_of_block = at_block;
    view.nodes.reserve(accounts_.size());
    for (const auto& [id, _] : accounts_)
        view.nodes.push_back({id, reputation_.reputation_of(id, at_block)});

    for (const auto& [id, st] : agreements_) {
        const auto& info = st.info;
        if (info.opening_block > at_block ||
            at_block >= info.opening_block + info.agreement_duration)
            continue;
        if (info.closing_block && at_block >= *info.closing_block)
            continue;
        token remaining = st.remaining_at(at_block);
        if (remaining == 0)
            continue;
        view.edges.push_back({info.agreement_id, info.lender, info.borrower, remaining,
                              info.opening_block, info.agreement_duration, info.opening_fee,
                              info.closing_fee});
    }
    return view;
}

network_file ledger::dump() const
{
    network_file file;
    file.view = capture_view(clock_.height);
    file.accounts.reserve(accounts_.size());
    for (const auto& [id, acct] : accounts_)
        file.accounts.push_back({id, acct.balance, acct.locked});
    return file;
}

ledger ledger::load(const network_file& file, ledger_config config)
{
    ledger lg(std::move(config));
    lg.clock_.height = file.view.as_of_block;
    lg.beacon_ = mix64(lg.config_.beacon_seed);
    lg.prev_beacon_ = 0;
    for (block_height h = 1; h <= lg.clock_.height; ++h) {
        lg.prev_beacon_ = lg.beacon_;
        lg.beacon_ = hash64(lg.beacon_, h);
    }

    std::map<node_id, account_line> balances;
    for (const auto& a : file.accounts)
        balances[a.id] = a;

    for (const auto& n : file.view.nodes) {
        account acct{n.id, 0, 0, n.reputation};
        if (auto it = balances.find(n.id); it != balances.end()) {
            acct.balance = it->second.balance;
            acct.locked = it->second.locked;
        }
        lg.accounts_[n.id] = acct;
        lg.reputation_.register_node(n.id, n.reputation);
        lg.minted_ += acct.balance + acct.locked;
    }

    for (const auto& e : file.view.edges) {
        agreement_state st;
        st.info.agreement_id = e.agreement_id;
        st.info.lender = e.lender;
        st.info.borrower = e.borrower;
        st.info.amount = e.amount; // remaining principal at dump time
        st.info.repayment_time = lg.config_.default_repayment_time;
        st.info.agreement_duration = e.duration;
        st.info.opening_fee = e.opening_fee;
        st.info.closing_fee = e.closing_fee;
        st.info.opening_block = e.opening_block;
        st.info.active = true;
        double lender_rep = lg.reputation_.reputation_of(e.lender, lg.clock_.height);
        double borrower_rep = lg.reputation_.reputation_of(e.borrower, lg.clock_.height);
        st.info.reputation_snapshot = {lender_rep, borrower_rep};
        st.remaining_principal = e.amount;
        lg.loaned_amounts_[{e.lender, e.borrower}] += e.amount;
        lg.active_by_borrower_[e.borrower].push_back(e.agreement_id);
        lg.next_agreement_id_ = std::max(lg.next_agreement_id_, e.agreement_id + 1);
        lg.agreements_.emplace(e.agreement_id, std::move(st));
    }
    // An open agreement only exists with its principal escrowed. Lenders
    // absent from the balances section get exactly that collateral
    // materialized; an explicit account line that understates it describes
    // an unrepresentable contract state and is rejected.
    std::map<node_id, token> required;
    for (const auto& [_, st] : lg.agreements_)
        required[st.info.lender] += st.remaining_principal;
    for (const auto& [lender_id, need] : required) {
        auto& acct = lg.accounts_.at(lender_id);
        if (balances.contains(lender_id)) {
            if (acct.locked < need)
                throw std::invalid_argument("account " + std::to_string(lender_id.value) +
                                            " locks less than its open agreements");
        } else {
            acct.locked = need;
            lg.minted_ += need;
        }
    }

    for (auto& [_, ids] : lg.active_by_borrower_)
        std::sort(ids.begin(), ids.end());
    return lg;
}

} // namespace overdraft
