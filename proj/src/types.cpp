#include "overdraft/types.hpp"

#include <unordered_set>

namespace overdraft {

const char* to_string(agreement_violation v)
{
    switch (v) {
    case agreement_violation::self_loan: return "self_loan";
    case agreement_violation::non_positive_amount: return "non_positive_amount";
    case agreement_violation::non_positive_duration: return "non_positive_duration";
    }
    return "unknown";
}

std::vector<agreement_violation> validate_agreement(const loan_agreement& draft)
{
    std::vector<agreement_violation> out;
    if (draft.lender == draft.borrower)
        out.push_back(agreement_violation::self_loan);
    if (draft.amount == 0)
        out.push_back(agreement_violation::non_positive_amount);
    if (draft.agreement_duration == 0)
        out.push_back(agreement_violation::non_positive_duration);
    return out;
}

bool view_well_formed(const loan_network_view& view)
{
    std::unordered_set<node_id> ids;
    ids.reserve(view.nodes.size());
    for (const auto& n : view.nodes) {
        if (!ids.insert(n.id).second)
            return false; // duplicate node
        if (n.reputation < 0.0 || n.reputation > 1.0)
            return false;
    }
    for (const auto& e : view.edges) {
        if (!ids.contains(e.lender) || !ids.contains(e.borrower))
            return false;
        if (e.lender == e.borrower)
            return false;
        if (e.opening_block > view.as_of_block ||
            view.as_of_block >= e.opening_block + e.duration)
            return false;
    }
    return true;
}

} // namespace overdraft
