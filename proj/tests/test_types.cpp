#include "doctest.h"

#include "test_support.hpp"

#include <algorithm>

using namespace overdraft;
using namespace testsupport;

TEST_CASE("validate_agreement accepts a well-formed draft")
{
    CHECK(validate_agreement(draft(1, 2, 100, 10)).empty());
}

TEST_CASE("validate_agreement reports each violation")
{
    auto self = validate_agreement(draft(1, 1, 100, 10));
    REQUIRE(self.size() == 1);
    CHECK(self[0] == agreement_violation::self_loan);

    auto zero_amount = validate_agreement(draft(1, 2, 0, 10));
    REQUIRE(zero_amount.size() == 1);
    CHECK(zero_amount[0] == agreement_violation::non_positive_amount);

    auto zero_duration = validate_agreement(draft(1, 2, 100, 0));
    REQUIRE(zero_duration.size() == 1);
    CHECK(zero_duration[0] == agreement_violation::non_positive_duration);

    auto all = validate_agreement(draft(3, 3, 0, 0));
    CHECK(all.size() == 3);
}

TEST_CASE("violation names are stable")
{
    CHECK(std::string(to_string(agreement_violation::self_loan)) == "self_loan");
    CHECK(std::string(to_string(agreement_violation::non_positive_amount)) ==
          "non_positive_amount");
    CHECK(std::string(to_string(agreement_violation::non_positive_duration)) ==
          "non_positive_duration");
}

TEST_CASE("usable_at covers exactly the validity window")
{
    loan_agreement a = draft(1, 2, 100, 3);
    a.opening_block = 5;
    a.active = true;
    CHECK_FALSE(a.usable_at(4));
    CHECK(a.usable_at(5));
    CHECK(a.usable_at(6));
    CHECK(a.usable_at(7));
    CHECK_FALSE(a.usable_at(8)); // closed after its end block

    a.active = false;
    CHECK_FALSE(a.usable_at(6)); // consumed agreements are never usable
}

TEST_CASE("find_node returns the matching node or null")
{
    auto view = two_node_view();
    REQUIRE(view.find_node(node_id{1}) != nullptr);
    CHECK(view.find_node(node_id{1})->reputation == 0.5);
    CHECK(view.find_node(node_id{3}) == nullptr);
}

TEST_CASE("view_well_formed accepts a valid snapshot")
{
    CHECK(view_well_formed(two_node_view()));
    CHECK(view_well_formed(make_view({vn(1, 0.0)}, {}))); // single node, no edges
}

TEST_CASE("view_well_formed rejects structural defects")
{
    SUBCASE("duplicate node ids")
    {
        CHECK_FALSE(view_well_formed(make_view({vn(1, 0.5), vn(1, 0.6)}, {})));
    }
    SUBCASE("reputation out of range")
    {
        CHECK_FALSE(view_well_formed(make_view({vn(1, 1.5)}, {})));
        CHECK_FALSE(view_well_formed(make_view({vn(1, -0.1)}, {})));
    }
    SUBCASE("dangling edge endpoint")
    {
        CHECK_FALSE(view_well_formed(make_view({vn(1, 0.5)}, {ve(1, 2, 1, 10)})));
        CHECK_FALSE(view_well_formed(make_view({vn(2, 0.5)}, {ve(1, 2, 1, 10)})));
    }
    SUBCASE("self-loan edge")
    {
        CHECK_FALSE(view_well_formed(make_view({vn(1, 0.5)}, {ve(1, 1, 1, 10)})));
    }
    SUBCASE("window excludes the capture block")
    {
        auto view = make_view({vn(1, 0.5), vn(2, 0.9)}, {ve(1, 2, 1, 10, 5, 3)}, 9);
        CHECK_FALSE(view_well_formed(view));
        view.as_of_block = 6;
        CHECK(view_well_formed(view));
    }
}

TEST_CASE("node_id orders by value and hashes consistently")
{
    CHECK(node_id{1} < node_id{2});
    CHECK(node_id{2} == node_id{2});
    CHECK(std::hash<node_id>{}(node_id{7}) == std::hash<node_id>{}(node_id{7}));
}
