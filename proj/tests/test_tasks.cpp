#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "chshnet/tasks.hpp"

using namespace chshnet::tasks;

TEST_CASE("eval_task on the canonical tasks") {
    const BitSample s1{1, 0, 0, 0};
    CHECK(eval_task(TaskSpec::identity(1), s1) == 1);

    const BitSample s2{1, 1, 0, 0};
    CHECK(eval_task(TaskSpec::xor_of(1, 2), s2) == 0);

    const BitSample s3{0, 0, 1, 0};
    CHECK(eval_task(TaskSpec::xor_of(3, 4), s3) == 1);
}

TEST_CASE("task construction validates indices") {
    CHECK_THROWS_AS(TaskSpec::identity(0), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::identity(5), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::xor_of(2, 2), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::xor_of(1, 7), std::invalid_argument);
}

TEST_CASE("canonical pairs are the four alpha/beta combinations") {
    const auto& pairs = canonical_pairs();
    REQUIRE(pairs.size() == 4);
    CHECK(pairs[0].alice == TaskSpec::identity(1));
    CHECK(pairs[0].bob == TaskSpec::identity(3));
    CHECK(pairs[1].bob == TaskSpec::xor_of(3, 4));
    CHECK(pairs[2].alice == TaskSpec::xor_of(1, 2));
    CHECK(pairs[3].alice == TaskSpec::xor_of(1, 2));
    CHECK(pairs[3].bob == TaskSpec::xor_of(3, 4));
    CHECK(pairs[1].i == 1);
    CHECK(pairs[1].j == 2);
}

TEST_CASE("enumerate_dataset: canonical order and specific rows") {
    const auto& pairs = canonical_pairs();

    const auto ds11 = enumerate_dataset(pairs[0]);
    REQUIRE(ds11.rows.size() == 16);
    for (int k = 0; k < 16; ++k) {
        CHECK(ds11.rows[k].sample.index() == k);
    }
    // sample (1,0,1,0) has index 10; identity tasks give labels (1,1)
    CHECK(ds11.rows[10].sample.x1 == 1);
    CHECK(ds11.rows[10].sample.x3 == 1);
    CHECK(ds11.rows[10].alice_label == 1);
    CHECK(ds11.rows[10].bob_label == 1);

    // pair (a2,b2), sample (1,1,1,0) index 14: labels (1^1, 1^0) = (0,1)
    const auto ds22 = enumerate_dataset(pairs[3]);
    CHECK(ds22.rows[14].alice_label == 0);
    CHECK(ds22.rows[14].bob_label == 1);
}

TEST_CASE("labels match eval_task per row for every canonical pair (oracle)") {
    for (const auto& pair : canonical_pairs()) {
        const auto ds = enumerate_dataset(pair);
        REQUIRE(ds.rows.size() == 16);
        for (int k = 0; k < 16; ++k) {
            const BitSample expected = BitSample::from_index(k);
            CHECK(ds.rows[k].sample == expected);
            CHECK(ds.rows[k].alice_label == eval_task(pair.alice, expected));
            CHECK(ds.rows[k].bob_label == eval_task(pair.bob, expected));
        }
    }
}

TEST_CASE("label balance: every canonical task labels 8 of 16 rows as 1") {
    for (const auto& pair : canonical_pairs()) {
        const auto ds = enumerate_dataset(pair);
        int alice_ones = 0, bob_ones = 0;
        for (const auto& row : ds.rows) {
            alice_ones += row.alice_label;
            bob_ones += row.bob_label;
        }
        CHECK(alice_ones == 8);
        CHECK(bob_ones == 8);
    }
}

TEST_CASE("enumerate_dataset is deterministic") {
    const auto& pair = canonical_pairs()[2];
    const auto a = enumerate_dataset(pair);
    const auto b = enumerate_dataset(pair);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].sample == b.rows[k].sample);
        CHECK(a.rows[k].alice_label == b.rows[k].alice_label);
        CHECK(a.rows[k].bob_label == b.rows[k].bob_label);
    }
}

TEST_CASE("non-canonical task pairs enumerate too") {
    ContextPair odd{TaskSpec::xor_of(1, 3), TaskSpec::identity(2), 0, 0};
    const auto ds = enumerate_dataset(odd);
    REQUIRE(ds.rows.size() == 16);
    CHECK(ds.rows[9].alice_label == (ds.rows[9].sample.x1 ^ ds.rows[9].sample.x3));
    CHECK(ds.rows[9].bob_label == ds.rows[9].sample.x2);
}
