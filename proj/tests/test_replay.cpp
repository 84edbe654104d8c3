#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "deeptop/replay.hpp"

using namespace deeptop;

namespace {

// chi-square upper quantile via the Wilson-Hilferty cube approximation
double chi_square_quantile(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

}  // namespace

TEST_CASE("push grows to capacity then overwrites the oldest") {
    ReplayBuffer<int> buf(3);
    buf.push(1);
    CHECK(buf.size() == 1);
    buf.push(2);
    buf.push(3);
    buf.push(4);
    CHECK(buf.size() == 3);
    std::set<int> contents;
    for (std::size_t i = 0; i < buf.size(); ++i) contents.insert(buf[i]);
    CHECK(contents == std::set<int>{2, 3, 4});
}

TEST_CASE("ring correctness: after k pushes only the last capacity items remain") {
    const int capacity = 100, k = 250;
    ReplayBuffer<int> buf(capacity);
    for (int i = 1; i <= k; ++i) buf.push(i);
    CHECK(buf.size() == static_cast<std::size_t>(capacity));
    std::set<int> contents;
    for (std::size_t i = 0; i < buf.size(); ++i) contents.insert(buf[i]);
    std::set<int> expected;
    for (int i = k - capacity + 1; i <= k; ++i) expected.insert(i);
    CHECK(contents == expected);
}

TEST_CASE("size stays at capacity after many pushes") {
    const std::size_t capacity = 100000;
    ReplayBuffer<int> buf(capacity);
    for (std::size_t i = 0; i <= capacity; ++i) buf.push(static_cast<int>(i));
    CHECK(buf.size() == capacity);
}

TEST_CASE("sampling a single stored item returns it") {
    ReplayBuffer<int> buf(4);
    buf.push(77);
    Rng rng(1);
    const auto batch = buf.sample_minibatch(1, rng);
    REQUIRE(batch.size() == 1);
    CHECK(*batch[0] == 77);
}

TEST_CASE("sampling more than stored is refused") {
    ReplayBuffer<int> buf(4);
    buf.push(1);
    Rng rng(1);
    CHECK_THROWS_AS(buf.sample_minibatch(2, rng), std::logic_error);
}

TEST_CASE("seeded sampling replays the same draw sequence") {
    ReplayBuffer<int> buf(64);
    for (int i = 0; i < 64; ++i) buf.push(i);

    auto draw_sequence = [&](std::uint64_t seed) {
        Rng rng(seed);
        std::vector<int> out;
        for (int k = 0; k < 8; ++k)
            for (const int* p : buf.sample_minibatch(4, rng)) out.push_back(*p);
        return out;
    };
    const auto a = draw_sequence(5);
    const auto b = draw_sequence(5);
    const auto c = draw_sequence(6);
    CHECK(a == b);
    CHECK(a != c);  // consecutive calls inside one seed already differed
}

TEST_CASE("index frequencies: 1e5 minibatches of 64 stay within 5 sigma") {
    const int size = 1000;
    ReplayBuffer<int> buf(size);
    for (int i = 0; i < size; ++i) buf.push(i);

    std::vector<long> counts(size, 0);
    Rng rng(7);
    const int batches = 100000;
    for (int k = 0; k < batches; ++k)
        for (const int* p : buf.sample_minibatch(64, rng)) counts[*p]++;

    const double total = 64.0 * batches;
    const double p = 1.0 / size;
    const double expect = total * p;
    const double sigma = std::sqrt(total * p * (1.0 - p));
    long worst = 0;
    for (long c : counts) worst = std::max(worst, std::abs(c - static_cast<long>(expect)));
    CHECK(worst <= 5.0 * sigma);
}

TEST_CASE("uniformity: chi-square on 1e5 draws does not reject at alpha=0.001") {
    const int size = 1000;
    ReplayBuffer<int> buf(size);
    for (int i = 0; i < size; ++i) buf.push(i);

    std::vector<long> counts(size, 0);
    Rng rng(11);
    const long draws = 100000;
    long done = 0;
    while (done < draws) {
        for (const int* p : buf.sample_minibatch(64, rng)) {
            counts[*p]++;
            if (++done == draws) break;
        }
    }
    const double expect = static_cast<double>(draws) / size;
    double chi2 = 0.0;
    for (long c : counts) {
        const double d = c - expect;
        chi2 += d * d / expect;
    }
    CHECK(chi2 < chi_square_quantile(size - 1, 3.090232306167813));
}
