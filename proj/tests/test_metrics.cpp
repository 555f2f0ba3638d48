#include <doctest.h>

#include <algorithm>
#include <random>

#include "oraclefdr/errors.hpp"
#include "oraclefdr/metrics.hpp"

using namespace oraclefdr;

namespace {

DecisionResult decision(std::vector<std::uint8_t> reject) {
  DecisionResult d;
  d.num_rejected = static_cast<std::size_t>(std::count(reject.begin(), reject.end(), 1));
  d.cutoff_rank = d.num_rejected;
  d.reject = std::move(reject);
  return d;
}

}  // namespace

TEST_CASE("confusion counts") {
  auto c = confusion(decision({1, 1, 0, 0}), std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(c.V == 1);
  CHECK(c.R == 2);
  CHECK(c.W == 1);
  CHECK(c.A == 2);

  c = confusion(decision({1, 1, 1}), std::vector<std::uint8_t>{1, 1, 1});
  CHECK(c.V == 0);
  CHECK(c.R == 3);
  CHECK(c.W == 0);
  CHECK(c.A == 0);

  c = confusion(decision({0, 0, 0, 0}), std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(c.V == 0);
  CHECK(c.R == 0);
  CHECK(c.W == 3);
  CHECK(c.A == 4);

  CHECK_THROWS_AS(confusion(decision({0, 1}), std::vector<std::uint8_t>{1}), InvalidArgument);
}

TEST_CASE("aggregate") {
  auto e = aggregate(std::vector<ConfusionCounts>{{1, 4, 0, 6}});
  CHECK(e.fdr == 0.25);
  CHECK(e.mfdr == 0.25);
  CHECK(e.replicates == 1);
  CHECK(e.se_fdr == 0.0);

  e = aggregate(std::vector<ConfusionCounts>{{0, 0, 2, 10}, {1, 2, 1, 8}});
  CHECK(e.fdr == 0.25);
  CHECK(e.mfdr == 0.5);
  CHECK(e.fnr == doctest::Approx((0.2 + 0.125) / 2));
  CHECK(e.mfnr == doctest::Approx(3.0 / 18.0));
  CHECK(e.mean_rejections == 1.0);
  CHECK(e.se_fdr == doctest::Approx(0.25));  // sd 0.3536 / sqrt 2

  e = aggregate(std::vector<ConfusionCounts>{{0, 0, 0, 0}});
  CHECK(e.fdr == 0.0);
  CHECK(e.mfdr == 0.0);
  CHECK(e.fnr == 0.0);
  CHECK(e.mfnr == 0.0);

  CHECK_THROWS_AS(aggregate(std::vector<ConfusionCounts>{}), InvalidArgument);
}

TEST_CASE("aggregate invariants on random counts") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 50;
    std::vector<ConfusionCounts> counts;
    for (int r = 0; r < 30; ++r) {
      std::uniform_int_distribution<std::size_t> rd(1, n - 1);
      ConfusionCounts c;
      c.R = rd(gen);
      c.A = n - c.R;
      c.V = std::uniform_int_distribution<std::size_t>(0, c.R)(gen);
      c.W = std::uniform_int_distribution<std::size_t>(0, c.A)(gen);
      CHECK(c.V + (c.R - c.V) + c.W + (c.A - c.W) == n);
      counts.push_back(c);
    }
    const auto e = aggregate(counts);
    for (double v : {e.fdr, e.fnr, e.mfdr, e.mfnr}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    std::shuffle(counts.begin(), counts.end(), gen);
    const auto s = aggregate(counts);
    CHECK(s.fdr == doctest::Approx(e.fdr).epsilon(1e-12));
    CHECK(s.fnr == doctest::Approx(e.fnr).epsilon(1e-12));
    CHECK(s.mfdr == e.mfdr);
    CHECK(s.mfnr == e.mfnr);
    CHECK(s.mean_rejections == e.mean_rejections);
    CHECK(s.se_fdr == doctest::Approx(e.se_fdr).epsilon(1e-10));
  }
}

TEST_CASE("classification loss") {
  const std::vector<std::uint8_t> theta{1, 0, 0, 1};
  CHECK(classification_loss(decision({1, 0, 0, 1}), theta, 3.0) == 0.0);
  CHECK(classification_loss(decision({0, 1}), std::vector<std::uint8_t>{1, 0}, 2.0) == 1.5);
  CHECK(classification_loss(decision({1, 1, 1}), std::vector<std::uint8_t>{0, 0, 0}, 7.0) == 1.0);
  CHECK_THROWS_AS(classification_loss(decision({1}), std::vector<std::uint8_t>{1}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(classification_loss(decision({1}), std::vector<std::uint8_t>{1, 0}, 1.0), InvalidArgument);
}
