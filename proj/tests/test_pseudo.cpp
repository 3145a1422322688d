#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/numerics.hpp"
#include "ipixmatch/pseudo.hpp"
#include "support/util.hpp"

using namespace ipix;
using namespace ipix::pseudo;

TEST_CASE("hard_pseudo_label argmax and tie breaking") {
  Tensor logits = Tensor::zeros({3, 1, 2});
  // pixel 0: classes [1, 3, 2] -> 1; pixel 1: tie [2, 2, 0] -> 0 (lowest)
  logits.data = {1, 2, 3, 2, 2, 0};
  const PseudoLabelMap m = hard_pseudo_label(logits);
  REQUIRE(m.labels.size() == 2);
  CHECK(m.labels[0] == 1);
  CHECK(m.labels[1] == 0);
  CHECK(m.height == 1);
  CHECK(m.width == 2);
}

TEST_CASE("hard_pseudo_label matches brute force on random maps") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const Tensor logits = testutil::random_map(rng, c, h, w, 4.0);
    const PseudoLabelMap m = hard_pseudo_label(logits);
    for (std::size_t j = 0; j < h * w; ++j) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < c; ++k) {
        if (logits.data[k * h * w + j] > logits.data[best * h * w + j]) best = k;
      }
      CHECK(m.labels[j] == best);
    }
  }
}

TEST_CASE("confidence_mask strict threshold") {
  Tensor logits = Tensor::zeros({2, 1, 3});
  // pixel 0: [0, 0]   -> max prob 0.5
  // pixel 1: [4, 0]   -> max prob ~0.982
  // pixel 2: [0, 2]   -> max prob ~0.881
  logits.data = {0, 4, 0, 0, 0, 2};
  SUBCASE("tau 0.8 keeps the two confident pixels") {
    const ConfidenceMask m = confidence_mask(logits, 0.8);
    REQUIRE(m.size() == 2);
    CHECK(m.pixel_indices[0] == 1);
    CHECK(m.pixel_indices[1] == 2);
    CHECK(m.tau == 0.8);
  }
  SUBCASE("tau exactly at a max prob excludes it (strict >)") {
    const ConfidenceMask m = confidence_mask(logits, 0.5);
    // pixel 0's max prob is exactly 0.5, so it stays out
    CHECK(std::find(m.pixel_indices.begin(), m.pixel_indices.end(), 0) ==
          m.pixel_indices.end());
  }
  SUBCASE("tau 0 keeps everything, tau 1 keeps nothing") {
    CHECK(confidence_mask(logits, 0.0).size() == 3);
    CHECK(confidence_mask(logits, 1.0).size() == 0);
  }
  SUBCASE("tau outside [0,1] rejected") {
    CHECK_THROWS_AS(confidence_mask(logits, -0.1), InvalidParameterError);
    CHECK_THROWS_AS(confidence_mask(logits, 1.5), InvalidParameterError);
  }
}

TEST_CASE("confidence_mask monotone in tau and shift invariant") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 6));
    Tensor logits = testutil::random_map(rng, c, h, w, 3.0);
    const double t1 = rng.uniform(0.0, 1.0);
    const double t2 = rng.uniform(t1, 1.0);
    const ConfidenceMask lo = confidence_mask(logits, t1);
    const ConfidenceMask hi = confidence_mask(logits, t2);
    // hi must be a subset of lo
    CHECK(std::includes(lo.pixel_indices.begin(), lo.pixel_indices.end(),
                        hi.pixel_indices.begin(), hi.pixel_indices.end()));
    // indices strictly increasing
    CHECK(std::is_sorted(lo.pixel_indices.begin(), lo.pixel_indices.end()));

    // per-pixel constant shift of logits leaves the mask unchanged
    Tensor shifted = logits;
    for (std::size_t j = 0; j < h * w; ++j) {
      const double s = rng.uniform(-10.0, 10.0);
      for (std::size_t k = 0; k < c; ++k) shifted.data[k * h * w + j] += s;
    }
    const ConfidenceMask lo2 = confidence_mask(shifted, t1);
    CHECK(lo2.pixel_indices == lo.pixel_indices);
  }
}

TEST_CASE("confidence_mask agrees with softmax_over_classes oracle") {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const Tensor logits = testutil::random_map(rng, c, 4, 4, 3.0);
    const double tau = rng.uniform(0.2, 0.95);
    const Tensor probs = numerics::softmax_over_classes(logits);
    const ConfidenceMask m = confidence_mask(logits, tau);
    std::vector<std::size_t> expected;
    for (std::size_t j = 0; j < 16; ++j) {
      double mx = 0.0;
      for (std::size_t k = 0; k < c; ++k) mx = std::max(mx, probs.data[k * 16 + j]);
      if (mx > tau) expected.push_back(j);
    }
    CHECK(m.pixel_indices == expected);
  }
}
