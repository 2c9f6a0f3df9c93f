#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "startext/core/error.hpp"
#include "startext/core/rng.hpp"
#include "startext/kernels/kernels.hpp"

using namespace startext;
namespace K = startext::kernels;

TEST_SUITE("ctc") {

TEST_CASE("closed-form losses under uniform logits") {
  // T=1, classes {blank, a}, uniform: only alignment is (a), p = 1/2
  {
    std::vector<double> logits = {0.0, 0.0};
    const double loss = K::ctc_loss<double>(logits.data(), 1, 2, {1}, nullptr);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  // T=2: alignments (a,a), (a,blank), (blank,a): p = 3/4
  {
    std::vector<double> logits = {0.0, 0.0, 0.0, 0.0};
    const double loss = K::ctc_loss<double>(logits.data(), 2, 2, {1}, nullptr);
    CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  }
}

TEST_CASE("target too long for T raises") {
  std::vector<double> logits(2 * 2, 0.0);
  // "aa" needs a separating blank: minimum length 3 > T=2
  CHECK(K::ctc_min_length({1, 1}) == 3);
  CHECK_THROWS_AS(K::ctc_loss<double>(logits.data(), 2, 2, {1, 1}, nullptr), ValidationError);
  CHECK(K::ctc_min_length({1, 2, 2, 1}) == 5);
  CHECK(K::ctc_min_length({}) == 0);
}

TEST_CASE("matches brute-force alignment enumeration") {
  CounterRng rng(41);
  int done = 0;
  while (done < 200) {
    const int num_classes = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4 incl. blank
    const int steps = 1 + static_cast<int>(rng.uniform_int(5));
    const int target_len = static_cast<int>(rng.uniform_int(4));
    std::vector<int> target(target_len);
    for (int& v : target) v = 1 + static_cast<int>(rng.uniform_int(num_classes - 1));
    if (K::ctc_min_length(target) > steps) continue;
    ++done;

    std::vector<double> logits(steps * num_classes);
    for (auto& v : logits) v = rng.normal() * 2.0;
    std::vector<double> probs(logits.size());
    K::serial::softmax_rows(logits.data(), probs.data(), steps, num_classes);

    const double p_ref = oracles::ctc_likelihood_bruteforce(probs, steps, num_classes, target);
    const double loss = K::ctc_loss<double>(logits.data(), steps, num_classes, target, nullptr);
    const double loss_ref = -std::log(p_ref);
    CHECK(std::abs(loss - loss_ref) <= 1e-6 * std::max(std::abs(loss_ref), 1e-30));
  }
}

TEST_CASE("empty target scores the all-blank path") {
  CounterRng rng(42);
  std::vector<double> logits(3 * 3);
  for (auto& v : logits) v = rng.normal();
  std::vector<double> probs(logits.size());
  K::serial::softmax_rows(logits.data(), probs.data(), 3, 3);
  const double expected = -std::log(probs[0] * probs[3] * probs[6]);
  CHECK(K::ctc_loss<double>(logits.data(), 3, 3, {}, nullptr) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  CounterRng rng(43);
  const double h = 1e-4;
  int done = 0;
  while (done < 50) {
    const int num_classes = 2 + static_cast<int>(rng.uniform_int(3));
    const int steps = 1 + static_cast<int>(rng.uniform_int(5));
    const int target_len = static_cast<int>(rng.uniform_int(4));
    std::vector<int> target(target_len);
    for (int& v : target) v = 1 + static_cast<int>(rng.uniform_int(num_classes - 1));
    if (K::ctc_min_length(target) > steps) continue;
    ++done;

    std::vector<double> logits(steps * num_classes);
    for (auto& v : logits) v = rng.normal();
    std::vector<double> grad(logits.size());
    K::ctc_loss<double>(logits.data(), steps, num_classes, target, grad.data());

    for (size_t i = 0; i < logits.size(); ++i) {
      auto lp = logits, lm = logits;
      lp[i] += h;
      lm[i] -= h;
      const double fd = (K::ctc_loss<double>(lp.data(), steps, num_classes, target, nullptr) -
                         K::ctc_loss<double>(lm.data(), steps, num_classes, target, nullptr)) /
                        (2 * h);
      CHECK(std::abs(fd - grad[i]) <= 1e-4 * std::max({1.0, std::abs(fd), std::abs(grad[i])}));
    }
  }
}

TEST_CASE("gradient descent step decreases the loss (double precision)") {
  CounterRng rng(44);
  std::vector<double> logits(5 * 4);
  for (auto& v : logits) v = rng.normal();
  const std::vector<int> target = {1, 3, 2};
  std::vector<double> grad(logits.size());
  const double l0 = K::ctc_loss<double>(logits.data(), 5, 4, target, grad.data());
  for (double alpha : {1e-3, 1e-2, 1e-1}) {
    auto stepped = logits;
    for (size_t i = 0; i < stepped.size(); ++i) stepped[i] -= alpha * grad[i];
    CHECK(K::ctc_loss<double>(stepped.data(), 5, 4, target, nullptr) < l0);
  }
}

}  // TEST_SUITE
