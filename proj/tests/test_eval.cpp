#include <cstdio>
#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "startext/core/error.hpp"
#include "startext/core/rng.hpp"
#include "startext/core/utf8.hpp"
#include "startext/eval.hpp"

using namespace startext;

namespace {

std::string random_word(CounterRng& rng, int max_len, const std::u32string& alphabet) {
  std::u32string s;
  const int len = static_cast<int>(rng.uniform_int(max_len + 1));
  for (int i = 0; i < len; ++i) s.push_back(alphabet[rng.uniform_int(alphabet.size())]);
  return utf8_encode(s);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("edit_distance fixed cases") {
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("अमर", "अमर") == 0);
  CHECK(edit_distance("अमर", "अम") == 1);
}

TEST_CASE("edit_distance matches recursive oracle") {
  CounterRng rng(99);
  const std::u32string alphabet = U"abcअम";
  for (int it = 0; it < 1000; ++it) {
    const std::string a = random_word(rng, 6, alphabet);
    const std::string b = random_word(rng, 6, alphabet);
    CHECK(edit_distance(a, b) ==
          oracles::edit_distance_recursive(utf8_decode(a), utf8_decode(b)));
  }
}

TEST_CASE("edit_distance metric properties") {
  CounterRng rng(100);
  const std::u32string alphabet = U"abcd";
  for (int it = 0; it < 300; ++it) {
    const std::string a = random_word(rng, 10, alphabet);
    const std::string b = random_word(rng, 10, alphabet);
    const std::string c = random_word(rng, 10, alphabet);
    const int dab = edit_distance(a, b);
    CHECK(dab >= 0);
    CHECK((dab == 0) == (a == b));
    CHECK(dab == edit_distance(b, a));
    CHECK(edit_distance(a, c) <= dab + edit_distance(b, c));
  }
}

TEST_CASE("score_corpus worked example") {
  std::vector<PredictionPair> pairs = {
      {"abc", "abc", "", ""}, {"abd", "axd", "", ""}, {"ab", "ba", "", ""}};
  EvalReport r = score_corpus(pairs);
  CHECK(r.wrr == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.crr == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(r.hist.at(0) == 1);
  CHECK(r.hist.at(1) == 1);
  CHECK(r.hist.at(2) == 1);
  CHECK(r.per_length.at(3).n_l == 2);
  CHECK(r.per_length.at(3).e_l == 1);
  CHECK(r.per_length.at(3).wa_ecr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.per_length.at(2).n_l == 1);
  CHECK(r.per_length.at(2).e_l == 2);
  CHECK(r.per_length.at(2).wa_ecr == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.total_pairs == 3);
}

TEST_CASE("all-correct corpus") {
  std::vector<PredictionPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({"word", "word", "", ""});
  EvalReport r = score_corpus(pairs);
  CHECK(r.wrr == 1.0);
  CHECK(r.crr == 1.0);
  CHECK(r.hist.at(0) == 10);
  for (const auto& [l, b] : r.per_length) CHECK(b.wa_ecr == 0.0);
}

TEST_CASE("all-empty predictions clamp CRR at zero") {
  std::vector<PredictionPair> pairs = {{"abc", "", "", ""}, {"de", "", "", ""}};
  EvalReport r = score_corpus(pairs);
  CHECK(r.wrr == 0.0);
  CHECK(r.crr == 0.0);
  CHECK(r.per_length.at(3).e_l == 3);
  CHECK(r.per_length.at(2).e_l == 2);
}

TEST_CASE("score_corpus rejects empty input") {
  CHECK_THROWS_AS(score_corpus({}), ValidationError);
}

TEST_CASE("report invariants on random corpora") {
  CounterRng rng(300);
  const std::u32string alphabet = U"abcde";
  for (int corpus = 0; corpus < 100; ++corpus) {
    std::vector<PredictionPair> pairs;
    const int n = 1 + static_cast<int>(rng.uniform_int(40));
    for (int i = 0; i < n; ++i) {
      std::string gt = random_word(rng, 8, alphabet);
      if (gt.empty()) gt = "a";
      pairs.push_back({gt, random_word(rng, 8, alphabet), "", ""});
    }
    EvalReport r = score_corpus(pairs);
    // hist[0]/N == WRR exactly
    const int64_t hist0 = r.hist.count(0) ? r.hist.at(0) : 0;
    CHECK(static_cast<double>(hist0) / r.total_pairs == r.wrr);
    int64_t sum_n = 0, sum_e = 0, sum_hist = 0, sum_dist = 0;
    for (const auto& [l, b] : r.per_length) {
      sum_n += b.n_l;
      sum_e += b.e_l;
    }
    for (const auto& [x, cnt] : r.hist) {
      sum_hist += cnt;
      sum_dist += x * cnt;
    }
    CHECK(sum_n == r.total_pairs);
    CHECK(sum_hist == r.total_pairs);
    CHECK(sum_e == sum_dist);
    // wa_ecr is intentionally unclamped
    for (const auto& [l, b] : r.per_length)
      CHECK(b.wa_ecr == doctest::Approx(double(b.e_l) / double(b.n_l)).epsilon(1e-12));
  }
}

TEST_CASE("predictions jsonl roundtrip drops empty gt with count") {
  const std::string path = "test_pred_tmp.jsonl";
  std::vector<PredictionPair> pairs = {{"abc", "abd", "img0.png", "latin"},
                                       {"كلمة", "كلمة", "img1.png", "arabic"}};
  write_predictions_jsonl(path, pairs);
  {
    FILE* f = std::fopen(path.c_str(), "ab");
    const char* extra = "{\"image\":\"x.png\",\"gt\":\"\",\"pred\":\"y\"}\n";
    std::fwrite(extra, 1, strlen(extra), f);
    std::fclose(f);
  }
  int64_t rejected = 0;
  auto back = load_predictions_jsonl(path, &rejected);
  CHECK(back.size() == 2);
  CHECK(rejected == 1);
  CHECK(back[0].gt == "abc");
  CHECK(back[1].pred == pairs[1].pred);
  std::remove(path.c_str());
}

}  // TEST_SUITE
