#include "startext/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "startext/core/error.hpp"
#include "startext/core/io.hpp"
#include "startext/core/unicode.hpp"
#include "startext/core/utf8.hpp"

namespace startext {

int edit_distance(const std::string& a, const std::string& b) {
  std::u32string s = utf8_decode(a);
  std::u32string t = utf8_decode(b);
  const size_t m = s.size(), n = t.size();
  if (m == 0) return static_cast<int>(n);
  if (n == 0) return static_cast<int>(m);
  std::vector<int> prev(n + 1), cur(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= n; ++j) {
      int sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

EvalReport score_corpus(const std::vector<PredictionPair>& pairs) {
  if (pairs.empty()) throw ValidationError("cannot score an empty corpus");
  EvalReport r;
  r.total_pairs = static_cast<int64_t>(pairs.size());
  int64_t total_dist = 0;
  int64_t total_gt_len = 0;
  int64_t exact = 0;
  for (const auto& p : pairs) {
    const int d = edit_distance(p.pred, p.gt);
    const int len = static_cast<int>(utf8_decode(p.gt).size());
    total_dist += d;
    total_gt_len += len;
    if (d == 0) ++exact;
    r.hist[d] += 1;
    auto& bucket = r.per_length[len];
    bucket.n_l += 1;
    bucket.e_l += d;
  }
  r.wrr = static_cast<double>(exact) / static_cast<double>(r.total_pairs);
  r.crr = std::max(0.0, 1.0 - static_cast<double>(total_dist) / static_cast<double>(total_gt_len));
  for (auto& [len, bucket] : r.per_length)
    bucket.wa_ecr = static_cast<double>(bucket.e_l) / static_cast<double>(bucket.n_l);
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["crr"] = crr;
  j["wrr"] = wrr;
  j["total_pairs"] = total_pairs;
  j["out_of_charset_pairs"] = out_of_charset_pairs;
  nlohmann::json hist_j = nlohmann::json::object();
  for (const auto& [x, c] : hist) hist_j[std::to_string(x)] = c;
  j["hist"] = hist_j;
  nlohmann::json pl = nlohmann::json::object();
  for (const auto& [l, b] : per_length)
    pl[std::to_string(l)] = {{"n_l", b.n_l}, {"e_l", b.e_l}, {"wa_ecr", b.wa_ecr}};
  j["per_length"] = pl;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report JSON parse error: ") + e.what());
  }
  EvalReport r;
  r.crr = j.at("crr").get<double>();
  r.wrr = j.at("wrr").get<double>();
  r.total_pairs = j.at("total_pairs").get<int64_t>();
  r.out_of_charset_pairs = j.value("out_of_charset_pairs", int64_t{0});
  for (const auto& [k, v] : j.at("hist").items()) r.hist[std::stoi(k)] = v.get<int64_t>();
  for (const auto& [k, v] : j.at("per_length").items()) {
    LengthBucket b;
    b.n_l = v.at("n_l").get<int64_t>();
    b.e_l = v.at("e_l").get<int64_t>();
    b.wa_ecr = v.at("wa_ecr").get<double>();
    r.per_length[std::stoi(k)] = b;
  }
  return r;
}

std::vector<PredictionPair> load_predictions_jsonl(const std::string& path,
                                                   int64_t* rejected_empty_gt) {
  std::ifstream f(path);
  if (!f) throw RuntimeFailure("cannot open: " + path);
  std::vector<PredictionPair> pairs;
  int64_t rejected = 0;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
    PredictionPair p;
    p.gt = nfc_utf8(j.at("gt").get<std::string>());
    p.pred = nfc_utf8(j.at("pred").get<std::string>());
    p.image_path = j.value("image", "");
    p.language = j.value("lang", "");
    if (p.gt.empty()) {
      ++rejected;
      continue;
    }
    pairs.push_back(std::move(p));
  }
  if (rejected_empty_gt) *rejected_empty_gt = rejected;
  return pairs;
}

void write_predictions_jsonl(const std::string& path, const std::vector<PredictionPair>& pairs) {
  std::ostringstream out;
  for (const auto& p : pairs) {
    nlohmann::json j;
    j["image"] = p.image_path;
    j["gt"] = p.gt;
    j["pred"] = p.pred;
    if (!p.language.empty()) j["lang"] = p.language;
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

}  // namespace startext
