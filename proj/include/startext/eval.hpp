#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace startext {

struct PredictionPair {
  std::string gt;    // NFC-normalized on load
  std::string pred;  // NFC-normalized on load
  std::string image_path;
  std::string language;
};

struct LengthBucket {
  int64_t n_l = 0;   // ground-truth words of this length
  int64_t e_l = 0;   // total erroneous characters over those words
  double wa_ecr = 0; // e_l / n_l, deliberately unclamped (can exceed 1)
};

struct EvalReport {
  double crr = 0;  // 1 - total edit distance / total GT length, clamped at 0
  double wrr = 0;  // exact-match fraction
  std::map<int, int64_t> hist;           // edit distance -> count
  std::map<int, LengthBucket> per_length;  // GT length -> bucket
  int64_t total_pairs = 0;
  int64_t out_of_charset_pairs = 0;  // informational; such pairs are still scored

  std::string to_json() const;
  static EvalReport from_json(const std::string& json_text);
};

// Levenshtein distance with unit costs, over NFC codepoints.
int edit_distance(const std::string& a, const std::string& b);

// Scores a corpus of (prediction, ground truth) pairs. Throws
// ValidationError when pairs is empty. Pairs with empty ground truth must
// be filtered at load (see load_predictions_jsonl).
EvalReport score_corpus(const std::vector<PredictionPair>& pairs);

// Reads predictions JSONL ({image, gt, pred} per line), NFC-normalizing
// both strings. Empty-GT records are dropped; their count is returned via
// rejected_empty_gt when non-null.
std::vector<PredictionPair> load_predictions_jsonl(const std::string& path,
                                                   int64_t* rejected_empty_gt = nullptr);

void write_predictions_jsonl(const std::string& path, const std::vector<PredictionPair>& pairs);

}  // namespace startext
