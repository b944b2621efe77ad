#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxbal/errors.hpp"

namespace voxbal {

struct AlignmentResult {
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long hits = 0;
  long reference_length = 0;

  long edits() const { return substitutions + deletions + insertions; }
};

// Minimal-edit alignment with unit costs. Ties are broken deterministically:
// substitution over insert+delete, then deletion over insertion.
AlignmentResult align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp);

// Lowercases ASCII, trims, and collapses whitespace runs to single spaces.
std::string normalize_text(std::string_view text);
std::vector<std::string> word_tokens(std::string_view text);
// UTF-8 code points of the normalized text, spaces included as symbols.
std::vector<std::string> char_tokens(std::string_view text);

// (S + D + I) / len(ref) over whitespace tokens; may exceed 1.
double wer(std::string_view ref, std::string_view hyp);
// Same ratio over characters.
double cer(std::string_view ref, std::string_view hyp);

struct EvalPair {
  std::string reference;
  std::string hypothesis;
  std::string stratum;
};

struct StratumMetrics {
  double wer = 0.0;
  double cer = 0.0;
  long pairs = 0;
  AlignmentResult words;
  AlignmentResult chars;
};

struct GroupMetrics {
  std::map<std::string, StratumMetrics> per_stratum;
  double bias_gap = 0.0;  // max - min stratum WER
};

// Pooled per-stratum WER/CER: sums of edit counts over sums of reference
// lengths, not averages of per-utterance ratios. Pairs are aligned in
// parallel when jobs > 1; the reduction is order-independent.
GroupMetrics group_metrics(std::span<const EvalPair> pairs, int jobs = 1);

}  // namespace voxbal
