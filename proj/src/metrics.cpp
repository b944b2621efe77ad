#include "voxbal/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "voxbal/parallel.hpp"

namespace voxbal {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // invalid lead byte, treated as a single symbol
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  const std::string norm = normalize_text(text);
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) tokens.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::vector<std::string> char_tokens(std::string_view text) {
  const std::string norm = normalize_text(text);
  std::vector<std::string> tokens;
  tokens.reserve(norm.size());
  std::size_t i = 0;
  while (i < norm.size()) {
    const std::size_t n =
        std::min(utf8_len(static_cast<unsigned char>(norm[i])), norm.size() - i);
    tokens.emplace_back(norm.substr(i, n));
    i += n;
  }
  return tokens;
}

AlignmentResult align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp) {
  const std::size_t m = ref.size();
  const std::size_t n = hyp.size();
  // d[i][j] = minimal edits aligning ref[0..i) with hyp[0..j).
  std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const int sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = d[i - 1][j] + 1;
      const int ins = d[i][j - 1] + 1;
      d[i][j] = std::min({sub, del, ins});
    }
  }

  AlignmentResult result;
  result.reference_length = static_cast<long>(m);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] == hyp[j - 1])
        ++result.hits;
      else
        ++result.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++result.deletions;
      --i;
    } else {
      ++result.insertions;
      --j;
    }
  }
  return result;
}

double wer(std::string_view ref, std::string_view hyp) {
  const auto ref_tokens = word_tokens(ref);
  if (ref_tokens.empty())
    throw InputError("empty-reference", "reference is empty after normalization");
  const auto hyp_tokens = word_tokens(hyp);
  const AlignmentResult a = align(ref_tokens, hyp_tokens);
  return static_cast<double>(a.edits()) / static_cast<double>(a.reference_length);
}

double cer(std::string_view ref, std::string_view hyp) {
  const auto ref_tokens = char_tokens(ref);
  if (ref_tokens.empty())
    throw InputError("empty-reference", "reference is empty after normalization");
  const auto hyp_tokens = char_tokens(hyp);
  const AlignmentResult a = align(ref_tokens, hyp_tokens);
  return static_cast<double>(a.edits()) / static_cast<double>(a.reference_length);
}

GroupMetrics group_metrics(std::span<const EvalPair> pairs, int jobs) {
  if (pairs.empty())
    throw InfeasibleError("empty-stratum", "no evaluation pairs");

  std::vector<std::pair<AlignmentResult, AlignmentResult>> aligned(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    const auto& pair = pairs[i];
    const auto ref_words = word_tokens(pair.reference);
    const auto ref_chars = char_tokens(pair.reference);
    if (ref_words.empty() || ref_chars.empty())
      throw InputError("empty-reference",
                       "reference empty after normalization in stratum " + pair.stratum);
    aligned[i] = {align(ref_words, word_tokens(pair.hypothesis)),
                  align(ref_chars, char_tokens(pair.hypothesis))};
  });

  GroupMetrics out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    StratumMetrics& sm = out.per_stratum[pairs[i].stratum];
    const AlignmentResult& w = aligned[i].first;
    const AlignmentResult& c = aligned[i].second;
    sm.pairs += 1;
    sm.words.substitutions += w.substitutions;
    sm.words.deletions += w.deletions;
    sm.words.insertions += w.insertions;
    sm.words.hits += w.hits;
    sm.words.reference_length += w.reference_length;
    sm.chars.substitutions += c.substitutions;
    sm.chars.deletions += c.deletions;
    sm.chars.insertions += c.insertions;
    sm.chars.hits += c.hits;
    sm.chars.reference_length += c.reference_length;
  }

  double wer_min = std::numeric_limits<double>::infinity();
  double wer_max = -std::numeric_limits<double>::infinity();
  for (auto& [stratum, sm] : out.per_stratum) {
    sm.wer = static_cast<double>(sm.words.edits()) /
             static_cast<double>(sm.words.reference_length);
    sm.cer = static_cast<double>(sm.chars.edits()) /
             static_cast<double>(sm.chars.reference_length);
    wer_min = std::min(wer_min, sm.wer);
    wer_max = std::max(wer_max, sm.wer);
  }
  out.bias_gap = out.per_stratum.empty() ? 0.0 : wer_max - wer_min;
  return out;
}

}  // namespace voxbal
