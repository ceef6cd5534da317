// align.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Grapheme-aligned training data: system cells read off the marked
// conversion output, gold cells found by hand-seeded probabilistic
// alignment over the allowables set.

#ifndef G2P_ALIGN_HPP
#define G2P_ALIGN_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "g2p/common.hpp"
#include "g2p/pipeline.hpp"
#include "g2p/rules.hpp"

namespace g2p {

class Unalignable : public Error {
 public:
  std::u32string word;
  explicit Unalignable(std::u32string_view w)
      : Error("cannot align '" + to_utf8(w) + "'"), word(w) {}
};

struct LexEntry {
  std::u32string word;
  std::u32string phones;
};
using Lexicon = std::vector<LexEntry>;

// UTF-8 TSV: word <TAB> phonemes, '#' comments.
inline Lexicon parse_lexicon(std::string_view text) {
  Lexicon out;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    std::size_t tab = raw.find('\t');
    if (tab == std::string::npos)
      throw SyntaxError(lineno, 1, "expected word<TAB>phonemes");
    out.push_back({from_utf8(raw.substr(0, tab)), from_utf8(raw.substr(tab + 1))});
  }
  return out;
}

inline std::string write_lexicon(const Lexicon& lx) {
  std::string out;
  for (const auto& e : lx)
    out += to_utf8(e.word) + "\t" + to_utf8(e.phones) + "\n";
  return out;
}

// Permitted grapheme -> phoneme-sequence mappings; the empty string is a
// legal member (null phoneme).
struct Allowables {
  std::map<std::u32string, std::set<std::u32string>> map;

  bool allows(const std::u32string& g, const std::u32string& cell) const {
    auto it = map.find(g);
    return it != map.end() && it->second.count(cell);
  }
  std::size_t max_cell_length(const std::u32string& g) const {
    auto it = map.find(g);
    std::size_t m = 0;
    if (it != map.end())
      for (const auto& c : it->second) m = std::max(m, c.size());
    return m;
  }
};

struct MappingProbs {
  // counted mappings only; everything else gets the unseen penalty
  std::map<std::u32string, std::map<std::u32string, double>> probs;
  double unseen_penalty = 1e-6;

  double prob(const std::u32string& g, const std::u32string& cell) const {
    auto it = probs.find(g);
    if (it == probs.end()) return unseen_penalty;
    auto jt = it->second.find(cell);
    return jt == it->second.end() ? unseen_penalty : jt->second;
  }
};

struct AlignedEntry {
  std::u32string word;
  std::vector<std::u32string> graphemes;
  std::vector<std::u32string> system_cells;
  std::vector<std::u32string> gold_cells;
};

struct AlignedCorpus {
  std::vector<AlignedEntry> entries;
};

// Segments the word and reads one phoneme cell per grapheme off the marked
// conversion output (stage `co` with '-'/'+' retained). Cells may be empty.
inline std::pair<std::vector<std::u32string>, std::vector<std::u32string>>
align_system_output(const Pipeline& p, std::u32string_view word) {
  StageStrings st = transcribe_stages(p, word);
  std::vector<std::u32string> graphemes;
  {
    std::u32string cur;
    for (Symbol c : st.segmented) {
      if (c == kSegMarker) {
        graphemes.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty())
      throw Error("segmenter output missing trailing marker");
  }
  const std::u32string& co = st.converted;
  if (co.size() < 3 || co.front() != kBoundary || co[1] != kSegMarker ||
      co.back() != kBoundary)
    throw Error("conversion output lost its boundary markers");
  std::vector<std::u32string> cells;
  std::u32string cur;
  for (std::size_t i = 2; i + 1 < co.size(); ++i) {
    if (co[i] == kSegMarker || co[i] == kDoneMarker) {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(co[i]);
    }
  }
  if (!cur.empty()) throw Error("conversion output missing trailing marker");
  if (cells.size() != graphemes.size())
    throw Error("conversion produced " + std::to_string(cells.size()) +
                " cells for " + std::to_string(graphemes.size()) +
                " graphemes in '" + to_utf8(word) + "'");
  return {std::move(graphemes), std::move(cells)};
}

struct AlignOptions {
  int max_unseen = 1;            // unseen mappings allowed per word
  int max_unseen_cell_len = 3;   // length cap for an unseen cell
  double unseen_penalty = 1e-6;  // probability of an unseen mapping
  bool per_word_normalization = false;  // weight alignments 1/n per word
};

// All ways to split `gold` into one contiguous (possibly empty) cell per
// grapheme such that each cell is allowed, with at most `max_unseen` cells
// outside the allowables (each at most max_unseen_cell_len long).
inline std::vector<std::vector<std::u32string>> enumerate_alignments(
    const std::vector<std::u32string>& graphemes, std::u32string_view gold,
    const Allowables& a, int max_unseen = 1, int max_unseen_cell_len = 3) {
  std::size_t n = graphemes.size(), m = gold.size();
  // reachability DP: can_finish[i][j][u]
  std::vector<std::vector<std::vector<char>>> can(
      n + 1, std::vector<std::vector<char>>(
                 m + 1, std::vector<char>(max_unseen + 1, false)));
  for (int u = 0; u <= max_unseen; ++u) can[n][m][u] = true;
  std::vector<std::size_t> max_len(n);
  for (std::size_t i = 0; i < n; ++i)
    max_len[i] = std::max<std::size_t>(a.max_cell_length(graphemes[i]),
                                       max_unseen_cell_len);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = 0; j <= m; ++j) {
      for (int u = max_unseen; u >= 0; --u) {
        bool ok = false;
        std::size_t cap = std::min(max_len[i], m - j);
        for (std::size_t len = 0; len <= cap && !ok; ++len) {
          std::u32string cell(gold.substr(j, len));
          if (a.allows(graphemes[i], cell)) {
            ok = can[i + 1][j + len][u];
          } else if (u < max_unseen &&
                     len <= static_cast<std::size_t>(max_unseen_cell_len)) {
            ok = can[i + 1][j + len][u + 1];
          }
        }
        can[i][j][u] = ok;
      }
    }
  }
  std::vector<std::vector<std::u32string>> result;
  std::vector<std::u32string> cells;
  auto dfs = [&](auto&& self, std::size_t i, std::size_t j, int u) -> void {
    if (i == n) {
      if (j == m) result.push_back(cells);
      return;
    }
    std::size_t cap = std::min(max_len[i], m - j);
    for (std::size_t len = 0; len <= cap; ++len) {
      std::u32string cell(gold.substr(j, len));
      bool seen = a.allows(graphemes[i], cell);
      int u2 = u;
      if (!seen) {
        if (u >= max_unseen ||
            len > static_cast<std::size_t>(max_unseen_cell_len))
          continue;
        u2 = u + 1;
      }
      if (!can[i + 1][j + len][u2]) continue;
      cells.push_back(std::move(cell));
      self(self, i + 1, j + len, u2);
      cells.pop_back();
    }
  };
  if (can[0][0][0]) dfs(dfs, 0, 0, 0);
  return result;
}

// Union of (a) every rule target pair plus the identity mapping for every
// grapheme no context-free rule converts, and (b) mappings some corpus gold
// alignment needs but (a) lacks.
inline Allowables derive_allowables(const RuleFile& rf, const Lexicon& corpus,
                                    const AlignOptions& opts = {}) {
  Allowables base;
  std::set<std::u32string> always_converted;
  for (const ConversionRule& r : rf.rules)
    for (const TargetPair& t : r.targets) {
      base.map[t.grapheme].insert(t.phonemes);
      if (r.context_free()) always_converted.insert(t.grapheme);
    }
  for (const auto& g : rf.graphemes.entries)
    if (!always_converted.count(g)) base.map[g].insert(g);
  Allowables out = base;
  for (const LexEntry& e : corpus) {
    std::vector<std::u32string> graphemes;
    try {
      graphemes = segment_word(rf.graphemes, e.word);
    } catch (const Unsegmentable&) {
      continue;
    }
    for (const auto& cells : enumerate_alignments(
             graphemes, e.phones, base, opts.max_unseen,
             opts.max_unseen_cell_len)) {
      for (std::size_t i = 0; i < graphemes.size(); ++i)
        if (!base.allows(graphemes[i], cells[i]))
          out.map[graphemes[i]].insert(cells[i]);
    }
  }
  return out;
}

// Pass 1 of the hand-seeded estimation: count every (grapheme, cell) pair
// once per occurrence per enumerated alignment, then normalize per grapheme.
// Graphemes that never occur get a uniform distribution over their
// allowables. Unseen mappings keep the fixed penalty (not renormalized).
inline MappingProbs estimate_mapping_probs(const Lexicon& corpus,
                                           const GraphemeSet& graphemes,
                                           const Allowables& a,
                                           const AlignOptions& opts = {}) {
  std::map<std::u32string, std::map<std::u32string, double>> counts;
  for (const LexEntry& e : corpus) {
    std::vector<std::u32string> segs;
    try {
      segs = segment_word(graphemes, e.word);
    } catch (const Unsegmentable&) {
      continue;
    }
    auto alignments = enumerate_alignments(segs, e.phones, a, opts.max_unseen,
                                           opts.max_unseen_cell_len);
    if (alignments.empty()) continue;
    double w = opts.per_word_normalization
                   ? 1.0 / static_cast<double>(alignments.size())
                   : 1.0;
    for (const auto& cells : alignments)
      for (std::size_t i = 0; i < segs.size(); ++i)
        if (a.allows(segs[i], cells[i])) counts[segs[i]][cells[i]] += w;
  }
  MappingProbs out;
  out.unseen_penalty = opts.unseen_penalty;
  for (auto& [g, cellcounts] : counts) {
    double total = 0;
    for (auto& [cell, c] : cellcounts) total += c;
    for (auto& [cell, c] : cellcounts) out.probs[g][cell] = c / total;
  }
  for (const auto& [g, cells] : a.map) {
    if (out.probs.count(g)) continue;
    double u = 1.0 / static_cast<double>(cells.size());
    for (const auto& cell : cells) out.probs[g][cell] = u;
  }
  return out;
}

// The most probable alignment: maximizes the product of mapping
// probabilities (unseen cells contribute the penalty). Ties prefer the
// alignment whose earliest differing cell is longer, then the
// lexicographically smaller one.
inline std::optional<std::vector<std::u32string>> best_alignment(
    const std::vector<std::u32string>& graphemes, std::u32string_view gold,
    const MappingProbs& probs, const Allowables& a,
    const AlignOptions& opts = {}) {
  auto alignments = enumerate_alignments(graphemes, gold, a, opts.max_unseen,
                                         opts.max_unseen_cell_len);
  if (alignments.empty()) return std::nullopt;
  auto log_score = [&](const std::vector<std::u32string>& cells) {
    double s = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double p = a.allows(graphemes[i], cells[i])
                     ? probs.prob(graphemes[i], cells[i])
                     : probs.unseen_penalty;
      s += std::log(p);
    }
    return s;
  };
  auto better = [&](const std::vector<std::u32string>& x,
                    const std::vector<std::u32string>& y) {
    double sx = log_score(x), sy = log_score(y);
    if (sx != sy) return sx > sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == y[i]) continue;
      if (x[i].size() != y[i].size()) return x[i].size() > y[i].size();
      return x[i] < y[i];
    }
    return false;
  };
  const std::vector<std::u32string>* best = &alignments[0];
  for (std::size_t i = 1; i < alignments.size(); ++i)
    if (better(alignments[i], *best)) best = &alignments[i];
  return *best;
}

struct DiscardRecord {
  std::u32string word;
  std::string reason;
};

struct AlignReport {
  std::size_t total = 0;
  std::size_t aligned = 0;
  std::vector<DiscardRecord> discarded;

  double discard_rate() const {
    return total == 0 ? 0.0
                      : static_cast<double>(discarded.size()) /
                            static_cast<double>(total);
  }
};

// System alignment plus best gold alignment for every lexicon word; words
// failing either step are counted and excluded.
inline std::pair<AlignedCorpus, AlignReport> build_training_corpus(
    const Lexicon& lexicon, const Pipeline& p, const AlignOptions& opts = {}) {
  AlignedCorpus corpus;
  AlignReport report;
  report.total = lexicon.size();
  Allowables allow = derive_allowables(p.rules, lexicon, opts);
  MappingProbs probs =
      estimate_mapping_probs(lexicon, p.rules.graphemes, allow, opts);
  for (const LexEntry& e : lexicon) {
    AlignedEntry entry;
    entry.word = e.word;
    try {
      std::tie(entry.graphemes, entry.system_cells) =
          align_system_output(p, e.word);
    } catch (const Unsegmentable&) {
      report.discarded.push_back({e.word, "unsegmentable"});
      continue;
    } catch (const NonFunctional&) {
      report.discarded.push_back({e.word, "ambiguous system output"});
      continue;
    }
    auto gold = best_alignment(entry.graphemes, e.phones, probs, allow, opts);
    if (!gold) {
      report.discarded.push_back({e.word, "unalignable"});
      continue;
    }
    entry.gold_cells = std::move(*gold);
    corpus.entries.push_back(std::move(entry));
    ++report.aligned;
  }
  return {std::move(corpus), std::move(report)};
}

// -- aligned corpus file ------------------------------------------------------
//
// TSV: word, |-separated graphemes, |-separated system cells, |-separated
// gold cells; an empty cell is written '_'.

namespace detail {

inline std::string cells_field(const std::vector<std::u32string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += "|";
    out += cells[i].empty() ? "_" : to_utf8(cells[i]);
  }
  return out;
}

inline std::vector<std::u32string> parse_cells_field(std::string_view field) {
  std::vector<std::u32string> out;
  std::size_t pos = 0;
  while (pos <= field.size()) {
    std::size_t bar = field.find('|', pos);
    std::string_view piece = field.substr(
        pos, bar == std::string_view::npos ? std::string_view::npos
                                           : bar - pos);
    out.push_back(piece == "_" ? std::u32string() : from_utf8(piece));
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  return out;
}

}  // namespace detail

inline std::string write_aligned_corpus(const AlignedCorpus& corpus) {
  std::string out;
  for (const AlignedEntry& e : corpus.entries) {
    out += to_utf8(e.word);
    out += "\t" + detail::cells_field(e.graphemes);
    out += "\t" + detail::cells_field(e.system_cells);
    out += "\t" + detail::cells_field(e.gold_cells);
    out += "\n";
  }
  return out;
}

inline AlignedCorpus parse_aligned_corpus(std::string_view text) {
  AlignedCorpus corpus;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      std::size_t tab = raw.find('\t', pos);
      fields.push_back(raw.substr(
          pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 4)
      throw SyntaxError(lineno, 1, "expected 4 tab-separated fields");
    AlignedEntry e;
    e.word = from_utf8(fields[0]);
    e.graphemes = detail::parse_cells_field(fields[1]);
    e.system_cells = detail::parse_cells_field(fields[2]);
    e.gold_cells = detail::parse_cells_field(fields[3]);
    if (e.graphemes.size() != e.system_cells.size() ||
        e.graphemes.size() != e.gold_cells.size())
      throw SyntaxError(lineno, 1, "cell counts differ");
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

}  // namespace g2p

#endif  // G2P_ALIGN_HPP
