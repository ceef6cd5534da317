// oracle.hpp
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
// Reference implementation of leftmost longest-match replacement by direct
// string scanning. Context membership is decided by walking the expression
// tree over string positions; nothing here touches the machine construction
// it serves as ground truth for.

#ifndef G2P_ORACLE_HPP
#define G2P_ORACLE_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "g2p/common.hpp"
#include "g2p/regex.hpp"

namespace g2p {
namespace oracle {

namespace detail {

inline void skip_closure(std::u32string_view s, std::set<std::size_t>& pos,
                         const std::set<Symbol>& ignored) {
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t p : std::set<std::size_t>(pos)) {
      if (p < s.size() && ignored.count(s[p]) && pos.insert(p + 1).second)
        grew = true;
    }
  }
}

// End positions of matches of `ast` starting at any position in `starts`,
// with `ignored` symbols freely skippable.
inline std::set<std::size_t> match_ends(const Regex& ast, std::u32string_view s,
                                        std::set<std::size_t> starts,
                                        std::set<Symbol> ignored) {
  switch (ast->kind) {
    case RegexKind::kEmptyString:
      return starts;
    case RegexKind::kLiteral: {
      skip_closure(s, starts, ignored);
      std::set<std::size_t> out;
      for (std::size_t p : starts)
        if (p < s.size() && s[p] == ast->literal) out.insert(p + 1);
      return out;
    }
    case RegexKind::kConcat: {
      std::set<std::size_t> cur = std::move(starts);
      for (const Regex& child : ast->children) {
        cur = match_ends(child, s, std::move(cur), ignored);
        if (cur.empty()) break;
      }
      return cur;
    }
    case RegexKind::kDisjunction: {
      std::set<std::size_t> out;
      for (const Regex& child : ast->children) {
        auto ends = match_ends(child, s, starts, ignored);
        out.insert(ends.begin(), ends.end());
      }
      return out;
    }
    case RegexKind::kOptional: {
      auto out = match_ends(ast->children[0], s, starts, ignored);
      out.insert(starts.begin(), starts.end());
      return out;
    }
    case RegexKind::kIgnore: {
      std::set<Symbol> inner = ignored;
      inner.insert(ast->symbol_set.begin(), ast->symbol_set.end());
      skip_closure(s, starts, inner);
      auto out = match_ends(ast->children[0], s, std::move(starts), inner);
      skip_closure(s, out, inner);
      return out;
    }
    default:
      throw Error("oracle: context expression must be a plain acceptor");
  }
}

inline bool matches(const Regex& ast, std::u32string_view s, std::size_t from,
                    std::size_t to) {
  auto ends =
      match_ends(ast, s.substr(0, to), {from}, {});
  return ends.count(to) != 0;
}

}  // namespace detail

// True iff some suffix of input[0..i) matches `left`.
inline bool left_context_holds(const Regex& left, std::u32string_view input,
                               std::size_t i) {
  for (std::size_t j = 0; j <= i; ++j)
    if (detail::matches(left, input, j, i)) return true;
  return false;
}

// True iff some prefix of input[j..) matches `right`.
inline bool right_context_holds(const Regex& right, std::u32string_view input,
                                std::size_t j) {
  return !detail::match_ends(right, input, {j}, {}).empty();
}

// Leftmost longest-match replacement over a finite map of targets. Scans left
// to right; at each position takes the longest key matching there whose
// surrounding input satisfies the contexts, emits its replacement and resumes
// after the match. An empty key inserts at most once per position.
inline std::u32string oracle_replace(
    const std::map<std::u32string, std::u32string>& targets, const Regex& left,
    const Regex& right, std::u32string_view input) {
  std::size_t max_len = 0;
  for (auto& [k, v] : targets) max_len = std::max(max_len, k.size());
  std::u32string out;
  std::size_t i = 0;
  while (true) {
    bool matched_nonempty = false;
    if (left_context_holds(left, input, i)) {
      std::size_t cap = std::min(max_len, input.size() - i);
      for (std::size_t len = cap + 1; len-- > 0;) {
        auto it = targets.find(std::u32string(input.substr(i, len)));
        if (it == targets.end()) continue;
        if (!right_context_holds(right, input, i + len)) continue;
        out += it->second;
        if (len > 0) {
          i += len;
          matched_nonempty = true;
        }
        break;  // empty match: fall through to copy the current symbol
      }
    }
    if (matched_nonempty) continue;
    if (i >= input.size()) break;
    out.push_back(input[i]);
    ++i;
  }
  return out;
}

}  // namespace oracle
}  // namespace g2p

#endif  // G2P_ORACLE_HPP
