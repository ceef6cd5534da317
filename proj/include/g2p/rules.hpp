// rules.hpp
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
// The external conversion-rule format: grapheme inventory, named symbol
// classes, and ordered context-sensitive conversion rules.
//
//   # full-line comments only; '#' inside a rule is the word boundary
//   graphemes a aa aai b ch ...
//   class cons b c d f g ...
//   group special_vowel
//   rule e,u -> e j } / _ m
//   rule a -> A ; e -> @ ; i -> I / _ @cons {@cons,#}
//   default a a -> a
//
// Graphemes and phoneme sequences are written as their codepoints separated
// by spaces or commas. Contexts are written `/ LEFT _ RIGHT`; elements are
// symbols, `#` (word boundary), `@name` (class), `{x,y z}` (disjunction of
// symbol sequences) and `[]` (empty). Earlier rules apply first.

#ifndef G2P_RULES_HPP
#define G2P_RULES_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "g2p/common.hpp"
#include "g2p/regex.hpp"

namespace g2p {

class SyntaxError : public Error {
 public:
  int line, col;
  SyntaxError(int line, int col, const std::string& msg)
      : Error("line " + std::to_string(line) + ":" + std::to_string(col) +
              ": " + msg),
        line(line),
        col(col) {}
};

class UnknownClass : public Error {
 public:
  using Error::Error;
};

class UnknownGrapheme : public Error {
 public:
  using Error::Error;
};

class EmptyGraphemeSet : public Error {
 public:
  using Error::Error;
};

// Ordered inventory of spelling units, 1..4 codepoints each.
struct GraphemeSet {
  std::vector<std::u32string> entries;

  bool contains(std::u32string_view g) const {
    for (const auto& e : entries)
      if (e == g) return true;
    return false;
  }
  bool empty() const { return entries.empty(); }

  void add(std::u32string g) {
    if (!contains(g)) entries.push_back(std::move(g));
  }

  std::set<Symbol> character_alphabet() const {
    std::set<Symbol> out;
    for (const auto& e : entries) out.insert(e.begin(), e.end());
    return out;
  }

  std::size_t max_length() const {
    std::size_t m = 0;
    for (const auto& e : entries) m = std::max(m, e.size());
    return m;
  }
};

enum class RuleGroup { kSpecialVowel, kShortVowel, kSpecialConsonant, kDefault };

inline const char* rule_group_name(RuleGroup g) {
  switch (g) {
    case RuleGroup::kSpecialVowel: return "special_vowel";
    case RuleGroup::kShortVowel: return "short_vowel";
    case RuleGroup::kSpecialConsonant: return "special_consonant";
    case RuleGroup::kDefault: return "default";
  }
  return "?";
}

struct TargetPair {
  std::u32string grapheme;
  std::u32string phonemes;  // may be empty: deletion
};

struct ConversionRule {
  std::vector<TargetPair> targets;
  Regex left;   // context over graphemes/phonemes/'#'; empty string if none
  Regex right;
  RuleGroup group = RuleGroup::kDefault;
  int line = 0;

  bool context_free() const {
    return left->kind == RegexKind::kEmptyString &&
           right->kind == RegexKind::kEmptyString;
  }
};

struct RuleFile {
  GraphemeSet graphemes;
  std::map<std::string, std::set<Symbol>> classes;
  std::vector<ConversionRule> rules;

  // All symbols a conversion-stage string can contain.
  std::set<Symbol> alphabet() const {
    std::set<Symbol> out = graphemes.character_alphabet();
    for (const auto& r : rules)
      for (const auto& t : r.targets) out.insert(t.phonemes.begin(), t.phonemes.end());
    for (const auto& [name, syms] : classes) out.insert(syms.begin(), syms.end());
    out.insert(kSegMarker);
    out.insert(kDoneMarker);
    out.insert(kBoundary);
    return out;
  }
};

namespace detail {

inline bool is_space(char32_t c) { return c == U' ' || c == U'\t'; }

struct Tok {
  std::u32string text;
  int col;  // 1-based
};

// Whitespace-separated tokens; a '{...}' group is one token.
inline std::vector<Tok> tokenize_line(const std::u32string& line, int lineno) {
  std::vector<Tok> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (line[i] == U'{') {
      std::size_t close = line.find(U'}', i);
      // a lone '}' right after '{,' would be a phoneme; scan for the last
      // closing brace of the group conservatively: first '}' that is followed
      // by space or end
      while (close != std::u32string::npos && close + 1 < line.size() &&
             !is_space(line[close + 1]))
        close = line.find(U'}', close + 1);
      if (close == std::u32string::npos)
        throw SyntaxError(lineno, static_cast<int>(i) + 1, "unclosed '{'");
      toks.push_back({line.substr(begin, close - begin + 1),
                      static_cast<int>(begin) + 1});
      i = close + 1;
      continue;
    }
    while (i < line.size() && !is_space(line[i])) ++i;
    toks.push_back({line.substr(begin, i - begin), static_cast<int>(begin) + 1});
  }
  return toks;
}

// Splits a token on commas and flattens the pieces to codepoints.
inline std::u32string token_codepoints(const Tok& t) {
  std::u32string out;
  for (char32_t c : t.text)
    if (c != U',') out.push_back(c);
  return out;
}

struct ContextParser {
  const RuleFile& rf;
  int lineno;

  Regex element(const Tok& t) const {
    if (t.text == U"[]") return rx::eps();
    // a bare '@' is the schwa phoneme; '@name' references a class
    if (t.text.front() == U'@' && t.text.size() > 1) {
      std::string name = to_utf8(t.text.substr(1));
      auto it = rf.classes.find(name);
      if (it == rf.classes.end())
        throw UnknownClass("line " + std::to_string(lineno) +
                           ": unknown class '@" + name + "'");
      return rx::symset(it->second);
    }
    if (t.text.front() == U'{') {
      std::u32string body = t.text.substr(1, t.text.size() - 2);
      std::vector<Regex> alts;
      std::size_t pos = 0;
      while (pos <= body.size()) {
        std::size_t comma = body.find(U',', pos);
        std::u32string piece = body.substr(
            pos, comma == std::u32string::npos ? std::u32string::npos
                                               : comma - pos);
        alts.push_back(sequence_text(piece));
        if (comma == std::u32string::npos) break;
        pos = comma + 1;
      }
      return rx::alt(std::move(alts));
    }
    return sequence_text(t.text);
  }

  // space- or comma-separated pieces; a piece is either '@name' (class),
  // '[]' (empty) or a run of codepoints that concatenates symbol by symbol.
  Regex sequence_text(std::u32string_view text) const {
    std::vector<Regex> parts;
    std::size_t i = 0;
    while (i < text.size()) {
      if (is_space(text[i]) || text[i] == U',') {
        ++i;
        continue;
      }
      std::size_t begin = i;
      while (i < text.size() && !is_space(text[i]) && text[i] != U',') ++i;
      std::u32string_view piece = text.substr(begin, i - begin);
      if (piece == U"[]") continue;
      if (piece.front() == U'@' && piece.size() > 1) {
        std::string name = to_utf8(piece.substr(1));
        auto it = rf.classes.find(name);
        if (it == rf.classes.end())
          throw UnknownClass("line " + std::to_string(lineno) +
                             ": unknown class '@" + name + "'");
        parts.push_back(rx::symset(it->second));
        continue;
      }
      for (char32_t c : piece) parts.push_back(rx::lit(c));
    }
    if (parts.empty()) return rx::eps();
    return rx::cat(std::move(parts));
  }

  Regex sequence(const std::vector<Tok>& toks, std::size_t from,
                 std::size_t to) const {
    if (from >= to) return rx::eps();
    std::vector<Regex> parts;
    for (std::size_t i = from; i < to; ++i) parts.push_back(element(toks[i]));
    if (parts.size() == 1) return parts[0];
    return rx::cat(std::move(parts));
  }
};

}  // namespace detail

// One grapheme per line, '#' comments, UTF-8.
inline GraphemeSet parse_grapheme_file(std::string_view text) {
  GraphemeSet out;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    std::u32string line = from_utf8(raw);
    std::size_t i = 0;
    while (i < line.size() && detail::is_space(line[i])) ++i;
    if (i >= line.size() || line[i] == U'#') continue;
    std::u32string g;
    for (; i < line.size() && !detail::is_space(line[i]); ++i)
      g.push_back(line[i]);
    if (g.empty()) continue;
    if (g.size() > 4)
      throw SyntaxError(lineno, 1, "grapheme longer than 4 characters");
    out.add(std::move(g));
  }
  return out;
}

// Parses and validates a rule file. `seed` contributes extra graphemes (e.g.
// from a separate grapheme-set file).
inline RuleFile parse_rule_file(std::string_view text,
                                const GraphemeSet& seed = {}) {
  RuleFile rf;
  for (const auto& g : seed.entries) rf.graphemes.add(g);
  RuleGroup current = RuleGroup::kSpecialVowel;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    std::u32string line = from_utf8(raw);
    {
      std::size_t i = 0;
      while (i < line.size() && detail::is_space(line[i])) ++i;
      if (i >= line.size() || line[i] == U'#') continue;
    }
    auto toks = detail::tokenize_line(line, lineno);
    const std::u32string& kw = toks[0].text;
    if (kw == U"graphemes") {
      for (std::size_t i = 1; i < toks.size(); ++i) {
        for (std::u32string_view piece : [&] {
               std::vector<std::u32string_view> pieces;
               std::u32string_view t = toks[i].text;
               std::size_t pos = 0;
               while (pos <= t.size()) {
                 std::size_t comma = t.find(U',', pos);
                 if (comma == std::u32string_view::npos) {
                   if (pos < t.size()) pieces.push_back(t.substr(pos));
                   break;
                 }
                 if (comma > pos) pieces.push_back(t.substr(pos, comma - pos));
                 pos = comma + 1;
               }
               return pieces;
             }()) {
          if (piece.size() > 4)
            throw SyntaxError(lineno, toks[i].col,
                              "grapheme longer than 4 characters");
          rf.graphemes.add(std::u32string(piece));
        }
      }
    } else if (kw == U"class") {
      if (toks.size() < 2)
        throw SyntaxError(lineno, toks[0].col, "class needs a name");
      std::string name = to_utf8(toks[1].text);
      auto& members = rf.classes[name];
      for (std::size_t i = 2; i < toks.size(); ++i)
        for (char32_t c : detail::token_codepoints(toks[i]))
          members.insert(c);
    } else if (kw == U"group") {
      if (toks.size() != 2)
        throw SyntaxError(lineno, toks[0].col, "group needs exactly one name");
      std::string name = to_utf8(toks[1].text);
      if (name == "special_vowel") current = RuleGroup::kSpecialVowel;
      else if (name == "short_vowel") current = RuleGroup::kShortVowel;
      else if (name == "special_consonant") current = RuleGroup::kSpecialConsonant;
      else if (name == "default") current = RuleGroup::kDefault;
      else throw SyntaxError(lineno, toks[1].col, "unknown group '" + name + "'");
    } else if (kw == U"rule" || kw == U"default") {
      ConversionRule rule;
      rule.group = kw == U"default" ? RuleGroup::kDefault : current;
      rule.line = lineno;
      // locate the context separator
      std::size_t ctx_at = toks.size();
      for (std::size_t i = 1; i < toks.size(); ++i)
        if (toks[i].text == U"/") {
          ctx_at = i;
          break;
        }
      // target pairs: G... -> P... separated by ';'
      std::size_t i = 1;
      while (i < ctx_at) {
        std::u32string grapheme;
        while (i < ctx_at && toks[i].text != U"->") {
          if (toks[i].text == U";")
            throw SyntaxError(lineno, toks[i].col, "';' before '->'");
          grapheme += detail::token_codepoints(toks[i]);
          ++i;
        }
        if (i >= ctx_at)
          throw SyntaxError(lineno, toks.back().col, "missing '->'");
        ++i;  // skip ->
        std::u32string phonemes;
        bool empty_marker = false;
        while (i < ctx_at && toks[i].text != U";") {
          if (toks[i].text == U"[]")
            empty_marker = true;
          else
            phonemes += detail::token_codepoints(toks[i]);
          ++i;
        }
        if (i < ctx_at) ++i;  // skip ';'
        if (grapheme.empty())
          throw SyntaxError(lineno, toks[0].col, "empty target grapheme");
        if (phonemes.empty() && !empty_marker)
          throw SyntaxError(lineno, toks[0].col,
                            "empty phoneme sequence (use [] for deletion)");
        rule.targets.push_back({std::move(grapheme), std::move(phonemes)});
      }
      if (rule.targets.empty())
        throw SyntaxError(lineno, toks[0].col, "rule without targets");
      // context
      detail::ContextParser cp{rf, lineno};
      if (ctx_at < toks.size()) {
        if (kw == U"default")
          throw SyntaxError(lineno, toks[ctx_at].col,
                            "default rules take no context");
        std::size_t underscore = toks.size();
        for (std::size_t k = ctx_at + 1; k < toks.size(); ++k)
          if (toks[k].text == U"_") {
            underscore = k;
            break;
          }
        if (underscore == toks.size())
          throw SyntaxError(lineno, toks[ctx_at].col,
                            "context needs '_' between left and right");
        rule.left = cp.sequence(toks, ctx_at + 1, underscore);
        rule.right = cp.sequence(toks, underscore + 1, toks.size());
      } else {
        rule.left = rx::eps();
        rule.right = rx::eps();
      }
      rf.rules.push_back(std::move(rule));
    } else {
      throw SyntaxError(lineno, toks[0].col,
                        "unknown keyword '" + to_utf8(kw) + "'");
    }
  }
  // validation
  for (const auto& r : rf.rules) {
    for (const auto& t : r.targets) {
      if (!rf.graphemes.contains(t.grapheme))
        throw UnknownGrapheme("line " + std::to_string(r.line) +
                              ": target grapheme '" + to_utf8(t.grapheme) +
                              "' is not in the grapheme set");
      for (Symbol c : t.phonemes)
        if (c == kSegMarker || c == kDoneMarker || c == kBoundary)
          throw SyntaxError(r.line, 1, "phoneme may not be a marker symbol");
    }
    if (r.group == RuleGroup::kDefault && !r.context_free())
      throw SyntaxError(r.line, 1, "default rules take no context");
  }
  for (const auto& g : rf.graphemes.entries) {
    if (g.empty()) throw EmptyGraphemeSet("empty grapheme entry");
    for (Symbol c : g)
      if (c == kSegMarker || c == kDoneMarker || c == kBoundary)
        throw SyntaxError(1, 1, "grapheme may not contain a marker symbol");
  }
  return rf;
}

}  // namespace g2p

#endif  // G2P_RULES_HPP
