// pipeline.hpp
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
// The four-stage conversion pipeline: segmentation, boundary marking,
// ordered conversion rules, marker cleanup.

#ifndef G2P_PIPELINE_HPP
#define G2P_PIPELINE_HPP

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "g2p/common.hpp"
#include "g2p/fst.hpp"
#include "g2p/regex.hpp"
#include "g2p/replace.hpp"
#include "g2p/rules.hpp"

namespace g2p {

class Unsegmentable : public Error {
 public:
  std::u32string word;
  std::size_t position;
  Unsegmentable(std::u32string_view w, std::size_t pos)
      : Error("cannot segment '" + to_utf8(w) + "' at position " +
              std::to_string(pos)),
        word(w),
        position(pos) {}
};

class NonFunctional : public Error {
 public:
  std::u32string word;
  NonFunctional(std::u32string_view w, std::size_t outputs)
      : Error("rule file maps '" + to_utf8(w) + "' to " +
              std::to_string(outputs) + " outputs"),
        word(w) {}
};

// Greedy longest-prefix tokenization into graphemes. Equivalent to the
// segmenter transducer on fully segmentable words (a property the tests
// check); diagnoses the first failing position otherwise.
inline std::vector<std::u32string> segment_word(const GraphemeSet& g,
                                                std::u32string_view word) {
  std::vector<std::u32string> out;
  std::size_t maxlen = g.max_length();
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t best = 0;
    for (std::size_t len = std::min(maxlen, word.size() - i); len >= 1; --len) {
      if (g.contains(word.substr(i, len))) {
        best = len;
        break;
      }
    }
    if (best == 0) throw Unsegmentable(word, i);
    out.emplace_back(word.substr(i, best));
    i += best;
  }
  return out;
}

// replace([identity(graphemes), [] x '-'], [], []): each grapheme is copied
// through with '-' appended, leftmost longest-match.
inline Fst build_segmenter(const GraphemeSet& g) {
  if (g.empty()) throw EmptyGraphemeSet("segmenter needs a nonempty grapheme set");
  std::vector<ReplacePair> targets;
  for (const auto& e : g.entries)
    targets.push_back({e, e + std::u32string(1, kSegMarker)});
  return replace_build(targets, fst_empty_string(), fst_empty_string(),
                       g.character_alphabet());
}

// Inserts "#-" before and "#" after the segmented string.
inline Fst build_marker(const std::set<Symbol>& alphabet) {
  Fst f;
  int s0 = f.add_state(), s1 = f.add_state(), s2 = f.add_state(),
      s3 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, kEpsilon, kBoundary, s1);
  f.add_arc(s1, kEpsilon, kSegMarker, s2);
  for (Symbol c : alphabet)
    if (c != kBoundary) f.add_arc(s2, c, c, s2);
  f.add_arc(s2, kEpsilon, kBoundary, s3);
  f.set_final(s3);
  return f;
}

// Deletes all markers, passing everything else through.
inline Fst build_cleanup(const std::set<Symbol>& alphabet) {
  Fst f;
  int s = f.add_state();
  f.set_start(s);
  f.set_final(s);
  for (Symbol c : alphabet) {
    if (c == kSegMarker || c == kDoneMarker || c == kBoundary)
      f.add_arc(s, c, kEpsilon, s);
    else
      f.add_arc(s, c, c, s);
  }
  return f;
}

// replace([Target, '-' x '+'], [ignore(Left,{+,-}), {-,+}], ignore(Right,{+,-})):
// a converted grapheme's trailing '-' becomes '+', so later rules cannot
// touch it again, and contexts match across markers.
inline Fst build_g2p_rule(const ConversionRule& r,
                          const std::set<Symbol>& alphabet) {
  std::vector<ReplacePair> targets;
  for (const TargetPair& t : r.targets)
    targets.push_back({t.grapheme + std::u32string(1, kSegMarker),
                       t.phonemes + std::u32string(1, kDoneMarker)});
  std::set<Symbol> markers{kSegMarker, kDoneMarker};
  Regex left = rx::cat({rx::ignore(r.left, markers),
                        rx::alt({rx::lit(kSegMarker), rx::lit(kDoneMarker)})});
  Regex right = rx::ignore(r.right, markers);
  return replace_build(targets, compile(left), compile(right), alphabet);
}

struct StageStrings {
  std::u32string segmented, marked, converted, cleaned;
};

struct Pipeline {
  RuleFile rules;
  Fst segmenter;
  Fst marker;
  std::vector<Fst> rule_fsts;  // conversion passes, in application order
  Fst cleanup;
};

// Adjacent context-free default rules over pairwise distinct graphemes
// rewrite disjoint cells, so they can run as a single replacement pass.
// Rules hitting an already-used grapheme keep their own pass to preserve
// earlier-rule-wins shadowing.
inline std::vector<std::vector<const ConversionRule*>> conversion_batches(
    const RuleFile& rf, bool merge_defaults) {
  std::vector<std::vector<const ConversionRule*>> batches;
  std::set<std::u32string> batch_graphemes;
  for (const ConversionRule& r : rf.rules) {
    bool mergeable = merge_defaults && r.context_free();
    if (mergeable && !batches.empty() && !batch_graphemes.empty()) {
      bool clash = false;
      for (const TargetPair& t : r.targets)
        if (batch_graphemes.count(t.grapheme)) clash = true;
      if (!clash) {
        batches.back().push_back(&r);
        for (const TargetPair& t : r.targets) batch_graphemes.insert(t.grapheme);
        continue;
      }
    }
    batches.push_back({&r});
    batch_graphemes.clear();
    if (mergeable)
      for (const TargetPair& t : r.targets) batch_graphemes.insert(t.grapheme);
    else
      batch_graphemes.clear();
  }
  return batches;
}

inline Pipeline build_pipeline(const RuleFile& rf, bool merge_defaults = true) {
  Pipeline p;
  p.rules = rf;
  std::set<Symbol> alphabet = rf.alphabet();
  p.segmenter = build_segmenter(rf.graphemes);
  p.marker = build_marker(alphabet);
  for (const auto& batch : conversion_batches(rf, merge_defaults)) {
    if (batch.size() == 1) {
      p.rule_fsts.push_back(build_g2p_rule(*batch[0], alphabet));
    } else {
      ConversionRule merged = *batch[0];
      for (std::size_t i = 1; i < batch.size(); ++i)
        for (const TargetPair& t : batch[i]->targets)
          merged.targets.push_back(t);
      p.rule_fsts.push_back(build_g2p_rule(merged, alphabet));
    }
  }
  p.cleanup = build_cleanup(alphabet);
  return p;
}

// Ordered composition of the conversion passes into one transducer.
inline Fst compose_conversion(const Pipeline& p) {
  if (p.rule_fsts.empty()) {
    // no rules: conversion is the identity over the alphabet
    Fst id;
    int s = id.add_state();
    id.set_start(s);
    id.set_final(s);
    for (Symbol c : p.rules.alphabet()) id.add_arc(s, c, c, s);
    return id;
  }
  Fst f = p.rule_fsts[0];
  for (std::size_t i = 1; i < p.rule_fsts.size(); ++i)
    f = determinize_minimize(compose(f, p.rule_fsts[i]));
  return f;
}

// The single pipeline transducer: segmentation o mark o conversion o cleanup.
inline Fst compose_full(const Pipeline& p) {
  Fst f = compose(p.segmenter, p.marker);
  f = determinize_minimize(f);
  f = determinize_minimize(compose(f, compose_conversion(p)));
  f = determinize_minimize(compose(f, p.cleanup));
  return f;
}

inline Fst build_pipeline_fst(const RuleFile& rf) {
  return compose_full(build_pipeline(rf));
}

namespace detail {

inline std::u32string apply_functional(const Fst& f, const std::u32string& in,
                                       std::u32string_view word) {
  auto outs = g2p::apply(f, in);
  if (outs.empty())
    throw Error("pipeline rejected '" + to_utf8(word) +
                "' (symbol outside the rule alphabet?)");
  if (outs.size() > 1) throw NonFunctional(word, outs.size());
  return *outs.begin();
}

}  // namespace detail

inline StageStrings transcribe_stages(const Pipeline& p,
                                      std::u32string_view word) {
  segment_word(p.rules.graphemes, word);  // diagnose unsegmentable input
  StageStrings st;
  std::u32string w(word);
  st.segmented = detail::apply_functional(p.segmenter, w, word);
  st.marked = detail::apply_functional(p.marker, st.segmented, word);
  st.converted = st.marked;
  for (const Fst& rule : p.rule_fsts)
    st.converted = detail::apply_functional(rule, st.converted, word);
  st.cleaned = detail::apply_functional(p.cleanup, st.converted, word);
  return st;
}

inline std::u32string transcribe(const Pipeline& p, std::u32string_view word) {
  return transcribe_stages(p, word).cleaned;
}

}  // namespace g2p

#endif  // G2P_PIPELINE_HPP
