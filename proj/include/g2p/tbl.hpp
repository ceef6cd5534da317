// tbl.hpp
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
// Transformation-based learning over aligned corpora: rule templates,
// candidate generation (exhaustive and Monte-Carlo-sampled), scoring,
// the greedy training loop, rule application, and the frequency baseline.

#ifndef G2P_TBL_HPP
#define G2P_TBL_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "g2p/align.hpp"
#include "g2p/common.hpp"

namespace g2p {

// -- templates -----------------------------------------------------------------

enum class CondKind { kPhoneme, kPhonemeSeq, kGrapheme, kPhonemeOr };

struct CondSpec {
  CondKind kind;
  int o1 = 0;
  int o2 = 0;
};

struct TblTemplate {
  int id = 0;
  std::vector<CondSpec> conds;  // besides the segment, which is always bound
};

// The standard set: every template conditions on the underlying segment;
// phoneme-cell context within +-2, grapheme context within +-1. Left options
// {none, P(-1), P(-2), PP(-2,-1), G(-1)} cross right options {none, P(+1),
// P(+2), PP(+1,+2), G(+1)}, minus the detached-both-sides P(-2)xP(+2) pair,
// minus grapheme/detached-phoneme mixes, gives the 22 documented templates.
inline std::vector<TblTemplate> standard_templates() {
  std::vector<TblTemplate> out;
  auto add = [&](std::vector<CondSpec> conds) {
    out.push_back({static_cast<int>(out.size()) + 1, std::move(conds)});
  };
  const CondSpec g_l{CondKind::kGrapheme, -1};
  const CondSpec g_r{CondKind::kGrapheme, 1};
  const CondSpec p_l1{CondKind::kPhoneme, -1};
  const CondSpec p_l2{CondKind::kPhoneme, -2};
  const CondSpec p_r1{CondKind::kPhoneme, 1};
  const CondSpec p_r2{CondKind::kPhoneme, 2};
  const CondSpec pp_l{CondKind::kPhonemeSeq, -2, -1};
  const CondSpec pp_r{CondKind::kPhonemeSeq, 1, 2};
  add({});               // 1: segment only
  add({g_l});            // 2
  add({g_r});            // 3
  add({g_l, g_r});       // 4
  add({g_l, p_r1});      // 5
  add({p_l1, g_r});      // 6
  add({g_l, pp_r});      // 7
  add({pp_l, g_r});      // 8
  add({p_l1});           // 9
  add({p_l2});           // 10
  add({pp_l});           // 11
  add({p_r1});           // 12
  add({p_r2});           // 13
  add({pp_r});           // 14
  add({p_l1, p_r1});     // 15
  add({p_l1, p_r2});     // 16
  add({p_l1, pp_r});     // 17
  add({p_l2, p_r1});     // 18
  add({p_l2, pp_r});     // 19
  add({pp_l, p_r1});     // 20
  add({pp_l, p_r2});     // 21
  add({pp_l, pp_r});     // 22
  return out;
}

// The extended set: windows up to +-3 in graphemes or phoneme cells,
// disjunctive phoneme positions allowed, one phoneme and one grapheme
// condition may combine on a side. Generated combinations are ordered by
// total conditioned positions, then by a canonical key, and the first 500
// are kept.
inline std::vector<TblTemplate> extended_templates() {
  struct SideOption {
    std::vector<CondSpec> conds;
    int width;
  };
  auto side_options = [](int dir) {  // dir = -1 (left) or +1 (right)
    std::vector<SideOption> opts;
    opts.push_back({{}, 0});
    for (CondKind kind : {CondKind::kPhoneme, CondKind::kGrapheme}) {
      for (int o = 1; o <= 3; ++o)  // single positions
        opts.push_back({{CondSpec{kind, dir * o}}, 1});
      for (int o = 1; o + 1 <= 3; ++o) {  // adjacent pairs
        int a = dir * (dir < 0 ? o + 1 : o), b = dir * (dir < 0 ? o : o + 1);
        if (kind == CondKind::kPhoneme)
          opts.push_back({{CondSpec{CondKind::kPhonemeSeq, a, b}}, 2});
        else
          opts.push_back(
              {{CondSpec{kind, a}, CondSpec{kind, b}}, 2});
      }
      // full window of three
      if (kind == CondKind::kPhoneme) {
        opts.push_back({{CondSpec{CondKind::kPhonemeSeq, dir * (dir < 0 ? 2 : 1),
                                  dir * (dir < 0 ? 1 : 2)},
                         CondSpec{CondKind::kPhoneme, dir * 3}},
                        3});
      } else {
        opts.push_back({{CondSpec{kind, dir * 1}, CondSpec{kind, dir * 2},
                         CondSpec{kind, dir * 3}},
                        3});
      }
    }
    // disjunctive phoneme positions
    for (int o1 = 1; o1 <= 3; ++o1)
      for (int o2 = o1 + 1; o2 <= 3; ++o2)
        opts.push_back({{CondSpec{CondKind::kPhonemeOr, dir * o1, dir * o2}}, 1});
    // phoneme window next to a grapheme window on the same side
    for (int po = 1; po <= 2; ++po)
      for (int go = 1; go <= 2; ++go)
        if (po != go)
          opts.push_back({{CondSpec{CondKind::kPhoneme, dir * po},
                           CondSpec{CondKind::kGrapheme, dir * go}},
                          2});
    return opts;
  };
  auto lefts = side_options(-1);
  auto rights = side_options(+1);
  struct Candidate {
    std::vector<CondSpec> conds;
    int width;
    std::string key;
  };
  std::vector<Candidate> cands;
  for (const auto& l : lefts)
    for (const auto& r : rights) {
      Candidate c;
      c.conds = l.conds;
      c.conds.insert(c.conds.end(), r.conds.begin(), r.conds.end());
      c.width = l.width + r.width;
      std::ostringstream key;
      for (const auto& cs : c.conds)
        key << static_cast<int>(cs.kind) << ":" << cs.o1 << ":" << cs.o2 << ";";
      c.key = key.str();
      cands.push_back(std::move(c));
    }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.width != b.width) return a.width < b.width;
                     return a.key < b.key;
                   });
  std::vector<TblTemplate> out;
  std::set<std::string> seen;
  for (const auto& c : cands) {
    if (!seen.insert(c.key).second) continue;
    out.push_back({static_cast<int>(out.size()) + 1, c.conds});
    if (out.size() == 500) break;
  }
  return out;
}

// -- rules ----------------------------------------------------------------------

struct TblCond {
  CondKind kind;
  int o1 = 0;
  int o2 = 0;
  std::u32string v1;
  std::u32string v2;  // kPhonemeSeq only
};

struct TblRule {
  int template_id = 0;
  std::u32string seg;   // underlying segment (grapheme)
  std::u32string from;  // current cell value
  std::u32string to;    // replacement cell value
  std::vector<TblCond> conds;
  int score = 0;
};

namespace detail {

inline std::string cell_text(const std::u32string& v) {
  return v.empty() ? "_" : to_utf8(v);
}

inline std::u32string cell_value(std::string_view text) {
  return text == "_" ? std::u32string() : from_utf8(text);
}

}  // namespace detail

// `t=<templateId> <from>-><to> seg=<grapheme> [cond=<kind>:<offset>:<value>]*
// score=<n>`; the offsets and values of a sequence condition join with ','.
inline std::string serialize_rule(const TblRule& r) {
  std::string out = "t=" + std::to_string(r.template_id) + " " +
                    detail::cell_text(r.from) + "->" + detail::cell_text(r.to) +
                    " seg=" + to_utf8(r.seg);
  for (const TblCond& c : r.conds) {
    out += " cond=";
    switch (c.kind) {
      case CondKind::kPhoneme:
        out += "p:" + std::to_string(c.o1) + ":" + detail::cell_text(c.v1);
        break;
      case CondKind::kPhonemeSeq:
        out += "pp:" + std::to_string(c.o1) + "," + std::to_string(c.o2) +
               ":" + detail::cell_text(c.v1) + "," + detail::cell_text(c.v2);
        break;
      case CondKind::kGrapheme:
        out += "g:" + std::to_string(c.o1) + ":" + detail::cell_text(c.v1);
        break;
      case CondKind::kPhonemeOr:
        out += "por:" + std::to_string(c.o1) + "," + std::to_string(c.o2) +
               ":" + detail::cell_text(c.v1);
        break;
    }
  }
  out += " score=" + std::to_string(r.score);
  return out;
}

inline TblRule parse_rule_line(const std::string& line, int lineno = 0) {
  TblRule r;
  std::istringstream ss(line);
  std::string tok;
  bool have_map = false;
  while (ss >> tok) {
    if (tok.rfind("t=", 0) == 0) {
      r.template_id = std::stoi(tok.substr(2));
    } else if (tok.rfind("seg=", 0) == 0) {
      r.seg = from_utf8(tok.substr(4));
    } else if (tok.rfind("score=", 0) == 0) {
      r.score = std::stoi(tok.substr(6));
    } else if (tok.rfind("cond=", 0) == 0) {
      std::string body = tok.substr(5);
      std::size_t c1 = body.find(':');
      std::size_t c2 = body.find(':', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw SyntaxError(lineno, 1, "bad cond '" + tok + "'");
      std::string kind = body.substr(0, c1);
      std::string offs = body.substr(c1 + 1, c2 - c1 - 1);
      std::string vals = body.substr(c2 + 1);
      TblCond c;
      auto parse_two = [&](const std::string& s, char sep, std::string& a,
                           std::string& b) {
        std::size_t p = s.find(sep);
        if (p == std::string::npos)
          throw SyntaxError(lineno, 1, "bad cond '" + tok + "'");
        a = s.substr(0, p);
        b = s.substr(p + 1);
      };
      if (kind == "p" || kind == "g") {
        c.kind = kind == "p" ? CondKind::kPhoneme : CondKind::kGrapheme;
        c.o1 = std::stoi(offs);
        c.v1 = detail::cell_value(vals);
      } else if (kind == "pp") {
        c.kind = CondKind::kPhonemeSeq;
        std::string a, b;
        parse_two(offs, ',', a, b);
        c.o1 = std::stoi(a);
        c.o2 = std::stoi(b);
        parse_two(vals, ',', a, b);
        c.v1 = detail::cell_value(a);
        c.v2 = detail::cell_value(b);
      } else if (kind == "por") {
        c.kind = CondKind::kPhonemeOr;
        std::string a, b;
        parse_two(offs, ',', a, b);
        c.o1 = std::stoi(a);
        c.o2 = std::stoi(b);
        c.v1 = detail::cell_value(vals);
      } else {
        throw SyntaxError(lineno, 1, "unknown cond kind '" + kind + "'");
      }
      r.conds.push_back(std::move(c));
    } else if (tok.find("->") != std::string::npos) {
      std::size_t arrow = tok.find("->");
      r.from = detail::cell_value(tok.substr(0, arrow));
      r.to = detail::cell_value(tok.substr(arrow + 2));
      have_map = true;
    } else {
      throw SyntaxError(lineno, 1, "unknown token '" + tok + "'");
    }
  }
  if (!have_map) throw SyntaxError(lineno, 1, "rule without from->to");
  return r;
}

inline std::string write_rules(const std::vector<TblRule>& rules) {
  std::string out;
  for (const TblRule& r : rules) out += serialize_rule(r) + "\n";
  return out;
}

inline std::vector<TblRule> parse_rules(std::string_view text) {
  std::vector<TblRule> out;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    out.push_back(parse_rule_line(raw, lineno));
  }
  return out;
}

// -- training state ---------------------------------------------------------------

// For each grapheme, the most frequent gold cell (ties: lexicographically
// smallest).
inline std::map<std::u32string, std::u32string> frequency_baseline(
    const AlignedCorpus& corpus) {
  std::map<std::u32string, std::map<std::u32string, std::size_t>> counts;
  for (const AlignedEntry& e : corpus.entries)
    for (std::size_t i = 0; i < e.graphemes.size(); ++i)
      counts[e.graphemes[i]][e.gold_cells[i]]++;
  std::map<std::u32string, std::u32string> out;
  for (auto& [g, cells] : counts) {
    const std::u32string* best = nullptr;
    std::size_t bestc = 0;
    for (auto& [cell, c] : cells)
      if (best == nullptr || c > bestc || (c == bestc && cell < *best)) {
        best = &cell;
        bestc = c;
      }
    out[g] = *best;
  }
  return out;
}

struct Site {
  int entry = 0;
  int pos = 0;
};

// The mutable "current" layer over an aligned corpus plus the error index.
// Cell and grapheme values are interned; id 0 is the '#' boundary.
struct TrainState {
  std::vector<std::u32string> gsyms, psyms;
  std::map<std::u32string, int> gids, pids;
  struct Entry {
    std::vector<int> seg, gold;
  };
  std::vector<Entry> entries;
  std::vector<std::vector<int>> current;
  std::vector<std::vector<Site>> sites_by_seg;
  long long error_count = 0;

  int intern_g(const std::u32string& s) {
    auto it = gids.find(s);
    if (it != gids.end()) return it->second;
    int id = static_cast<int>(gsyms.size());
    gsyms.push_back(s);
    gids.emplace(s, id);
    sites_by_seg.emplace_back();
    return id;
  }
  int intern_p(const std::u32string& s) {
    auto it = pids.find(s);
    if (it != pids.end()) return it->second;
    int id = static_cast<int>(psyms.size());
    psyms.push_back(s);
    pids.emplace(s, id);
    return id;
  }
  int lookup_g(const std::u32string& s) const {
    auto it = gids.find(s);
    return it == gids.end() ? -1 : it->second;
  }
  int lookup_p(const std::u32string& s) const {
    auto it = pids.find(s);
    return it == pids.end() ? -1 : it->second;
  }

  int seg_at(int e, int i) const {
    const auto& seg = entries[e].seg;
    return (i < 0 || i >= static_cast<int>(seg.size())) ? 0 : seg[i];
  }
  int cell_at(int e, int i) const {
    const auto& cur = current[e];
    return (i < 0 || i >= static_cast<int>(cur.size())) ? 0 : cur[i];
  }
  bool is_error(int e, int i) const {
    return current[e][i] != entries[e].gold[i];
  }

  void recount_errors() {
    error_count = 0;
    for (std::size_t e = 0; e < entries.size(); ++e)
      for (std::size_t i = 0; i < current[e].size(); ++i)
        if (current[e][i] != entries[e].gold[i]) ++error_count;
  }

  std::vector<Site> error_sites() const {
    std::vector<Site> out;
    for (std::size_t e = 0; e < entries.size(); ++e)
      for (std::size_t i = 0; i < current[e].size(); ++i)
        if (current[e][i] != entries[e].gold[i])
          out.push_back({static_cast<int>(e), static_cast<int>(i)});
    return out;
  }
};

// The initial layer is the system cells, or the frequency baseline when
// `frequency_init` is set.
inline TrainState make_train_state(const AlignedCorpus& corpus,
                                   bool frequency_init = false) {
  TrainState st;
  st.intern_g(U"#");
  st.intern_p(U"#");
  std::map<std::u32string, std::u32string> freq;
  if (frequency_init) freq = frequency_baseline(corpus);
  for (const AlignedEntry& ae : corpus.entries) {
    TrainState::Entry e;
    std::vector<int> cur;
    for (std::size_t i = 0; i < ae.graphemes.size(); ++i) {
      int g = st.intern_g(ae.graphemes[i]);
      e.seg.push_back(g);
      e.gold.push_back(st.intern_p(ae.gold_cells[i]));
      const std::u32string& init =
          frequency_init ? freq[ae.graphemes[i]] : ae.system_cells[i];
      cur.push_back(st.intern_p(init));
    }
    int idx = static_cast<int>(st.entries.size());
    for (std::size_t i = 0; i < e.seg.size(); ++i)
      st.sites_by_seg[e.seg[i]].push_back({idx, static_cast<int>(i)});
    st.entries.push_back(std::move(e));
    st.current.push_back(std::move(cur));
  }
  st.recount_errors();
  return st;
}

namespace detail {

// Interned rule for the training inner loop.
struct IRuleCond {
  CondKind kind;
  int o1, o2;
  int v1, v2;
};
struct IRule {
  int template_id;
  int seg, from, to;
  std::vector<IRuleCond> conds;
};

inline bool irule_matches(const TrainState& st, const IRule& r, int e, int i) {
  if (st.current[e][i] != r.from) return false;
  for (const IRuleCond& c : r.conds) {
    switch (c.kind) {
      case CondKind::kPhoneme:
        if (st.cell_at(e, i + c.o1) != c.v1) return false;
        break;
      case CondKind::kPhonemeSeq:
        if (st.cell_at(e, i + c.o1) != c.v1 ||
            st.cell_at(e, i + c.o2) != c.v2)
          return false;
        break;
      case CondKind::kGrapheme:
        if (st.seg_at(e, i + c.o1) != c.v1) return false;
        break;
      case CondKind::kPhonemeOr:
        if (st.cell_at(e, i + c.o1) != c.v1 &&
            st.cell_at(e, i + c.o2) != c.v1)
          return false;
        break;
    }
  }
  return true;
}

inline int irule_score(const TrainState& st, const IRule& r) {
  int score = 0;
  for (const Site& s : st.sites_by_seg[r.seg]) {
    if (!irule_matches(st, r, s.entry, s.pos)) continue;
    int gold = st.entries[s.entry].gold[s.pos];
    if (gold == r.to)
      ++score;
    else if (gold == r.from)
      --score;
  }
  return score;
}

// All sites the rule matches against the current (pre-pass) layer, then one
// simultaneous rewrite.
inline int irule_apply(TrainState& st, const IRule& r) {
  std::vector<Site> hits;
  for (const Site& s : st.sites_by_seg[r.seg])
    if (irule_matches(st, r, s.entry, s.pos)) hits.push_back(s);
  for (const Site& s : hits) st.current[s.entry][s.pos] = r.to;
  return static_cast<int>(hits.size());
}

inline TblRule irule_to_rule(const TrainState& st, const IRule& r) {
  TblRule out;
  out.template_id = r.template_id;
  out.seg = st.gsyms[r.seg];
  out.from = st.psyms[r.from];
  out.to = st.psyms[r.to];
  for (const IRuleCond& c : r.conds) {
    TblCond oc;
    oc.kind = c.kind;
    oc.o1 = c.o1;
    oc.o2 = c.o2;
    oc.v1 = c.kind == CondKind::kGrapheme ? st.gsyms[c.v1] : st.psyms[c.v1];
    if (c.kind == CondKind::kPhonemeSeq) oc.v2 = st.psyms[c.v2];
    out.conds.push_back(std::move(oc));
  }
  return out;
}

inline IRule rule_to_irule(const TrainState& st, const TblRule& r) {
  IRule out;
  out.template_id = r.template_id;
  out.seg = st.lookup_g(r.seg);
  out.from = st.lookup_p(r.from);
  out.to = st.lookup_p(r.to);
  for (const TblCond& c : r.conds) {
    IRuleCond ic;
    ic.kind = c.kind;
    ic.o1 = c.o1;
    ic.o2 = c.o2;
    ic.v1 = c.kind == CondKind::kGrapheme ? st.lookup_g(c.v1)
                                          : st.lookup_p(c.v1);
    ic.v2 = c.kind == CondKind::kPhonemeSeq ? st.lookup_p(c.v2) : 0;
    out.conds.push_back(ic);
  }
  return out;
}

// Every instantiation of every template that corrects this error site.
inline std::vector<IRule> instantiate_at(const TrainState& st,
                                         const std::vector<TblTemplate>& tmpl,
                                         const Site& s) {
  std::vector<IRule> out;
  int e = s.entry, i = s.pos;
  int from = st.current[e][i];
  int to = st.entries[e].gold[i];
  for (const TblTemplate& t : tmpl) {
    IRule base;
    base.template_id = t.id;
    base.seg = st.entries[e].seg[i];
    base.from = from;
    base.to = to;
    std::vector<IRule> variants{base};
    for (const CondSpec& cs : t.conds) {
      if (cs.kind == CondKind::kPhonemeOr) {
        int a = st.cell_at(e, i + cs.o1);
        int b = st.cell_at(e, i + cs.o2);
        std::vector<IRule> next;
        for (IRule& v : variants) {
          IRule va = v;
          va.conds.push_back({cs.kind, cs.o1, cs.o2, a, 0});
          next.push_back(std::move(va));
          if (b != a) {
            IRule vb = v;
            vb.conds.push_back({cs.kind, cs.o1, cs.o2, b, 0});
            next.push_back(std::move(vb));
          }
        }
        variants = std::move(next);
      } else {
        for (IRule& v : variants) {
          IRuleCond c{cs.kind, cs.o1, cs.o2, 0, 0};
          switch (cs.kind) {
            case CondKind::kPhoneme:
              c.v1 = st.cell_at(e, i + cs.o1);
              break;
            case CondKind::kPhonemeSeq:
              c.v1 = st.cell_at(e, i + cs.o1);
              c.v2 = st.cell_at(e, i + cs.o2);
              break;
            case CondKind::kGrapheme:
              c.v1 = st.seg_at(e, i + cs.o1);
              break;
            default:
              break;
          }
          v.conds.push_back(c);
        }
      }
    }
    for (IRule& v : variants) out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<int> irule_key(const IRule& r) {
  std::vector<int> key{r.template_id, r.seg, r.from, r.to};
  for (const IRuleCond& c : r.conds) {
    key.push_back(static_cast<int>(c.kind));
    key.push_back(c.o1);
    key.push_back(c.o2);
    key.push_back(c.v1);
    key.push_back(c.v2);
  }
  return key;
}

}  // namespace detail

enum class TrainMode { kBrill, kLazy };

struct TrainConfig {
  TrainMode mode = TrainMode::kBrill;
  int sample_k = 5;    // lazy(k) sample size per error site
  int threshold = 2;   // minimum accepted score
  std::uint64_t seed = 0;
  bool frequency_init = false;
};

struct TrainLogEntry {
  int iteration = 0;
  TblRule rule;
  int score = 0;
  long long training_errors = 0;  // after applying the rule
  long long elapsed_ms = 0;
};

struct TrainResult {
  std::vector<TblRule> rules;
  std::vector<TrainLogEntry> log;
  long long initial_errors = 0;
  long long final_errors = 0;
  long long total_cells = 0;
};

// One site's candidates, as the spec operation: exhaustive instantiation or
// a uniform sample of k with replacement, deduplicated.
inline std::vector<TblRule> generate_candidates(
    const TrainState& st, const Site& site,
    const std::vector<TblTemplate>& templates, bool sample = false, int k = 5,
    std::mt19937_64* rng = nullptr) {
  auto all = detail::instantiate_at(st, templates, site);
  std::vector<detail::IRule> chosen;
  if (!sample) {
    chosen = std::move(all);
  } else {
    for (int t = 0; t < k && !all.empty(); ++t) {
      std::size_t idx = static_cast<std::size_t>((*rng)() % all.size());
      chosen.push_back(all[idx]);
    }
  }
  std::vector<TblRule> out;
  std::set<std::vector<int>> dedup;
  for (const auto& r : chosen)
    if (dedup.insert(detail::irule_key(r)).second)
      out.push_back(detail::irule_to_rule(st, r));
  return out;
}

inline int score_rule(const TblRule& rule, const TrainState& st) {
  detail::IRule ir = detail::rule_to_irule(st, rule);
  if (ir.seg < 0 || ir.from < 0 || ir.to < 0) return 0;
  for (const auto& c : ir.conds)
    if (c.v1 < 0 || c.v2 < 0) return 0;
  return detail::irule_score(st, ir);
}

// Greedy transformation-based learning. Deterministic given the seed: ties
// break on higher score, then smaller template id, then the rule's
// serialization.
inline TrainResult train(const AlignedCorpus& corpus,
                         const std::vector<TblTemplate>& templates,
                         const TrainConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  TrainState st = make_train_state(corpus, cfg.frequency_init);
  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.initial_errors = st.error_count;
  for (const auto& cur : st.current) result.total_cells += cur.size();
  int iteration = 0;
  while (st.error_count > 0) {
    ++iteration;
    auto sites = st.error_sites();
    std::map<std::vector<int>, detail::IRule> candidates;
    for (const Site& s : sites) {
      auto all = detail::instantiate_at(st, templates, s);
      if (cfg.mode == TrainMode::kBrill) {
        for (auto& r : all) candidates.emplace(detail::irule_key(r), r);
      } else {
        for (int t = 0; t < cfg.sample_k && !all.empty(); ++t) {
          std::size_t idx = static_cast<std::size_t>(rng() % all.size());
          candidates.emplace(detail::irule_key(all[idx]), all[idx]);
        }
      }
    }
    if (candidates.empty()) break;
    const detail::IRule* best = nullptr;
    int best_score = 0;
    std::string best_ser;
    for (auto& [key, rule] : candidates) {
      int sc = detail::irule_score(st, rule);
      if (sc < cfg.threshold) continue;
      bool take = false;
      if (best == nullptr || sc > best_score) {
        take = true;
      } else if (sc == best_score) {
        if (rule.template_id < best->template_id) {
          take = true;
        } else if (rule.template_id == best->template_id) {
          std::string ser = serialize_rule(detail::irule_to_rule(st, rule));
          if (ser < best_ser) {
            take = true;
            best_ser = std::move(ser);
          }
        }
      }
      if (take) {
        best = &rule;
        best_score = sc;
        best_ser = serialize_rule(detail::irule_to_rule(st, rule));
      }
    }
    if (best == nullptr) break;  // nothing at or above threshold
    long long before = st.error_count;
    detail::irule_apply(st, *best);
    st.recount_errors();
    if (before - st.error_count != best_score)
      throw Error("accepted rule's score does not match the observed delta");
    TblRule pub = detail::irule_to_rule(st, *best);
    pub.score = best_score;
    result.rules.push_back(pub);
    auto now = std::chrono::steady_clock::now();
    result.log.push_back(
        {iteration, pub, best_score, st.error_count,
         std::chrono::duration_cast<std::chrono::milliseconds>(now - t0)
             .count()});
  }
  result.final_errors = st.error_count;
  return result;
}

// Applies the learned sequence to one entry's cells: per rule, all matches
// against the pre-pass layer are rewritten together.
inline std::vector<std::u32string> apply_rules(
    const std::vector<TblRule>& rules,
    const std::vector<std::u32string>& graphemes,
    std::vector<std::u32string> cells) {
  auto cell = [&](int i) -> const std::u32string& {
    static const std::u32string boundary = U"#";
    if (i < 0 || i >= static_cast<int>(cells.size())) return boundary;
    return cells[i];
  };
  auto seg = [&](int i) -> const std::u32string& {
    static const std::u32string boundary = U"#";
    if (i < 0 || i >= static_cast<int>(graphemes.size())) return boundary;
    return graphemes[i];
  };
  for (const TblRule& r : rules) {
    std::vector<int> hits;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
      if (graphemes[i] != r.seg || cells[i] != r.from) continue;
      bool ok = true;
      for (const TblCond& c : r.conds) {
        switch (c.kind) {
          case CondKind::kPhoneme:
            ok = cell(i + c.o1) == c.v1;
            break;
          case CondKind::kPhonemeSeq:
            ok = cell(i + c.o1) == c.v1 && cell(i + c.o2) == c.v2;
            break;
          case CondKind::kGrapheme:
            ok = seg(i + c.o1) == c.v1;
            break;
          case CondKind::kPhonemeOr:
            ok = cell(i + c.o1) == c.v1 || cell(i + c.o2) == c.v1;
            break;
        }
        if (!ok) break;
      }
      if (ok) hits.push_back(i);
    }
    for (int i : hits) cells[i] = r.to;
  }
  return cells;
}

// Training log TSV: iteration, serialized rule, score, remaining training
// errors, elapsed milliseconds.
inline std::string write_train_log(const TrainResult& r) {
  std::string out = "# iteration\trule\tscore\ttrainingErrors\telapsedMs\n";
  for (const TrainLogEntry& e : r.log) {
    out += std::to_string(e.iteration) + "\t" + serialize_rule(e.rule) + "\t" +
           std::to_string(e.score) + "\t" + std::to_string(e.training_errors) +
           "\t" + std::to_string(e.elapsed_ms) + "\n";
  }
  return out;
}

}  // namespace g2p

#endif  // G2P_TBL_HPP
