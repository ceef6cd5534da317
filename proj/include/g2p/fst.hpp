// fst.hpp
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
// Finite-state machines over symbol pairs: construction primitives,
// application, composition, determinization and minimization, and a
// line-oriented text dump used for inspection and tests.

#ifndef G2P_FST_HPP
#define G2P_FST_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "g2p/common.hpp"

namespace g2p {

struct Arc {
  Symbol in = kEpsilon;
  Symbol out = kEpsilon;
  int target = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// A finite-state transducer with dense integer state ids. Acceptors are the
// special case where in == out on every transition. Values are immutable
// after construction by convention; none of the free functions below mutate
// their inputs.
class Fst {
 public:
  int add_state() {
    transitions_.emplace_back();
    final_.push_back(false);
    return static_cast<int>(transitions_.size()) - 1;
  }

  void add_arc(int src, Symbol in, Symbol out, int dst) {
    transitions_[src].push_back(Arc{in, out, dst});
  }

  void set_start(int s) { start_ = s; }
  void set_final(int s, bool f = true) { final_[s] = f; }

  int start() const { return start_; }
  int num_states() const { return static_cast<int>(transitions_.size()); }
  bool is_final(int s) const { return final_[s]; }
  const std::vector<Arc>& arcs(int s) const { return transitions_[s]; }

  std::size_t num_arcs() const {
    std::size_t n = 0;
    for (const auto& a : transitions_) n += a.size();
    return n;
  }

  std::vector<int> final_states() const {
    std::vector<int> out;
    for (int s = 0; s < num_states(); ++s)
      if (final_[s]) out.push_back(s);
    return out;
  }

  bool is_acceptor() const {
    for (const auto& st : transitions_)
      for (const Arc& a : st)
        if (a.in != a.out) return false;
    return true;
  }

  // Set by determinize_minimize; meaningful for the pair-symbol view.
  bool deterministic = false;
  bool minimal = false;

 private:
  std::vector<std::vector<Arc>> transitions_;
  std::vector<char> final_;
  int start_ = 0;
};

// -- basic constructions ----------------------------------------------------

inline Fst fst_empty_language() {
  Fst f;
  f.set_start(f.add_state());
  return f;
}

inline Fst fst_empty_string() {
  Fst f;
  int s = f.add_state();
  f.set_start(s);
  f.set_final(s);
  return f;
}

// Acceptor for exactly one string.
inline Fst fst_string(std::u32string_view s) {
  Fst f;
  int cur = f.add_state();
  f.set_start(cur);
  for (Symbol c : s) {
    int nxt = f.add_state();
    f.add_arc(cur, c, c, nxt);
    cur = nxt;
  }
  f.set_final(cur);
  return f;
}

// Acceptor for a one-symbol language per set member.
inline Fst fst_symbol_set(const std::set<Symbol>& syms) {
  Fst f;
  int s0 = f.add_state();
  int s1 = f.add_state();
  f.set_start(s0);
  f.set_final(s1);
  for (Symbol c : syms) f.add_arc(s0, c, c, s1);
  return f;
}

namespace detail {

// Copies g into f, returning the state-id offset.
inline int splice(Fst& f, const Fst& g) {
  int off = f.num_states();
  for (int s = 0; s < g.num_states(); ++s) f.add_state();
  for (int s = 0; s < g.num_states(); ++s)
    for (const Arc& a : g.arcs(s))
      f.add_arc(off + s, a.in, a.out, off + a.target);
  return off;
}

}  // namespace detail

inline Fst concat(const Fst& a, const Fst& b) {
  Fst f;
  int oa = detail::splice(f, a);
  int ob = detail::splice(f, b);
  f.set_start(oa + a.start());
  for (int s = 0; s < a.num_states(); ++s)
    if (a.is_final(s)) f.add_arc(oa + s, kEpsilon, kEpsilon, ob + b.start());
  for (int s = 0; s < b.num_states(); ++s)
    if (b.is_final(s)) f.set_final(ob + s);
  return f;
}

inline Fst disjunction(const Fst& a, const Fst& b) {
  Fst f;
  int s0 = f.add_state();
  f.set_start(s0);
  int oa = detail::splice(f, a);
  int ob = detail::splice(f, b);
  f.add_arc(s0, kEpsilon, kEpsilon, oa + a.start());
  f.add_arc(s0, kEpsilon, kEpsilon, ob + b.start());
  for (int s = 0; s < a.num_states(); ++s)
    if (a.is_final(s)) f.set_final(oa + s);
  for (int s = 0; s < b.num_states(); ++s)
    if (b.is_final(s)) f.set_final(ob + s);
  return f;
}

inline Fst optional(const Fst& a) { return disjunction(a, fst_empty_string()); }

// The transducer relating every string of acceptor a to every string of
// acceptor b: a's copy reads and emits nothing, b's copy emits and reads
// nothing.
inline Fst cross_product(const Fst& a, const Fst& b) {
  Fst res;
  std::vector<int> amap(a.num_states());
  for (int s = 0; s < a.num_states(); ++s) amap[s] = res.add_state();
  for (int s = 0; s < a.num_states(); ++s)
    for (const Arc& arc : a.arcs(s))
      res.add_arc(amap[s], arc.in, kEpsilon, amap[arc.target]);
  std::vector<int> bmap(b.num_states());
  for (int s = 0; s < b.num_states(); ++s) bmap[s] = res.add_state();
  for (int s = 0; s < b.num_states(); ++s)
    for (const Arc& arc : b.arcs(s))
      res.add_arc(bmap[s], kEpsilon, arc.out, bmap[arc.target]);
  for (int s = 0; s < a.num_states(); ++s)
    if (a.is_final(s)) res.add_arc(amap[s], kEpsilon, kEpsilon, bmap[b.start()]);
  for (int s = 0; s < b.num_states(); ++s)
    if (b.is_final(s)) res.set_final(bmap[s]);
  res.set_start(amap[a.start()]);
  return res;
}

// Acceptor a with the symbols of ignored freely interspersed (self-loops at
// every state).
inline Fst ignore_intersperse(const Fst& a, const std::set<Symbol>& ignored) {
  Fst f;
  detail::splice(f, a);
  f.set_start(a.start());
  for (int s = 0; s < a.num_states(); ++s) {
    if (a.is_final(s)) f.set_final(s);
    for (Symbol c : ignored) f.add_arc(s, c, c, s);
  }
  return f;
}

// -- reachability / trimming ------------------------------------------------

namespace detail {

inline std::vector<char> reachable(const Fst& f) {
  std::vector<char> seen(f.num_states(), false);
  std::deque<int> work{f.start()};
  seen[f.start()] = true;
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (const Arc& a : f.arcs(s))
      if (!seen[a.target]) {
        seen[a.target] = true;
        work.push_back(a.target);
      }
  }
  return seen;
}

inline std::vector<char> coreachable(const Fst& f) {
  std::vector<std::vector<int>> rev(f.num_states());
  for (int s = 0; s < f.num_states(); ++s)
    for (const Arc& a : f.arcs(s)) rev[a.target].push_back(s);
  std::vector<char> seen(f.num_states(), false);
  std::deque<int> work;
  for (int s = 0; s < f.num_states(); ++s)
    if (f.is_final(s)) {
      seen[s] = true;
      work.push_back(s);
    }
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (int p : rev[s])
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
  }
  return seen;
}

}  // namespace detail

// Removes states that are unreachable from the start or cannot reach a final
// state. Keeps at least the start state so ids stay valid.
inline Fst trim(const Fst& f) {
  auto reach = detail::reachable(f);
  auto coreach = detail::coreachable(f);
  std::vector<int> remap(f.num_states(), -1);
  Fst out;
  for (int s = 0; s < f.num_states(); ++s)
    if (reach[s] && coreach[s]) remap[s] = out.add_state();
  if (remap[f.start()] < 0) {
    // empty language
    Fst empty;
    empty.set_start(empty.add_state());
    return empty;
  }
  out.set_start(remap[f.start()]);
  for (int s = 0; s < f.num_states(); ++s) {
    if (remap[s] < 0) continue;
    if (f.is_final(s)) out.set_final(remap[s]);
    for (const Arc& a : f.arcs(s))
      if (remap[a.target] >= 0)
        out.add_arc(remap[s], a.in, a.out, remap[a.target]);
  }
  return out;
}

// -- composition -------------------------------------------------------------

// Relation composition: (x, z) is in the result iff (x, y) in a and (y, z)
// in b for some y. Unweighted, so redundant epsilon paths are harmless.
inline Fst compose(const Fst& a, const Fst& b) {
  Fst out;
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> work;
  auto state_of = [&](int s, int t) {
    auto key = std::make_pair(s, t);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = out.add_state();
    ids.emplace(key, id);
    work.push_back(key);
    if (a.is_final(s) && b.is_final(t)) out.set_final(id);
    return id;
  };
  out.set_start(state_of(a.start(), b.start()));
  while (!work.empty()) {
    auto [s, t] = work.front();
    work.pop_front();
    int src = ids[{s, t}];
    for (const Arc& x : a.arcs(s)) {
      if (x.out == kEpsilon) {
        out.add_arc(src, x.in, kEpsilon, state_of(x.target, t));
      } else {
        for (const Arc& y : b.arcs(t))
          if (y.in == x.out)
            out.add_arc(src, x.in, y.out, state_of(x.target, y.target));
      }
    }
    for (const Arc& y : b.arcs(t))
      if (y.in == kEpsilon)
        out.add_arc(src, kEpsilon, y.out, state_of(s, y.target));
  }
  return trim(out);
}

// -- application --------------------------------------------------------------

namespace detail {

// Rejects machines whose useful part contains an epsilon-input cycle that
// produces output: applying such a machine would yield infinitely many
// outputs for some input.
inline void check_finite_outputs(const Fst& f) {
  auto reach = reachable(f);
  auto coreach = coreachable(f);
  // Tarjan SCC over epsilon-input arcs restricted to useful states.
  int n = f.num_states();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> onstack(n, false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  // iterative tarjan
  struct Frame {
    int state;
    std::size_t arc;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0 || !reach[root] || !coreach[root]) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onstack[root] = true;
    while (!frames.empty()) {
      Frame& fr = frames.back();
      const auto& as = f.arcs(fr.state);
      bool descended = false;
      while (fr.arc < as.size()) {
        const Arc& a = as[fr.arc];
        ++fr.arc;
        if (a.in != kEpsilon || !reach[a.target] || !coreach[a.target])
          continue;
        if (index[a.target] < 0) {
          index[a.target] = low[a.target] = counter++;
          stack.push_back(a.target);
          onstack[a.target] = true;
          frames.push_back({a.target, 0});
          descended = true;
          break;
        } else if (onstack[a.target]) {
          low[fr.state] = std::min(low[fr.state], index[a.target]);
        }
      }
      if (descended) continue;
      if (low[fr.state] == index[fr.state]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          onstack[w] = false;
          comp[w] = ncomp;
          if (w == fr.state) break;
        }
        ++ncomp;
      }
      int done = fr.state;
      frames.pop_back();
      if (!frames.empty())
        low[frames.back().state] =
            std::min(low[frames.back().state], low[done]);
    }
  }
  for (int s = 0; s < n; ++s) {
    if (comp[s] < 0) continue;
    for (const Arc& a : f.arcs(s)) {
      if (a.in != kEpsilon || a.out == kEpsilon) continue;
      if (comp[a.target] >= 0 && (comp[a.target] == comp[s] || a.target == s))
        throw Error("apply: epsilon-input cycle with output");
    }
  }
}

}  // namespace detail

// All output strings related to `input` by the machine's relation. The empty
// set signals rejection.
inline std::set<std::u32string> apply(const Fst& f, std::u32string_view input) {
  detail::check_finite_outputs(f);
  using Outs = std::set<std::u32string>;
  std::map<int, Outs> cur;
  auto closure = [&](std::map<int, Outs>& frontier) {
    std::deque<std::pair<int, std::u32string>> work;
    for (auto& [s, outs] : frontier)
      for (auto& o : outs) work.emplace_back(s, o);
    while (!work.empty()) {
      auto [s, o] = work.front();
      work.pop_front();
      for (const Arc& a : f.arcs(s)) {
        if (a.in != kEpsilon) continue;
        std::u32string no = o;
        if (a.out != kEpsilon) no.push_back(a.out);
        if (frontier[a.target].insert(no).second)
          work.emplace_back(a.target, no);
      }
    }
  };
  cur[f.start()].insert(U"");
  closure(cur);
  for (Symbol c : input) {
    std::map<int, Outs> next;
    for (auto& [s, outs] : cur) {
      for (const Arc& a : f.arcs(s)) {
        if (a.in != c) continue;
        for (const auto& o : outs) {
          std::u32string no = o;
          if (a.out != kEpsilon) no.push_back(a.out);
          next[a.target].insert(std::move(no));
        }
      }
    }
    closure(next);
    cur = std::move(next);
    if (cur.empty()) return {};
  }
  std::set<std::u32string> result;
  for (auto& [s, outs] : cur)
    if (f.is_final(s)) result.insert(outs.begin(), outs.end());
  return result;
}

inline bool accepts(const Fst& acceptor, std::u32string_view input) {
  return !apply(acceptor, input).empty();
}

// -- determinization / minimization ------------------------------------------

namespace detail {

inline std::uint64_t pair_key(const Arc& a) {
  return (static_cast<std::uint64_t>(a.in) << 32) |
         static_cast<std::uint64_t>(a.out);
}

inline bool is_true_eps(const Arc& a) {
  return a.in == kEpsilon && a.out == kEpsilon;
}

// Subset construction over the pair-symbol view: each (in, out) label pair is
// one alphabet symbol; (eps, eps) transitions are closed over.
inline Fst determinize_pairview(const Fst& in) {
  Fst f = trim(in);
  auto close = [&](std::set<int>& states) {
    std::deque<int> work(states.begin(), states.end());
    while (!work.empty()) {
      int s = work.front();
      work.pop_front();
      for (const Arc& a : f.arcs(s))
        if (is_true_eps(a) && states.insert(a.target).second)
          work.push_back(a.target);
    }
  };
  std::map<std::vector<int>, int> ids;
  std::deque<std::vector<int>> work;
  Fst out;
  auto state_of = [&](std::set<int> states) {
    close(states);
    std::vector<int> key(states.begin(), states.end());
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = out.add_state();
    ids.emplace(key, id);
    work.push_back(key);
    for (int s : key)
      if (f.is_final(s)) {
        out.set_final(id);
        break;
      }
    return id;
  };
  out.set_start(state_of({f.start()}));
  while (!work.empty()) {
    std::vector<int> key = work.front();
    work.pop_front();
    int src = ids[key];
    std::map<std::uint64_t, std::set<int>> moves;
    for (int s : key)
      for (const Arc& a : f.arcs(s))
        if (!is_true_eps(a)) moves[pair_key(a)].insert(a.target);
    for (auto& [label, targets] : moves) {
      int dst = state_of(targets);
      out.add_arc(src, static_cast<Symbol>(label >> 32),
                  static_cast<Symbol>(label & 0xFFFFFFFF), dst);
    }
  }
  return out;
}

// Hopcroft minimization of a (partial) DFA over the pair-symbol view.
inline Fst minimize_pairview(const Fst& dfa) {
  int n = dfa.num_states();
  // dense labels
  std::map<std::uint64_t, int> labels;
  for (int s = 0; s < n; ++s)
    for (const Arc& a : dfa.arcs(s)) labels.emplace(pair_key(a), 0);
  int nl = 0;
  for (auto& [k, v] : labels) v = nl++;
  // complete with a sink
  int sink = n;
  int total = n + 1;
  std::vector<std::vector<int>> delta(total, std::vector<int>(nl, sink));
  for (int s = 0; s < n; ++s)
    for (const Arc& a : dfa.arcs(s)) delta[s][labels[pair_key(a)]] = a.target;
  // inverse transitions
  std::vector<std::vector<std::vector<int>>> inv(
      nl, std::vector<std::vector<int>>(total));
  for (int s = 0; s < total; ++s)
    for (int c = 0; c < nl; ++c) inv[c][delta[s][c]].push_back(s);

  std::vector<int> block(total);
  std::vector<std::vector<int>> blocks(2);
  for (int s = 0; s < total; ++s) {
    int b = (s < n && dfa.is_final(s)) ? 1 : 0;
    block[s] = b;
    blocks[b].push_back(s);
  }
  if (blocks[1].empty()) {
    // no finals: everything collapses to the empty language
    Fst empty;
    empty.set_start(empty.add_state());
    return empty;
  }
  std::deque<std::pair<int, int>> worklist;  // (block, label)
  std::set<std::pair<int, int>> in_worklist;
  auto push = [&](int b, int c) {
    if (in_worklist.insert({b, c}).second) worklist.emplace_back(b, c);
  };
  int smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
  for (int c = 0; c < nl; ++c) push(smaller, c);

  std::vector<std::vector<int>> touched(2);

  while (!worklist.empty()) {
    auto [ab, c] = worklist.front();
    worklist.pop_front();
    in_worklist.erase({ab, c});
    // Predecessors of (the current content of) block ab under label c,
    // grouped by their own block.
    std::vector<int> hit_blocks;
    for (int q : blocks[ab])
      for (int p : inv[c][q]) {
        int b = block[p];
        if (touched[b].empty()) hit_blocks.push_back(b);
        touched[b].push_back(p);
      }
    for (int b : hit_blocks) {
      std::vector<int> tb = std::move(touched[b]);
      touched[b].clear();
      std::sort(tb.begin(), tb.end());
      tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
      if (tb.size() == blocks[b].size()) continue;  // whole block hit
      int nb = static_cast<int>(blocks.size());
      {
        std::set<int> tbset(tb.begin(), tb.end());
        std::vector<int> rest;
        for (int q : blocks[b])
          if (!tbset.count(q)) rest.push_back(q);
        for (int q : tb) block[q] = nb;
        blocks.push_back(std::move(tb));
        blocks[b] = std::move(rest);
      }
      touched.emplace_back();
      for (int cc = 0; cc < nl; ++cc) {
        if (in_worklist.count({b, cc})) {
          push(nb, cc);  // pending (b,cc) now covers only the rest
        } else {
          push(blocks[b].size() <= blocks[nb].size() ? b : nb, cc);
        }
      }
    }
  }

  // rebuild: one state per block reachable from start's block, drop blocks
  // that cannot reach a final state (including the sink's block).
  int nb = static_cast<int>(blocks.size());
  std::vector<int> rep(nb, -1);
  for (int b = 0; b < nb; ++b)
    if (!blocks[b].empty()) rep[b] = blocks[b].front();
  Fst merged;
  std::vector<int> remap(nb, -1);
  for (int b = 0; b < nb; ++b)
    if (rep[b] >= 0) remap[b] = merged.add_state();
  merged.set_start(remap[block[dfa.start()]]);
  for (int b = 0; b < nb; ++b) {
    if (rep[b] < 0) continue;
    int q = rep[b];
    if (q < n && dfa.is_final(q)) merged.set_final(remap[b]);
    if (q >= n) continue;  // sink has no outgoing arcs worth keeping
    for (const Arc& a : dfa.arcs(q))
      merged.add_arc(remap[b], a.in, a.out, remap[block[a.target]]);
  }
  return trim(merged);
}

}  // namespace detail

// Determinizes and minimizes over the pair-symbol acceptor view (for plain
// acceptors this is ordinary DFA determinization/minimization). The language
// of (in, out) pair strings is preserved exactly, hence so is the relation.
inline Fst determinize_minimize(const Fst& f) {
  Fst d = detail::determinize_pairview(f);
  Fst m = detail::minimize_pairview(d);
  m.deterministic = true;
  m.minimal = true;
  return m;
}

// -- relation enumeration ------------------------------------------------------

// Enumerates the full (input, output) relation of a machine whose useful part
// is acyclic. Throws if a cycle makes the relation infinite or if more than
// `limit` pairs exist.
inline std::vector<std::pair<std::u32string, std::u32string>>
enumerate_relation(const Fst& in, std::size_t limit = 100000) {
  Fst f = trim(in);
  std::vector<std::pair<std::u32string, std::u32string>> result;
  std::set<std::pair<std::u32string, std::u32string>> seen;
  std::vector<char> onpath(f.num_states(), false);
  std::u32string is, os;
  auto dfs = [&](auto&& self, int s) -> void {
    if (onpath[s]) throw Error("relation is not finite");
    onpath[s] = true;
    if (f.is_final(s)) {
      if (seen.insert({is, os}).second) {
        result.emplace_back(is, os);
        if (result.size() > limit) throw Error("relation too large");
      }
    }
    for (const Arc& a : f.arcs(s)) {
      std::size_t li = is.size(), lo = os.size();
      if (a.in != kEpsilon) is.push_back(a.in);
      if (a.out != kEpsilon) os.push_back(a.out);
      self(self, a.target);
      is.resize(li);
      os.resize(lo);
    }
    onpath[s] = false;
  };
  if (f.num_states() > 0 && !(f.num_states() == 1 && f.num_arcs() == 0 &&
                              !f.is_final(f.start())))
    dfs(dfs, f.start());
  return result;
}

// -- text dump -----------------------------------------------------------------

namespace detail {

inline std::string symbol_text(Symbol s) {
  if (s == kEpsilon) return "~";
  return to_utf8(s);
}

}  // namespace detail

// Line-oriented dump: `states N start S`, one `src in out dst` line per
// transition (`~` = epsilon), one `final S` line per final state. Transitions
// are ordered by (src, in, out, dst); LF line endings.
inline std::string dump(const Fst& f) {
  std::string out;
  out += "states " + std::to_string(f.num_states()) + " start " +
         std::to_string(f.start()) + "\n";
  for (int s = 0; s < f.num_states(); ++s) {
    std::vector<Arc> sorted(f.arcs(s).begin(), f.arcs(s).end());
    std::sort(sorted.begin(), sorted.end(), [](const Arc& a, const Arc& b) {
      return std::tie(a.in, a.out, a.target) < std::tie(b.in, b.out, b.target);
    });
    for (const Arc& a : sorted) {
      out += std::to_string(s) + " " + detail::symbol_text(a.in) + " " +
             detail::symbol_text(a.out) + " " + std::to_string(a.target) +
             "\n";
    }
  }
  for (int s = 0; s < f.num_states(); ++s)
    if (f.is_final(s)) out += "final " + std::to_string(s) + "\n";
  return out;
}

inline Fst parse_dump(std::string_view text) {
  Fst f;
  auto lines = split_lines(text);
  auto parse_symbol = [](const std::string& tok) -> Symbol {
    if (tok == "~") return kEpsilon;
    std::u32string u = from_utf8(tok);
    if (u.size() != 1) throw Error("bad symbol token '" + tok + "'");
    return u[0];
  };
  bool header = false;
  for (const std::string& line : lines) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "states") {
      int n, start;
      std::string kw;
      ss >> n >> kw >> start;
      if (kw != "start") throw Error("bad dump header");
      for (int i = 0; i < n; ++i) f.add_state();
      f.set_start(start);
      header = true;
    } else if (tok == "final") {
      int s;
      ss >> s;
      f.set_final(s);
    } else {
      if (!header) throw Error("dump transition before header");
      int src = std::stoi(tok);
      std::string in, out;
      int dst;
      ss >> in >> out >> dst;
      f.add_arc(src, parse_symbol(in), parse_symbol(out), dst);
    }
  }
  return f;
}

}  // namespace g2p

#endif  // G2P_FST_HPP
