// replace.hpp
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
// Leftmost longest-match replacement compiled to a transducer.
//
// The construction scans the input like the reference string scanner would:
// a DFA for Sigma*.Left decides where a match may start, and every commit
// (match chosen, or symbol copied where a match might have applied) plants a
// verification obligation over the upcoming input. Positive obligations
// assert that the right context appears; negative ones assert that no
// competing (longer, or any) match was available. Paths whose obligations
// fail have no continuation, so exactly the scanner's factorization survives.

#ifndef G2P_REPLACE_HPP
#define G2P_REPLACE_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "g2p/common.hpp"
#include "g2p/fst.hpp"

namespace g2p {

class NonAcceptorContext : public Error {
 public:
  using Error::Error;
};

struct ReplacePair {
  std::u32string from;
  std::u32string to;
};

namespace detail {

// DFA completed over the scan alphabet (missing transitions go to a dead
// sink), with final flags and can-reach-final info.
struct ScanDfa {
  std::vector<std::map<Symbol, int>> delta;
  std::vector<char> is_final;
  std::vector<char> live;  // can reach a final state
  int start = 0;
  bool empty = false;  // empty language: no obligation ever needed

  int step(int q, Symbol c) const {
    auto it = delta[q].find(c);
    return it == delta[q].end() ? -1 : it->second;
  }
};

inline ScanDfa to_scan_dfa(const Fst& acceptor,
                           const std::set<Symbol>& alphabet) {
  Fst d = minimize_pairview(determinize_pairview(acceptor));
  ScanDfa out;
  int n = d.num_states();
  out.delta.resize(n + 1);
  out.is_final.assign(n + 1, false);
  out.live.assign(n + 1, false);
  out.start = d.start();
  bool any_final = false;
  auto co = coreachable(d);
  for (int s = 0; s < n; ++s) {
    out.is_final[s] = d.is_final(s);
    any_final = any_final || d.is_final(s);
    out.live[s] = co[s];
    for (const Arc& a : d.arcs(s)) out.delta[s][a.in] = a.target;
  }
  int sink = n;
  for (int s = 0; s <= n; ++s)
    for (Symbol c : alphabet)
      if (!out.delta[s].count(c)) out.delta[s][c] = sink;
  out.empty = !any_final;
  return out;
}

// Sigma* . L
inline Fst sigma_star_then(const std::set<Symbol>& alphabet, const Fst& l) {
  Fst f;
  int pre = f.add_state();
  f.set_start(pre);
  for (Symbol c : alphabet) f.add_arc(pre, c, c, pre);
  int off = splice(f, l);
  f.add_arc(pre, kEpsilon, kEpsilon, off + l.start());
  for (int s = 0; s < l.num_states(); ++s)
    if (l.is_final(s)) f.set_final(off + s);
  return f;
}

struct KeyTrie {
  struct Node {
    std::map<Symbol, int> next;
    bool is_key = false;
  };
  std::vector<Node> nodes{1};

  int insert(std::u32string_view key) {
    int cur = 0;
    for (Symbol c : key) {
      auto it = nodes[cur].next.find(c);
      if (it == nodes[cur].next.end()) {
        nodes.emplace_back();
        int id = static_cast<int>(nodes.size()) - 1;
        nodes[cur].next.emplace(c, id);
        cur = id;
      } else {
        cur = it->second;
      }
    }
    nodes[cur].is_key = true;
    return cur;
  }
};

// Acceptor for  U_{keys k strictly below `from`}  path(from -> k) . R
inline Fst longer_match_language(const KeyTrie& trie, int from, const Fst& r,
                                 bool include_self) {
  Fst f;
  std::map<int, int> node_state;
  std::deque<int> work{from};
  node_state[from] = f.add_state();
  f.set_start(node_state[from]);
  std::vector<std::pair<int, bool>> key_nodes;  // (fst state, is root)
  while (!work.empty()) {
    int n = work.front();
    work.pop_front();
    for (auto& [c, m] : trie.nodes[n].next) {
      node_state[m] = f.add_state();
      f.add_arc(node_state[n], c, c, node_state[m]);
      work.push_back(m);
    }
    if (trie.nodes[n].is_key && (include_self || n != from))
      key_nodes.emplace_back(node_state[n], n == from);
  }
  int off = splice(f, r);
  for (auto& [s, unused] : key_nodes)
    f.add_arc(s, kEpsilon, kEpsilon, off + r.start());
  for (int s = 0; s < r.num_states(); ++s)
    if (r.is_final(s)) f.set_final(off + s);
  return f;
}

}  // namespace detail

// Builds the transducer that rewrites non-overlapping occurrences of the
// target keys, chosen leftmost-first and longest-first, each preceded by a
// match of `left` and followed by a match of `right` in the input; all other
// symbols pass through unchanged. An empty key inserts its replacement at
// most once per position. `alphabet` lists the symbols the machine passes
// through; key/context symbols are always included.
inline Fst replace_build(const std::vector<ReplacePair>& targets,
                         const Fst& left, const Fst& right,
                         std::set<Symbol> alphabet = {}) {
  if (!left.is_acceptor() || !right.is_acceptor())
    throw NonAcceptorContext("replace: contexts must denote acceptors");

  for (const ReplacePair& p : targets) {
    for (Symbol c : p.from) alphabet.insert(c);
    for (Symbol c : p.to) alphabet.insert(c);
  }
  for (const Fst* ctx : {&left, &right})
    for (int s = 0; s < ctx->num_states(); ++s)
      for (const Arc& a : ctx->arcs(s))
        if (a.in != kEpsilon) alphabet.insert(a.in);
  alphabet.erase(kEpsilon);

  // key -> outputs (deduplicated, deterministic order)
  std::map<std::u32string, std::vector<std::u32string>> outputs;
  for (const ReplacePair& p : targets) {
    auto& v = outputs[p.from];
    if (std::find(v.begin(), v.end(), p.to) == v.end()) v.push_back(p.to);
  }

  detail::KeyTrie trie;
  std::map<std::u32string, int> key_node;
  bool has_eps_key = false;
  for (auto& [k, v] : outputs) {
    key_node[k] = trie.insert(k);
    if (k.empty()) has_eps_key = true;
  }

  detail::ScanDfa dl =
      detail::to_scan_dfa(detail::sigma_star_then(alphabet, left), alphabet);

  // machine 0 is the positive right-context verifier; the rest are negative.
  std::vector<detail::ScanDfa> machines;
  machines.push_back(detail::to_scan_dfa(right, alphabet));
  const bool eps_in_right = machines[0].is_final[machines[0].start];
  int m_root_all = -1, m_root_nonempty = -1;
  std::map<int, int> m_for_node;
  auto machine_for = [&](int trie_node, bool include_self) {
    if (trie_node == 0) {
      int& id = include_self ? m_root_all : m_root_nonempty;
      if (id < 0) {
        machines.push_back(detail::to_scan_dfa(
            detail::longer_match_language(trie, 0, right, include_self),
            alphabet));
        id = static_cast<int>(machines.size()) - 1;
      }
      return id;
    }
    auto it = m_for_node.find(trie_node);
    if (it != m_for_node.end()) return it->second;
    machines.push_back(detail::to_scan_dfa(
        detail::longer_match_language(trie, trie_node, right, false),
        alphabet));
    int id = static_cast<int>(machines.size()) - 1;
    m_for_node.emplace(trie_node, id);
    return id;
  };

  using Obls = std::vector<std::pair<int, int>>;  // (machine, state), sorted
  // nullopt = this path is dead
  auto create = [&](Obls& obls, int machine) -> bool {
    const detail::ScanDfa& m = machines[machine];
    bool positive = machine == 0;
    if (m.empty) return positive ? false : true;  // pos: unsatisfiable
    if (m.is_final[m.start]) return positive;     // pos: done, neg: violated
    if (!m.live[m.start]) return positive ? false : true;
    auto entry = std::make_pair(machine, m.start);
    auto it = std::lower_bound(obls.begin(), obls.end(), entry);
    if (it == obls.end() || *it != entry) obls.insert(it, entry);
    return true;
  };
  auto advance = [&](const Obls& obls, Symbol c) -> std::optional<Obls> {
    Obls out;
    for (auto [mi, q] : obls) {
      const detail::ScanDfa& m = machines[mi];
      bool positive = mi == 0;
      int q2 = m.step(q, c);
      if (q2 < 0) {
        if (positive) return std::nullopt;
        continue;  // negative can no longer match: satisfied
      }
      if (m.is_final[q2]) {
        if (positive) continue;  // satisfied
        return std::nullopt;     // negative violated
      }
      if (!m.live[q2]) {
        if (positive) return std::nullopt;
        continue;
      }
      out.emplace_back(mi, q2);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  auto has_positive = [](const Obls& obls) {
    return !obls.empty() && obls.front().first == 0;
  };

  enum Phase { kResolve = 0, kPostInsert = 1 };
  struct State {
    int phase;
    int dl;
    Obls obls;
    bool operator<(const State& o) const {
      return std::tie(phase, dl, obls) < std::tie(o.phase, o.dl, o.obls);
    }
  };

  Fst out;
  std::map<State, int> ids;
  std::deque<State> work;
  auto intern = [&](State st) {
    auto it = ids.find(st);
    if (it != ids.end()) return it->second;
    int id = out.add_state();
    bool leftok = dl.is_final[st.dl];
    bool forced_insert =
        st.phase == kResolve && has_eps_key && eps_in_right && leftok;
    if (!has_positive(st.obls) && !forced_insert) out.set_final(id);
    ids.emplace(st, id);
    work.push_back(std::move(st));
    return id;
  };
  intern(State{kResolve, dl.start, {}});
  out.set_start(0);

  while (!work.empty()) {
    State st = work.front();
    work.pop_front();
    int src = ids[st];
    if (st.phase == kPostInsert) {
      for (Symbol c : alphabet) {
        auto next = advance(st.obls, c);
        if (!next) continue;
        out.add_arc(src, c, c,
                    intern(State{kResolve, dl.step(st.dl, c), *next}));
      }
      continue;
    }
    bool leftok = dl.is_final[st.dl];
    // copy one symbol
    for (Symbol c : alphabet) {
      Obls obls = st.obls;
      if (leftok && !create(obls, machine_for(0, /*include_self=*/true)))
        break;  // a match is statically forced at every left-ok position
      auto next = advance(obls, c);
      if (!next) continue;
      out.add_arc(src, c, c, intern(State{kResolve, dl.step(st.dl, c), *next}));
    }
    if (!leftok) continue;
    // match a key
    for (auto& [key, outs] : outputs) {
      if (key.empty()) {
        for (const std::u32string& v : outs) {
          Obls obls = st.obls;
          if (!create(obls, 0)) continue;
          if (!create(obls, machine_for(0, /*include_self=*/false))) continue;
          int target = intern(State{kPostInsert, st.dl, obls});
          // emit the insertion via epsilon-input arcs
          int cur = src;
          for (std::size_t k = 0; k < v.size(); ++k) {
            int nxt = (k + 1 == v.size()) ? target : out.add_state();
            out.add_arc(cur, kEpsilon, v[k], nxt);
            cur = nxt;
          }
          if (v.empty()) out.add_arc(src, kEpsilon, kEpsilon, target);
        }
        continue;
      }
      for (const std::u32string& v : outs) {
        // walk the key, pairing outputs onto the consuming arcs
        Obls obls = st.obls;
        int dlc = st.dl;
        bool dead = false;
        struct Step {
          Symbol in, outsym;
        };
        std::vector<Step> steps;
        for (std::size_t k = 0; k < key.size(); ++k) {
          auto next = advance(obls, key[k]);
          if (!next) {
            dead = true;
            break;
          }
          obls = *next;
          dlc = dl.step(dlc, key[k]);
          steps.push_back({key[k], k < v.size() ? v[k] : kEpsilon});
        }
        if (dead) continue;
        for (std::size_t k = key.size(); k < v.size(); ++k)
          steps.push_back({kEpsilon, v[k]});
        if (!create(obls, 0)) continue;
        int kn = key_node[key];
        bool has_longer = false;
        for (auto& [c, m] : trie.nodes[kn].next) {
          (void)c;
          (void)m;
          has_longer = true;
          break;
        }
        if (has_longer && !create(obls, machine_for(kn, false))) continue;
        int target = intern(State{kResolve, dlc, obls});
        int cur = src;
        for (std::size_t k = 0; k < steps.size(); ++k) {
          int nxt = (k + 1 == steps.size()) ? target : out.add_state();
          out.add_arc(cur, steps[k].in, steps[k].outsym, nxt);
          cur = nxt;
        }
      }
    }
  }
  return determinize_minimize(trim(out));
}

}  // namespace g2p

#endif  // G2P_REPLACE_HPP
