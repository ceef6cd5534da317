// regex.hpp
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
// The regular-expression calculus: empty string, concatenation, disjunction,
// optionality, ignore, cross-product, identity, composition, replacement and
// parameterized macros, compiled to finite-state machines.

#ifndef G2P_REGEX_HPP
#define G2P_REGEX_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "g2p/common.hpp"
#include "g2p/fst.hpp"
#include "g2p/replace.hpp"

namespace g2p {

class UnboundMacro : public Error {
 public:
  using Error::Error;
};
class ArityMismatch : public Error {
 public:
  using Error::Error;
};
class CyclicMacro : public Error {
 public:
  using Error::Error;
};

enum class RegexKind {
  kEmptyString,
  kLiteral,
  kConcat,
  kDisjunction,
  kOptional,
  kIgnore,
  kCrossProduct,
  kIdentity,
  kCompose,
  kReplace,
  kMacroRef,
};

struct RegexAst;
using Regex = std::shared_ptr<const RegexAst>;

struct RegexAst {
  RegexKind kind;
  Symbol literal = kEpsilon;           // kLiteral
  std::vector<Regex> children;         // per-kind arity
  std::set<Symbol> symbol_set;         // kIgnore
  std::string macro_name;              // kMacroRef
};

// Construction helpers.
namespace rx {

inline Regex eps() {
  return std::make_shared<RegexAst>(RegexAst{RegexKind::kEmptyString});
}
inline Regex lit(Symbol c) {
  RegexAst n{RegexKind::kLiteral};
  n.literal = c;
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex cat(std::vector<Regex> parts) {
  RegexAst n{RegexKind::kConcat};
  n.children = std::move(parts);
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex alt(std::vector<Regex> parts) {
  RegexAst n{RegexKind::kDisjunction};
  n.children = std::move(parts);
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex opt(Regex r) {
  RegexAst n{RegexKind::kOptional};
  n.children = {std::move(r)};
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex ignore(Regex r, std::set<Symbol> syms) {
  RegexAst n{RegexKind::kIgnore};
  n.children = {std::move(r)};
  n.symbol_set = std::move(syms);
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex cross(Regex a, Regex b) {
  RegexAst n{RegexKind::kCrossProduct};
  n.children = {std::move(a), std::move(b)};
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex ident(Regex r) {
  RegexAst n{RegexKind::kIdentity};
  n.children = {std::move(r)};
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex comp(Regex t, Regex u) {
  RegexAst n{RegexKind::kCompose};
  n.children = {std::move(t), std::move(u)};
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex replace(Regex target, Regex left, Regex right) {
  RegexAst n{RegexKind::kReplace};
  n.children = {std::move(target), std::move(left), std::move(right)};
  return std::make_shared<RegexAst>(std::move(n));
}
inline Regex macro(std::string name, std::vector<Regex> args = {}) {
  RegexAst n{RegexKind::kMacroRef};
  n.macro_name = std::move(name);
  n.children = std::move(args);
  return std::make_shared<RegexAst>(std::move(n));
}
// Acceptor for one literal string.
inline Regex str(std::u32string_view s) {
  std::vector<Regex> parts;
  for (Symbol c : s) parts.push_back(lit(c));
  return cat(std::move(parts));
}
inline Regex symset(const std::set<Symbol>& syms) {
  std::vector<Regex> parts;
  for (Symbol c : syms) parts.push_back(lit(c));
  return alt(std::move(parts));
}

}  // namespace rx

struct MacroDef {
  std::vector<std::string> params;
  Regex body;
};
using MacroEnv = std::map<std::string, MacroDef>;

namespace detail {

inline void collect_symbols(const Regex& ast, const MacroEnv& env,
                            std::map<std::string, Regex> scope,
                            std::set<std::string>& expanding,
                            std::set<Symbol>& out) {
  switch (ast->kind) {
    case RegexKind::kLiteral:
      out.insert(ast->literal);
      return;
    case RegexKind::kIgnore:
      out.insert(ast->symbol_set.begin(), ast->symbol_set.end());
      break;
    case RegexKind::kMacroRef: {
      auto sit = scope.find(ast->macro_name);
      if (sit != scope.end() && ast->children.empty()) {
        collect_symbols(sit->second, env, {}, expanding, out);
        return;
      }
      auto it = env.find(ast->macro_name);
      if (it == env.end())
        throw UnboundMacro("unbound macro '" + ast->macro_name + "'");
      if (it->second.params.size() != ast->children.size())
        throw ArityMismatch("macro '" + ast->macro_name + "' expects " +
                            std::to_string(it->second.params.size()) +
                            " arguments, got " +
                            std::to_string(ast->children.size()));
      if (!expanding.insert(ast->macro_name).second)
        throw CyclicMacro("cyclic macro '" + ast->macro_name + "'");
      std::map<std::string, Regex> inner;
      for (std::size_t i = 0; i < ast->children.size(); ++i) {
        // arguments are evaluated in the caller's scope; collect them there
        collect_symbols(ast->children[i], env, scope, expanding, out);
        inner[it->second.params[i]] = ast->children[i];
      }
      collect_symbols(it->second.body, env, inner, expanding, out);
      expanding.erase(ast->macro_name);
      return;
    }
    default:
      break;
  }
  for (const Regex& child : ast->children)
    collect_symbols(child, env, scope, expanding, out);
}

}  // namespace detail

inline std::set<Symbol> symbols_of(const Regex& ast, const MacroEnv& env = {}) {
  std::set<Symbol> out;
  std::set<std::string> expanding;
  detail::collect_symbols(ast, env, {}, expanding, out);
  out.erase(kEpsilon);
  return out;
}

namespace detail {

struct CompileCtx {
  const MacroEnv* env;
  std::set<Symbol> alphabet;
  std::set<std::string> expanding;
};

inline Fst compile_node(const Regex& ast, CompileCtx& ctx,
                        const std::map<std::string, Regex>& scope);

inline Fst compile_acceptor(const Regex& ast, CompileCtx& ctx,
                            const std::map<std::string, Regex>& scope,
                            const char* role) {
  Fst f = compile_node(ast, ctx, scope);
  if (!f.is_acceptor())
    throw NonAcceptorContext(std::string(role) +
                             " must denote an acceptor, not a transducer");
  return f;
}

inline Fst compile_node(const Regex& ast, CompileCtx& ctx,
                        const std::map<std::string, Regex>& scope) {
  switch (ast->kind) {
    case RegexKind::kEmptyString:
      return fst_empty_string();
    case RegexKind::kLiteral:
      return fst_string(std::u32string(1, ast->literal));
    case RegexKind::kConcat: {
      Fst f = fst_empty_string();
      for (const Regex& child : ast->children)
        f = concat(f, compile_node(child, ctx, scope));
      return f;
    }
    case RegexKind::kDisjunction: {
      if (ast->children.empty()) return fst_empty_language();
      Fst f = compile_node(ast->children[0], ctx, scope);
      for (std::size_t i = 1; i < ast->children.size(); ++i)
        f = disjunction(f, compile_node(ast->children[i], ctx, scope));
      return f;
    }
    case RegexKind::kOptional:
      return optional(compile_node(ast->children[0], ctx, scope));
    case RegexKind::kIgnore:
      return ignore_intersperse(
          compile_acceptor(ast->children[0], ctx, scope, "ignore operand"),
          ast->symbol_set);
    case RegexKind::kCrossProduct:
      return cross_product(
          compile_acceptor(ast->children[0], ctx, scope, "cross-product lhs"),
          compile_acceptor(ast->children[1], ctx, scope, "cross-product rhs"));
    case RegexKind::kIdentity:
      return compile_acceptor(ast->children[0], ctx, scope,
                              "identity operand");
    case RegexKind::kCompose:
      return compose(compile_node(ast->children[0], ctx, scope),
                     compile_node(ast->children[1], ctx, scope));
    case RegexKind::kReplace: {
      Fst target = compile_node(ast->children[0], ctx, scope);
      Fst left = compile_acceptor(ast->children[1], ctx, scope,
                                  "replace left context");
      Fst right = compile_acceptor(ast->children[2], ctx, scope,
                                   "replace right context");
      std::vector<ReplacePair> pairs;
      for (auto& [from, to] : enumerate_relation(target))
        pairs.push_back({from, to});
      return replace_build(pairs, left, right, ctx.alphabet);
    }
    case RegexKind::kMacroRef: {
      auto sit = scope.find(ast->macro_name);
      if (sit != scope.end() && ast->children.empty())
        return compile_node(sit->second, ctx, {});
      auto it = ctx.env->find(ast->macro_name);
      if (it == ctx.env->end())
        throw UnboundMacro("unbound macro '" + ast->macro_name + "'");
      const MacroDef& def = it->second;
      if (def.params.size() != ast->children.size())
        throw ArityMismatch("macro '" + ast->macro_name + "' expects " +
                            std::to_string(def.params.size()) +
                            " arguments, got " +
                            std::to_string(ast->children.size()));
      if (!ctx.expanding.insert(ast->macro_name).second)
        throw CyclicMacro("cyclic macro '" + ast->macro_name + "'");
      std::map<std::string, Regex> inner;
      for (std::size_t i = 0; i < def.params.size(); ++i) {
        // bind arguments by substitution-on-demand: close over caller scope
        const Regex& arg = ast->children[i];
        if (arg->kind == RegexKind::kMacroRef && arg->children.empty()) {
          auto bound = scope.find(arg->macro_name);
          inner[def.params[i]] = bound != scope.end() ? bound->second : arg;
        } else {
          inner[def.params[i]] = arg;
        }
      }
      Fst f = compile_node(def.body, ctx, inner);
      ctx.expanding.erase(ast->macro_name);
      return f;
    }
  }
  throw Error("unreachable regex kind");
}

}  // namespace detail

// Compiles an expression to the machine denoting it. `extra_alphabet` widens
// the pass-through alphabet of any replace operators inside the expression.
inline Fst compile(const Regex& ast, const MacroEnv& env = {},
                   const std::set<Symbol>& extra_alphabet = {}) {
  detail::CompileCtx ctx;
  ctx.env = &env;
  ctx.alphabet = symbols_of(ast, env);
  ctx.alphabet.insert(extra_alphabet.begin(), extra_alphabet.end());
  ctx.alphabet.erase(kEpsilon);
  return detail::compile_node(ast, ctx, {});
}

// Replacement with the target given as a compiled machine and contexts as
// expressions. The target's relation must be finite.
inline Fst replace_build(const Fst& target, const Regex& left,
                         const Regex& right, const MacroEnv& env = {},
                         const std::set<Symbol>& extra_alphabet = {}) {
  std::vector<ReplacePair> pairs;
  for (auto& [from, to] : enumerate_relation(target))
    pairs.push_back({from, to});
  std::set<Symbol> alphabet = extra_alphabet;
  auto lsyms = symbols_of(left, env);
  auto rsyms = symbols_of(right, env);
  alphabet.insert(lsyms.begin(), lsyms.end());
  alphabet.insert(rsyms.begin(), rsyms.end());
  return replace_build(pairs, compile(left, env), compile(right, env),
                       alphabet);
}

}  // namespace g2p

#endif  // G2P_REGEX_HPP
