// g2p_main.cpp
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
// Command-line front end: compile/inspect the pipeline, segment, transcribe,
// align, train, apply, evaluate, cross-validate.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "g2p/align.hpp"
#include "g2p/eval.hpp"
#include "g2p/fst.hpp"
#include "g2p/pipeline.hpp"
#include "g2p/rules.hpp"
#include "g2p/tbl.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw g2p::Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw g2p::Error("cannot write '" + path + "'");
  f << content;
}

g2p::RuleFile load_rules(const std::string& rules_path,
                         const std::string& graphemes_path) {
  g2p::GraphemeSet seed;
  if (!graphemes_path.empty())
    seed = g2p::parse_grapheme_file(slurp(graphemes_path));
  return g2p::parse_rule_file(slurp(rules_path), seed);
}

struct TrainerFlags {
  std::string mode = "brill";
  int threshold = 2;
  std::uint64_t seed = 0;
  std::string templates = "std";
  std::string init = "system";

  g2p::TrainConfig config() const {
    g2p::TrainConfig cfg;
    if (mode == "brill") {
      cfg.mode = g2p::TrainMode::kBrill;
    } else if (mode.rfind("lazy:", 0) == 0) {
      cfg.mode = g2p::TrainMode::kLazy;
      cfg.sample_k = std::stoi(mode.substr(5));
      if (cfg.sample_k < 1) throw CLI::ValidationError("--mode", "lazy:k needs k >= 1");
    } else {
      throw CLI::ValidationError("--mode", "expected brill or lazy:<k>");
    }
    cfg.threshold = threshold;
    cfg.seed = seed;
    cfg.frequency_init = init == "frequency";
    return cfg;
  }
  std::vector<g2p::TblTemplate> template_set() const {
    return templates == "ext" ? g2p::extended_templates()
                              : g2p::standard_templates();
  }
  std::string method_name() const {
    std::string m = mode == "brill" ? "brill" : mode;
    if (templates == "ext") m += "+";
    return m;
  }
};

void add_trainer_flags(CLI::App* cmd, TrainerFlags& tf) {
  cmd->add_option("--mode", tf.mode, "brill or lazy:<k>")
      ->capture_default_str();
  cmd->add_option("--threshold", tf.threshold, "minimum accepted rule score")
      ->capture_default_str();
  cmd->add_option("--seed", tf.seed, "RNG seed (default 0, never wall-clock)")
      ->capture_default_str();
  cmd->add_option("--templates", tf.templates, "template set: std or ext")
      ->check(CLI::IsMember({"std", "ext"}))
      ->capture_default_str();
  cmd->add_option("--init", tf.init,
                  "initial layer: system output or frequency baseline")
      ->check(CLI::IsMember({"system", "frequency"}))
      ->capture_default_str();
}

std::vector<std::u32string> gather_words(const std::vector<std::string>& args,
                                         const std::string& input_path) {
  std::vector<std::u32string> words;
  for (const auto& w : args) words.push_back(g2p::from_utf8(w));
  if (!input_path.empty())
    for (const std::string& line : g2p::split_lines(slurp(input_path)))
      if (!line.empty() && line[0] != '#') words.push_back(g2p::from_utf8(line));
  return words;
}

g2p::Lexicon load_predictions(const std::string& path) {
  return g2p::parse_lexicon(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-state grapheme-to-phoneme toolkit"};
  app.require_subcommand(1);

  std::string rules_path, graphemes_path, input_path, out_path, report_path;
  std::string lexicon_path, corpus_path, tbl_path, log_path, pred_path,
      gold_path;
  std::vector<std::string> words;
  bool stages = false, per_word = false, tsv = false, per_word_norm = false;
  int max_unseen = 1;
  int folds = 10;
  TrainerFlags tf;

  auto* c_compile = app.add_subcommand(
      "compile", "compile a rule file and report the machine size");
  c_compile->add_option("--rules", rules_path)->required();
  c_compile->add_option("--graphemes", graphemes_path);
  c_compile->add_option("--out", out_path, "write the automaton dump here");

  auto* c_segment =
      app.add_subcommand("segment", "split words into marked graphemes");
  c_segment->add_option("--rules", rules_path)->required();
  c_segment->add_option("--graphemes", graphemes_path);
  c_segment->add_option("--input", input_path, "words, one per line");
  c_segment->add_option("words", words);

  auto* c_transcribe =
      app.add_subcommand("transcribe", "convert words to phoneme strings");
  c_transcribe->add_option("--rules", rules_path)->required();
  c_transcribe->add_option("--graphemes", graphemes_path);
  c_transcribe->add_option("--input", input_path, "words, one per line");
  c_transcribe->add_flag("--stages", stages, "print the four pipeline stages");
  c_transcribe->add_option("words", words);

  auto* c_align = app.add_subcommand(
      "align", "build an aligned training corpus from a lexicon");
  c_align->add_option("--rules", rules_path)->required();
  c_align->add_option("--graphemes", graphemes_path);
  c_align->add_option("--lexicon", lexicon_path)->required();
  c_align->add_option("--out", out_path)->required();
  c_align->add_option("--report", report_path, "discard report path");
  c_align->add_option("--max-unseen", max_unseen)->capture_default_str();
  c_align->add_flag("--per-word-norm", per_word_norm,
                    "weight alignments 1/n per word in pass 1");

  auto* c_train =
      app.add_subcommand("train", "learn transformation rules from a corpus");
  c_train->add_option("--corpus", corpus_path)->required();
  c_train->add_option("--rules-out", out_path)->required();
  c_train->add_option("--log", log_path, "training log (TSV)");
  add_trainer_flags(c_train, tf);

  auto* c_apply = app.add_subcommand(
      "apply", "apply learned rules to a lexicon's words");
  c_apply->add_option("--rules", rules_path)->required();
  c_apply->add_option("--graphemes", graphemes_path);
  c_apply->add_option("--tbl", tbl_path, "learned-rule file")->required();
  c_apply->add_option("--lexicon", lexicon_path)->required();
  c_apply->add_option("--out", out_path, "predictions (TSV); stdout if empty");

  auto* c_eval =
      app.add_subcommand("eval", "score predictions against gold");
  c_eval->add_option("--pred", pred_path)->required();
  c_eval->add_option("--gold", gold_path)->required();
  c_eval->add_flag("--per-word", per_word, "dump per-word details");
  c_eval->add_flag("--tsv", tsv, "machine-readable output");

  auto* c_xval =
      app.add_subcommand("xval", "end-to-end cross-validation experiment");
  c_xval->add_option("--rules", rules_path)->required();
  c_xval->add_option("--graphemes", graphemes_path);
  c_xval->add_option("--lexicon", lexicon_path)->required();
  c_xval->add_option("--folds", folds)->capture_default_str();
  c_xval->add_option("--max-unseen", max_unseen)->capture_default_str();
  add_trainer_flags(c_xval, tf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*c_compile) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      g2p::Fst full = g2p::compose_full(p);
      std::cout << "pipeline: " << full.num_states() << " states, "
                << full.num_arcs() << " transitions\n";
      std::cout << "reference (hand-crafted Dutch system): 747 states, "
                   "20123 transitions\n";
      if (!out_path.empty()) spit(out_path, g2p::dump(full));
    } else if (*c_segment) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      for (const auto& w : gather_words(words, input_path))
        std::cout << g2p::to_utf8(g2p::transcribe_stages(p, w).segmented)
                  << "\n";
    } else if (*c_transcribe) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      for (const auto& w : gather_words(words, input_path)) {
        if (stages) {
          g2p::StageStrings st = g2p::transcribe_stages(p, w);
          std::cout << "s: " << g2p::to_utf8(st.segmented) << "\n";
          std::cout << "m: " << g2p::to_utf8(st.marked) << "\n";
          std::cout << "co: " << g2p::to_utf8(st.converted) << "\n";
          std::cout << "cl: " << g2p::to_utf8(st.cleaned) << "\n";
        } else {
          std::cout << g2p::to_utf8(g2p::transcribe(p, w)) << "\n";
        }
      }
    } else if (*c_align) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      g2p::Lexicon lx = g2p::parse_lexicon(slurp(lexicon_path));
      g2p::AlignOptions opts;
      opts.max_unseen = max_unseen;
      opts.per_word_normalization = per_word_norm;
      auto [corpus, report] = g2p::build_training_corpus(lx, p, opts);
      spit(out_path, g2p::write_aligned_corpus(corpus));
      std::string rep;
      rep += "total words      " + std::to_string(report.total) + "\n";
      rep += "aligned          " + std::to_string(report.aligned) + "\n";
      rep += "discarded        " + std::to_string(report.discarded.size()) +
             "  (rate " + g2p::format_percent(report.discard_rate()) +
             "%; reported reference: about one word in 1000)\n";
      for (const auto& d : report.discarded)
        rep += "  " + g2p::to_utf8(d.word) + "\t" + d.reason + "\n";
      if (report_path.empty())
        std::cout << rep;
      else
        spit(report_path, rep);
    } else if (*c_train) {
      g2p::AlignedCorpus corpus = g2p::parse_aligned_corpus(slurp(corpus_path));
      g2p::TrainResult r = g2p::train(corpus, tf.template_set(), tf.config());
      spit(out_path, g2p::write_rules(r.rules));
      if (!log_path.empty()) spit(log_path, g2p::write_train_log(r));
      std::cout << "rules learned    " << r.rules.size() << "\n";
      std::cout << "training errors  " << r.initial_errors << " -> "
                << r.final_errors << " of " << r.total_cells << " cells\n";
    } else if (*c_apply) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      auto rules = g2p::parse_rules(slurp(tbl_path));
      g2p::Lexicon lx = g2p::parse_lexicon(slurp(lexicon_path));
      std::string out;
      for (const auto& e : lx)
        out += g2p::to_utf8(e.word) + "\t" +
               g2p::to_utf8(g2p::predict_word(p, rules, e.word)) + "\n";
      if (out_path.empty())
        std::cout << out;
      else
        spit(out_path, out);
    } else if (*c_eval) {
      g2p::Lexicon pred = load_predictions(pred_path);
      g2p::Lexicon gold = load_predictions(gold_path);
      if (pred.size() != gold.size())
        throw g2p::Error("prediction and gold files differ in length");
      std::vector<std::pair<std::u32string, std::u32string>> pairs;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].word != gold[i].word)
          throw g2p::Error("word mismatch at line " + std::to_string(i + 1) +
                           ": '" + g2p::to_utf8(pred[i].word) + "' vs '" +
                           g2p::to_utf8(gold[i].word) + "'");
        pairs.emplace_back(pred[i].phones, gold[i].phones);
      }
      g2p::EvalReport r = g2p::evaluate(pairs, per_word);
      if (tsv)
        std::cout << g2p::format_eval_tsv(r);
      else
        std::cout << g2p::format_eval_report(r);
      if (per_word)
        for (std::size_t i = 0; i < r.per_word.size(); ++i)
          std::cout << g2p::to_utf8(pred[i].word) << "\t"
                    << g2p::to_utf8(r.per_word[i].predicted) << "\t"
                    << g2p::to_utf8(r.per_word[i].gold) << "\t"
                    << r.per_word[i].distance << "\n";
      if (!tsv) std::cout << g2p::reference_results_note();
    } else if (*c_xval) {
      g2p::RuleFile rf = load_rules(rules_path, graphemes_path);
      g2p::Pipeline p = g2p::build_pipeline(rf);
      g2p::Lexicon lx = g2p::parse_lexicon(slurp(lexicon_path));
      g2p::XvalConfig cfg;
      cfg.trainer = tf.config();
      cfg.extended_templates = tf.templates == "ext";
      cfg.folds = folds;
      cfg.align.max_unseen = max_unseen;
      g2p::XvalResult r = g2p::cross_validate(lx, p, cfg);
      std::cout << g2p::results_table_header();
      for (const auto& f : r.folds)
        std::cout << g2p::format_results_row(
            tf.method_name(), f.train_words, f.eval.phoneme_accuracy(),
            f.eval.word_accuracy(), f.induced_rules, f.seconds);
      std::cout << "mean phoneme " << g2p::format_percent(r.mean_phoneme())
                << "  mean word " << g2p::format_percent(r.mean_word())
                << "  (phoneme stddev "
                << g2p::format_percent(r.stddev_phoneme()) << ")\n";
      std::cout << g2p::reference_results_note();
    }
  } catch (const g2p::SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const g2p::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
