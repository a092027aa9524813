// Copyright 2026 The tgsum Authors.
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

// tgsum command-line tool.
//
//   tgsum preprocess --input reviews.jsonl --out data/
//   tgsum preprocess --synthetic --out data/
//   tgsum train      --data data/ --out ckpt/
//   tgsum generate   --checkpoint ckpt/ --data data/ --out topics.jsonl
//   tgsum extract    --checkpoint ckpt/ --data data/ --topics topics.jsonl --out summaries.jsonl
//   tgsum evaluate   --checkpoint ckpt/ --summaries summaries.jsonl [--gold gold.jsonl | --data data/]
//   tgsum sweep      --data data/ --out sweep/ --shape [2,2] --shape [3,3]
//   tgsum inspect    --checkpoint ckpt/ [--topics topics.jsonl]
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or input error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "tgsum/config.h"
#include "tgsum/corpus.h"
#include "tgsum/metrics.h"
#include "tgsum/model.h"
#include "tgsum/objective.h"
#include "tgsum/pipeline.h"

namespace fs = std::filesystem;
using namespace tgsum;

namespace {

// Bad paths, missing upstream artifacts and malformed inputs.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kCorpusFile = "corpus.jsonl";
constexpr const char* kVocabFile = "vocab.tsv";

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::vector<std::string> ablations;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a, bool ablations) {
  cmd->add_option("--config", a.file, "key=value config file");
  cmd->add_option("--set", a.overrides, "override, key=value (repeatable)");
  if (ablations)
    cmd->add_option("--ablation", a.ablations,
                    "no_discriminator | no_attention | beam_decode");
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("input not found: " + p.string());
}

Config apply_overrides(Config c, const ConfigArgs& a) {
  for (const std::string& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const std::string& f : a.ablations) apply_ablation(c, f);
  c.validate();
  return c;
}

Config load_config(const ConfigArgs& a) {
  Config c;
  if (!a.file.empty()) {
    require_file(a.file);
    c = Config::load(a.file);
  }
  return apply_overrides(c, a);
}

std::vector<Instance> split_of(const std::vector<Instance>& all, Split s) {
  std::vector<Instance> out;
  for (const Instance& i : all)
    if (i.split == s) out.push_back(i);
  return out;
}

std::vector<Instance> load_corpus(const fs::path& dir) {
  require_file(dir / kCorpusFile);
  return load_instances(dir / kCorpusFile);
}

template <typename T>
std::vector<T> read_lines(const fs::path& path,
                          const std::function<T(const std::string&)>& parse) {
  require_file(path);
  std::ifstream in(path);
  std::vector<T> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const std::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": " +
                       e.what());
    }
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// ---- preprocess ----

struct PreprocessArgs {
  ConfigArgs config;
  std::string input;
  std::string out;
  bool synthetic = false;
  SyntheticSpec spec;
};

void cmd_preprocess(const PreprocessArgs& a) {
  const Config c = load_config(a.config);
  std::vector<Instance> instances;
  if (a.synthetic) {
    SyntheticSpec spec = a.spec;
    spec.reviews_per_instance = c.reviews_per_instance;
    spec.seed = c.seed;
    spec.validation_products =
        static_cast<int>(spec.products * c.validation_fraction);
    spec.test_products = static_cast<int>(spec.products * c.test_fraction);
    instances = generate_synthetic_corpus(spec);
  } else {
    if (a.input.empty()) throw InputError("--input or --synthetic is required");
    require_file(a.input);
    const auto by_product = load_raw_reviews(a.input);
    // Products are assigned to splits by a seeded shuffle of their ids.
    std::vector<std::string> ids;
    for (const auto& [id, _] : by_product) ids.push_back(id);
    std::mt19937_64 rng(c.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t n_val = ids.size() * c.validation_fraction;
    const std::size_t n_test = ids.size() * c.test_fraction;
    std::map<std::string, std::vector<Review>> parts[3];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int s = i < n_val ? 1 : i < n_val + n_test ? 2 : 0;
      parts[s][ids[i]] = by_product.at(ids[i]);
    }
    const Split splits[] = {Split::kTrain, Split::kValidation, Split::kTest};
    for (int s = 0; s < 3; ++s) {
      InstanceOptions o;
      o.reviews_per_instance = c.reviews_per_instance;
      o.instances_per_product = c.instances_per_product;
      o.max_sentences_per_review = c.max_sentences_per_review;
      o.seed = c.seed;
      o.split = splits[s];
      auto part = make_instances(parts[s], o);
      instances.insert(instances.end(), part.begin(), part.end());
    }
  }
  if (instances.empty()) throw InputError("no instances produced");
  const Vocabulary vocab = Vocabulary::build(instances, c.min_count);
  fs::create_directories(a.out);
  save_instances(instances, fs::path(a.out) / kCorpusFile);
  vocab.save(fs::path(a.out) / kVocabFile);
  std::cout << "instances: train " << split_of(instances, Split::kTrain).size()
            << ", validation "
            << split_of(instances, Split::kValidation).size() << ", test "
            << split_of(instances, Split::kTest).size() << "; vocabulary "
            << vocab.size() << "\n";
}

// ---- train ----

struct TrainArgs {
  ConfigArgs config;
  std::string data;
  std::string out;
  std::string gold;
  bool quiet = false;
};

TrainResult run_training(const Config& c, const fs::path& data,
                         const fs::path& out, const std::string& gold_path,
                         bool quiet) {
  const auto corpus = load_corpus(data);
  require_file(data / kVocabFile);
  const Vocabulary vocab = Vocabulary::load(data / kVocabFile);
  const auto train_set = split_of(corpus, Split::kTrain);
  if (train_set.empty()) throw InputError("no training instances in " + data.string());
  std::map<std::string, Tokens> gold;
  if (!gold_path.empty()) {
    require_file(gold_path);
    gold = load_gold(gold_path);
  }
  Model model(c, vocab.size());
  fs::create_directories(out);
  std::ofstream log = open_out(out / "train_log.csv");
  TrainHooks hooks;
  hooks.checkpoint_dir = out;
  hooks.log_csv = &log;
  hooks.progress = quiet ? nullptr : &std::cerr;
  hooks.gold = gold_path.empty() ? nullptr : &gold;
  return train(model, vocab, train_set, split_of(corpus, Split::kValidation),
               hooks);
}

void cmd_train(const TrainArgs& a) {
  const Config c = load_config(a.config);
  const TrainResult r = run_training(c, a.data, a.out, a.gold, a.quiet);
  std::cout << "trained " << r.steps << " steps; checkpoint step "
            << r.best_step;
  if (r.best_validation >= 0)
    std::cout << ", validation ROUGE-L " << r.best_validation;
  std::cout << "\n";
}

// ---- generate / extract / evaluate ----

struct Loaded {
  Checkpoint meta;
  Model model;
};

Loaded load_checkpoint(const fs::path& dir, const ConfigArgs& overrides) {
  require_file(dir / "params.bin");
  Checkpoint meta = load_checkpoint_meta(dir);
  // Only decoding and extraction keys are meaningful here; shape keys are
  // checked against the stored parameters.
  meta.config = apply_overrides(meta.config, overrides);
  Model model = load_model(dir, meta);
  return {std::move(meta), std::move(model)};
}

struct GenerateArgs {
  ConfigArgs config;
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out;
  std::string dumps;
};

std::vector<InstanceTopics> run_generate(Loaded& l, const fs::path& data,
                                         const std::string& split) {
  const auto instances = split_of(load_corpus(data), parse_split(split));
  return generate_all(l.model, l.meta.vocab, instances, l.meta.config.seed,
                      DecodeOptions::from(l.meta.config));
}

void cmd_generate(const GenerateArgs& a) {
  Loaded l = load_checkpoint(a.checkpoint, a.config);
  const auto topics = run_generate(l, a.data, a.split);
  std::ofstream out = open_out(a.out);
  for (const auto& t : topics) out << t.to_json_line(l.model.tree()) << '\n';
  if (!a.dumps.empty()) {
    std::ofstream d = open_out(a.dumps);
    for (const auto& t : topics)
      if (!t.sentences.empty()) d << t.dump.to_json_line() << '\n';
  }
  std::cout << "wrote topic sentences for " << topics.size() << " instances\n";
}

struct ExtractArgs {
  ConfigArgs config;
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string topics;
  std::string out;
};

void cmd_extract(const ExtractArgs& a) {
  Loaded l = load_checkpoint(a.checkpoint, a.config);
  const TopicTree& tree = l.model.tree();
  const auto topics = read_lines<InstanceTopics>(
      a.topics, [&](const std::string& s) {
        return InstanceTopics::from_json_line(s, tree);
      });
  const auto instances = split_of(load_corpus(a.data), parse_split(a.split));
  std::vector<Summary> summaries;
  try {
    summaries = extract_all(topics, instances, tree,
                            extract_options(l.meta.config));
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
  std::ofstream out = open_out(a.out);
  for (const Summary& s : summaries) out << s.to_json_line(tree) << '\n';
  std::cout << "wrote " << summaries.size() << " summaries\n";
}

struct EvaluateArgs {
  ConfigArgs config;
  std::string checkpoint;
  std::string summaries;
  std::string gold;
  std::string data;
  std::string split = "test";
  std::string out;
};

EvalReport run_evaluate(const std::vector<Summary>& summaries,
                        const std::string& gold_path, const std::string& data,
                        const std::string& split) {
  std::vector<Tokens> refs;
  if (!gold_path.empty()) {
    require_file(gold_path);
    const auto gold = load_gold(gold_path);
    for (const Summary& s : summaries) {
      auto it = gold.find(s.product_id);
      if (it == gold.end())
        throw InputError("no gold summary for product " + s.product_id);
      refs.push_back(it->second);
    }
  } else if (!data.empty()) {
    const auto instances = split_of(load_corpus(data), parse_split(split));
    if (instances.size() != summaries.size())
      throw InputError("summary count does not match the " + split + " split");
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i].product_id != summaries[i].product_id)
        throw InputError("summary " + std::to_string(i) + " is for product " +
                         summaries[i].product_id);
      refs.push_back(instances[i].all_tokens());
    }
  } else {
    throw InputError("--gold or --data is required");
  }
  return evaluate(summaries, refs);
}

void print_report(const EvalReport& r) {
  std::cout << std::fixed << std::setprecision(2) << "ROUGE-1 "
            << 100 * r.mean.r1.f1 << "  ROUGE-2 " << 100 * r.mean.r2.f1
            << "  ROUGE-L " << 100 * r.mean.rl.f1 << "  self-BLEU-3 "
            << 100 * r.self_bleu3 << "  self-BLEU-4 " << 100 * r.self_bleu4
            << "\n";
}

void cmd_evaluate(const EvaluateArgs& a) {
  Loaded l = load_checkpoint(a.checkpoint, a.config);
  const auto summaries = read_lines<Summary>(
      a.summaries, [&](const std::string& s) {
        return Summary::from_json_line(s, l.model.tree());
      });
  const EvalReport r = run_evaluate(summaries, a.gold, a.data, a.split);
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    r.write_csv(out);
  }
  print_report(r);
}

// ---- sweep ----

struct SweepArgs {
  ConfigArgs config;
  std::string data;
  std::string out;
  std::string gold;
  std::string split = "test";
  std::vector<std::string> shapes;
};

void cmd_sweep(const SweepArgs& a) {
  const Config base = load_config(a.config);
  std::vector<std::vector<int>> shapes;
  std::set<std::vector<int>> seen;
  for (const std::string& s : a.shapes) {
    std::vector<int> shape;
    try {
      shape = parse_tree_shape(s);
    } catch (const ConfigError& e) {
      throw InputError(e.what());
    }
    if (!seen.insert(shape).second) {
      std::cerr << "warning: duplicate tree shape " << format_tree_shape(shape)
                << " ignored\n";
      continue;
    }
    shapes.push_back(shape);
  }
  struct Row {
    std::vector<int> shape;
    int topics;
    EvalReport report;
  };
  std::vector<Row> rows;
  for (const auto& shape : shapes) {
    Config c = base;
    c.tree = shape;
    c.validate();
    std::string name = "tree";
    for (int b : shape) name += "_" + std::to_string(b);
    const fs::path dir = fs::path(a.out) / name;
    std::cerr << "== " << format_tree_shape(shape) << "\n";
    run_training(c, a.data, dir, a.gold, true);
    Loaded l = load_checkpoint(dir, {});
    const auto topics = run_generate(l, a.data, a.split);
    const auto instances = split_of(load_corpus(a.data), parse_split(a.split));
    const auto summaries = extract_all(topics, instances, l.model.tree(),
                                       extract_options(l.meta.config));
    {
      std::ofstream out = open_out(dir / "summaries.jsonl");
      for (const Summary& s : summaries)
        out << s.to_json_line(l.model.tree()) << '\n';
    }
    rows.push_back({shape, l.model.tree().size(),
                    run_evaluate(summaries, a.gold, a.data, a.split)});
  }
  std::ofstream table = open_out(fs::path(a.out) / "sweep.csv");
  table << "shape,total_topics,rouge1,rouge2,rougeL\n";
  std::cout << std::left << std::setw(12) << "shape" << std::setw(8)
            << "topics" << std::setw(8) << "R-1" << std::setw(8) << "R-2"
            << "R-L\n";
  std::cout << std::fixed << std::setprecision(2);
  for (const Row& r : rows) {
    const std::string shape = format_tree_shape(r.shape);
    table << '"' << shape << "\"," << r.topics << ',' << r.report.mean.r1.f1
          << ',' << r.report.mean.r2.f1 << ',' << r.report.mean.rl.f1 << '\n';
    std::cout << std::setw(12) << shape << std::setw(8) << r.topics
              << std::setw(8) << 100 * r.report.mean.r1.f1 << std::setw(8)
              << 100 * r.report.mean.r2.f1 << 100 * r.report.mean.rl.f1
              << "\n";
  }
}

// ---- inspect ----

struct InspectArgs {
  std::string checkpoint;
  std::string dumps;
  std::string projection;
};

void cmd_inspect(const InspectArgs& a) {
  Loaded l = load_checkpoint(a.checkpoint, {});
  const TopicTree& tree = l.model.tree();
  std::cout << "step " << l.meta.step << ", " << l.model.parameter_count()
            << " parameters, vocabulary " << l.meta.vocab.size()
            << ", tree " << format_tree_shape(l.meta.config.tree) << " ("
            << tree.size() << " topics)\n";
  std::cout << l.meta.config.to_text();
  if (a.dumps.empty()) return;
  const auto dumps = read_lines<TopicDump>(a.dumps, [](const std::string& s) {
    return TopicDump::from_json_line(s);
  });
  if (dumps.empty()) throw InputError("no topic dumps in " + a.dumps);
  const auto levels = logdet_by_level(dumps, tree);
  std::cout << "mean log|cov| by level:";
  for (std::size_t d = 0; d < levels.size(); ++d)
    std::cout << "  " << d + 1 << ": " << levels[d];
  std::cout << "\n";
  if (!a.projection.empty()) {
    const TopicDump& d = dumps.front();
    const Projection p = latent_projection(d.means, d.covs);
    std::ofstream out = open_out(a.projection);
    out << "topic,kind,x,y\n";
    for (int k = 0; k < tree.size(); ++k) {
      out << tree.label(k) << ",mean," << p.coords(k, 0) << ','
          << p.coords(k, 1) << '\n';
      for (Eigen::Index i = 0; i < p.ellipses[k].rows(); ++i)
        out << tree.label(k) << ",ellipse," << p.ellipses[k](i, 0) << ','
            << p.ellipses[k](i, 1) << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (std::getenv("TGSUM_DETERMINISTIC")) Eigen::setNbThreads(1);

  CLI::App app{"Topic-tree opinion summarization"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Build instances and vocabulary");
  add_config_options(p, pre.config, false);
  p->add_option("--input", pre.input, "raw reviews, JSONL");
  p->add_flag("--synthetic", pre.synthetic, "generate a synthetic corpus");
  p->add_option("--products", pre.spec.products, "synthetic products");
  p->add_option("--topics", pre.spec.topics, "synthetic topics");
  p->add_option("--general-sentences", pre.spec.general_sentences,
                "synthetic fraction of general sentences");
  p->add_option("--general-words", pre.spec.general_words,
                "synthetic fraction of general words");
  p->add_option("--out", pre.out, "output directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  add_config_options(t, tr.config, true);
  t->add_option("--data", tr.data, "preprocessed data directory")->required();
  t->add_option("--out", tr.out, "checkpoint directory")->required();
  t->add_option("--gold", tr.gold, "gold summaries for validation, JSONL");
  t->add_flag("--quiet", tr.quiet);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Decode one sentence per topic");
  add_config_options(g, gen.config, false);
  g->add_option("--checkpoint", gen.checkpoint)->required();
  g->add_option("--data", gen.data)->required();
  g->add_option("--split", gen.split);
  g->add_option("--out", gen.out, "topic sentences, JSONL")->required();
  g->add_option("--dump-topics", gen.dumps, "topic posteriors, JSONL");

  ExtractArgs ex;
  auto* e = app.add_subcommand("extract", "Select summary sentences");
  add_config_options(e, ex.config, false);
  e->add_option("--checkpoint", ex.checkpoint)->required();
  e->add_option("--data", ex.data)->required();
  e->add_option("--split", ex.split);
  e->add_option("--topics", ex.topics, "output of generate")->required();
  e->add_option("--out", ex.out, "summaries, JSONL")->required();

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Score summaries");
  add_config_options(v, ev.config, false);
  v->add_option("--checkpoint", ev.checkpoint)->required();
  v->add_option("--summaries", ev.summaries)->required();
  v->add_option("--gold", ev.gold, "gold summaries, JSONL");
  v->add_option("--data", ev.data, "score against the reviews instead");
  v->add_option("--split", ev.split);
  v->add_option("--out", ev.out, "report, CSV");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Train and score several tree shapes");
  add_config_options(s, sw.config, true);
  s->add_option("--data", sw.data)->required();
  s->add_option("--out", sw.out)->required();
  s->add_option("--gold", sw.gold);
  s->add_option("--split", sw.split);
  // A plain string option, so CLI11 does not split "[4,4]" into a list.
  s->add_option_function<std::string>(
       "--shape", [&sw](const std::string& v) { sw.shapes.push_back(v); },
       "branching factors, e.g. [4,4] (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->trigger_on_parse();

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "Describe a checkpoint");
  i->add_option("--checkpoint", in.checkpoint)->required();
  i->add_option("--topics", in.dumps, "topic dumps from generate");
  i->add_option("--projection", in.projection, "write 2-D projection CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : 2;
  }

  try {
    if (*p) cmd_preprocess(pre);
    if (*t) cmd_train(tr);
    if (*g) cmd_generate(gen);
    if (*e) cmd_extract(ex);
    if (*v) cmd_evaluate(ev);
    if (*s) cmd_sweep(sw);
    if (*i) cmd_inspect(in);
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
