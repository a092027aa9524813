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

#include "tgsum/model.h"

#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tgsum {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'S', 'U', 'M', 'C', 'K', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated parameter file");
  return v;
}

std::mt19937_64 init_rng(const Config& c) { return std::mt19937_64(c.seed); }

}  // namespace

Model::Model(const Config& config, int vocab_size)
    : config_(config), tree_(config.tree) {
  std::mt19937_64 rng = init_rng(config);
  codec_ = CodecParams(vocab_size, config.embed_dim, config.enc_hidden,
                       config.latent_dim, rng);
  topics_ = TopicModelParams(vocab_size, config.embed_dim, config.topic_hidden,
                             rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  codec_.collect(out);
  topics_.collect(out);
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (Parameter* p : parameters()) n += p->value.size();
  return n;
}

std::vector<Matrix> Model::values() {
  std::vector<Matrix> out;
  for (Parameter* p : parameters()) out.push_back(p->value);
  return out;
}

void Model::set_values(const std::vector<Matrix>& values) {
  std::vector<Parameter*> ps = parameters();
  if (values.size() != ps.size())
    throw std::invalid_argument("set_values: parameter count mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = values[i];
}

void Model::save_params(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, config_.model_hash());
  std::vector<Parameter*> ps = parameters();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ps.size()));
  for (Parameter* p : ps) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod<std::int64_t>(out, p->value.rows());
    write_pod<std::int64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

void Model::load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: not a parameter file (bad header)");
  const auto hash = read_pod<std::uint64_t>(in);
  if (hash != config_.model_hash())
    throw std::runtime_error(
        "checkpoint: model shape does not match configuration");
  std::vector<Parameter*> ps = parameters();
  const auto count = read_pod<std::uint32_t>(in);
  if (count != ps.size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (Parameter* p : ps) {
    const auto len = read_pod<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = read_pod<std::int64_t>(in);
    const auto cols = read_pod<std::int64_t>(in);
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw std::runtime_error("checkpoint: unexpected parameter '" + name +
                               "'");
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated parameter file");
  }
}

void save_checkpoint(const std::filesystem::path& dir, Model& model,
                     const Vocabulary& vocab, int step) {
  std::filesystem::create_directories(dir);
  model.save_params(dir / "params.bin");
  model.config().save(dir / "config.txt");
  vocab.save(dir / "vocab.tsv");
  std::ofstream(dir / "step.txt") << step << "\n";
}

Checkpoint load_checkpoint_meta(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "params.bin"))
    throw std::runtime_error("checkpoint: no params.bin in " + dir.string());
  Checkpoint c;
  c.config = Config::load(dir / "config.txt");
  c.vocab = Vocabulary::load(dir / "vocab.tsv");
  std::ifstream step(dir / "step.txt");
  if (step) step >> c.step;
  return c;
}

Model load_model(const std::filesystem::path& dir, const Checkpoint& meta) {
  Model m(meta.config, meta.vocab.size());
  m.load_params(dir / "params.bin");
  return m;
}

std::vector<std::vector<int>> encode_instance(const Instance& instance,
                                              const Vocabulary& vocab,
                                              int max_len) {
  std::vector<std::vector<int>> out;
  for (const Tokens& s : instance.sentences()) {
    std::vector<int> ids = vocab.encode(s, static_cast<std::size_t>(max_len));
    if (!ids.empty()) out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace tgsum
