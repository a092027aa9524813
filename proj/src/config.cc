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

#include "tgsum/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace tgsum {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same value.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

struct Field {
  const char* name;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
  bool model_shape = false;
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty())
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

template <typename T>
Field number(const char* name, T Config::*member, bool shape = false) {
  return Field{
      name,
      [member](const Config& c) {
        if constexpr (std::is_floating_point_v<T>)
          return fmt(c.*member);
        else
          return std::to_string(c.*member);
      },
      [member, name](Config& c, const std::string& v) {
        c.*member = parse_number<T>(name, v);
      },
      shape};
}

Field boolean(const char* name, bool Config::*member) {
  return Field{name,
               [member](const Config& c) {
                 return std::string(c.*member ? "true" : "false");
               },
               [member, name](Config& c, const std::string& v) {
                 c.*member = parse_bool(name, v);
               }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      Field{"tree",
            [](const Config& c) { return format_tree_shape(c.tree); },
            [](Config& c, const std::string& v) {
              c.tree = parse_tree_shape(v);
            },
            true},
      number("embed_dim", &Config::embed_dim, true),
      number("enc_hidden", &Config::enc_hidden, true),
      number("latent_dim", &Config::latent_dim, true),
      number("topic_hidden", &Config::topic_hidden, true),
      number("log_variance_floor", &Config::log_variance_floor),
      number("max_sentence_len", &Config::max_sentence_len),
      number("learning_rate", &Config::learning_rate),
      number("batch_size", &Config::batch_size),
      number("dropout", &Config::dropout),
      number("kl_rate", &Config::kl_rate),
      boolean("kl_anneal", &Config::kl_anneal),
      number("temperature_decay", &Config::temperature_decay),
      number("min_temperature", &Config::min_temperature),
      number("disc_weight", &Config::disc_weight),
      number("disc_length", &Config::disc_length),
      number("grad_clip", &Config::grad_clip),
      boolean("stop_prior_gradient", &Config::stop_prior_gradient),
      number("max_steps", &Config::max_steps),
      number("validate_every", &Config::validate_every),
      number("validation_instances", &Config::validation_instances),
      number("patience", &Config::patience),
      number("log_every", &Config::log_every),
      number("seed", &Config::seed),
      boolean("no_discriminator", &Config::no_discriminator),
      boolean("no_attention", &Config::no_attention),
      boolean("beam_decode", &Config::beam_decode),
      number("nucleus_p", &Config::nucleus_p),
      number("decode_max_len", &Config::decode_max_len),
      number("decode_beam_width", &Config::decode_beam_width),
      number("beam_width", &Config::beam_width),
      number("max_sentences", &Config::max_sentences),
      number("redundancy_threshold", &Config::redundancy_threshold),
      number("oracle_count", &Config::oracle_count),
      number("min_count", &Config::min_count),
      number("reviews_per_instance", &Config::reviews_per_instance),
      number("instances_per_product", &Config::instances_per_product),
      number("max_sentences_per_review", &Config::max_sentences_per_review),
      number("validation_fraction", &Config::validation_fraction),
      number("test_fraction", &Config::test_fraction),
  };
  return f;
}

}  // namespace

std::vector<int> parse_tree_shape(const std::string& text) {
  std::vector<int> out;
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[' && t.back() == ']')
    t = t.substr(1, t.size() - 2);
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const int b = parse_number<int>("tree", part);
    if (b < 1) throw ConfigError("config: tree branching must be >= 1");
    out.push_back(b);
  }
  return out;
}

std::string format_tree_shape(const std::vector<int>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

double Config::variance_floor() const { return std::exp(log_variance_floor); }

std::uint64_t Config::model_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Field& f : fields()) {
    if (!f.model_shape) continue;
    for (char c : std::string(f.name) + "=" + f.get(*this) + ";") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void Config::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.name) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> Config::items() const {
  std::map<std::string, std::string> out;
  for (const Field& f : fields()) out[f.name] = f.get(*this);
  return out;
}

std::string Config::to_text() const {
  std::string out;
  for (const Field& f : fields())
    out += std::string(f.name) + "=" + f.get(*this) + "\n";
  return out;
}

Config Config::from_text(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        ": expected key=value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void Config::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path.string());
  out << to_text();
}

void Config::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(embed_dim > 0 && enc_hidden > 0 && latent_dim > 0 &&
              topic_hidden > 0,
          "dimensions must be positive");
  require(max_sentence_len > 0, "max_sentence_len must be positive");
  require(learning_rate > 0, "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
  require(kl_rate > 0, "kl_rate must be positive");
  require(temperature_decay >= 0, "temperature_decay must be >= 0");
  require(min_temperature > 0 && min_temperature <= 1,
          "min_temperature must be in (0, 1]");
  require(disc_weight >= 0, "disc_weight must be >= 0");
  require(disc_length > 0, "disc_length must be positive");
  require(grad_clip >= 0, "grad_clip must be >= 0");
  require(max_steps >= 0, "max_steps must be >= 0");
  require(validate_every >= 0 && validation_instances >= 0 && patience >= 0,
          "validation settings must be >= 0");
  require(nucleus_p > 0 && nucleus_p <= 1, "nucleus_p must be in (0, 1]");
  require(decode_max_len > 0 && decode_beam_width > 0,
          "decoding settings must be positive");
  require(beam_width >= 1, "beam_width must be >= 1");
  require(max_sentences >= 1, "max_sentences must be >= 1");
  require(redundancy_threshold > 0 && redundancy_threshold <= 1,
          "redundancy_threshold must be in (0, 1]");
  require(oracle_count >= 1, "oracle_count must be >= 1");
  require(min_count >= 0, "min_count must be >= 0");
  require(reviews_per_instance >= 1 && instances_per_product >= 1 &&
              max_sentences_per_review >= 1,
          "corpus settings must be positive");
  require(validation_fraction >= 0 && test_fraction >= 0 &&
              validation_fraction + test_fraction < 1,
          "split fractions must be >= 0 and sum below 1");
}

void apply_ablation(Config& config, const std::string& flag) {
  if (flag == "no_discriminator") {
    config.no_discriminator = true;
  } else if (flag == "no_attention") {
    config.no_attention = true;
  } else if (flag == "beam_decode") {
    config.beam_decode = true;
  } else if (flag == "no_kl_anneal") {
    config.kl_anneal = false;
  } else {
    throw ConfigError("unknown ablation flag '" + flag + "'");
  }
}

}  // namespace tgsum
