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

#include "tgsum/seq_codec.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tgsum/corpus.h"

namespace tgsum {

CodecParams::CodecParams(int vocab, int embed_dim, int enc_hidden, int latent,
                         std::mt19937_64& rng)
    : enc_embed("codec.enc_embed",
                init_uniform(vocab, embed_dim, 1, rng) * 0.1),
      enc_fwd("codec.enc_fwd", embed_dim, enc_hidden, rng),
      enc_bwd("codec.enc_bwd", embed_dim, enc_hidden, rng),
      mean_head("codec.mean", 2 * enc_hidden, latent, rng),
      logvar_head("codec.logvar", 2 * enc_hidden, latent, rng),
      dec_embed("codec.dec_embed",
                init_uniform(vocab, embed_dim, 1, rng) * 0.1),
      dec_init("codec.dec_init", latent, 2 * enc_hidden, rng),
      dec_gru("codec.dec_gru", embed_dim, 2 * enc_hidden, rng),
      out("codec.out", 4 * enc_hidden, vocab, rng) {}

void CodecParams::collect(std::vector<Parameter*>& v) {
  v.push_back(&enc_embed);
  enc_fwd.collect(v);
  enc_bwd.collect(v);
  mean_head.collect(v);
  logvar_head.collect(v);
  v.push_back(&dec_embed);
  dec_init.collect(v);
  dec_gru.collect(v);
  out.collect(v);
}

Var floor_variance(Var variance, double floor) {
  return ad::floor_at(variance, floor);
}

EncodedSentences encode_sentences(ad::Graph& g, CodecParams& params,
                                  const std::vector<std::vector<int>>& sentences,
                                  const CodecOptions& options,
                                  std::mt19937_64* rng) {
  if (sentences.empty())
    throw std::invalid_argument("encode: no sentences");
  for (const auto& s : sentences)
    if (s.empty()) throw std::invalid_argument("encode: empty sentence");
  const PaddedBatch fwd = PaddedBatch::from(sentences);
  const PaddedBatch bwd = PaddedBatch::from(sentences, /*reversed=*/true);
  const int S = fwd.batch;
  const int H = params.enc_fwd.hidden();
  const bool drop = options.dropout > 0.0 && rng != nullptr;

  Var embed = g.param(params.enc_embed);
  std::vector<Var> fin, bin;
  for (int t = 0; t < fwd.steps; ++t) {
    Var xf = ad::gather_rows(embed, fwd.ids[t]);
    Var xb = ad::gather_rows(embed, bwd.ids[t]);
    if (drop) {
      xf = ad::dropout(xf, options.dropout, *rng);
      xb = ad::dropout(xb, options.dropout, *rng);
    }
    fin.push_back(xf);
    bin.push_back(xb);
  }
  Var h0 = g.constant(Matrix::Zero(S, H));
  std::vector<Var> fs = run_gru(g, params.enc_fwd, fin, &fwd.masks, h0);
  std::vector<Var> bs = run_gru(g, params.enc_bwd, bin, &bwd.masks, h0);

  const Var finals[] = {fs.back(), bs.back()};
  Var summary = ad::concat_cols(finals);
  if (drop) summary = ad::dropout(summary, options.dropout, *rng);

  EncodedSentences out;
  out.mean = params.mean_head.apply(g, summary);
  out.variance = floor_variance(
      ad::exp(params.logvar_head.apply(g, summary)), options.variance_floor);

  std::vector<int> fidx, bidx;
  for (int s = 0; s < S; ++s) {
    const int len = fwd.lengths[s];
    for (int i = 0; i < len; ++i) {
      fidx.push_back(i * S + s);
      bidx.push_back((len - 1 - i) * S + s);
    }
  }
  Var fall = ad::concat_rows(fs);
  Var ball = ad::concat_rows(bs);
  const Var halves[] = {ad::gather_rows(fall, fidx), ad::gather_rows(ball, bidx)};
  out.memory = ad::concat_cols(halves);
  return out;
}

SentencePosterior encode_sentence(CodecParams& params,
                                  const std::vector<int>& tokens,
                                  double variance_floor) {
  if (tokens.empty()) throw std::invalid_argument("encode: empty sentence");
  for (int id : tokens)
    if (id < 0 || id >= params.vocab())
      throw std::invalid_argument("encode: token id out of range");
  ad::Graph g;
  CodecOptions opt;
  opt.variance_floor = variance_floor;
  EncodedSentences e = encode_sentences(g, params, {tokens}, opt);
  SentencePosterior p;
  p.mean = e.mean.value().row(0).transpose();
  p.variance = e.variance.value().row(0).transpose();
  p.hidden = e.memory.value();
  return p;
}

Attention attend(Var query, Var memory) {
  Attention a;
  a.weights = ad::softmax_rows(ad::matmul(query, ad::transpose(memory)));
  a.context = ad::matmul(a.weights, memory);
  return a;
}

namespace {

// Shared per-step decoder machinery.
class DecoderSteps {
 public:
  DecoderSteps(ad::Graph& g, CodecParams& params, Var memory, bool attention)
      : g_(g), params_(params) {
    embed_ = g.param(params.dec_embed);
    wx_ = g.param(params.dec_gru.wx);
    wh_ = g.param(params.dec_gru.wh);
    b_ = g.param(params.dec_gru.b);
    wout_ = g.param(params.out.weight);
    bout_ = g.param(params.out.bias);
    attend_ = attention && memory.valid() && memory.rows() > 0;
    if (attend_) {
      memory_ = memory;
      memory_t_ = ad::transpose(memory);
    }
  }

  Var embed() const { return embed_; }

  Var init(Var latent) { return params_.dec_init.apply(g_, latent); }

  Var advance(Var x, Var h) { return ad::gru_cell(x, h, wx_, wh_, b_); }

  Var logits(Var h) {
    Var ctx;
    if (attend_) {
      Var w = ad::softmax_rows(ad::matmul(h, memory_t_));
      ctx = ad::matmul(w, memory_);
    } else {
      ctx = g_.constant(Matrix::Zero(h.rows(), params_.memory_dim()));
    }
    const Var parts[] = {h, ctx};
    return ad::add(ad::matmul(ad::concat_cols(parts), wout_), bout_);
  }

 private:
  ad::Graph& g_;
  CodecParams& params_;
  Var embed_, wx_, wh_, b_, wout_, bout_;
  Var memory_, memory_t_;
  bool attend_ = false;
};

Var memory_or_empty(ad::Graph& g, const Matrix& memory) {
  if (memory.rows() == 0) return Var();
  return g.constant(memory);
}

std::mt19937_64 row_rng(std::uint64_t seed, int row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp().matrix();
  return p / p.sum();
}

}  // namespace

Var decode_teacher_forced(ad::Graph& g, CodecParams& params, Var latent,
                          const std::vector<std::vector<int>>& targets,
                          Var memory, const CodecOptions& options,
                          std::mt19937_64* rng) {
  if (static_cast<Eigen::Index>(targets.size()) != latent.rows())
    throw std::invalid_argument("decode: latent rows != targets");
  std::vector<std::vector<int>> in_seqs, out_seqs;
  for (const auto& t : targets) {
    std::vector<int> in{Vocabulary::kBos};
    in.insert(in.end(), t.begin(), t.end());
    std::vector<int> out(t.begin(), t.end());
    out.push_back(Vocabulary::kEos);
    in_seqs.push_back(std::move(in));
    out_seqs.push_back(std::move(out));
  }
  const PaddedBatch in = PaddedBatch::from(in_seqs);
  const PaddedBatch out = PaddedBatch::from(out_seqs);
  const bool drop = options.dropout > 0.0 && rng != nullptr;

  DecoderSteps dec(g, params, memory, options.attention);
  Var h = dec.init(latent);
  Var total = g.constant(Matrix::Zero(in.batch, 1));
  for (int t = 0; t < in.steps; ++t) {
    Var x = ad::gather_rows(dec.embed(), in.ids[t]);
    if (drop) x = ad::dropout(x, options.dropout, *rng);
    h = masked_update(g, dec.advance(x, h), h, in.masks[t]);
    Var hd = drop ? ad::dropout(h, options.dropout, *rng) : h;
    Var logp = ad::log_softmax_rows(dec.logits(hd));
    Var picked = ad::pick_per_row(logp, out.ids[t]);
    total = ad::add(total, ad::mul(picked, g.constant(out.masks[t])));
  }
  return total;
}

double sentence_log_likelihood(CodecParams& params,
                               const Eigen::VectorXd& latent,
                               const std::vector<int>& target,
                               const Matrix& memory, bool attention) {
  ad::Graph g;
  CodecOptions opt;
  opt.attention = attention;
  Var z = g.constant(latent.transpose());
  return decode_teacher_forced(g, params, z, {target},
                               memory_or_empty(g, memory), opt)
      .scalar();
}

std::vector<int> nucleus(const Eigen::VectorXd& probs, double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("nucleus: threshold must be in (0, 1]");
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  std::vector<int> keep;
  double mass = 0.0;
  for (int id : order) {
    keep.push_back(id);
    mass += probs[id];
    if (mass >= p) break;
  }
  return keep;
}

int nucleus_sample(const Eigen::VectorXd& probs, double p,
                   std::mt19937_64& rng) {
  const std::vector<int> keep = nucleus(probs, p);
  std::vector<double> w;
  w.reserve(keep.size());
  for (int id : keep) w.push_back(probs[id]);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  return keep[pick(rng)];
}

std::vector<std::vector<int>> nucleus_decode(CodecParams& params,
                                             const Matrix& latents,
                                             const Matrix& memory,
                                             double p_threshold, int max_len,
                                             std::uint64_t seed,
                                             bool attention) {
  if (!(p_threshold > 0.0 && p_threshold <= 1.0))
    throw std::invalid_argument("nucleus: threshold must be in (0, 1]");
  const int K = static_cast<int>(latents.rows());
  std::vector<std::mt19937_64> rngs;
  for (int r = 0; r < K; ++r) rngs.push_back(row_rng(seed, r));
  std::vector<std::vector<int>> out(K);
  std::vector<bool> done(K, false);

  ad::Graph g;
  DecoderSteps dec(g, params, memory_or_empty(g, memory), attention);
  Var h = dec.init(g.constant(latents));
  std::vector<int> prev(K, Vocabulary::kBos);
  for (int t = 0; t < max_len; ++t) {
    h = dec.advance(ad::gather_rows(dec.embed(), prev), h);
    const Matrix logits = dec.logits(h).value();
    bool all_done = true;
    for (int r = 0; r < K; ++r) {
      if (done[r]) continue;
      const Eigen::VectorXd probs = softmax(logits.row(r).transpose());
      const int id = nucleus_sample(probs, p_threshold, rngs[r]);
      prev[r] = id;
      if (id == Vocabulary::kEos) {
        done[r] = true;
      } else {
        out[r].push_back(id);
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return out;
}

std::vector<std::vector<int>> beam_decode(CodecParams& params,
                                          const Matrix& latents,
                                          const Matrix& memory, int beam_width,
                                          int max_len, bool attention) {
  if (beam_width < 1) throw std::invalid_argument("beam: width < 1");
  struct Beam {
    std::vector<int> tokens;
    double logp = 0.0;
    Eigen::RowVectorXd h;
    bool done = false;
  };
  std::vector<std::vector<int>> result;
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    ad::Graph g;
    DecoderSteps dec(g, params, memory_or_empty(g, memory), attention);
    std::vector<Beam> beams(1);
    beams[0].h = dec.init(g.constant(latents.row(r))).value().row(0);
    for (int t = 0; t < max_len; ++t) {
      std::vector<int> active;
      for (std::size_t i = 0; i < beams.size(); ++i)
        if (!beams[i].done) active.push_back(static_cast<int>(i));
      if (active.empty()) break;
      Matrix hs(static_cast<Eigen::Index>(active.size()), beams[0].h.size());
      std::vector<int> prev;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Beam& b = beams[active[a]];
        hs.row(static_cast<Eigen::Index>(a)) = b.h;
        prev.push_back(b.tokens.empty() ? Vocabulary::kBos : b.tokens.back());
      }
      Var h = dec.advance(ad::gather_rows(dec.embed(), prev), g.constant(hs));
      const Matrix logp = ad::log_softmax_rows(dec.logits(h)).value();
      std::vector<Beam> next;
      for (const Beam& b : beams)
        if (b.done) next.push_back(b);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Eigen::Index row = static_cast<Eigen::Index>(a);
        std::vector<int> ids(logp.cols());
        std::iota(ids.begin(), ids.end(), 0);
        const int take = std::min<int>(beam_width, static_cast<int>(ids.size()));
        std::partial_sort(ids.begin(), ids.begin() + take, ids.end(),
                          [&](int x, int y) {
                            if (logp(row, x) != logp(row, y))
                              return logp(row, x) > logp(row, y);
                            return x < y;
                          });
        for (int j = 0; j < take; ++j) {
          Beam nb = beams[active[a]];
          nb.logp += logp(row, ids[j]);
          nb.h = h.value().row(row);
          nb.tokens.push_back(ids[j]);
          if (ids[j] == Vocabulary::kEos) nb.done = true;
          next.push_back(std::move(nb));
        }
      }
      std::stable_sort(next.begin(), next.end(),
                       [](const Beam& x, const Beam& y) { return x.logp > y.logp; });
      if (static_cast<int>(next.size()) > beam_width) next.resize(beam_width);
      beams = std::move(next);
    }
    std::vector<int> best = beams.front().tokens;
    if (!best.empty() && best.back() == Vocabulary::kEos) best.pop_back();
    result.push_back(std::move(best));
  }
  return result;
}

std::vector<Var> gumbel_softmax_decode(ad::Graph& g, CodecParams& params,
                                       Var latents, Var memory,
                                       const GumbelOptions& options,
                                       std::mt19937_64& rng) {
  if (!(options.temperature > 0.0))
    throw std::invalid_argument("gumbel: temperature must be > 0");
  DecoderSteps dec(g, params, memory, options.attention);
  const Eigen::Index K = latents.rows();
  Var h = dec.init(latents);
  Var x = ad::gather_rows(dec.embed(),
                          std::vector<int>(K, Vocabulary::kBos));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Var> out;
  for (int t = 0; t < options.steps; ++t) {
    h = dec.advance(x, h);
    Var logits = dec.logits(h);
    if (!options.zero_noise) {
      Matrix noise(logits.rows(), logits.cols());
      for (Eigen::Index i = 0; i < noise.size(); ++i) {
        double u = unif(rng);
        u = std::clamp(u, 1e-12, 1.0 - 1e-12);
        noise.data()[i] = -std::log(-std::log(u));
      }
      logits = ad::add(logits, g.constant(std::move(noise)));
    }
    Var y = ad::softmax_rows(ad::scale(logits, 1.0 / options.temperature));
    out.push_back(y);
    x = ad::matmul(y, dec.embed());
  }
  return out;
}

}  // namespace tgsum
