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

// Sentence encoder/decoder.
//
// The encoder is a bidirectional GRU whose final states feed a mean head and
// a log-variance head; variances are exponentiated and then floored
// element-wise. Per-token encoder states (forward ; backward) form the
// attention memory of an instance.
//
// The decoder is a unidirectional GRU whose initial state is a linear map of
// the latent code. At every step it attends over the whole instance memory
// with dot-product scores and predicts the next word from [h ; context].
// The decoder width equals the memory width (twice the encoder width) so the
// dot product is defined.

#ifndef TGSUM_SEQ_CODEC_H_
#define TGSUM_SEQ_CODEC_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tgsum/layers.h"

namespace tgsum {

inline const double kDefaultVarianceFloor = std::exp(0.5);

struct CodecParams {
  Parameter enc_embed;  // V x e
  Gru enc_fwd;          // e -> h
  Gru enc_bwd;          // e -> h
  Linear mean_head;     // 2h -> n
  Linear logvar_head;   // 2h -> n
  Parameter dec_embed;  // V x e
  Linear dec_init;      // n -> 2h
  Gru dec_gru;          // e -> 2h
  Linear out;           // 4h -> V

  CodecParams() = default;
  CodecParams(int vocab, int embed_dim, int enc_hidden, int latent,
              std::mt19937_64& rng);
  int vocab() const { return static_cast<int>(enc_embed.value.rows()); }
  int latent() const { return static_cast<int>(mean_head.bias.value.cols()); }
  int memory_dim() const { return 2 * enc_fwd.hidden(); }
  void collect(std::vector<Parameter*>& out);
};

struct CodecOptions {
  double variance_floor = kDefaultVarianceFloor;
  double dropout = 0.0;
  bool attention = true;
};

struct EncodedSentences {
  Var mean;      // S x n
  Var variance;  // S x n, floored
  Var memory;    // (total tokens) x 2h, sentence-major
};

// Plain-value posterior of one sentence.
struct SentencePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Matrix hidden;  // tokens x 2h
};

EncodedSentences encode_sentences(ad::Graph& g, CodecParams& params,
                                  const std::vector<std::vector<int>>& sentences,
                                  const CodecOptions& options,
                                  std::mt19937_64* rng = nullptr);

// Throws std::invalid_argument on an empty token list or out-of-range ids.
SentencePosterior encode_sentence(CodecParams& params,
                                  const std::vector<int>& tokens,
                                  double variance_floor = kDefaultVarianceFloor);

// max(floor, v) element-wise.
Var floor_variance(Var variance, double floor);

// Sum over steps of log p(w_t | w_<t, x) for each row of `latent`, with
// targets followed by end-of-sentence. `memory` may be an invalid Var (or have
// zero rows), in which case the context is the zero vector. Returns S x 1.
Var decode_teacher_forced(ad::Graph& g, CodecParams& params, Var latent,
                          const std::vector<std::vector<int>>& targets,
                          Var memory, const CodecOptions& options,
                          std::mt19937_64* rng = nullptr);

double sentence_log_likelihood(CodecParams& params,
                               const Eigen::VectorXd& latent,
                               const std::vector<int>& target,
                               const Matrix& memory, bool attention = true);

// Attention weights of `query` rows over `memory` rows (softmax of dot
// products) and the resulting context rows.
struct Attention {
  Var weights;
  Var context;
};
Attention attend(Var query, Var memory);

// Smallest prefix of the probability-sorted vocabulary (stable on ties by
// id) whose mass reaches `p`.
std::vector<int> nucleus(const Eigen::VectorXd& probs, double p);
int nucleus_sample(const Eigen::VectorXd& probs, double p,
                   std::mt19937_64& rng);

// Decodes each row of `latents` (K x n). Row r samples with an RNG derived
// from (seed, r), so the output is a pure function of the inputs.
std::vector<std::vector<int>> nucleus_decode(CodecParams& params,
                                             const Matrix& latents,
                                             const Matrix& memory,
                                             double p_threshold, int max_len,
                                             std::uint64_t seed,
                                             bool attention = true);

std::vector<std::vector<int>> beam_decode(CodecParams& params,
                                          const Matrix& latents,
                                          const Matrix& memory, int beam_width,
                                          int max_len, bool attention = true);

struct GumbelOptions {
  double temperature = 1.0;
  int steps = 20;
  bool zero_noise = false;  // test hook
  bool attention = true;
};

// Relaxed sentence: `steps` matrices of shape K x V, each row
// softmax((logits + Gumbel noise) / temperature). The expected embedding of
// each relaxed word is fed to the next step.
std::vector<Var> gumbel_softmax_decode(ad::Graph& g, CodecParams& params,
                                       Var latents, Var memory,
                                       const GumbelOptions& options,
                                       std::mt19937_64& rng);

}  // namespace tgsum

#endif  // TGSUM_SEQ_CODEC_H_
