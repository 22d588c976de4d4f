#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aglsec/autograd.hpp"
#include "aglsec/rng.hpp"
#include "aglsec/tensor.hpp"

namespace aglsec {

struct EncoderConfig {
    std::size_t num_layers = 2;
    std::size_t model_dim = 32;
    std::size_t num_heads = 2;
    std::size_t ff_dim = 64;
    std::size_t vocab_size = 512;
    std::size_t max_positions = 192;

    void validate() const;
};

// Fresh tensor with entries drawn from the shared init range
// uniform(-0.08, 0.08).
Tensor uniform_init(const std::vector<std::size_t>& shape, Rng& rng);

// Creates every weight of one pre-norm transformer encoder under `prefix`.
//
// The three input arrangements:
//   input_dim == 0, extra_dim == 0   token table, no projection
//   input_dim == 0, extra_dim  > 0   token table, per-token extras concatenated
//                                    and projected back to model_dim
//   input_dim  > 0, extra_dim == 0   no token table; continuous rows of width
//                                    input_dim projected to model_dim
//
// Matrix weights draw from uniform(-0.08, 0.08); biases start at zero and
// layer-norm gains at one.
void init_encoder_params(ParameterStore& store, const EncoderConfig& config,
                         const std::string& prefix, Rng& rng, std::size_t input_dim = 0,
                         std::size_t extra_dim = 0);

// Token-id entry point. `extra_features`, when present, is a graph node of
// shape (length x extra_dim) concatenated to the embeddings ahead of the
// projection created by init_encoder_params. If `attention_rows` is given,
// the per-layer, per-head attention distributions are appended to it.
Var encoder_forward(Graph& g, const EncoderConfig& config, const std::string& prefix,
                    const std::vector<std::size_t>& token_ids,
                    std::optional<Var> extra_features = std::nullopt,
                    std::vector<Var>* attention_rows = nullptr);

// Continuous entry point: `input` has shape (length x input_dim) and passes
// through the input projection before the positional add and the layers.
Var encoder_forward_continuous(Graph& g, const EncoderConfig& config, const std::string& prefix,
                               Var input, std::vector<Var>* attention_rows = nullptr);

// Direct cross entropy on plain tensors, no graph involved. An empty
// `include` means every row counts. Used as the reference the graph op is
// checked against, and anywhere only the forward loss is needed.
struct CrossEntropy {
    double loss = 0.0;
    Tensor dlogits;
    std::size_t included = 0;
};
CrossEntropy softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                                   const std::vector<unsigned char>& include = {});

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First-/second-moment accumulators, lazily shaped from the store on the
// first step.
struct AdamState {
    std::size_t step_count = 0;
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
};

// One bias-corrected Adam update over every parameter in the store.
void adam_step(ParameterStore& store, AdamState& state, const AdamConfig& config);

struct GradCheckEntry {
    std::string name;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckResult {
    bool passed = true;
    std::size_t checked = 0;
    double worst_rel = 0.0;
    std::string worst_name;
    std::vector<GradCheckEntry> failures;
};

// Central-difference verification of the gradients produced by `loss_fn`.
//
// `loss_fn` must build a fresh graph over `store`, run backward once, and
// return the loss; it may assume gradients were zeroed beforehand. With an
// empty `entries` every entry of every parameter is checked. An entry passes
// when |analytic - numeric| <= abs_tol or the relative error against the
// larger magnitude stays below rel_tol. Gradients are left zeroed on return.
GradCheckResult finite_difference_check(
    ParameterStore& store, const std::function<double()>& loss_fn,
    const std::vector<std::pair<std::string, std::size_t>>& entries = {}, double step = 1e-4,
    double abs_tol = 1e-7, double rel_tol = 1e-4);

}  // namespace aglsec
