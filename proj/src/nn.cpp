#include "aglsec/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "aglsec/error.hpp"

namespace aglsec {
namespace {

constexpr double kInitSpan = 0.08;

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    return uniform_init({r, c}, rng);
}

std::string layer_prefix(const std::string& prefix, std::size_t layer) {
    return prefix + ".layer" + std::to_string(layer);
}

void add_linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                Rng& rng) {
    store.add(name + ".w", random_matrix(in, out, rng));
    store.add(name + ".b", Tensor::zeros({out}));
}

void add_layer_norm(ParameterStore& store, const std::string& name, std::size_t dim) {
    store.add(name + ".gamma", Tensor({dim}, 1.0));
    store.add(name + ".beta", Tensor::zeros({dim}));
}

struct LinearNode {
    Var w;
    Var b;
};

LinearNode bind_linear(Graph& g, const std::string& name) {
    return {g.param(name + ".w"), g.param(name + ".b")};
}

Var apply_linear(Graph& g, const LinearNode& lin, Var x) {
    return g.add_row_bias(g.matmul(x, lin.w), lin.b);
}

Var apply_layer_norm(Graph& g, const std::string& name, Var x) {
    return g.layer_norm(x, g.param(name + ".gamma"), g.param(name + ".beta"));
}

// Positions, encoder layers, and the closing norm; shared by both entry
// points once the input has been brought to model_dim.
Var encoder_body(Graph& g, const EncoderConfig& config, const std::string& prefix, Var h,
                 std::size_t length, std::vector<Var>* attention_rows) {
    std::vector<std::size_t> positions(length);
    for (std::size_t i = 0; i < length; ++i) positions[i] = i;
    h = g.add(h, g.gather_rows(g.param(prefix + ".pos_emb"), positions));

    const std::size_t head_dim = config.model_dim / config.num_heads;
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    for (std::size_t layer = 0; layer < config.num_layers; ++layer) {
        const std::string lp = layer_prefix(prefix, layer);

        Var normed = apply_layer_norm(g, lp + ".ln1", h);
        Var q = apply_linear(g, bind_linear(g, lp + ".attn.q"), normed);
        Var k = apply_linear(g, bind_linear(g, lp + ".attn.k"), normed);
        Var v = apply_linear(g, bind_linear(g, lp + ".attn.v"), normed);

        Var context = 0;
        for (std::size_t head = 0; head < config.num_heads; ++head) {
            const std::size_t lo = head * head_dim;
            const std::size_t hi = lo + head_dim;
            Var qh = g.slice_cols(q, lo, hi);
            Var kh = g.slice_cols(k, lo, hi);
            Var vh = g.slice_cols(v, lo, hi);
            Var weights = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), attn_scale));
            if (attention_rows != nullptr) attention_rows->push_back(weights);
            Var ctx = g.matmul(weights, vh);
            context = (head == 0) ? ctx : g.concat_cols(context, ctx);
        }
        Var attn_out = apply_linear(g, bind_linear(g, lp + ".attn.out"), context);
        h = g.add(h, attn_out);

        Var normed2 = apply_layer_norm(g, lp + ".ln2", h);
        Var inner = g.gelu(apply_linear(g, bind_linear(g, lp + ".ff.in"), normed2));
        Var ff_out = apply_linear(g, bind_linear(g, lp + ".ff.out"), inner);
        h = g.add(h, ff_out);
    }
    return apply_layer_norm(g, prefix + ".final_ln", h);
}

}  // namespace

Tensor uniform_init(const std::vector<std::size_t>& shape, Rng& rng) {
    Tensor t = Tensor::zeros(shape);
    for (double& x : t.data) x = rng.uniform(-kInitSpan, kInitSpan);
    return t;
}

void EncoderConfig::validate() const {
    if (num_layers == 0 || model_dim == 0 || num_heads == 0 || ff_dim == 0 || vocab_size == 0 ||
        max_positions == 0) {
        throw std::invalid_argument("encoder config requires every count to be positive");
    }
    if (model_dim % num_heads != 0) {
        throw std::invalid_argument("model_dim " + std::to_string(model_dim) +
                                    " is not divisible by num_heads " + std::to_string(num_heads));
    }
}

void init_encoder_params(ParameterStore& store, const EncoderConfig& config,
                         const std::string& prefix, Rng& rng, std::size_t input_dim,
                         std::size_t extra_dim) {
    config.validate();
    if (input_dim > 0 && extra_dim > 0) {
        throw std::invalid_argument("choose either a continuous input width or a token-extra "
                                    "width, not both");
    }

    if (input_dim == 0) {
        store.add(prefix + ".tok_emb", random_matrix(config.vocab_size, config.model_dim, rng));
    }
    store.add(prefix + ".pos_emb", random_matrix(config.max_positions, config.model_dim, rng));
    if (input_dim > 0) {
        add_linear(store, prefix + ".in_proj", input_dim, config.model_dim, rng);
    } else if (extra_dim > 0) {
        add_linear(store, prefix + ".in_proj", config.model_dim + extra_dim, config.model_dim,
                   rng);
    }

    for (std::size_t layer = 0; layer < config.num_layers; ++layer) {
        const std::string lp = layer_prefix(prefix, layer);
        add_layer_norm(store, lp + ".ln1", config.model_dim);
        add_linear(store, lp + ".attn.q", config.model_dim, config.model_dim, rng);
        add_linear(store, lp + ".attn.k", config.model_dim, config.model_dim, rng);
        add_linear(store, lp + ".attn.v", config.model_dim, config.model_dim, rng);
        add_linear(store, lp + ".attn.out", config.model_dim, config.model_dim, rng);
        add_layer_norm(store, lp + ".ln2", config.model_dim);
        add_linear(store, lp + ".ff.in", config.model_dim, config.ff_dim, rng);
        add_linear(store, lp + ".ff.out", config.ff_dim, config.model_dim, rng);
    }
    add_layer_norm(store, prefix + ".final_ln", config.model_dim);
}

Var encoder_forward(Graph& g, const EncoderConfig& config, const std::string& prefix,
                    const std::vector<std::size_t>& token_ids, std::optional<Var> extra_features,
                    std::vector<Var>* attention_rows) {
    config.validate();
    if (token_ids.empty()) throw std::invalid_argument("encoder input must not be empty");
    if (token_ids.size() > config.max_positions) {
        throw std::invalid_argument("sequence length " + std::to_string(token_ids.size()) +
                                    " exceeds max_positions " +
                                    std::to_string(config.max_positions));
    }
    for (std::size_t id : token_ids) {
        if (id >= config.vocab_size) {
            throw std::invalid_argument("token id " + std::to_string(id) +
                                        " out of range for vocab of " +
                                        std::to_string(config.vocab_size));
        }
    }

    Var h = g.gather_rows(g.param(prefix + ".tok_emb"), token_ids);
    if (extra_features.has_value()) {
        const Tensor& extra = g.value(*extra_features);
        if (extra.rank() != 2 || extra.rows() != token_ids.size()) {
            throw std::invalid_argument("extra features need one row per token");
        }
        h = apply_linear(g, bind_linear(g, prefix + ".in_proj"),
                         g.concat_cols(h, *extra_features));
    }
    return encoder_body(g, config, prefix, h, token_ids.size(), attention_rows);
}

Var encoder_forward_continuous(Graph& g, const EncoderConfig& config, const std::string& prefix,
                               Var input, std::vector<Var>* attention_rows) {
    config.validate();
    const Tensor& in = g.value(input);
    if (in.rank() != 2 || in.rows() == 0) {
        throw std::invalid_argument("continuous encoder input must be a nonempty matrix");
    }
    const std::size_t length = in.rows();
    if (length > config.max_positions) {
        throw std::invalid_argument("sequence length " + std::to_string(length) +
                                    " exceeds max_positions " +
                                    std::to_string(config.max_positions));
    }
    Var h = apply_linear(g, bind_linear(g, prefix + ".in_proj"), input);
    return encoder_body(g, config, prefix, h, length, attention_rows);
}

CrossEntropy softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                                   const std::vector<unsigned char>& include) {
    if (logits.rank() != 2) throw std::invalid_argument("cross entropy logits must be rank 2");
    const std::size_t m = logits.rows(), c = logits.cols();
    if (targets.size() != m) throw std::invalid_argument("one target per logits row required");
    if (!include.empty() && include.size() != m) {
        throw std::invalid_argument("include mask length must match logits rows");
    }

    CrossEntropy result;
    result.dlogits = Tensor::zeros({m, c});
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!include.empty() && !include[i]) continue;
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
            throw std::invalid_argument("cross entropy target " + std::to_string(targets[i]) +
                                        " out of range at row " + std::to_string(i));
        }
        ++result.included;
        double mx = logits.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(logits.at(i, j) - mx);
        total += (mx + std::log(sum)) - logits.at(i, static_cast<std::size_t>(targets[i]));
        for (std::size_t j = 0; j < c; ++j) {
            const double p = std::exp(logits.at(i, j) - mx) / sum;
            result.dlogits.at(i, j) = p - ((static_cast<std::size_t>(targets[i]) == j) ? 1.0 : 0.0);
        }
    }
    if (result.included == 0) {
        throw std::invalid_argument("cross entropy requires at least one included row");
    }
    result.loss = total / static_cast<double>(result.included);
    for (double& x : result.dlogits.data) x /= static_cast<double>(result.included);
    return result;
}

void adam_step(ParameterStore& store, AdamState& state, const AdamConfig& config) {
    if (state.m.empty()) {
        for (const std::string& name : store.names()) {
            state.m.emplace(name, Tensor::zeros(store.param(name).shape));
            state.v.emplace(name, Tensor::zeros(store.param(name).shape));
        }
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);

    for (const std::string& name : store.names()) {
        const Tensor& g = store.grad(name);
        if (!g.all_finite()) {
            throw InternalError("non-finite gradient for parameter '" + name + "'");
        }
        auto mit = state.m.find(name);
        auto vit = state.v.find(name);
        if (mit == state.m.end() || vit == state.v.end()) {
            throw InternalError("optimizer state missing for parameter '" + name + "'");
        }
        Tensor& m = mit->second;
        Tensor& v = vit->second;
        Tensor& p = store.param(name);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = config.beta1 * m.data[i] + (1.0 - config.beta1) * g.data[i];
            v.data[i] = config.beta2 * v.data[i] + (1.0 - config.beta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bias1;
            const double vhat = v.data[i] / bias2;
            p.data[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
}

GradCheckResult finite_difference_check(ParameterStore& store,
                                        const std::function<double()>& loss_fn,
                                        const std::vector<std::pair<std::string, std::size_t>>& entries,
                                        double step, double abs_tol, double rel_tol) {
    std::vector<std::pair<std::string, std::size_t>> targets = entries;
    if (targets.empty()) {
        for (const std::string& name : store.names()) {
            for (std::size_t i = 0; i < store.param(name).data.size(); ++i) {
                targets.emplace_back(name, i);
            }
        }
    }

    store.zero_grads();
    loss_fn();
    std::map<std::string, Tensor> analytic;
    for (const auto& [name, index] : targets) {
        (void)index;
        if (analytic.count(name) == 0) analytic.emplace(name, store.grad(name));
    }

    GradCheckResult result;
    for (const auto& [name, index] : targets) {
        Tensor& p = store.param(name);
        if (index >= p.data.size()) {
            throw std::invalid_argument("gradient check index " + std::to_string(index) +
                                        " out of range for parameter '" + name + "'");
        }
        const double saved = p.data[index];
        store.zero_grads();
        p.data[index] = saved + step;
        const double plus = loss_fn();
        store.zero_grads();
        p.data[index] = saved - step;
        const double minus = loss_fn();
        p.data[index] = saved;

        const double numeric = (plus - minus) / (2.0 * step);
        const double a = analytic.at(name).data[index];
        const double diff = std::abs(a - numeric);
        const double denom = std::max(std::abs(a), std::abs(numeric));
        const double rel = (denom > 0.0) ? diff / denom : 0.0;

        ++result.checked;
        const bool ok = diff <= abs_tol || rel < rel_tol;
        if (!ok) {
            result.passed = false;
            result.failures.push_back({name, index, a, numeric});
        }
        if (diff > abs_tol && rel > result.worst_rel) {
            result.worst_rel = rel;
            result.worst_name = name;
        }
    }
    store.zero_grads();
    return result;
}

}  // namespace aglsec
