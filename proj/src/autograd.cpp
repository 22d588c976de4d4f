#include "aglsec/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aglsec/error.hpp"

namespace aglsec {
namespace {

// out += a * b, inner loop over contiguous rows of b and out.
void mm_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        double* orow = out.data.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.data.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

// out += a * b^T, inner loop over the shared dimension of both operands.
void mm_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        double* orow = out.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.data.data() + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            orow[j] += acc;
        }
    }
}

// out += a^T * b.
void mm_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        const double* brow = b.data.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* orow = out.data.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

double gelu_value(double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x)));
}

double gelu_derivative(double x) {
    const double t = std::tanh(kGeluScale * (x + kGeluCubic * x * x * x));
    const double inner = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * inner;
}

void require_rank2(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw std::invalid_argument(std::string(what) + " must be rank 2, got rank " +
                                    std::to_string(t.rank()));
    }
}

}  // namespace

const Graph::Node& Graph::node(Var v) const {
    if (v >= nodes_.size()) {
        throw std::invalid_argument("graph node " + std::to_string(v) + " does not exist");
    }
    return nodes_[v];
}

Var Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

Var Graph::constant(Tensor value) {
    if (value.data.empty()) throw std::invalid_argument("constant tensor must not be empty");
    Node n;
    n.op = Op::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Graph::param(const std::string& name) {
    if (reader_ == nullptr) {
        throw std::invalid_argument("graph has no parameter store, cannot bind '" + name + "'");
    }
    Node n;
    n.op = Op::kParam;
    n.param_name = name;
    n.value = reader_->param(name);
    return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    require_rank2(ta, "matmul left operand");
    require_rank2(tb, "matmul right operand");
    if (ta.cols() != tb.rows()) {
        throw std::invalid_argument("matmul shape mismatch: [" + std::to_string(ta.rows()) + "," +
                                    std::to_string(ta.cols()) + "] x [" + std::to_string(tb.rows()) +
                                    "," + std::to_string(tb.cols()) + "]");
    }
    Node n;
    n.op = Op::kMatmul;
    n.a = a;
    n.b = b;
    n.value = Tensor::zeros({ta.rows(), tb.cols()});
    mm_acc(ta, tb, n.value);
    return push(std::move(n));
}

Var Graph::matmul_nt(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    require_rank2(ta, "matmul_nt left operand");
    require_rank2(tb, "matmul_nt right operand");
    if (ta.cols() != tb.cols()) {
        throw std::invalid_argument("matmul_nt shape mismatch: both operands need equal column "
                                    "counts, got " +
                                    std::to_string(ta.cols()) + " and " + std::to_string(tb.cols()));
    }
    Node n;
    n.op = Op::kMatmulNt;
    n.a = a;
    n.b = b;
    n.value = Tensor::zeros({ta.rows(), tb.rows()});
    mm_nt_acc(ta, tb, n.value);
    return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) throw std::invalid_argument("add requires identical shapes");
    Node n;
    n.op = Op::kAdd;
    n.a = a;
    n.b = b;
    n.value = ta;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += tb.data[i];
    return push(std::move(n));
}

Var Graph::add_row_bias(Var a, Var bias) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(bias).value;
    require_rank2(ta, "add_row_bias input");
    if (tb.rank() != 1 || tb.data.size() != ta.cols()) {
        throw std::invalid_argument("add_row_bias needs a rank-1 bias of length " +
                                    std::to_string(ta.cols()));
    }
    Node n;
    n.op = Op::kAddRowBias;
    n.a = a;
    n.b = bias;
    n.value = ta;
    for (std::size_t i = 0; i < ta.rows(); ++i)
        for (std::size_t j = 0; j < ta.cols(); ++j) n.value.at(i, j) += tb.data[j];
    return push(std::move(n));
}

Var Graph::concat_cols(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    require_rank2(ta, "concat_cols left operand");
    require_rank2(tb, "concat_cols right operand");
    if (ta.rows() != tb.rows()) {
        throw std::invalid_argument("concat_cols requires equal row counts, got " +
                                    std::to_string(ta.rows()) + " and " + std::to_string(tb.rows()));
    }
    Node n;
    n.op = Op::kConcatCols;
    n.a = a;
    n.b = b;
    n.value = Tensor::zeros({ta.rows(), ta.cols() + tb.cols()});
    for (std::size_t i = 0; i < ta.rows(); ++i) {
        for (std::size_t j = 0; j < ta.cols(); ++j) n.value.at(i, j) = ta.at(i, j);
        for (std::size_t j = 0; j < tb.cols(); ++j) n.value.at(i, ta.cols() + j) = tb.at(i, j);
    }
    return push(std::move(n));
}

Var Graph::slice_cols(Var a, std::size_t begin, std::size_t end) {
    const Tensor& ta = node(a).value;
    require_rank2(ta, "slice_cols input");
    if (begin >= end || end > ta.cols()) {
        throw std::invalid_argument("slice_cols range [" + std::to_string(begin) + "," +
                                    std::to_string(end) + ") invalid for " +
                                    std::to_string(ta.cols()) + " columns");
    }
    Node n;
    n.op = Op::kSliceCols;
    n.a = a;
    n.begin = begin;
    n.end = end;
    n.value = Tensor::zeros({ta.rows(), end - begin});
    for (std::size_t i = 0; i < ta.rows(); ++i)
        for (std::size_t j = begin; j < end; ++j) n.value.at(i, j - begin) = ta.at(i, j);
    return push(std::move(n));
}

Var Graph::gather_rows(Var table, const std::vector<std::size_t>& rows) {
    const Tensor& tt = node(table).value;
    require_rank2(tt, "gather_rows table");
    if (rows.empty()) throw std::invalid_argument("gather_rows needs at least one row index");
    for (std::size_t r : rows) {
        if (r >= tt.rows()) {
            throw std::invalid_argument("gather_rows index " + std::to_string(r) +
                                        " out of range for " + std::to_string(tt.rows()) + " rows");
        }
    }
    Node n;
    n.op = Op::kGatherRows;
    n.a = table;
    n.rows = rows;
    n.value = Tensor::zeros({rows.size(), tt.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < tt.cols(); ++j) n.value.at(i, j) = tt.at(rows[i], j);
    return push(std::move(n));
}

Var Graph::scale(Var a, double factor) {
    Node n;
    n.op = Op::kScale;
    n.a = a;
    n.factor = factor;
    n.value = node(a).value;
    for (double& x : n.value.data) x *= factor;
    return push(std::move(n));
}

Var Graph::gelu(Var a) {
    Node n;
    n.op = Op::kGelu;
    n.a = a;
    n.value = node(a).value;
    for (double& x : n.value.data) x = gelu_value(x);
    return push(std::move(n));
}

Var Graph::layer_norm(Var x, Var gamma, Var beta) {
    const Tensor& tx = node(x).value;
    const Tensor& tg = node(gamma).value;
    const Tensor& tb = node(beta).value;
    require_rank2(tx, "layer_norm input");
    if (tg.rank() != 1 || tb.rank() != 1 || tg.data.size() != tx.cols() ||
        tb.data.size() != tx.cols()) {
        throw std::invalid_argument("layer_norm gain and shift must be rank-1 of length " +
                                    std::to_string(tx.cols()));
    }
    const std::size_t m = tx.rows(), d = tx.cols();
    Node n;
    n.op = Op::kLayerNorm;
    n.a = x;
    n.b = gamma;
    n.c = beta;
    n.value = Tensor::zeros({m, d});
    n.aux1 = Tensor::zeros({m, d});
    n.aux2 = Tensor::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += tx.at(i, j);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = tx.at(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv_std = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        n.aux2.data[i] = inv_std;
        for (std::size_t j = 0; j < d; ++j) {
            const double xhat = (tx.at(i, j) - mean) * inv_std;
            n.aux1.at(i, j) = xhat;
            n.value.at(i, j) = tg.data[j] * xhat + tb.data[j];
        }
    }
    return push(std::move(n));
}

Var Graph::softmax_rows(Var x) {
    const Tensor& tx = node(x).value;
    require_rank2(tx, "softmax_rows input");
    Node n;
    n.op = Op::kSoftmaxRows;
    n.a = x;
    n.value = Tensor::zeros({tx.rows(), tx.cols()});
    for (std::size_t i = 0; i < tx.rows(); ++i) {
        double mx = tx.at(i, 0);
        for (std::size_t j = 1; j < tx.cols(); ++j) mx = std::max(mx, tx.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < tx.cols(); ++j) {
            const double e = std::exp(tx.at(i, j) - mx);
            n.value.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < tx.cols(); ++j) n.value.at(i, j) /= sum;
    }
    return push(std::move(n));
}

Var Graph::masked_cross_entropy(Var logits, const std::vector<int>& targets,
                                const std::vector<unsigned char>& include) {
    const Tensor& tl = node(logits).value;
    require_rank2(tl, "masked_cross_entropy logits");
    const std::size_t m = tl.rows(), c = tl.cols();
    if (targets.size() != m || include.size() != m) {
        throw std::invalid_argument("masked_cross_entropy needs one target and one include flag "
                                    "per logits row");
    }
    std::size_t included = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!include[i]) continue;
        ++included;
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
            throw std::invalid_argument("masked_cross_entropy target " +
                                        std::to_string(targets[i]) + " out of range at row " +
                                        std::to_string(i));
        }
    }
    if (included == 0) {
        throw std::invalid_argument("masked_cross_entropy requires at least one included row");
    }
    Node n;
    n.op = Op::kMaskedCrossEntropy;
    n.a = logits;
    n.targets = targets;
    n.include = include;
    n.aux1 = Tensor::zeros({m, c});
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!include[i]) continue;
        double mx = tl.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, tl.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double e = std::exp(tl.at(i, j) - mx);
            n.aux1.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < c; ++j) n.aux1.at(i, j) /= sum;
        total += (mx + std::log(sum)) - tl.at(i, static_cast<std::size_t>(targets[i]));
    }
    n.value = Tensor::zeros({1, 1});
    n.value.data[0] = total / static_cast<double>(included);
    n.factor = static_cast<double>(included);
    return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

const Tensor& Graph::grad(Var v) const {
    if (!backward_done_) {
        throw std::invalid_argument("gradient requested before backward() was run");
    }
    return node(v).grad;
}

void Graph::propagate(Var v) {
    Node& n = nodes_[v];
    const Tensor& g = n.grad;
    switch (n.op) {
        case Op::kConstant:
            break;
        case Op::kParam: {
            Tensor& pg = writer_->grad(n.param_name);
            for (std::size_t i = 0; i < pg.data.size(); ++i) pg.data[i] += g.data[i];
            break;
        }
        case Op::kMatmul:
            mm_nt_acc(g, nodes_[n.b].value, nodes_[n.a].grad);
            mm_tn_acc(nodes_[n.a].value, g, nodes_[n.b].grad);
            break;
        case Op::kMatmulNt:
            mm_acc(g, nodes_[n.b].value, nodes_[n.a].grad);
            mm_tn_acc(g, nodes_[n.a].value, nodes_[n.b].grad);
            break;
        case Op::kAdd:
            for (std::size_t i = 0; i < g.data.size(); ++i) {
                nodes_[n.a].grad.data[i] += g.data[i];
                nodes_[n.b].grad.data[i] += g.data[i];
            }
            break;
        case Op::kAddRowBias: {
            Tensor& ga = nodes_[n.a].grad;
            Tensor& gb = nodes_[n.b].grad;
            for (std::size_t i = 0; i < g.rows(); ++i) {
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    ga.at(i, j) += g.at(i, j);
                    gb.data[j] += g.at(i, j);
                }
            }
            break;
        }
        case Op::kConcatCols: {
            Tensor& ga = nodes_[n.a].grad;
            Tensor& gb = nodes_[n.b].grad;
            for (std::size_t i = 0; i < g.rows(); ++i) {
                for (std::size_t j = 0; j < ga.cols(); ++j) ga.at(i, j) += g.at(i, j);
                for (std::size_t j = 0; j < gb.cols(); ++j) gb.at(i, j) += g.at(i, ga.cols() + j);
            }
            break;
        }
        case Op::kSliceCols: {
            Tensor& ga = nodes_[n.a].grad;
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) ga.at(i, n.begin + j) += g.at(i, j);
            break;
        }
        case Op::kGatherRows: {
            Tensor& ga = nodes_[n.a].grad;
            for (std::size_t i = 0; i < n.rows.size(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) ga.at(n.rows[i], j) += g.at(i, j);
            break;
        }
        case Op::kScale:
            for (std::size_t i = 0; i < g.data.size(); ++i)
                nodes_[n.a].grad.data[i] += n.factor * g.data[i];
            break;
        case Op::kGelu: {
            const Tensor& x = nodes_[n.a].value;
            Tensor& ga = nodes_[n.a].grad;
            for (std::size_t i = 0; i < g.data.size(); ++i)
                ga.data[i] += gelu_derivative(x.data[i]) * g.data[i];
            break;
        }
        case Op::kLayerNorm: {
            const Tensor& gamma = nodes_[n.b].value;
            Tensor& gx = nodes_[n.a].grad;
            Tensor& ggamma = nodes_[n.b].grad;
            Tensor& gbeta = nodes_[n.c].grad;
            const std::size_t m = g.rows(), d = g.cols();
            for (std::size_t i = 0; i < m; ++i) {
                double mean_dxhat = 0.0;
                double mean_dxhat_xhat = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dy = g.at(i, j);
                    const double xhat = n.aux1.at(i, j);
                    ggamma.data[j] += dy * xhat;
                    gbeta.data[j] += dy;
                    const double dxhat = dy * gamma.data[j];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * xhat;
                }
                mean_dxhat /= static_cast<double>(d);
                mean_dxhat_xhat /= static_cast<double>(d);
                const double inv_std = n.aux2.data[i];
                for (std::size_t j = 0; j < d; ++j) {
                    const double dxhat = g.at(i, j) * gamma.data[j];
                    gx.at(i, j) +=
                        inv_std * (dxhat - mean_dxhat - n.aux1.at(i, j) * mean_dxhat_xhat);
                }
            }
            break;
        }
        case Op::kSoftmaxRows: {
            Tensor& gx = nodes_[n.a].grad;
            for (std::size_t i = 0; i < g.rows(); ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) dot += g.at(i, j) * n.value.at(i, j);
                for (std::size_t j = 0; j < g.cols(); ++j)
                    gx.at(i, j) += n.value.at(i, j) * (g.at(i, j) - dot);
            }
            break;
        }
        case Op::kMaskedCrossEntropy: {
            const double seed = g.data[0] / n.factor;
            Tensor& gl = nodes_[n.a].grad;
            for (std::size_t i = 0; i < gl.rows(); ++i) {
                if (!n.include[i]) continue;
                for (std::size_t j = 0; j < gl.cols(); ++j) {
                    const double onehot =
                        (j == static_cast<std::size_t>(n.targets[i])) ? 1.0 : 0.0;
                    gl.at(i, j) += seed * (n.aux1.at(i, j) - onehot);
                }
            }
            break;
        }
    }
}

void Graph::backward(Var loss, double seed_scale) {
    if (nodes_.empty()) throw std::invalid_argument("backward on an empty graph");
    if (loss >= nodes_.size()) {
        throw std::invalid_argument("backward target node " + std::to_string(loss) +
                                    " does not exist");
    }
    if (backward_done_) {
        throw std::invalid_argument("backward was already run on this graph; build a new graph "
                                    "per step");
    }
    if (nodes_[loss].value.size() != 1) {
        throw std::invalid_argument("backward target must be a scalar node");
    }
    if (writer_ == nullptr) {
        for (Var v = 0; v <= loss; ++v) {
            if (nodes_[v].op == Op::kParam) {
                throw std::invalid_argument("graph was built over a read-only parameter store; "
                                            "backward has nowhere to flush gradients");
            }
        }
    }
    for (Var v = 0; v <= loss; ++v) {
        nodes_[v].grad = Tensor::zeros(nodes_[v].value.shape);
    }
    nodes_[loss].grad.data[0] = seed_scale;
    for (Var v = loss + 1; v-- > 0;) propagate(v);
    backward_done_ = true;
}

}  // namespace aglsec
