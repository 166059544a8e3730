#include "tape.hpp"

#include "errors.hpp"

#include <cmath>
#include <sstream>

namespace mmdmix {

Var Tape::push(Op op, std::uint32_t len) {
    Node n;
    n.op = op;
    n.off = static_cast<std::uint32_t>(val_.size());
    n.len = len;
    val_.resize(val_.size() + len, 0.0);
    nodes_.push_back(n);
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1), len};
}

void Tape::check(Var v) const {
    if (!v.valid() || v.id >= nodes_.size())
        throw ContractViolation("tape: use of an invalid Var handle");
}

void Tape::check_same_len(Var a, Var b, const char* what) const {
    check(a);
    check(b);
    if (a.len != b.len) {
        std::ostringstream os;
        os << "tape: " << what << " requires equal lengths, got " << a.len
           << " and " << b.len;
        throw ConfigError(os.str());
    }
}

Var Tape::constant(std::span<const double> v) {
    Var out = push(Op::Leaf, static_cast<std::uint32_t>(v.size()));
    std::copy(v.begin(), v.end(), data(out.id));
    return out;
}

Var Tape::zeros(std::uint32_t n) { return push(Op::Leaf, n); }

Var Tape::param(const std::string& name) {
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) {
        const Node& n = nodes_[it->second];
        return Var{it->second, n.len};
    }
    if (!ro_) throw ConfigError("tape: no parameter store bound, cannot resolve '" + name + "'");
    const auto& e = ro_->entry(name);
    Var out = push(Op::Param, static_cast<std::uint32_t>(e.value.size()));
    std::copy(e.value.data.begin(), e.value.data.end(), data(out.id));
    param_nodes_.emplace(name, out.id);
    if (rw_) param_grads_.emplace_back(out.id, &rw_->entry(name).grad);
    return out;
}

Var Tape::linear(Var w, Var x, std::uint32_t rows, std::uint32_t cols,
                 std::string_view label) {
    check(w);
    check(x);
    if (w.len != rows * cols || x.len != cols) {
        std::ostringstream os;
        os << "linear";
        if (!label.empty()) os << " '" << label << "'";
        os << ": weight must be " << rows << "x" << cols << " (" << rows * cols
           << " values, got " << w.len << ") and input length " << cols
           << " (got " << x.len << ")";
        throw ConfigError(os.str());
    }
    Var out = push(Op::Linear, rows);
    Node& n = nodes_.back();
    n.a = w.id;
    n.b = x.id;
    n.aux0 = rows;
    n.aux1 = cols;
    const double* wd = data(w.id);
    const double* xd = data(x.id);
    double* yd = data(out.id);
    for (std::uint32_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* wrow = wd + static_cast<std::size_t>(i) * cols;
        for (std::uint32_t j = 0; j < cols; ++j) acc += wrow[j] * xd[j];
        yd[i] = acc;
    }
    return out;
}

Var Tape::dense(Var x, Var w, Var b, std::uint32_t rows, std::uint32_t cols,
                std::string_view label) {
    Var y = linear(w, x, rows, cols, label);
    if (b.len != rows) {
        std::ostringstream os;
        os << "dense";
        if (!label.empty()) os << " '" << label << "'";
        os << ": bias length " << b.len << " does not match " << rows << " rows";
        throw ConfigError(os.str());
    }
    return add(y, b);
}

#define MMDMIX_BINARY(NAME, OP, EXPR)                                   \
    Var Tape::NAME(Var a, Var b) {                                      \
        check_same_len(a, b, #NAME);                                    \
        Var out = push(Op::OP, a.len);                                  \
        Node& n = nodes_.back();                                        \
        n.a = a.id;                                                     \
        n.b = b.id;                                                     \
        const double* pa = data(a.id);                                  \
        const double* pb = data(b.id);                                  \
        double* py = data(out.id);                                      \
        for (std::uint32_t i = 0; i < a.len; ++i) py[i] = EXPR;         \
        return out;                                                     \
    }

MMDMIX_BINARY(add, Add, pa[i] + pb[i])
MMDMIX_BINARY(sub, Sub, pa[i] - pb[i])
MMDMIX_BINARY(mul, Mul, pa[i] * pb[i])
#undef MMDMIX_BINARY

Var Tape::scale(Var a, double c) {
    check(a);
    Var out = push(Op::Scale, a.len);
    Node& n = nodes_.back();
    n.a = a.id;
    n.daux = c;
    const double* pa = data(a.id);
    double* py = data(out.id);
    for (std::uint32_t i = 0; i < a.len; ++i) py[i] = c * pa[i];
    return out;
}

#define MMDMIX_UNARY(NAME, OP, EXPR)                                    \
    Var Tape::NAME(Var a) {                                             \
        check(a);                                                       \
        Var out = push(Op::OP, a.len);                                  \
        nodes_.back().a = a.id;                                         \
        const double* pa = data(a.id);                                  \
        double* py = data(out.id);                                      \
        for (std::uint32_t i = 0; i < a.len; ++i) {                     \
            const double x = pa[i];                                     \
            py[i] = EXPR;                                               \
        }                                                               \
        return out;                                                     \
    }

MMDMIX_UNARY(relu, Relu, x > 0.0 ? x : 0.0)
MMDMIX_UNARY(elu, Elu, x >= 0.0 ? x : std::expm1(x))
MMDMIX_UNARY(abs, Abs, std::abs(x))
MMDMIX_UNARY(neg_abs, NegAbs, -std::abs(x))
MMDMIX_UNARY(sigmoid, Sigmoid, 1.0 / (1.0 + std::exp(-x)))
MMDMIX_UNARY(tanh, Tanh, std::tanh(x))
#undef MMDMIX_UNARY

Var Tape::slice(Var a, std::uint32_t offset, std::uint32_t len) {
    check(a);
    if (offset + len > a.len) {
        std::ostringstream os;
        os << "slice: [" << offset << ", " << offset + len << ") out of range for length "
           << a.len;
        throw ConfigError(os.str());
    }
    Var out = push(Op::Slice, len);
    Node& n = nodes_.back();
    n.a = a.id;
    n.aux0 = offset;
    std::copy(data(a.id) + offset, data(a.id) + offset + len, data(out.id));
    return out;
}

Var Tape::concat(std::span<const Var> parts) {
    if (parts.empty()) throw ContractViolation("concat: needs at least one part");
    std::uint32_t total = 0;
    for (Var p : parts) {
        check(p);
        total += p.len;
    }
    const std::uint32_t list_off = static_cast<std::uint32_t>(extra_.size());
    for (Var p : parts) extra_.push_back(p.id);
    Var out = push(Op::Concat, total);
    Node& n = nodes_.back();
    n.aux0 = list_off;
    n.aux1 = static_cast<std::uint32_t>(parts.size());
    double* py = data(out.id);
    for (Var p : parts) {
        std::copy(data(p.id), data(p.id) + p.len, py);
        py += p.len;
    }
    return out;
}

Var Tape::dot(Var a, Var b) {
    check_same_len(a, b, "dot");
    Var out = push(Op::Dot, 1);
    Node& n = nodes_.back();
    n.a = a.id;
    n.b = b.id;
    const double* pa = data(a.id);
    const double* pb = data(b.id);
    double acc = 0.0;
    for (std::uint32_t i = 0; i < a.len; ++i) acc += pa[i] * pb[i];
    *data(out.id) = acc;
    return out;
}

Var Tape::sum(Var a) {
    check(a);
    Var out = push(Op::Sum, 1);
    nodes_.back().a = a.id;
    const double* pa = data(a.id);
    double acc = 0.0;
    for (std::uint32_t i = 0; i < a.len; ++i) acc += pa[i];
    *data(out.id) = acc;
    return out;
}

Var Tape::squared_mmd_to(Var x, std::vector<double> targets, const Kernel& kernel) {
    check(x);
    const double v = squared_mmd(values(x), targets, kernel);
    Var out = push(Op::MmdLoss, 1);
    Node& n = nodes_.back();
    n.a = x.id;
    n.aux0 = static_cast<std::uint32_t>(mmd_.size());
    mmd_.push_back(MmdMeta{std::move(targets), kernel});
    *data(out.id) = v;
    return out;
}

std::span<const double> Tape::values(Var v) const {
    check(v);
    return {data(v.id), v.len};
}

double Tape::scalar(Var v) const {
    check(v);
    if (v.len != 1) throw ContractViolation("tape: scalar() on a non-scalar Var");
    return *data(v.id);
}

std::span<const double> Tape::grad_of(Var v) const {
    check(v);
    if (grad_.size() != val_.size())
        throw ContractViolation("tape: grad_of() before backward()");
    return {grad_.data() + nodes_[v.id].off, v.len};
}

void Tape::backward(Var root) {
    check(root);
    if (root.len != 1) throw ContractViolation("tape: backward root must be scalar");
    if (!rw_)
        throw ContractViolation("tape: backward() on a tape without a trainable store");
    grad_.assign(val_.size(), 0.0);
    grad_[nodes_[root.id].off] = 1.0;

    std::vector<double> scratch;
    for (std::uint32_t idx = static_cast<std::uint32_t>(nodes_.size()); idx-- > 0;) {
        const Node& n = nodes_[idx];
        const double* gy = grad_.data() + n.off;
        switch (n.op) {
        case Op::Leaf:
        case Op::Param:
            break;
        case Op::Linear: {
            const Node& wn = nodes_[n.a];
            const Node& xn = nodes_[n.b];
            const double* wd = val_.data() + wn.off;
            const double* xd = val_.data() + xn.off;
            double* gw = grad_.data() + wn.off;
            double* gx = grad_.data() + xn.off;
            const std::uint32_t rows = n.aux0, cols = n.aux1;
            for (std::uint32_t i = 0; i < rows; ++i) {
                const double g = gy[i];
                if (g == 0.0) continue;
                const double* wrow = wd + static_cast<std::size_t>(i) * cols;
                double* gwrow = gw + static_cast<std::size_t>(i) * cols;
                for (std::uint32_t j = 0; j < cols; ++j) {
                    gwrow[j] += g * xd[j];
                    gx[j] += g * wrow[j];
                }
            }
            break;
        }
        case Op::Add: {
            double* ga = grad_.data() + nodes_[n.a].off;
            double* gb = grad_.data() + nodes_[n.b].off;
            for (std::uint32_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i];
                gb[i] += gy[i];
            }
            break;
        }
        case Op::Sub: {
            double* ga = grad_.data() + nodes_[n.a].off;
            double* gb = grad_.data() + nodes_[n.b].off;
            for (std::uint32_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i];
                gb[i] -= gy[i];
            }
            break;
        }
        case Op::Mul: {
            const double* av = val_.data() + nodes_[n.a].off;
            const double* bv = val_.data() + nodes_[n.b].off;
            double* ga = grad_.data() + nodes_[n.a].off;
            double* gb = grad_.data() + nodes_[n.b].off;
            for (std::uint32_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i] * bv[i];
                gb[i] += gy[i] * av[i];
            }
            break;
        }
        case Op::Scale: {
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i) ga[i] += n.daux * gy[i];
            break;
        }
        case Op::Relu: {
            const double* av = val_.data() + nodes_[n.a].off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i)
                if (av[i] > 0.0) ga[i] += gy[i];
            break;
        }
        case Op::Elu: {
            const double* av = val_.data() + nodes_[n.a].off;
            const double* yv = val_.data() + n.off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i)
                ga[i] += av[i] >= 0.0 ? gy[i] : gy[i] * (yv[i] + 1.0);
            break;
        }
        case Op::Abs: {
            const double* av = val_.data() + nodes_[n.a].off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i) {
                if (av[i] > 0.0) ga[i] += gy[i];
                else if (av[i] < 0.0) ga[i] -= gy[i];
            }
            break;
        }
        case Op::NegAbs: {
            const double* av = val_.data() + nodes_[n.a].off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i) {
                if (av[i] > 0.0) ga[i] -= gy[i];
                else if (av[i] < 0.0) ga[i] += gy[i];
            }
            break;
        }
        case Op::Sigmoid: {
            const double* yv = val_.data() + n.off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i)
                ga[i] += gy[i] * yv[i] * (1.0 - yv[i]);
            break;
        }
        case Op::Tanh: {
            const double* yv = val_.data() + n.off;
            double* ga = grad_.data() + nodes_[n.a].off;
            for (std::uint32_t i = 0; i < n.len; ++i)
                ga[i] += gy[i] * (1.0 - yv[i] * yv[i]);
            break;
        }
        case Op::Slice: {
            double* ga = grad_.data() + nodes_[n.a].off + n.aux0;
            for (std::uint32_t i = 0; i < n.len; ++i) ga[i] += gy[i];
            break;
        }
        case Op::Concat: {
            std::uint32_t pos = 0;
            for (std::uint32_t p = 0; p < n.aux1; ++p) {
                const Node& part = nodes_[extra_[n.aux0 + p]];
                double* gp = grad_.data() + part.off;
                for (std::uint32_t i = 0; i < part.len; ++i) gp[i] += gy[pos + i];
                pos += part.len;
            }
            break;
        }
        case Op::Dot: {
            const double* av = val_.data() + nodes_[n.a].off;
            const double* bv = val_.data() + nodes_[n.b].off;
            double* ga = grad_.data() + nodes_[n.a].off;
            double* gb = grad_.data() + nodes_[n.b].off;
            const double g = gy[0];
            const std::uint32_t len = nodes_[n.a].len;
            for (std::uint32_t i = 0; i < len; ++i) {
                ga[i] += g * bv[i];
                gb[i] += g * av[i];
            }
            break;
        }
        case Op::Sum: {
            double* ga = grad_.data() + nodes_[n.a].off;
            const double g = gy[0];
            const std::uint32_t len = nodes_[n.a].len;
            for (std::uint32_t i = 0; i < len; ++i) ga[i] += g;
            break;
        }
        case Op::MmdLoss: {
            const Node& xn = nodes_[n.a];
            const MmdMeta& meta = mmd_[n.aux0];
            scratch.resize(xn.len);
            squared_mmd_grad({val_.data() + xn.off, xn.len}, meta.targets,
                             meta.kernel, scratch);
            double* gx = grad_.data() + xn.off;
            const double g = gy[0];
            for (std::uint32_t i = 0; i < xn.len; ++i) gx[i] += g * scratch[i];
            break;
        }
        }
    }

    for (const auto& [id, grad_buf] : param_grads_) {
        const Node& n = nodes_[id];
        const double* g = grad_.data() + n.off;
        for (std::uint32_t i = 0; i < n.len; ++i) (*grad_buf)[i] += g[i];
    }
}

void Tape::reset() {
    nodes_.clear();
    val_.clear();
    grad_.clear();
    extra_.clear();
    mmd_.clear();
    param_nodes_.clear();
    param_grads_.clear();
}

} // namespace mmdmix
