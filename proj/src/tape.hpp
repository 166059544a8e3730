#pragma once

#include "kernels.hpp"
#include "tensor.hpp"

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmdmix {

/// Handle to a vector-valued node on a Tape.
struct Var {
    std::uint32_t id = UINT32_MAX;
    std::uint32_t len = 0;
    bool valid() const { return id != UINT32_MAX; }
};

/// Immediate-mode reverse-mode tape over 1-D double vectors. Values are
/// computed as operations are recorded; backward() replays the record in
/// reverse and accumulates adjoints into the bound ParameterStore's
/// gradient buffers for every parameter leaf touched (and no others).
///
/// A tape bound to a const store can run forward passes (target networks)
/// but refuses backward().
class Tape {
public:
    Tape() = default;
    explicit Tape(const ParameterStore& read_only) : ro_(&read_only) {}
    explicit Tape(ParameterStore& trainable) : ro_(&trainable), rw_(&trainable) {}

    Var constant(std::span<const double> v);
    Var constant(std::initializer_list<double> v) {
        return constant(std::span<const double>(v.begin(), v.size()));
    }
    Var scalar_const(double v) { return constant({v}); }
    Var zeros(std::uint32_t n);

    // Leaf bound to a named parameter; memoized, so repeated requests on one
    // tape share a single node (and a single gradient accumulation slot).
    Var param(const std::string& name);

    // y = W x with W a flat row-major (rows x cols) vector node.
    Var linear(Var w, Var x, std::uint32_t rows, std::uint32_t cols,
               std::string_view label = {});
    // y = W x + b
    Var dense(Var x, Var w, Var b, std::uint32_t rows, std::uint32_t cols,
              std::string_view label = {});

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b); // elementwise
    Var scale(Var a, double c);
    Var relu(Var a);
    Var elu(Var a);
    Var abs(Var a);
    Var neg_abs(Var a); // -|x|; exists for the selftest fault hook
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var slice(Var a, std::uint32_t offset, std::uint32_t len);
    Var concat(std::span<const Var> parts);
    Var dot(Var a, Var b);
    Var sum(Var a);

    // Squared empirical MMD between node x and a fixed target sample set;
    // scalar output, adjoint flows into x only.
    Var squared_mmd_to(Var x, std::vector<double> targets, const Kernel& kernel);

    std::span<const double> values(Var v) const;
    double scalar(Var v) const;
    // Adjoint of a node; valid after backward().
    std::span<const double> grad_of(Var v) const;

    // Seeds d(root)=1 and accumulates parameter gradients into the bound
    // mutable store. root must be scalar.
    void backward(Var root);

    // Drops all nodes but keeps arena capacity; parameter memoization resets.
    void reset();

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        Leaf, Param, Linear, Add, Sub, Mul, Scale, Relu, Elu, Abs, NegAbs,
        Sigmoid, Tanh, Slice, Concat, Dot, Sum, MmdLoss
    };

    struct Node {
        Op op = Op::Leaf;
        std::uint32_t a = 0, b = 0;   // input node ids
        std::uint32_t off = 0;        // offset into val_/grad_
        std::uint32_t len = 0;
        std::uint32_t aux0 = 0, aux1 = 0;
        double daux = 0.0;
    };

    struct MmdMeta {
        std::vector<double> targets;
        Kernel kernel;
    };

    Var push(Op op, std::uint32_t len);
    double* data(std::uint32_t id) { return val_.data() + nodes_[id].off; }
    const double* data(std::uint32_t id) const { return val_.data() + nodes_[id].off; }
    void check_same_len(Var a, Var b, const char* what) const;
    void check(Var v) const;

    const ParameterStore* ro_ = nullptr;
    ParameterStore* rw_ = nullptr;
    std::vector<Node> nodes_;
    std::vector<double> val_;
    std::vector<double> grad_;
    std::vector<std::uint32_t> extra_;                      // concat input lists
    std::vector<MmdMeta> mmd_;
    std::unordered_map<std::string, std::uint32_t> param_nodes_;
    std::vector<std::pair<std::uint32_t, std::vector<double>*>> param_grads_;
};

} // namespace mmdmix
