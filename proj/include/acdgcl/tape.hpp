#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acdgcl/tensor.hpp"

namespace acdgcl {

/// Handle to a value recorded on a tape.
struct Var {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
};

template <class Scalar>
using GradientMapT = std::map<std::string, TensorT<Scalar>>;

using GradientMap = GradientMapT<double>;

template <class Scalar>
using ParamMapT = std::map<std::string, TensorT<Scalar>>;

using ParamMap = ParamMapT<double>;

/// Records primitive operations in topological order for reverse-mode differentiation.
/// Single-threaded; tensors placed on a tape are never mutated in place.
template <class Scalar>
class TapeT {
public:
    using Tensor = TensorT<Scalar>;
    using ForwardFn = std::function<Tensor(const TapeT&)>;
    using BackwardFn = std::function<void(TapeT&, Var, const Tensor&)>;

    /// Named differentiable leaf (a model parameter).
    Var param(const std::string& name, Tensor value) {
        if (name.empty()) throw std::invalid_argument("parameter leaf requires a name");
        if (names_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
        Var v = push_leaf(std::move(value), name, true);
        names_.emplace(name, v.id);
        return v;
    }

    /// Unnamed leaf; differentiable only if requested (e.g. a perturbation).
    Var input(Tensor value, bool requires_grad = false) {
        return push_leaf(std::move(value), {}, requires_grad);
    }

    /// Unnamed constant leaf.
    Var constant(Tensor value) { return push_leaf(std::move(value), {}, false); }

    Var record(const std::string& op, Tensor out_value, std::vector<Var> inputs,
               ForwardFn forward, BackwardFn backward) {
        if (!out_value.all_finite())
            throw std::runtime_error("non-finite output from op '" + op + "'");
        bool rg = false;
        for (Var in : inputs) rg = rg || requires_grad(in);
        Slot slot;
        slot.value = std::move(out_value);
        slot.is_leaf = false;
        slot.requires_grad = rg;
        slots_.push_back(std::move(slot));
        Var out{static_cast<int32_t>(slots_.size() - 1)};
        Node node;
        node.op = op;
        node.out = out.id;
        node.inputs = std::move(inputs);
        node.forward = std::move(forward);
        node.backward = std::move(backward);
        nodes_.push_back(std::move(node));
        return out;
    }

    const Tensor& value(Var v) const { return slot(v).value; }

    bool requires_grad(Var v) const { return slot(v).requires_grad; }

    size_t num_slots() const { return slots_.size(); }
    size_t num_nodes() const { return nodes_.size(); }

    /// Recompute every recorded operation in order from the leaves.
    void replay() {
        for (Node& n : nodes_) slots_[n.out].value = n.forward(*this);
    }

    /// Reverse pass from a scalar loss. Returns gradients for all named leaves;
    /// named leaves not reachable from the loss get zero gradients.
    GradientMapT<Scalar> backward(Var loss) {
        const Slot& ls = slot(loss);
        if (ls.value.rank() != 0)
            throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                        shape_str(ls.value.shape()));
        grads_.assign(slots_.size(), Tensor{});
        grads_[loss.id] = Tensor::scalar(Scalar(1));
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            if (!slots_[it->out].requires_grad) continue;
            if (grads_[it->out].empty()) continue;
            it->backward(*this, Var{it->out}, grads_[it->out]);
        }
        GradientMapT<Scalar> out;
        for (const auto& [name, id] : names_) {
            Var v{id};
            out.emplace(name, grads_[id].empty() ? Tensor::zeros(slot(v).value.shape())
                                                 : grads_[id]);
        }
        return out;
    }

    /// Gradient of the last backward() w.r.t. any slot (empty tensor if unreached).
    const Tensor& grad(Var v) const {
        if (grads_.size() != slots_.size())
            throw std::logic_error("grad() requires a prior backward() call");
        slot(v);
        return grads_[v.id];
    }

    /// Adds a partial derivative into a slot's gradient accumulator.
    void accumulate(Var v, const Tensor& partial) {
        Slot& s = slot(v);
        if (!s.requires_grad) return;
        Tensor& g = grads_[v.id];
        if (g.empty())
            g = partial;
        else {
            if (!g.same_shape(partial))
                throw std::logic_error("gradient shape mismatch: " + shape_str(g.shape()) + " vs " +
                                       shape_str(partial.shape()));
            g.array() += partial.array();
        }
    }

private:
    struct Slot {
        Tensor value;
        bool is_leaf = true;
        bool requires_grad = false;
    };
    struct Node {
        std::string op;
        int32_t out = -1;
        std::vector<Var> inputs;
        ForwardFn forward;
        BackwardFn backward;
    };

    Var push_leaf(Tensor value, const std::string& name, bool requires_grad) {
        if (!value.all_finite())
            throw std::runtime_error("non-finite leaf value" + (name.empty() ? "" : " for " + name));
        Slot s;
        s.value = std::move(value);
        s.is_leaf = true;
        s.requires_grad = requires_grad;
        slots_.push_back(std::move(s));
        (void)name;
        return Var{static_cast<int32_t>(slots_.size() - 1)};
    }

    Slot& slot(Var v) {
        if (!v.valid() || static_cast<size_t>(v.id) >= slots_.size())
            throw std::invalid_argument("variable not recorded on this tape");
        return slots_[v.id];
    }
    const Slot& slot(Var v) const {
        if (!v.valid() || static_cast<size_t>(v.id) >= slots_.size())
            throw std::invalid_argument("variable not recorded on this tape");
        return slots_[v.id];
    }

    std::vector<Slot> slots_;
    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    std::map<std::string, int32_t> names_;
};

using Tape = TapeT<double>;

}  // namespace acdgcl
