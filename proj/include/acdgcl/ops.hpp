#pragma once

#include "acdgcl/tape.hpp"
#include "acdgcl/tensor.hpp"

namespace acdgcl {

namespace detail {

template <class Scalar>
TensorT<Scalar> matmul_value(const TensorT<Scalar>& a, const TensorT<Scalar>& b, bool ta, bool tb) {
    if (a.rank() != 2 || b.rank() != 2)
        throw std::invalid_argument("matmul requires rank-2 operands, got " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
    const Index m = ta ? a.cols() : a.rows();
    const Index k = ta ? a.rows() : a.cols();
    const Index k2 = tb ? b.cols() : b.rows();
    const Index n = tb ? b.rows() : b.cols();
    if (k != k2)
        throw std::invalid_argument("matmul inner dimensions disagree: " + shape_str(a.shape()) +
                                    (ta ? "^T" : "") + " * " + shape_str(b.shape()) + (tb ? "^T" : ""));
    TensorT<Scalar> out = TensorT<Scalar>::zeros({m, n});
    auto A = a.mat(), B = b.mat();
    auto C = out.mat();
    if (!ta && !tb)
        C.noalias() = A * B;
    else if (ta && !tb)
        C.noalias() = A.transpose() * B;
    else if (!ta && tb)
        C.noalias() = A * B.transpose();
    else
        C.noalias() = A.transpose() * B.transpose();
    return out;
}

template <class Scalar, class F>
TensorT<Scalar> binary_value(const TensorT<Scalar>& a, const TensorT<Scalar>& b, F&& f) {
    Shape s = broadcast_shape(a.shape(), b.shape());
    TensorT<Scalar> ab = broadcast_value(a, s);
    TensorT<Scalar> bb = broadcast_value(b, s);
    TensorT<Scalar> out(std::move(s), f(ab.array(), bb.array()));
    return out;
}

}  // namespace detail

template <class Scalar>
Var matmul(TapeT<Scalar>& t, Var a, Var b, bool ta = false, bool tb = false) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, b, ta, tb](const TapeT<Scalar>& tp) {
        return detail::matmul_value(tp.value(a), tp.value(b), ta, tb);
    };
    auto bwd = [a, b, ta, tb](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& av = tp.value(a);
        const Tensor& bv = tp.value(b);
        if (tp.requires_grad(a)) {
            // dAop = g * Bop^T, undone through the transpose flag
            Tensor da = detail::matmul_value(g, bv, false, !tb);
            if (ta) da = Tensor::from_matrix(da.mat().transpose());
            tp.accumulate(a, da);
        }
        if (tp.requires_grad(b)) {
            Tensor db = detail::matmul_value(av, g, !ta, false);
            if (tb) db = Tensor::from_matrix(db.mat().transpose());
            tp.accumulate(b, db);
        }
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("matmul", std::move(out_value), {a, b}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var add(TapeT<Scalar>& t, Var a, Var b) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, b](const TapeT<Scalar>& tp) {
        return detail::binary_value(tp.value(a), tp.value(b),
                                    [](const auto& x, const auto& y) { return (x + y).eval(); });
    };
    auto bwd = [a, b](TapeT<Scalar>& tp, Var, const Tensor& g) {
        if (tp.requires_grad(a)) tp.accumulate(a, reduce_to_shape(g, tp.value(a).shape()));
        if (tp.requires_grad(b)) tp.accumulate(b, reduce_to_shape(g, tp.value(b).shape()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("add", std::move(out_value), {a, b}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var sub(TapeT<Scalar>& t, Var a, Var b) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, b](const TapeT<Scalar>& tp) {
        return detail::binary_value(tp.value(a), tp.value(b),
                                    [](const auto& x, const auto& y) { return (x - y).eval(); });
    };
    auto bwd = [a, b](TapeT<Scalar>& tp, Var, const Tensor& g) {
        if (tp.requires_grad(a)) tp.accumulate(a, reduce_to_shape(g, tp.value(a).shape()));
        if (tp.requires_grad(b)) {
            Tensor neg(g.shape(), (-g.array()).eval());
            tp.accumulate(b, reduce_to_shape(neg, tp.value(b).shape()));
        }
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("sub", std::move(out_value), {a, b}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var mul(TapeT<Scalar>& t, Var a, Var b) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, b](const TapeT<Scalar>& tp) {
        return detail::binary_value(tp.value(a), tp.value(b),
                                    [](const auto& x, const auto& y) { return (x * y).eval(); });
    };
    auto bwd = [a, b](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& av = tp.value(a);
        const Tensor& bv = tp.value(b);
        if (tp.requires_grad(a)) {
            Tensor bb = broadcast_value(bv, g.shape());
            Tensor da(g.shape(), (g.array() * bb.array()).eval());
            tp.accumulate(a, reduce_to_shape(da, av.shape()));
        }
        if (tp.requires_grad(b)) {
            Tensor ab = broadcast_value(av, g.shape());
            Tensor db(g.shape(), (g.array() * ab.array()).eval());
            tp.accumulate(b, reduce_to_shape(db, bv.shape()));
        }
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("mul", std::move(out_value), {a, b}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var relu(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        return Tensor(x.shape(), x.array().max(Scalar(0)).eval());
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        Tensor da(g.shape(), (g.array() * (x.array() > Scalar(0)).template cast<Scalar>()).eval());
        tp.accumulate(a, da);
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("relu", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var exp(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        return Tensor(x.shape(), x.array().exp().eval());
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var out, const Tensor& g) {
        const Tensor& y = tp.value(out);
        tp.accumulate(a, Tensor(g.shape(), (g.array() * y.array()).eval()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("exp", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var log(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        return Tensor(x.shape(), x.array().log().eval());
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        tp.accumulate(a, Tensor(g.shape(), (g.array() / x.array()).eval()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("log", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var sum(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) { return Tensor::scalar(tp.value(a).array().sum()); };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        tp.accumulate(a, Tensor::full(tp.value(a).shape(), g.value()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("sum", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var mean(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        if (x.size() == 0) throw std::invalid_argument("mean of empty tensor");
        return Tensor::scalar(x.array().sum() / Scalar(x.size()));
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        tp.accumulate(a, Tensor::full(x.shape(), g.value() / Scalar(x.size())));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("mean", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Row sums of a rank-2 tensor, shape (r, 1).
template <class Scalar>
Var rowwise_sum(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        if (x.rank() != 2) throw std::invalid_argument("rowwise_sum requires rank-2, got " + shape_str(x.shape()));
        Tensor out = Tensor::zeros({x.rows(), 1});
        out.mat().col(0) = x.mat().rowwise().sum();
        return out;
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        tp.accumulate(a, broadcast_value(g, x.shape()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("rowwise_sum", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Column sums of a rank-2 tensor, shape (1, c).
template <class Scalar>
Var colwise_sum(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        if (x.rank() != 2) throw std::invalid_argument("colwise_sum requires rank-2, got " + shape_str(x.shape()));
        Tensor out = Tensor::zeros({1, x.cols()});
        out.mat().row(0) = x.mat().colwise().sum();
        return out;
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        tp.accumulate(a, broadcast_value(g, x.shape()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("colwise_sum", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Sums rows of `a` into `num_segments` buckets given by `segments` (one id per row).
template <class Scalar>
Var segment_sum(TapeT<Scalar>& t, Var a, std::vector<Index> segments, Index num_segments) {
    using Tensor = TensorT<Scalar>;
    auto check = [segments, num_segments](const Tensor& x) {
        const Index n = x.rank() == 2 ? x.rows() : x.size();
        if (static_cast<Index>(segments.size()) != n)
            throw std::invalid_argument("segment_sum: " + std::to_string(segments.size()) +
                                        " segment ids for " + std::to_string(n) + " rows");
        for (Index s : segments)
            if (s < 0 || s >= num_segments)
                throw std::invalid_argument("segment_sum: segment id " + std::to_string(s) +
                                            " out of range [0, " + std::to_string(num_segments) + ")");
    };
    auto fwd = [a, segments, num_segments, check](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        check(x);
        if (x.rank() == 1) {
            Tensor out = Tensor::zeros({num_segments});
            for (Index i = 0; i < x.size(); ++i) out[segments[i]] += x[i];
            return out;
        }
        Tensor out = Tensor::zeros({num_segments, x.cols()});
        for (Index i = 0; i < x.rows(); ++i) out.mat().row(segments[i]) += x.mat().row(i);
        return out;
    };
    auto bwd = [a, segments](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        Tensor da = Tensor::zeros(x.shape());
        if (x.rank() == 1)
            for (Index i = 0; i < x.size(); ++i) da[i] = g[segments[i]];
        else
            for (Index i = 0; i < x.rows(); ++i) da.mat().row(i) = g.mat().row(segments[i]);
        tp.accumulate(a, da);
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("segment_sum", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Sum of squares of all entries.
template <class Scalar>
Var l2_norm_sq(TapeT<Scalar>& t, Var a) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a](const TapeT<Scalar>& tp) {
        return Tensor::scalar(tp.value(a).array().square().sum());
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        tp.accumulate(a, Tensor(x.shape(), (Scalar(2) * g.value() * x.array()).eval()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("l2_norm_sq", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Concatenation along axis 0 (rows) or 1 (columns).
template <class Scalar>
Var concat(TapeT<Scalar>& t, Var a, Var b, int axis = 0) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, b, axis](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        const Tensor& y = tp.value(b);
        if (x.rank() == 1 && y.rank() == 1 && axis == 0) {
            Tensor out = Tensor::zeros({x.size() + y.size()});
            out.array().head(x.size()) = x.array();
            out.array().tail(y.size()) = y.array();
            return out;
        }
        if (x.rank() != 2 || y.rank() != 2)
            throw std::invalid_argument("concat requires matching ranks, got " + shape_str(x.shape()) +
                                        " and " + shape_str(y.shape()));
        if (axis == 0) {
            if (x.cols() != y.cols())
                throw std::invalid_argument("concat axis 0 column mismatch: " + shape_str(x.shape()) +
                                            " vs " + shape_str(y.shape()));
            Tensor out = Tensor::zeros({x.rows() + y.rows(), x.cols()});
            out.mat().topRows(x.rows()) = x.mat();
            out.mat().bottomRows(y.rows()) = y.mat();
            return out;
        }
        if (x.rows() != y.rows())
            throw std::invalid_argument("concat axis 1 row mismatch: " + shape_str(x.shape()) + " vs " +
                                        shape_str(y.shape()));
        Tensor out = Tensor::zeros({x.rows(), x.cols() + y.cols()});
        out.mat().leftCols(x.cols()) = x.mat();
        out.mat().rightCols(y.cols()) = y.mat();
        return out;
    };
    auto bwd = [a, b, axis](TapeT<Scalar>& tp, Var, const Tensor& g) {
        const Tensor& x = tp.value(a);
        const Tensor& y = tp.value(b);
        if (x.rank() == 1) {
            if (tp.requires_grad(a))
                tp.accumulate(a, Tensor({x.size()}, g.array().head(x.size()).eval()));
            if (tp.requires_grad(b))
                tp.accumulate(b, Tensor({y.size()}, g.array().tail(y.size()).eval()));
            return;
        }
        if (axis == 0) {
            if (tp.requires_grad(a)) tp.accumulate(a, Tensor::from_matrix(g.mat().topRows(x.rows())));
            if (tp.requires_grad(b)) tp.accumulate(b, Tensor::from_matrix(g.mat().bottomRows(y.rows())));
        } else {
            if (tp.requires_grad(a)) tp.accumulate(a, Tensor::from_matrix(g.mat().leftCols(x.cols())));
            if (tp.requires_grad(b)) tp.accumulate(b, Tensor::from_matrix(g.mat().rightCols(y.cols())));
        }
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("concat", std::move(out_value), {a, b}, std::move(fwd), std::move(bwd));
}

/// Materialized broadcast to a larger shape.
template <class Scalar>
Var broadcast(TapeT<Scalar>& t, Var a, Shape target) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, target](const TapeT<Scalar>& tp) { return broadcast_value(tp.value(a), target); };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        tp.accumulate(a, reduce_to_shape(g, tp.value(a).shape()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("broadcast", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

/// Multiplication by a compile-time constant.
template <class Scalar>
Var scale(TapeT<Scalar>& t, Var a, Scalar c) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, c](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        return Tensor(x.shape(), (x.array() * c).eval());
    };
    auto bwd = [a, c](TapeT<Scalar>& tp, Var, const Tensor& g) {
        tp.accumulate(a, Tensor(g.shape(), (g.array() * c).eval()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("scale", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var add_const(TapeT<Scalar>& t, Var a, Scalar c) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, c](const TapeT<Scalar>& tp) {
        const Tensor& x = tp.value(a);
        return Tensor(x.shape(), (x.array() + c).eval());
    };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) { tp.accumulate(a, g); };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("add_const", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

template <class Scalar>
Var reshape(TapeT<Scalar>& t, Var a, Shape target) {
    using Tensor = TensorT<Scalar>;
    auto fwd = [a, target](const TapeT<Scalar>& tp) { return tp.value(a).reshaped(target); };
    auto bwd = [a](TapeT<Scalar>& tp, Var, const Tensor& g) {
        tp.accumulate(a, g.reshaped(tp.value(a).shape()));
    };
    TensorT<Scalar> out_value = fwd(t);
    return t.record("reshape", std::move(out_value), {a}, std::move(fwd), std::move(bwd));
}

}  // namespace acdgcl
