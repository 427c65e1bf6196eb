#pragma once

#include <Eigen/Core>

#include <cmath>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acdgcl {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ')';
    return os.str();
}

inline Index shape_size(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<Index>());
}

/// Dense tensor of rank 0, 1 or 2 with flat row-major storage.
template <class Scalar>
class TensorT {
public:
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    using MatMap = Eigen::Map<RowMatrix<Scalar>>;
    using ConstMatMap = Eigen::Map<const RowMatrix<Scalar>>;

    TensorT() = default;

    TensorT(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_.size() > 2)
            throw std::invalid_argument("tensor rank > 2 not supported: " + shape_str(shape_));
        for (Index d : shape_)
            if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape_));
        if (data_.size() != shape_size(shape_))
            throw std::invalid_argument("data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_str(shape_));
    }

    static TensorT scalar(Scalar v) {
        Array a(1);
        a[0] = v;
        return TensorT(Shape{}, std::move(a));
    }

    static TensorT zeros(Shape shape) {
        Index n = shape_size(shape);
        return TensorT(std::move(shape), Array::Zero(n));
    }

    static TensorT full(Shape shape, Scalar v) {
        Index n = shape_size(shape);
        return TensorT(std::move(shape), Array::Constant(n, v));
    }

    static TensorT vector(std::initializer_list<Scalar> vals) {
        Array a(static_cast<Index>(vals.size()));
        Index i = 0;
        for (Scalar v : vals) a[i++] = v;
        return TensorT(Shape{static_cast<Index>(vals.size())}, std::move(a));
    }

    static TensorT matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
        Index r = static_cast<Index>(rows.size());
        Index c = r ? static_cast<Index>(rows.begin()->size()) : 0;
        Array a(r * c);
        Index i = 0;
        for (const auto& row : rows) {
            if (static_cast<Index>(row.size()) != c)
                throw std::invalid_argument("ragged matrix initializer");
            for (Scalar v : row) a[i++] = v;
        }
        return TensorT(Shape{r, c}, std::move(a));
    }

    static TensorT from_matrix(const RowMatrix<Scalar>& m) {
        Array a(m.size());
        Eigen::Map<RowMatrix<Scalar>>(a.data(), m.rows(), m.cols()) = m;
        return TensorT(Shape{m.rows(), m.cols()}, std::move(a));
    }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    Index size() const { return data_.size(); }
    bool empty() const { return data_.size() == 0 && shape_.empty(); }

    Index rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? shape_[0] : 1); }
    Index cols() const { return rank() == 2 ? shape_[1] : 1; }

    Scalar* data() { return data_.data(); }
    const Scalar* data() const { return data_.data(); }
    Array& array() { return data_; }
    const Array& array() const { return data_; }

    Scalar operator[](Index i) const { return data_[i]; }
    Scalar& operator[](Index i) { return data_[i]; }

    /// Rank-0 access.
    Scalar value() const {
        if (rank() != 0) throw std::invalid_argument("value() on non-scalar tensor " + shape_str(shape_));
        return data_[0];
    }

    Scalar operator()(Index r, Index c) const { return data_[r * cols() + c]; }
    Scalar& operator()(Index r, Index c) { return data_[r * cols() + c]; }

    /// Matrix view of the flat storage; rank-1 maps to a column, rank-0 to 1x1.
    MatMap mat() { return MatMap(data_.data(), rows(), cols()); }
    ConstMatMap mat() const { return ConstMatMap(data_.data(), rows(), cols()); }

    bool all_finite() const { return data_.isFinite().all(); }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

    TensorT reshaped(Shape s) const {
        if (shape_size(s) != size())
            throw std::invalid_argument("cannot reshape " + shape_str(shape_) + " to " + shape_str(s));
        return TensorT(std::move(s), data_);
    }

private:
    Shape shape_;
    Array data_;
};

using Tensor = TensorT<double>;

/// Broadcast shape of two operands under numpy alignment rules, ranks <= 2.
inline Shape broadcast_shape(const Shape& a, const Shape& b) {
    Shape pa = a, pb = b;
    while (pa.size() < pb.size()) pa.insert(pa.begin(), 1);
    while (pb.size() < pa.size()) pb.insert(pb.begin(), 1);
    Shape out(pa.size());
    for (size_t i = 0; i < pa.size(); ++i) {
        if (pa[i] == pb[i] || pb[i] == 1)
            out[i] = pa[i];
        else if (pa[i] == 1)
            out[i] = pb[i];
        else
            throw std::invalid_argument("shapes not broadcastable: " + shape_str(a) + " vs " + shape_str(b));
    }
    return out;
}

/// Materialize `t` at broadcast shape `target`.
template <class Scalar>
TensorT<Scalar> broadcast_value(const TensorT<Scalar>& t, const Shape& target) {
    if (t.shape() == target) return t;
    Shape padded = t.shape();
    while (padded.size() < target.size()) padded.insert(padded.begin(), 1);
    if (padded.size() != target.size())
        throw std::invalid_argument("cannot broadcast " + shape_str(t.shape()) + " to " + shape_str(target));
    for (size_t i = 0; i < target.size(); ++i)
        if (padded[i] != target[i] && padded[i] != 1)
            throw std::invalid_argument("cannot broadcast " + shape_str(t.shape()) + " to " + shape_str(target));
    TensorT<Scalar> out = TensorT<Scalar>::zeros(target);
    if (target.size() == 1) {
        const Index sn = padded[0];
        for (Index j = 0; j < target[0]; ++j) out[j] = t[sn == 1 ? 0 : j];
    } else {
        const Index pr = padded[0], pc = padded[1];
        for (Index i = 0; i < target[0]; ++i)
            for (Index j = 0; j < target[1]; ++j)
                out(i, j) = t.data()[(pr == 1 ? 0 : i) * pc + (pc == 1 ? 0 : j)];
    }
    return out;
}

/// Sum-reduce `g` (at a broadcast shape) back down to `target` shape.
template <class Scalar>
TensorT<Scalar> reduce_to_shape(const TensorT<Scalar>& g, const Shape& target) {
    if (g.shape() == target) return g;
    Shape padded = target;
    while (padded.size() < g.shape().size()) padded.insert(padded.begin(), 1);
    TensorT<Scalar> out = TensorT<Scalar>::zeros(target);
    if (g.rank() <= 1) {
        const Index tn = padded.empty() ? 1 : padded[0];
        for (Index j = 0; j < g.size(); ++j) out[tn == 1 ? 0 : j] += g[j];
    } else {
        const Index tr = padded[0], tc = padded[1];
        for (Index i = 0; i < g.rows(); ++i)
            for (Index j = 0; j < g.cols(); ++j)
                out.data()[(tr == 1 ? 0 : i) * tc + (tc == 1 ? 0 : j)] += g(i, j);
    }
    return out;
}

}  // namespace acdgcl
