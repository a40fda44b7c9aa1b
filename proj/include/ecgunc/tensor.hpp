#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ecgunc/rng.hpp"

namespace ecgunc {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// std::vector that default-initializes doubles instead of zero-filling, for
// op outputs whose every element is written by a kernel anyway.
template <typename T>
struct DefaultInitAlloc : std::allocator<T> {
    template <typename U>
    struct rebind {
        using other = DefaultInitAlloc<U>;
    };
    template <typename U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

using Buffer = std::vector<double, DefaultInitAlloc<double>>;

struct TensorImpl {
    Shape shape;
    Buffer values;
    Buffer grad; // empty until touched; same length as values after
    bool requires_grad = false;
};

} // namespace detail

/// Dense f64 array with an optional gradient slot. A Tensor is a cheap handle
/// sharing its buffer; ops treat written tensors as immutable, while leaf
/// parameters are mutated in place by the optimizer between tapes.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    /// Allocates without zero-filling; caller must write every element.
    static Tensor uninitialized(Shape shape);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::int64_t rank() const { return static_cast<std::int64_t>(impl_->shape.size()); }
    std::int64_t dim(int i) const { return impl_->shape[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const { return static_cast<std::int64_t>(impl_->values.size()); }

    std::span<double> values() { return impl_->values; }
    std::span<const double> values() const { return impl_->values; }
    double item() const; // requires numel() == 1

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool v) { impl_->requires_grad = v; }

    /// Gradient buffer, allocated zeroed on first access.
    std::span<double> grad();
    std::span<const double> grad() const;
    bool has_grad() const { return defined() && !impl_->grad.empty(); }
    void zero_grad();

    /// Deep copy of values (grad not copied).
    Tensor clone() const;

    void fill_normal(Rng& rng, double mean, double stddev);

    /// True when both handles share the same buffer.
    bool same_buffer(const Tensor& other) const { return impl_ == other.impl_; }

    bool all_finite() const;

private:
    std::shared_ptr<detail::TensorImpl> impl_;
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
};

/// Records backward rules in forward order; backward() replays them in
/// reverse, accumulating into the grad buffers of every requires_grad tensor.
/// A tape is confined to one logical thread.
class Tape {
public:
    void record(std::function<void()> backward_rule) {
        rules_.push_back(std::move(backward_rule));
    }

    /// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse.
    /// Throws ShapeError unless loss is scalar.
    void backward(Tensor& loss);

    std::size_t size() const { return rules_.size(); }
    void clear() { rules_.clear(); }

private:
    std::vector<std::function<void()>> rules_;
};

/// True when an op evaluated with this tape should record a backward rule.
inline bool tracing(const Tape* tape, const Tensor& a) {
    return tape != nullptr && a.requires_grad();
}
inline bool tracing(const Tape* tape, const Tensor& a, const Tensor& b) {
    return tape != nullptr && (a.requires_grad() || b.requires_grad());
}
inline bool tracing(const Tape* tape, const Tensor& a, const Tensor& b, const Tensor& c) {
    return tape != nullptr && (a.requires_grad() || b.requires_grad() || c.requires_grad());
}

} // namespace ecgunc
