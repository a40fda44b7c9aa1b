#include "ecgunc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecgunc/errors.hpp"

namespace ecgunc {

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

namespace {
void check_shape(const Shape& shape) {
    for (std::int64_t d : shape) {
        if (d <= 0) {
            throw ShapeError("tensor shape " + shape_str(shape) +
                             " has a non-positive dimension");
        }
    }
}
} // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    check_shape(shape);
    auto impl = std::make_shared<detail::TensorImpl>();
    std::int64_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->values.assign(static_cast<std::size_t>(n), 0.0);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::uninitialized(Shape shape) {
    check_shape(shape);
    auto impl = std::make_shared<detail::TensorImpl>();
    std::int64_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->values.resize(static_cast<std::size_t>(n));
    impl->requires_grad = false;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.values().begin(), t.values().end(), value);
    return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
        throw ShapeError("tensor: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_str(shape));
    }
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->values.assign(values.begin(), values.end());
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values({1}, {value}, requires_grad);
}

double Tensor::item() const {
    if (numel() != 1) {
        throw ShapeError("item(): tensor has " + std::to_string(numel()) + " elements");
    }
    return impl_->values[0];
}

std::span<double> Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
    return impl_->grad;
}

std::span<const double> Tensor::grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
    return from_values(impl_->shape,
                       std::vector<double>(impl_->values.begin(), impl_->values.end()),
                       impl_->requires_grad);
}

void Tensor::fill_normal(Rng& rng, double mean, double stddev) {
    for (double& v : impl_->values) v = rng.normal(mean, stddev);
}

bool Tensor::all_finite() const {
    for (double v : impl_->values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tape::backward(Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ShapeError("backward: loss must be a scalar tensor");
    }
    loss.grad()[0] += 1.0;
    for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) {
        (*it)();
    }
}

} // namespace ecgunc
