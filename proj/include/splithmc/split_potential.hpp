#pragma once

#include "precompute.hpp"
#include "targets.hpp"

namespace splithmc {

// U = U0 + U1 with U0 the quadratic reference. Non-owning: the target and the
// reference must outlive this view.
template <Potential T>
class SplitPotential {
public:
    SplitPotential(const T& target, const QuadraticReference& ref) : target_(&target), ref_(&ref) {
        require_same_size(target.dim(), ref.dim(), "SplitPotential");
    }

    const T& target() const { return *target_; }
    const QuadraticReference& reference() const { return *ref_; }
    Index dim() const { return ref_->dim(); }

    double u(const Vector& theta) const { return target_->value(theta); }

    double u0(const Vector& theta) const {
        const Vector d = theta - ref_->theta_star;
        return 0.5 * d.dot(ref_->J.matrix() * d);
    }

    double u1(const Vector& theta) const { return u(theta) - u0(theta); }

    Vector gradient(const Vector& theta) const { return target_->gradient(theta); }
    Vector gradient_u0(const Vector& theta) const { return ref_->J.matrix() * (theta - ref_->theta_star); }
    Vector gradient_u1(const Vector& theta) const { return gradient(theta) - gradient_u0(theta); }

private:
    const T* target_;
    const QuadraticReference* ref_;
};

} // namespace splithmc
