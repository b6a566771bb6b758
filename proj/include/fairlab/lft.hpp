#pragma once

#include <cmath>
#include <limits>

#include "fairlab/error.hpp"

namespace fairlab {

/// Linear fractional transform of the regression function:
/// eta |-> (P*eta + Q) / (R*eta + S).
///
/// All bias models in this library act on eta through a transform of this
/// form, one per group. The identity is (1, 0, 0, 1).
struct LinearFractionalTransform {
    double p = 1.0;
    double q = 0.0;
    double r = 0.0;
    double s = 1.0;

    static LinearFractionalTransform identity() { return {}; }

    /// Denominator R*eta + S; linear, so positivity on [0,1] is equivalent
    /// to positivity at both endpoints.
    double denominator(double eta) const { return r * eta + s; }

    bool denominator_positive_on_unit() const {
        return s > 0.0 && r + s > 0.0;
    }

    double operator()(double eta) const {
        const double den = denominator(eta);
        if (den == 0.0)
            fail(ErrorCode::divide_by_zero, "LFT denominator vanishes at eta");
        return (p * eta + q) / den;
    }

    /// Inverse map, defined when PS - QR != 0. eta = (S*z - Q) / (-R*z + P).
    double inverse(double z) const {
        const double det = p * s - q * r;
        if (det == 0.0)
            fail(ErrorCode::divide_by_zero, "LFT is not invertible (PS - QR = 0)");
        const double den = -r * z + p;
        if (den == 0.0)
            fail(ErrorCode::divide_by_zero, "LFT inverse denominator vanishes");
        return (s * z - q) / den;
    }

    /// Functional composition: (this ∘ inner)(eta) = this(inner(eta)).
    LinearFractionalTransform after(const LinearFractionalTransform& inner) const {
        return {p * inner.p + q * inner.r,
                p * inner.q + q * inner.s,
                r * inner.p + s * inner.r,
                r * inner.q + s * inner.s};
    }
};

/// Order preservation test: S >= 0, R + S >= 0 and PS - QR >= 0.
inline bool is_order_preserving(const LinearFractionalTransform& t) {
    return t.s >= 0.0 && t.r + t.s >= 0.0 && t.p * t.s - t.q * t.r >= 0.0;
}

} // namespace fairlab
