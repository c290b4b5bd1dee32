#pragma once

namespace clusterdist {

/// Natural log of the modified Bessel function of the second kind K_order(x).
///
/// Evaluated without forming K itself: Temme's series for x < 2, Steed's
/// continued fraction (exponentially scaled) for x >= 2, then upward
/// recurrence in order with running rescaling. Valid for any real order
/// (K_{-v} = K_v) and any finite x > 0. Throws std::domain_error for x <= 0.
[[nodiscard]] double log_bessel_k(double order, double x);

/// K_order(x). Over- or underflows to inf/0 where the log form does not.
[[nodiscard]] double bessel_k(double order, double x);

/// K_{order + shift}(x) / K_order(x), computed in log space.
[[nodiscard]] double bessel_k_ratio(double order, double shift, double x);

} // namespace clusterdist
