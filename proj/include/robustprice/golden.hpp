#pragma once

#include <cmath>
#include <utility>

namespace robustprice {

struct Minimum1D {
  double x;
  double value;
};

/// Golden-section minimization of f on [lo, hi]. Stops when the bracket is
/// narrower than tol or after max_iter shrinks. The returned point is the
/// best evaluated one, endpoints excluded.
template <class F>
Minimum1D golden_section_minimize(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum1D{c, fc} : Minimum1D{d, fd};
}

}  // namespace robustprice
