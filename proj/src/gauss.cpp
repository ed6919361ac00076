#include "svboot/gauss.hpp"

#include <cmath>
#include <cstddef>

#include "svboot/errors.hpp"

namespace sv {

namespace {

double rat_eval(const double* a, std::size_t na, const double* b,
                std::size_t nb, double x) {
  double u = a[na - 1];
  for (std::size_t i = na - 1; i > 0; --i) {
    u = x * u + a[i - 1];
  }
  double v = b[nb - 1];
  for (std::size_t j = nb - 1; j > 0; --j) {
    v = x * v + b[j - 1];
  }
  return u / v;
}

// |p - 0.5| <= 0.425
double central(double q) {
  static const double a[8] = {3.387132872796366608,  133.14166789178437745,
                              1971.5909503065514427, 13731.693765509461125,
                              45921.953931549871457, 67265.770927008700853,
                              33430.575583588128105, 2509.0809287301226727};
  static const double b[8] = {1.0,
                              42.313330701600911252,
                              687.1870074920579083,
                              5394.1960214247511077,
                              21213.794301586595867,
                              39307.89580009271061,
                              28729.085735721942674,
                              5226.495278852854561};
  const double r = 0.180625 - q * q;
  return q * rat_eval(a, 8, b, 8, r);
}

// r = sqrt(-log(tail mass)), r <= 5
double intermediate(double r) {
  static const double a[8] = {1.42343711074968357734,   4.6303378461565452959,
                              5.7694972214606914055,    3.64784832476320460504,
                              1.27045825245236838258,   0.24178072517745061177,
                              0.0227238449892691845833, 7.7454501427834140764e-4};
  static const double b[8] = {1.0,
                              2.05319162663775882187,
                              1.6763848301838038494,
                              0.68976733498510000455,
                              0.14810397642748007459,
                              0.0151986665636164571966,
                              5.475938084995344946e-4,
                              1.05075007164441684324e-9};
  return rat_eval(a, 8, b, 8, r - 1.6);
}

// r > 5
double tail(double r) {
  static const double a[8] = {6.6579046435011037772,     5.4637849111641143699,
                              1.7848265399172913358,     0.29656057182850489123,
                              0.026532189526576123093,   0.0012426609473880784386,
                              2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double b[8] = {1.0,
                              0.59983220655588793769,
                              0.13692988092273580531,
                              0.0148753612908506148525,
                              7.868691311456132591e-4,
                              1.8463183175100546818e-5,
                              1.4215117583164458887e-7,
                              2.04426310338993978564e-15};
  return rat_eval(a, 8, b, 8, r - 5.0);
}

}  // namespace

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("inv_norm_cdf: p must lie strictly between 0 and 1");
  }
  const double dp = p - 0.5;
  if (std::fabs(dp) <= 0.425) {
    return central(dp);
  }
  const double pp = (p < 0.5) ? p : 1.0 - p;
  const double r = std::sqrt(-std::log(pp));
  const double x = (r <= 5.0) ? intermediate(r) : tail(r);
  return (p < 0.5) ? -x : x;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace sv
