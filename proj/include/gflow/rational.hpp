#pragma once

#include <gmpxx.h>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace gflow {

// Exact rational arithmetic. mpq_class keeps values canonical
// (gcd(num,den)=1, den>0) after every operation.
using Rat = mpq_class;
using Int = mpz_class;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal invariant violation; the CLI maps this to exit code 4.
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rat rat_parse(const std::string& s) {
  try {
    Rat r(s);
    if (r.get_den() == 0) throw input_error("bad rational: '" + s + "'");
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw input_error("bad rational: '" + s + "'");
  }
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

inline Rat rat_pow(const Rat& base, unsigned long e) {
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  return r;  // already canonical: gcd(n,d)=1 implies gcd(n^e,d^e)=1
}

inline Int rat_floor(const Rat& r) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

// log2 of a positive rational, accurate to ~1e-15 relative; used only for
// slack-laden iteration-bound checks, never in solver decisions.
inline double log2_approx(const Rat& r) {
  if (sgn(r) <= 0) throw solver_error("log2_approx: nonpositive");
  long en, ed;
  double mn = mpz_get_d_2exp(&en, r.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, r.get_den_mpz_t());
  return (std::log2(mn) + double(en)) - (std::log2(md) + double(ed));
}

// A rational extended with +infinity (capacities, step ratios).
struct ExtRat {
  bool inf = true;
  Rat v;

  ExtRat() = default;
  explicit ExtRat(Rat x) : inf(false), v(std::move(x)) {}
  static ExtRat infinity() { return ExtRat{}; }

  bool finite() const { return !inf; }
  bool operator<(const ExtRat& o) const {
    if (inf) return false;
    if (o.inf) return true;
    return v < o.v;
  }
  bool operator==(const ExtRat& o) const {
    return inf == o.inf && (inf || v == o.v);
  }
};

inline ExtRat ext_min(const ExtRat& a, const ExtRat& b) { return a < b ? a : b; }

}  // namespace gflow
