#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detwalk/chain.hpp"

namespace detwalk {

enum class RouterKind { Srt, Billiard, QuasiRandom, Rotor, Scripted };

inline RouterKind router_kind_from_string(std::string_view s) {
  if (s == "srt") return RouterKind::Srt;
  if (s == "billiard") return RouterKind::Billiard;
  if (s == "vdc") return RouterKind::QuasiRandom;
  if (s == "rotor") return RouterKind::Rotor;
  throw std::invalid_argument("unknown router kind: " + std::string(s));
}

inline const char* router_kind_name(RouterKind k) {
  switch (k) {
    case RouterKind::Srt: return "srt";
    case RouterKind::Billiard: return "billiard";
    case RouterKind::QuasiRandom: return "vdc";
    case RouterKind::Rotor: return "rotor";
    case RouterKind::Scripted: return "scripted";
  }
  return "?";
}

/// Van der Corput value psi(i): the binary digits of i mirrored across the
/// radix point. Exactly representable for i < 2^52.
inline double van_der_corput(std::uint64_t i) {
  double r = 0.0;
  double f = 0.5;
  for (; i != 0; i >>= 1, f *= 0.5)
    if (i & 1u) r += f;
  return r;
}

/// |{i in [z0, z0+z) : psi(i) in [x, y)}| by direct enumeration.
inline std::int64_t vdc_window_count(std::uint64_t z0, std::uint64_t z, double x, double y) {
  if (!(x >= 0.0 && x < y && y <= 1.0))
    throw std::invalid_argument("vdc_window_count: need 0 <= x < y <= 1");
  if (z < 1) throw std::invalid_argument("vdc_window_count: z must be >= 1");
  std::int64_t c = 0;
  for (std::uint64_t i = z0; i < z0 + z; ++i) {
    const double p = van_der_corput(i);
    if (p >= x && p < y) ++c;
  }
  return c;
}

namespace detail {

/// Best rational approximation p/q of x with q <= max_den and |x - p/q| <= tol,
/// by the continued fraction of x. Returns {p, q} or throws when no convergent
/// within the denominator cap is close enough (irrational-looking input).
inline std::pair<std::int64_t, std::int64_t> approx_rational(double x, std::int64_t max_den,
                                                             double tol) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::invalid_argument("approx_rational: bad input");
  std::int64_t p0 = 1, q0 = 0, p1 = static_cast<std::int64_t>(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol)
      return {p1, q1};
    if (frac == 0.0) break;
    const double inv = 1.0 / frac;
    const double af = std::floor(inv);
    if (af > 9.2e18) break;
    const std::int64_t a = static_cast<std::int64_t>(af);
    frac = inv - af;
    // next convergent p2/q2 = a*p1 + p0 / a*q1 + q0, guarding overflow
    if (q1 > (max_den - q0) / std::max<std::int64_t>(a, 1)) break;
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
  }
  if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol) return {p1, q1};
  throw std::invalid_argument("approx_rational: no rational p/q with q <= " +
                              std::to_string(max_den) + " within tolerance");
}

}  // namespace detail

constexpr std::int64_t kMaxRotorDenominator = 1000000;

/// delta_bar(v): least common denominator of the row, by per-entry rational
/// reconstruction (denominator cap 10^6). The candidate is verified by the
/// integrality of delta_bar * P within 1e-9, which rejects irrational rows
/// whose continued fraction happens to admit a close convergent.
inline std::int64_t rotor_common_denominator(const std::vector<double>& probs) {
  std::int64_t l = 1;
  for (double p : probs) {
    std::int64_t den;
    try {
      den = detail::approx_rational(p, kMaxRotorDenominator, 1e-12).second;
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("rotor router: row entry " + std::to_string(p) +
                                  " is not rational within the denominator cap");
    }
    const std::int64_t g = std::gcd(l, den);
    if (l / g > kMaxRotorDenominator / den)
      throw std::invalid_argument("rotor router: common denominator exceeds cap " +
                                  std::to_string(kMaxRotorDenominator));
    l = l / g * den;
  }
  for (double p : probs) {
    const double scaled = static_cast<double>(l) * p;
    if (std::abs(scaled - std::round(scaled)) > 1e-9)
      throw std::invalid_argument("rotor router: delta_bar * P not integral within 1e-9");
  }
  return l;
}

/// Per-vertex serving state of a functional router sigma_v. Emissions are
/// indexed by total_served; counts track I_{v,u}[0, total_served). The four
/// analytic kinds derive each emission from the probability row; Scripted
/// replays a fixed sequence (used to inject known window counts).
class Router {
 public:
  Router(RouterKind kind, std::vector<int> neighbors, std::vector<double> probs,
         int vertex = -1)
      : kind_(kind), vertex_(vertex), neighbors_(std::move(neighbors)),
        probs_(std::move(probs)) {
    if (kind_ == RouterKind::Scripted)
      throw std::invalid_argument("Router: use Router::scripted for scripted routers");
    if (neighbors_.empty()) throw std::invalid_argument("Router: empty neighborhood");
    if (neighbors_.size() != probs_.size())
      throw std::invalid_argument("Router: neighbors/probs size mismatch");
    for (std::size_t i = 1; i < neighbors_.size(); ++i)
      if (neighbors_[i - 1] >= neighbors_[i])
        throw std::invalid_argument("Router: neighbor order must be strictly ascending");
    for (double p : probs_)
      if (!(p > 0.0)) throw std::invalid_argument("Router: probabilities must be positive");
    counts_.assign(neighbors_.size(), 0);
    if (kind_ == RouterKind::Rotor) build_rotor_table();
  }

  static Router for_vertex(RouterKind kind, const TransitionMatrix& P, int v) {
    return Router(kind, P.neighbors(v), P.row_probs(v), v);
  }

  /// Router that replays `emissions` (global neighbor ids) verbatim and then
  /// throws; counts and total_served behave as for the analytic kinds.
  static Router scripted(std::vector<int> emissions, int vertex = -1) {
    Router r;
    r.kind_ = RouterKind::Scripted;
    r.vertex_ = vertex;
    std::vector<int> ids = emissions;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) throw std::invalid_argument("Router::scripted: empty script");
    r.neighbors_ = ids;
    r.counts_.assign(ids.size(), 0);
    r.script_.reserve(emissions.size());
    for (int u : emissions) {
      const auto it = std::lower_bound(ids.begin(), ids.end(), u);
      r.script_.push_back(static_cast<int>(it - ids.begin()));
    }
    return r;
  }

  RouterKind kind() const { return kind_; }
  int vertex() const { return vertex_; }
  int degree() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors() const { return neighbors_; }
  const std::vector<double>& probs() const { return probs_; }
  std::int64_t total_served() const { return served_; }

  /// I_{v,u}[0, total_served) for a global neighbor id u (0 off-neighborhood).
  std::int64_t count(int u) const {
    const auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), u);
    if (it == neighbors_.end() || *it != u) return 0;
    return counts_[static_cast<std::size_t>(it - neighbors_.begin())];
  }

  std::int64_t count_at(int pos) const { return counts_[pos]; }

  /// delta_bar(v); only meaningful for the rotor kind.
  std::int64_t rotor_period() const { return static_cast<std::int64_t>(rotor_table_.size()); }

  /// Emits sigma_v(total_served) and advances; returns the position within
  /// neighbor order.
  int next_position() {
    int pos;
    switch (kind_) {
      case RouterKind::Srt: pos = srt_pick(); break;
      case RouterKind::Billiard: pos = billiard_pick(); break;
      case RouterKind::QuasiRandom: pos = vdc_pick(); break;
      case RouterKind::Rotor: pos = rotor_pick(); break;
      case RouterKind::Scripted:
        if (served_ >= static_cast<std::int64_t>(script_.size()))
          throw std::runtime_error("scripted router: script exhausted");
        pos = script_[served_];
        break;
      default: throw std::logic_error("Router: bad kind");
    }
    ++counts_[pos];
    ++served_;
    return pos;
  }

  /// Emits sigma_v(total_served) and advances; returns the neighbor id.
  int next() { return neighbors_[next_position()]; }

 private:
  Router() = default;

  // SRT rule: among T_i(v) = {u : I_{v,u}[0,i) - (i+1) P_{v,u} < 0}, pick the
  // smallest (I+1)/P. Ratios are compared cross-multiplied; ties keep the
  // lowest neighbor position.
  int srt_pick() const {
    const double next_i = static_cast<double>(served_ + 1);
    int best = -1;
    for (int pos = 0; pos < degree(); ++pos) {
      if (!(static_cast<double>(counts_[pos]) < next_i * probs_[pos])) continue;
      if (best < 0 ||
          static_cast<double>(counts_[pos] + 1) * probs_[best] <
              static_cast<double>(counts_[best] + 1) * probs_[pos])
        best = pos;
    }
    // sum(I - (i+1)P) = i - (i+1) < 0, so T_i is nonempty whenever counts are
    // consistent; an empty set means corrupted state.
    if (best < 0) throw std::runtime_error("srt router: empty candidate set (corrupt state)");
    return best;
  }

  int billiard_pick() const {
    int best = 0;
    for (int pos = 1; pos < degree(); ++pos)
      if (static_cast<double>(counts_[pos] + 1) * probs_[best] <
          static_cast<double>(counts_[best] + 1) * probs_[pos])
        best = pos;
    return best;
  }

  // psi(i) landing in the k-th cumulative probability interval selects u_k;
  // rounding shortfalls in the running sum route to the last neighbor.
  int vdc_pick() const {
    const double x = van_der_corput(static_cast<std::uint64_t>(served_));
    double cum = 0.0;
    for (int pos = 0; pos < degree(); ++pos) {
      cum += probs_[pos];
      if (x < cum) return pos;
    }
    return degree() - 1;
  }

  int rotor_pick() const {
    return rotor_table_[static_cast<std::size_t>(served_ % rotor_period())];
  }

  void build_rotor_table() {
    const std::int64_t den = rotor_common_denominator(probs_);
    std::vector<std::int64_t> mult(probs_.size());
    std::int64_t total = 0;
    for (std::size_t pos = 0; pos < probs_.size(); ++pos) {
      const double exact = static_cast<double>(den) * probs_[pos];
      mult[pos] = std::llround(exact);
      if (std::abs(exact - static_cast<double>(mult[pos])) > 1e-9)
        throw std::invalid_argument("rotor router: delta_bar * P not integral within 1e-9");
      total += mult[pos];
    }
    if (total != den)
      throw std::invalid_argument("rotor router: rounded multiplicities sum to " +
                                  std::to_string(total) + " != " + std::to_string(den));
    rotor_table_.reserve(den);
    // neighbors laid out consecutively in neighbor order
    for (std::size_t pos = 0; pos < mult.size(); ++pos)
      rotor_table_.insert(rotor_table_.end(), mult[pos], static_cast<int>(pos));
  }

  RouterKind kind_ = RouterKind::Srt;
  int vertex_ = -1;
  std::vector<int> neighbors_;
  std::vector<double> probs_;
  std::vector<std::int64_t> counts_;
  std::int64_t served_ = 0;
  std::vector<int> rotor_table_;
  std::vector<int> script_;
};

/// Definitional oracle for I_{v,u}[z, z'): replays a fresh router of the given
/// kind from emission 0 and counts serves to position u inside the window.
/// Slow by design; the incremental engine is tested against it.
inline std::int64_t interval_count(RouterKind kind, const std::vector<double>& row,
                                   std::int64_t z, std::int64_t z_prime, int u) {
  if (!(z >= 0 && z < z_prime))
    throw std::invalid_argument("interval_count: need 0 <= z < z'");
  if (u < 0 || u >= static_cast<int>(row.size()))
    throw std::invalid_argument("interval_count: u outside row");
  std::vector<int> ids(row.size());
  std::iota(ids.begin(), ids.end(), 0);
  Router r(kind, ids, row);
  std::int64_t c = 0;
  for (std::int64_t i = 0; i < z_prime; ++i) {
    const int pos = r.next_position();
    if (i >= z && pos == u) ++c;
  }
  return c;
}

}  // namespace detwalk
