#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "detwalk/analysis.hpp"
#include "detwalk/chain.hpp"
#include "detwalk/engine.hpp"
#include "detwalk/mixing.hpp"
#include "detwalk/router.hpp"

namespace detwalk {

using nlohmann::json;

// Chain file format: {"n": N, "rows": [[[v, p], ...], ...]}, 0-based indices.

inline json chain_json(const TransitionMatrix& P) {
  json rows = json::array();
  for (int v = 0; v < P.size(); ++v) {
    json row = json::array();
    for (const Arc& a : P.row(v)) row.push_back(json::array({a.to, a.p}));
    rows.push_back(std::move(row));
  }
  return json{{"n", P.size()}, {"rows", std::move(rows)}};
}

/// Parses the chain format and enforces row sums within 1e-9.
inline TransitionMatrix chain_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("rows"))
    throw std::invalid_argument("chain json: missing \"n\" or \"rows\"");
  const int n = j.at("n").get<int>();
  const auto& jrows = j.at("rows");
  if (static_cast<int>(jrows.size()) != n)
    throw std::invalid_argument("chain json: rows count != n");
  std::vector<std::vector<Arc>> rows(n);
  for (int v = 0; v < n; ++v) {
    for (const auto& e : jrows[v]) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("chain json: row " + std::to_string(v) +
                                    " entry is not a [v, p] pair");
      rows[v].push_back({e[0].get<int>(), e[1].get<double>()});
    }
  }
  TransitionMatrix P = TransitionMatrix::from_rows(n, std::move(rows));
  for (int v = 0; v < n; ++v) {
    const double s = P.row_sum(v);
    if (std::abs(s - 1.0) > kRowSumTolerance)
      throw std::invalid_argument("chain json: row " + std::to_string(v) + " sums to " +
                                  std::to_string(s));
  }
  return P;
}

inline TransitionMatrix load_chain_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file: " + path);
  json j;
  in >> j;
  return chain_from_json(j);
}

inline void save_chain_json(const TransitionMatrix& P, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chain file: " + path);
  out << chain_json(P).dump(2) << "\n";
}

inline void save_labels_json(const std::vector<std::string>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write labels file: " + path);
  out << json(labels).dump(2) << "\n";
}

// Router state dump, for debugging: {"v": v, "served": i, "counts": {u: c}}.

inline json router_state_json(const Router& r) {
  json counts = json::object();
  for (int u : r.neighbors()) counts[std::to_string(u)] = r.count(u);
  return json{{"v", r.vertex()}, {"served", r.total_served()}, {"counts", std::move(counts)}};
}

// Profile export: {"pi": [...], "tau": {"0.25": t*, ...}, "h": [...],
// "h_bar": [...]}; unreached tau entries are null and listed in "truncated".

inline json profile_json(const ChainProfile& prof) {
  json tau = json::object();
  json truncated = json::array();
  char key[32];
  for (const auto& [eps, t] : prof.tau) {
    std::snprintf(key, sizeof key, "%g", eps);
    if (t)
      tau[key] = *t;
    else {
      tau[key] = nullptr;
      truncated.push_back(key);
    }
  }
  json out{{"pi", prof.pi.values()},
           {"tau", std::move(tau)},
           {"h", prof.h},
           {"h_bar", prof.h_bar},
           {"t_max", prof.t_max},
           {"delta_max", prof.delta_max}};
  if (prof.t_star)
    out["t_star"] = *prof.t_star;
  else
    out["t_star"] = nullptr;
  if (!truncated.empty()) out["truncated"] = std::move(truncated);
  return out;
}

// Trace export (CSV): t, vertex, chi, mu, abs_discrepancy.

inline void write_trace_csv(const TokenTrace& trace, std::ostream& out) {
  out << "t,vertex,chi,mu,abs_discrepancy\n";
  char buf[64];
  for (std::size_t t = 0; t < trace.chi.size(); ++t) {
    for (std::size_t v = 0; v < trace.chi[t].size(); ++v) {
      const double mu = trace.mu[t][v];
      const double d = std::abs(static_cast<double>(trace.chi[t][v]) - mu);
      out << t << ',' << v << ',' << trace.chi[t][v] << ',';
      std::snprintf(buf, sizeof buf, "%.17g", mu);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out << buf << '\n';
    }
  }
}

inline void write_trace_csv(const TokenTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  write_trace_csv(trace, out);
}

// Per-time discrepancy maxima (CSV): t, max_abs_discrepancy.

inline void write_per_time_csv(const DiscrepancyReport& rep, std::ostream& out) {
  out << "t,max_abs_discrepancy\n";
  char buf[64];
  for (std::size_t t = 0; t < rep.per_time_max.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", rep.per_time_max[t]);
    out << t << ',' << buf << '\n';
  }
}

inline void write_per_time_csv(const DiscrepancyReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write per-time file: " + path);
  write_per_time_csv(rep, out);
}

// Run summary: {"T", "M", "psi_measured", "max_discrepancy", "bound",
// "bound_satisfied", "bounds": {name: {value, satisfied}}}.

inline json summary_json(const TokenTrace& trace, const DiscrepancyReport& rep,
                         const std::string& primary_bound) {
  json bounds = json::object();
  for (const auto& [name, entry] : rep.bounds)
    bounds[name] = json{{"value", entry.value}, {"satisfied", entry.satisfied}};
  json out{{"T", trace.steps()},
           {"M", trace.tokens},
           {"psi_measured", rep.psi_measured},
           {"max_discrepancy", rep.global_max},
           {"bounds", std::move(bounds)}};
  if (auto it = rep.bounds.find(primary_bound); it != rep.bounds.end()) {
    out["bound"] = it->second.value;
    out["bound_satisfied"] = it->second.satisfied;
  } else {
    out["bound"] = nullptr;
    out["bound_satisfied"] = nullptr;
  }
  return out;
}

}  // namespace detwalk
