// Copyright 2026 The otlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

#include "errors.hpp"
#include "netsimplex.hpp"

namespace otlab {

namespace {

constexpr double kCostScale = 4294967296.0;  // 2^32

int64_t integer_cost(double dpow) {
  return int64_t(std::llround(dpow * kCostScale));
}

struct Filtered {
  std::vector<double> weights;
  std::vector<uint32_t> orig;
};

Filtered drop_zero_weights(const DiscreteMeasure& m) {
  Filtered out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] > 0.0) {
      out.weights.push_back(m.weights[i]);
      out.orig.push_back(uint32_t(i));
    }
  }
  return out;
}

}  // namespace

ExactResult exact_wp(const GroundSpace& space, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, double p,
                     const SolverLimits& limits) {
  if (mu.dim != space.dim || nu.dim != space.dim) {
    throw InputError("transport: measure dimension does not match the space");
  }
  validate_exponent(p);

  const Filtered fm = drop_zero_weights(mu);
  const Filtered fn = drop_zero_weights(nu);
  const size_t n1 = fm.orig.size();
  const size_t n2 = fn.orig.size();
  if (n1 == 0 || n2 == 0) throw InputError("transport: marginal has no mass");
  if (n1 > (size_t(1) << 31) / n2) {
    throw CapacityError("transport: instance exceeds the pair budget");
  }

  auto dpow = [&](size_t i, size_t j) {
    return distance_pow(space, mu.atom(fm.orig[i]), nu.atom(fn.orig[j]), p);
  };

  NetSimplex ns(fm.weights, fn.weights);
  std::vector<bool> present(n1 * n2, false);
  SolveStats stats;

  auto add_pair = [&](size_t i, size_t j) {
    const size_t key = i * n2 + j;
    if (present[key]) return;
    if (ns.candidate_arc_count() >= limits.max_candidate_arcs) {
      throw CapacityError("transport: candidate arc cap exceeded");
    }
    present[key] = true;
    ns.add_arc(uint32_t(i), uint32_t(j), integer_cost(dpow(i, j)));
  };

  if (n1 * n2 <= limits.dense_threshold) {
    for (size_t i = 0; i < n1; ++i) {
      for (size_t j = 0; j < n2; ++j) add_pair(i, j);
    }
    ns.solve();
    stats.pricing_rounds = 1;
  } else {
    // Seed a restricted arc set with nearest neighbors in both directions.
    {
      const size_t k_src = std::min<size_t>(size_t(std::max(1, limits.knn)), n2);
      const size_t k_snk = std::min<size_t>(size_t(std::max(1, limits.knn / 4)), n1);
      std::priority_queue<std::pair<double, uint32_t>> heap;
      for (size_t i = 0; i < n1; ++i) {
        for (size_t j = 0; j < n2; ++j) {
          const double d = dpow(i, j);
          if (heap.size() < k_src) {
            heap.push({d, uint32_t(j)});
          } else if (d < heap.top().first) {
            heap.pop();
            heap.push({d, uint32_t(j)});
          }
        }
        while (!heap.empty()) {
          add_pair(i, heap.top().second);
          heap.pop();
        }
      }
      for (size_t j = 0; j < n2; ++j) {
        for (size_t i = 0; i < n1; ++i) {
          const double d = dpow(i, j);
          if (heap.size() < k_snk) {
            heap.push({d, uint32_t(i)});
          } else if (d < heap.top().first) {
            heap.pop();
            heap.push({d, uint32_t(i)});
          }
        }
        while (!heap.empty()) {
          add_pair(heap.top().second, j);
          heap.pop();
        }
      }
    }

    // Solve the restricted problem, then price every absent pair against the
    // optimal potentials; a clean pass certifies optimality for the full
    // bipartite graph.
    std::vector<int64_t> pot_sink(n2);
    std::vector<std::tuple<int64_t, uint32_t, uint32_t>> violated;
    const size_t add_cap = std::max<size_t>(65536, 4 * (n1 + n2));
    for (int round = 1;; ++round) {
      if (round > 60) {
        throw InternalError("transport: pricing failed to converge");
      }
      ns.solve();
      stats.pricing_rounds = round;

      violated.clear();
      for (size_t j = 0; j < n2; ++j) pot_sink[j] = ns.potential(n1 + j);
      for (size_t i = 0; i < n1; ++i) {
        const int64_t pot_i = ns.potential(i);
        for (size_t j = 0; j < n2; ++j) {
          const int64_t diff = pot_i - pot_sink[j];
          if (diff <= 0) continue;  // nonnegative cost keeps rc >= 0
          const double dp = dpow(i, j);
          if (dp * kCostScale >= double(diff) + 2.0) continue;
          const int64_t c = integer_cost(dp);
          if (c >= diff) continue;
          if (present[i * n2 + j]) continue;
          violated.emplace_back(c - diff, uint32_t(i), uint32_t(j));
          if (violated.size() > 2 * add_cap) {
            std::nth_element(violated.begin(), violated.begin() + add_cap,
                             violated.end());
            violated.resize(add_cap);
          }
        }
      }
      if (violated.empty()) break;
      if (violated.size() > add_cap) {
        std::nth_element(violated.begin(), violated.begin() + add_cap,
                         violated.end());
        violated.resize(add_cap);
      }
      for (const auto& [rc, i, j] : violated) {
        (void)rc;
        add_pair(i, j);
      }
    }
  }

  ns.extract_flows();
  if (ns.max_artificial_flow() > 1e-9) {
    throw InternalError("transport: solver left unmet mass");
  }

  ExactResult out;
  double vpow = 0.0;
  ns.for_each_flow([&](uint32_t i, uint32_t j, double mass, int64_t) {
    out.plan.push_back({fm.orig[i], fn.orig[j], mass});
    vpow += mass * dpow(i, j);
  });
  out.value_pow = vpow;
  out.value = p == 1.0 ? vpow : std::pow(vpow, 1.0 / p);
  stats.pivots = ns.pivot_count();
  stats.arcs_used = ns.candidate_arc_count();

  if (limits.want_dual) {
    // Descale the potentials, tighten by two conjugations, and shift so the
    // largest value on the source side is exactly 1.
    std::vector<double> f1(n1);
    {
      std::vector<double> f0(n1), g1(n2);
      for (size_t i = 0; i < n1; ++i) f0[i] = double(ns.potential(i)) / kCostScale;
      for (size_t j = 0; j < n2; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n1; ++i) best = std::max(best, f0[i] - dpow(i, j));
        g1[j] = best;
      }
      for (size_t i = 0; i < n1; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < n2; ++j) best = std::min(best, g1[j] + dpow(i, j));
        f1[i] = best;
      }
    }
    const double shift = 1.0 - *std::max_element(f1.begin(), f1.end());
    for (double& v : f1) v = std::min(1.0, std::max(0.0, v + shift));

    std::vector<double> g(n2);
    for (size_t j = 0; j < n2; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < n1; ++i) best = std::max(best, f1[i] - dpow(i, j));
      g[j] = std::min(1.0, std::max(0.0, best));
    }

    out.dual.f.assign(mu.size(), 0.0);
    out.dual.fc.assign(nu.size(), 0.0);
    for (size_t i = 0; i < n1; ++i) out.dual.f[fm.orig[i]] = f1[i];
    for (size_t j = 0; j < n2; ++j) out.dual.fc[fn.orig[j]] = g[j];
    // Atoms with zero weight still get the tightest consistent values.
    for (size_t i = 0; i < mu.size(); ++i) {
      if (mu.weights[i] > 0.0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < n2; ++j) {
        best = std::min(best, g[j] + distance_pow(space, mu.atom(i),
                                                  nu.atom(fn.orig[j]), p));
      }
      out.dual.f[i] = std::min(1.0, std::max(0.0, best));
    }
    for (size_t j = 0; j < nu.size(); ++j) {
      if (nu.weights[j] > 0.0) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < n1; ++i) {
        best = std::max(best, f1[i] - distance_pow(space, mu.atom(fm.orig[i]),
                                                   nu.atom(j), p));
      }
      out.dual.fc[j] = std::min(1.0, std::max(0.0, best));
    }

    double obj = 0.0;
    for (size_t i = 0; i < mu.size(); ++i) obj += mu.weights[i] * out.dual.f[i];
    for (size_t j = 0; j < nu.size(); ++j) obj -= nu.weights[j] * out.dual.fc[j];
    out.dual.objective = obj;
    stats.duality_gap = std::abs(vpow - obj);
  } else {
    double obj = 0.0;
    for (size_t i = 0; i < n1; ++i) {
      obj += fm.weights[i] * double(ns.potential(i)) / kCostScale;
    }
    for (size_t j = 0; j < n2; ++j) {
      obj -= fn.weights[j] * double(ns.potential(n1 + j)) / kCostScale;
    }
    stats.duality_gap = std::abs(vpow - obj);
  }

  out.stats = stats;
  return out;
}

double brute_force_wp(const GroundSpace& space, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu, double p) {
  if (mu.dim != space.dim || nu.dim != space.dim) {
    throw InputError("transport: measure dimension does not match the space");
  }
  validate_exponent(p);
  const size_t n = mu.size();
  if (n != nu.size()) {
    throw InputError("brute force: atom counts must match");
  }
  if (n == 0 || n > 8) {
    throw CapacityError("brute force: atom count must be between 1 and 8");
  }
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(mu.weights[i] - 1.0 / double(n)) > 1e-12 ||
        std::abs(nu.weights[i] - 1.0 / double(n)) > 1e-12) {
      throw InputError("brute force: uniform weights required");
    }
  }
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t(0));
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (size_t i = 0; i < n; ++i) {
      cost += distance_pow(space, mu.atom(i), nu.atom(perm[i]), p);
    }
    best = std::min(best, cost / double(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return p == 1.0 ? best : std::pow(best, 1.0 / p);
}

std::vector<double> c_transform_max(const GroundSpace& space, double p,
                                    const std::vector<double>& values,
                                    const DiscreteMeasure& from,
                                    const DiscreteMeasure& to) {
  if (values.size() != from.size()) {
    throw InputError("c_transform: value count does not match atoms");
  }
  std::vector<double> out(to.size());
  for (size_t j = 0; j < to.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < from.size(); ++i) {
      best = std::max(best,
                      values[i] - distance_pow(space, from.atom(i), to.atom(j), p));
    }
    out[j] = best;
  }
  return out;
}

std::vector<double> c_transform_min(const GroundSpace& space, double p,
                                    const std::vector<double>& values,
                                    const DiscreteMeasure& from,
                                    const DiscreteMeasure& to) {
  if (values.size() != to.size()) {
    throw InputError("c_transform: value count does not match atoms");
  }
  std::vector<double> out(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < to.size(); ++j) {
      best = std::min(best,
                      values[j] + distance_pow(space, from.atom(i), to.atom(j), p));
    }
    out[i] = best;
  }
  return out;
}

double plan_cost_pow(const GroundSpace& space, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu,
                     const std::vector<PlanEntry>& plan, double p) {
  double acc = 0.0;
  for (const PlanEntry& e : plan) {
    if (e.source >= mu.size() || e.target >= nu.size()) {
      throw InputError("plan entry indexes a missing atom");
    }
    acc += e.mass * distance_pow(space, mu.atom(e.source), nu.atom(e.target), p);
  }
  return acc;
}

double plan_marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const std::vector<PlanEntry>& plan) {
  std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
  for (const PlanEntry& e : plan) {
    if (e.source >= mu.size() || e.target >= nu.size()) {
      throw InputError("plan entry indexes a missing atom");
    }
    row[e.source] += e.mass;
    col[e.target] += e.mass;
  }
  double err = 0.0;
  for (size_t i = 0; i < mu.size(); ++i) {
    err = std::max(err, std::abs(row[i] - mu.weights[i]));
  }
  for (size_t j = 0; j < nu.size(); ++j) {
    err = std::max(err, std::abs(col[j] - nu.weights[j]));
  }
  return err;
}

DyadicBound dyadic_upper_bound(const DyadicPartition& partition,
                               const CellHistogram& mu_hist,
                               const CellHistogram& nu_hist, double p) {
  validate_exponent(p);
  const int depth = partition.depth();
  if (mu_hist.depth != depth || nu_hist.depth != depth) {
    throw InputError("dyadic bound: histogram depth does not match partition");
  }
  DyadicBound out;
  out.level_terms.resize(depth);
  out.residual_term = std::pow(partition.level_diameter_bound(depth), p);
  double acc = out.residual_term;
  for (int k = 1; k <= depth; ++k) {
    const double parent_diam =
        k == 1 ? 1.0 : partition.level_diameter_bound(k - 1);
    const auto& mh = mu_hist.level(k);
    const auto& nh = nu_hist.level(k);
    double discrepancy = 0.0;
    for (const auto& [key, w] : mh) {
      const auto it = nh.find(key);
      discrepancy += std::abs(w - (it == nh.end() ? 0.0 : it->second));
    }
    for (const auto& [key, v] : nh) {
      if (mh.find(key) == mh.end()) discrepancy += v;
    }
    out.level_terms[k - 1] = std::pow(parent_diam, p) * discrepancy;
    acc += out.level_terms[k - 1];
  }
  out.bound_pow = acc;
  out.bound = p == 1.0 ? acc : std::pow(acc, 1.0 / p);
  return out;
}

CouplingResult dyadic_coupling(const DyadicPartition& partition,
                               const GroundSpace& space,
                               const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, double p,
                               size_t max_entries) {
  validate_exponent(p);
  if (mu.dim != partition.dim() || nu.dim != partition.dim() ||
      mu.dim != space.dim) {
    throw InputError("dyadic coupling: dimension mismatch");
  }
  const int depth = partition.depth();
  const size_t nmu = mu.size(), nnu = nu.size();
  std::vector<uint64_t> mu_path(nmu * size_t(depth));
  std::vector<uint64_t> nu_path(nnu * size_t(depth));
  for (size_t i = 0; i < nmu; ++i) {
    partition.cell_path(mu.atom(i), mu_path.data() + i * size_t(depth));
  }
  for (size_t j = 0; j < nnu; ++j) {
    partition.cell_path(nu.atom(j), nu_path.data() + j * size_t(depth));
  }

  struct Share {
    uint32_t atom;
    double mass;
  };
  CouplingResult out;

  auto match_within = [&](std::vector<Share>& a, std::vector<Share>& b) {
    size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      const double m = std::min(a[ia].mass, b[ib].mass);
      if (m > 1e-18) {
        if (out.entries.size() >= max_entries) {
          throw CapacityError("dyadic coupling: entry cap exceeded");
        }
        out.entries.push_back({a[ia].atom, b[ib].atom, m});
        out.cost_pow +=
            m * distance_pow(space, mu.atom(a[ia].atom), nu.atom(b[ib].atom), p);
      }
      a[ia].mass -= m;
      b[ib].mass -= m;
      if (a[ia].mass <= 1e-18) ++ia;
      if (b[ib].mass <= 1e-18) ++ib;
    }
    double leftover = 0.0;
    for (; ia < a.size(); ++ia) leftover += a[ia].mass;
    for (; ib < b.size(); ++ib) leftover += b[ib].mass;
    if (leftover > 1e-9) {
      throw InternalError("dyadic coupling: unmatched mass inside a cell");
    }
  };

  std::function<void(int, std::vector<Share>&, std::vector<Share>&)> descend =
      [&](int level, std::vector<Share>& mus, std::vector<Share>& nus) {
        if (level == depth) {
          match_within(mus, nus);
          return;
        }
        std::map<uint64_t, std::pair<std::vector<Share>, std::vector<Share>>>
            children;
        for (const Share& s : mus) {
          children[mu_path[size_t(s.atom) * size_t(depth) + size_t(level)]]
              .first.push_back(s);
        }
        for (const Share& s : nus) {
          children[nu_path[size_t(s.atom) * size_t(depth) + size_t(level)]]
              .second.push_back(s);
        }
        std::vector<Share> excess_mu, excess_nu;
        for (auto& [key, pair] : children) {
          auto& [cm, cn] = pair;
          double wm = 0.0, wn = 0.0;
          for (const Share& s : cm) wm += s.mass;
          for (const Share& s : cn) wn += s.mass;
          const double common = std::min(wm, wn);
          if (common > 0.0) {
            const double keep_m = common / wm;
            const double keep_n = common / wn;
            std::vector<Share> dm, dn;
            dm.reserve(cm.size());
            dn.reserve(cn.size());
            for (const Share& s : cm) {
              dm.push_back({s.atom, s.mass * keep_m});
              if (keep_m < 1.0) excess_mu.push_back({s.atom, s.mass * (1.0 - keep_m)});
            }
            for (const Share& s : cn) {
              dn.push_back({s.atom, s.mass * keep_n});
              if (keep_n < 1.0) excess_nu.push_back({s.atom, s.mass * (1.0 - keep_n)});
            }
            descend(level + 1, dm, dn);
          } else {
            for (const Share& s : cm) excess_mu.push_back(s);
            for (const Share& s : cn) excess_nu.push_back(s);
          }
        }
        match_within(excess_mu, excess_nu);
      };

  std::vector<Share> all_mu, all_nu;
  all_mu.reserve(nmu);
  all_nu.reserve(nnu);
  for (size_t i = 0; i < nmu; ++i) {
    if (mu.weights[i] > 0.0) all_mu.push_back({uint32_t(i), mu.weights[i]});
  }
  for (size_t j = 0; j < nnu; ++j) {
    if (nu.weights[j] > 0.0) all_nu.push_back({uint32_t(j), nu.weights[j]});
  }
  descend(0, all_mu, all_nu);
  return out;
}

}  // namespace otlab
