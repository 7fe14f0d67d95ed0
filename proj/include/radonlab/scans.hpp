#pragma once

#include <map>
#include <set>

#include "expsums.hpp"
#include "multipliers.hpp"

namespace radonlab {

// m_n(a/q + delta) for every a in (Z/q)^d at once: a residue histogram of
// K_n(y) e(delta . Q(y)) over Q(y) mod q, then a separable length-q DFT.
class ResidueMultiplier {
 public:
  ResidueMultiplier(PieceLattice L, const std::vector<int64_t>& qs) : L_(std::move(L)), qs_(qs) {
    for (int64_t q : qs_) {
      require(q >= 1 && q <= 4096, "ResidueMultiplier: q outside [1, 4096]");
      guard(std::pow(static_cast<double>(q), L_.d) <= 1e7, "ResidueMultiplier: q^d above 1e7");
      std::vector<uint32_t> idx(L_.size());
      for (size_t t = 0; t < L_.size(); ++t) {
        uint64_t u = 0;
        for (int i = 0; i < L_.d; ++i) u = u * q + static_cast<uint64_t>(floor_mod(L_.Q[t * L_.d + i], q));
        idx[t] = static_cast<uint32_t>(u);
      }
      index_.push_back(std::move(idx));
      std::vector<cplx> w(q);
      for (int64_t r = 0; r < q; ++r) w[r] = unit_phase(static_cast<long double>(r) / q);
      roots_.push_back(std::move(w));
    }
  }

  const std::vector<int64_t>& denominators() const { return qs_; }
  int d() const { return L_.d; }

  // out[i][a] with a row-major over (Z/q_i)^d
  void evaluate(const std::vector<double>& delta, std::vector<std::vector<cplx>>& out) const {
    const int d = L_.d;
    require(static_cast<int>(delta.size()) == d, "ResidueMultiplier: delta has wrong length");
    std::vector<cplx> w(L_.size());
    for (size_t t = 0; t < L_.size(); ++t) {
      long double ph = 0;
      for (int i = 0; i < d; ++i) ph += frac_product(delta[i], L_.Q[t * d + i]);
      w[t] = L_.K[t] * unit_phase(ph);
    }
    out.resize(qs_.size());
    for (size_t k = 0; k < qs_.size(); ++k) {
      const int64_t q = qs_[k];
      size_t n = 1;
      for (int i = 0; i < d; ++i) n *= q;
      std::vector<cplx> H(n, cplx(0, 0));
      for (size_t t = 0; t < L_.size(); ++t) H[index_[k][t]] += w[t];
      // axis-by-axis DFT with exact root indices
      std::vector<cplx> line(q);
      size_t stride = 1;
      for (int ax = d - 1; ax >= 0; --ax) {
        for (size_t base = 0; base < n; ++base) {
          if ((base / stride) % q != 0) continue;
          for (int64_t u = 0; u < q; ++u) line[u] = H[base + u * stride];
          for (int64_t a = 0; a < q; ++a) {
            cplx s = 0;
            int64_t r = 0;
            for (int64_t u = 0; u < q; ++u) {
              s += line[u] * roots_[k][r];
              r += a;
              if (r >= q) r -= q;
            }
            H[base + a * stride] = s;
          }
        }
        stride *= q;
      }
      out[k] = std::move(H);
    }
  }

 private:
  PieceLattice L_;
  std::vector<int64_t> qs_;
  std::vector<std::vector<uint32_t>> index_;
  std::vector<std::vector<cplx>> roots_;
};

// ---- l^2 decay of the Delta-weighted pieces ----

struct DecayConfig {
  int smax = 4, jmax = 6;
  double chi = 0.5;
  int l = 2;
  double rho = 0.05;
  uint64_t qcap = 25;
  int window = 3;            // n = n_lo .. n_lo + window - 1
  int radii = 8, angles = 24;  // polar grid on each scaled ring
  int eta_resolution = 4096;

  nlohmann::json to_json() const {
    return {{"smax", smax}, {"jmax", jmax}, {"chi", chi}, {"l", l}, {"rho", rho}, {"qcap", qcap},
            {"window", window}, {"radii", radii}, {"angles", angles}};
  }
};

struct DecayCell {
  int s = 0, j = 0, n_lo = 0, n_hi = 0;
  double D = 0;
  size_t arcs = 0;
  bool disjoint = true;  // every (n, shell) ring family has disjoint supports
  int64_t arg_q = 1;
  std::vector<int64_t> arg_a;
  std::vector<double> arg_delta;
};

struct DecayTable {
  DecayConfig config;
  std::vector<DecayCell> cells;  // s-major, j from -jmax to jmax

  const DecayCell& at(int s, int j) const { return cells.at(static_cast<size_t>(s * (2 * config.jmax + 1) + j + config.jmax)); }
};

inline int decay_n_lo(int s, int j, double chi) {
  int n = std::max({j, s + 1, 1});
  if (j < 0) n = std::max(n, static_cast<int>(std::ceil(-j / chi - 1e-9)));
  return n;
}

// D(s, j) = max over xi of sum_{n >= n_lo} |m_n(xi)|^2 Delta_{n,s}^{j,2}(xi)^2, with xi
// on polar grids of the rings |2^{nA + jI}(xi - a/q)| in (r_in/2, r_out) around every arc
// of the shell, and the n-sum truncated to `window` terms.
inline DecayTable l2_decay_table(const CZKernel& K, const MultiIndexSet& G, const DecayConfig& C,
                                 const std::function<void(const DecayCell&)>& progress = nullptr) {
  require(G.k() == K.k, "l2_decay_table: kernel and Gamma disagree on k");
  require(C.chi > 0 && C.chi < 1, "l2_decay_table: chi must lie in (0, 1)");
  require(C.window >= 1 && C.radii >= 1 && C.angles >= 4, "l2_decay_table: bad grid parameters");
  const int d = G.d();
  ArcFamilyParams P;
  P.chi = C.chi;
  P.l = C.l;
  P.rho = C.rho;
  P.qcap = C.qcap;
  P.eta_resolution = C.eta_resolution;
  check_relation(P);
  auto eta = build_eta(d, C.eta_resolution);
  const auto deg = G.degrees();

  int nmax_all = 1;
  for (int s = 0; s <= C.smax; ++s)
    for (int j = -C.jmax; j <= C.jmax; ++j) nmax_all = std::max(nmax_all, decay_n_lo(s, j, C.chi) + C.window - 1);
  DyadicDecomposition D(K, nmax_all);

  // shells grouped by denominator
  std::vector<std::vector<Arc>> shell(C.smax + 1);
  std::vector<FractionSet> shell_set;
  std::set<int64_t> qset;
  for (int s = 0; s <= C.smax; ++s) {
    shell_set.push_back(arc_shell(s, P, G));
    shell[s] = arcs_of(shell_set.back());
    for (auto& A : shell[s]) qset.insert(A.q);
  }
  std::vector<int64_t> qs(qset.begin(), qset.end());
  std::map<int64_t, size_t> qpos;
  for (size_t i = 0; i < qs.size(); ++i) qpos[qs[i]] = i;

  std::map<int, ResidueMultiplier> R;
  auto residue = [&](int n) -> const ResidueMultiplier& {
    auto it = R.find(n);
    if (it == R.end()) it = R.emplace(n, ResidueMultiplier(piece_lattice(D.piece(n), G), qs)).first;
    return it->second;
  };

  DecayTable T;
  T.config = C;
  T.cells.resize(static_cast<size_t>((C.smax + 1) * (2 * C.jmax + 1)));
  const double r_lo = eta->r_in() / 2, r_hi = eta->r_out();

  for (int j = -C.jmax; j <= C.jmax; ++j) {
    int u_lo = INT32_MAX, u_hi = 0;
    for (int s = 0; s <= C.smax; ++s) {
      u_lo = std::min(u_lo, decay_n_lo(s, j, C.chi));
      u_hi = std::max(u_hi, decay_n_lo(s, j, C.chi) + C.window - 1);
    }
    // profiles and exact neighbour sums where ring supports overlap
    struct Slot {
      bool active = false, disjoint = true;
      ArcProfile prof;
      std::unique_ptr<ArcSum> sum;
    };
    std::vector<std::vector<Slot>> slot(C.smax + 1);
    for (int s = 0; s <= C.smax; ++s) {
      slot[s].resize(u_hi + 1);
      auto& cell = T.cells[static_cast<size_t>(s * (2 * C.jmax + 1) + j + C.jmax)];
      cell.s = s, cell.j = j, cell.n_lo = decay_n_lo(s, j, C.chi), cell.n_hi = cell.n_lo + C.window - 1;
      cell.arcs = shell[s].size();
      for (int n = cell.n_lo; n <= cell.n_hi; ++n) {
        Slot& sl = slot[s][n];
        sl.active = !shell[s].empty();
        if (!sl.active) continue;
        sl.prof = delta_profile(n, s, j, 2, G, P);
        sl.disjoint = support_disjointness_check(shell_set[s], arc_scaling_dyadic(n, j, G, true), *eta);
        if (!sl.disjoint) {
          sl.sum = std::make_unique<ArcSum>(shell[s], sl.prof);
          cell.disjoint = false;
        }
      }
    }

    std::vector<std::vector<double>> acc(C.smax + 1);
    for (int s = 0; s <= C.smax; ++s) acc[s].assign(shell[s].size(), 0.0);
    std::vector<std::vector<cplx>> mvals;
    std::vector<double> delta(d), z(d);

    for (int n0 = u_lo; n0 <= u_hi; ++n0) {
      for (int ir = 0; ir < C.radii; ++ir) {
        const double r = r_lo + (r_hi - r_lo) * (ir + 0.5) / C.radii;
        for (int ia = 0; ia < C.angles; ++ia) {
          // directions on the unit sphere: a circle for d = 2, the first two axes otherwise
          const double th = 2 * M_PI * (ia + 0.5) / C.angles;
          std::fill(z.begin(), z.end(), 0.0);
          z[0] = r * std::cos(th);
          if (d > 1) z[1] = r * std::sin(th);
          for (int i = 0; i < d; ++i) delta[i] = std::ldexp(z[i], -(n0 * deg[i] + j));
          for (auto& v : acc)
            std::fill(v.begin(), v.end(), 0.0);
          for (int n = u_lo; n <= u_hi; ++n) {
            bool any = false;
            std::vector<double> own(C.smax + 1, 0.0);
            for (int s = 0; s <= C.smax; ++s) {
              if (!slot[s][n].active) continue;
              own[s] = slot[s][n].prof.value(delta.data());
              any = any || own[s] != 0 || !slot[s][n].disjoint;
            }
            if (!any) continue;
            residue(n).evaluate(delta, mvals);
            for (int s = 0; s <= C.smax; ++s) {
              const Slot& sl = slot[s][n];
              if (!sl.active || (sl.disjoint && own[s] == 0)) continue;
              for (size_t t = 0; t < shell[s].size(); ++t) {
                const Arc& A = shell[s][t];
                double w = sl.disjoint ? own[s] : (*sl.sum)(A, delta);
                if (w == 0) continue;
                size_t ai = 0;
                for (int i = 0; i < d; ++i) ai = ai * A.q + static_cast<size_t>(A.a[i]);
                acc[s][t] += std::norm(mvals[qpos[A.q]][ai]) * w * w;
              }
            }
          }
          for (int s = 0; s <= C.smax; ++s) {
            auto& cell = T.cells[static_cast<size_t>(s * (2 * C.jmax + 1) + j + C.jmax)];
            for (size_t t = 0; t < shell[s].size(); ++t)
              if (acc[s][t] > cell.D) {
                cell.D = acc[s][t];
                cell.arg_q = shell[s][t].q;
                cell.arg_a = shell[s][t].a;
                cell.arg_delta = delta;
              }
          }
        }
      }
    }
    if (progress)
      for (int s = 0; s <= C.smax; ++s) progress(T.at(s, j));
  }
  return T;
}

// ---- minor arcs ----

struct MinorArcRow {
  int n = 0;
  double max_off = 0;  // max |m_n| over grid points with Xi_n < 1/2
  double max_on = 0;
  size_t on_points = 0, arcs = 0;
  std::vector<double> argmax;
};

inline std::vector<MinorArcRow> minor_arc_scan(const CZKernel& K, const MultiIndexSet& G, int n_lo, int n_hi,
                                               const std::vector<int>& extents, const ArcFamilyParams& P) {
  require(n_lo >= 1 && n_lo <= n_hi, "minor_arc_scan: need 1 <= n_lo <= n_hi");
  DyadicDecomposition D(K, n_hi);
  std::vector<MinorArcRow> rows;
  for (int n = n_lo; n <= n_hi; ++n) {
    auto m = multiplier_mn_grid(piece_lattice(D.piece(n), G), extents);
    auto X = xi_projection(n, G, extents, P);
    MinorArcRow r;
    r.n = n;
    r.arcs = arc_set(int_pow(n, P.l), P, G).size();
    size_t arg = 0;
    for (size_t i = 0; i < m.size(); ++i) {
      double a = std::abs(m.values[i]);
      if (X.values[i].real() < 0.5) {
        if (a > r.max_off) r.max_off = a, arg = i;
      } else {
        r.max_on = std::max(r.max_on, a);
        ++r.on_points;
      }
    }
    r.argmax = m.point(arg);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace radonlab
