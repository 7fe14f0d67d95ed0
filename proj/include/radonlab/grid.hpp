#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "numeric.hpp"

namespace radonlab {

// Complex symbol sampled at xi = (j_1/B_1, ..., j_d/B_d), row-major with the
// first Gamma coordinate slowest.
struct SampledMultiplier {
  std::vector<int> extents;
  std::vector<cplx> values;
  nlohmann::json metadata = nlohmann::json::object();

  SampledMultiplier() = default;
  SampledMultiplier(int d, int B) : extents(d, B) { allocate(); }
  explicit SampledMultiplier(std::vector<int> ext) : extents(std::move(ext)) { allocate(); }

  int d() const { return static_cast<int>(extents.size()); }
  int B() const { return extents.empty() ? 0 : extents[0]; }
  bool uniform() const {
    for (int e : extents)
      if (e != extents[0]) return false;
    return true;
  }
  size_t size() const { return values.size(); }

  size_t index(const std::vector<int64_t>& j) const {
    size_t idx = 0;
    for (int i = 0; i < d(); ++i) idx = idx * extents[i] + static_cast<size_t>(floor_mod(j[i], extents[i]));
    return idx;
  }
  std::vector<int64_t> multi_index(size_t idx) const {
    std::vector<int64_t> j(d());
    for (int i = d() - 1; i >= 0; --i) {
      j[i] = static_cast<int64_t>(idx % extents[i]);
      idx /= extents[i];
    }
    return j;
  }
  std::vector<double> point(size_t idx) const {
    auto j = multi_index(idx);
    std::vector<double> xi(d());
    for (int i = 0; i < d(); ++i) xi[i] = static_cast<double>(j[i]) / extents[i];
    return xi;
  }
  cplx& operator[](size_t i) { return values[i]; }
  const cplx& operator[](size_t i) const { return values[i]; }

  bool same_grid(const SampledMultiplier& o) const { return extents == o.extents; }

  SampledMultiplier operator*(const SampledMultiplier& o) const {
    require(same_grid(o), "SampledMultiplier: mismatched grids");
    SampledMultiplier r(*this);
    for (size_t i = 0; i < values.size(); ++i) r.values[i] *= o.values[i];
    return r;
  }

 private:
  void allocate() {
    size_t n = 1;
    for (int e : extents) {
      require(e >= 1, "grid extent must be >= 1");
      n *= static_cast<size_t>(e);
      guard(n <= (size_t(1) << 25), "grid exceeds the 2^25-point memory guard");
    }
    values.assign(n, cplx(0, 0));
  }
};

}  // namespace radonlab
