#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "lruttl/density.hpp"
#include "lruttl/distributions.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/numeric.hpp"

namespace lruttl {

// p_i = i^-alpha / sum_j j^-alpha, already in nonincreasing order.
inline std::vector<double> zipf_popularity(std::size_t n, double alpha) {
  if (n == 0) throw ConfigError("catalog size must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("zipf exponent must be >= 0");
  std::vector<double> p(n);
  CompensatedSum s;
  // Accumulate smallest terms first.
  for (std::size_t k = n; k-- > 0;) {
    p[k] = std::pow(static_cast<double>(k + 1), -alpha);
    s += p[k];
  }
  const double z = s.value();
  for (double& v : p) v /= z;
  return p;
}

struct ZipfLaw {
  double alpha = 0.8;
};

struct DensityLaw {
  PopularityDensity f;
};

using PopularityLaw = std::variant<ZipfLaw, DensityLaw>;

// Normalized popularity vector of a law at catalog size n. Density laws use
// the midpoint grid z_i = (i - 1/2) / n.
inline std::vector<double> popularity_weights(const PopularityLaw& law, std::size_t n) {
  if (const auto* z = std::get_if<ZipfLaw>(&law)) return zipf_popularity(n, z->alpha);
  if (n == 0) throw ConfigError("catalog size must be at least 1");
  const auto& f = std::get<DensityLaw>(law).f;
  std::vector<double> p(n);
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = f((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    if (!(p[i] > 0.0)) throw ConfigError("density law gives zero popularity to content " + std::to_string(i + 1));
    s += p[i];
  }
  const double z = s.value();
  for (double& v : p) v /= z;
  return p;
}

// A system of n contents: per-content request rates and inter-request
// distributions, popularities p_i = lambda_i / Lambda, the popularity order
// and the tail sums P(i) = sum_{k > i} p_(k) of the sorted popularities.
class ContentCatalog {
 public:
  ContentCatalog(std::vector<InterRequestDistribution> dists, std::vector<std::size_t> class_of = {})
      : dists_(std::move(dists)), class_of_(std::move(class_of)) {
    const std::size_t n = dists_.size();
    if (n == 0) throw ConfigError("catalog must contain at least one content");
    if (class_of_.empty()) class_of_.assign(n, 0);
    if (class_of_.size() != n) throw ConfigError("class assignment length differs from catalog size");
    rates_.resize(n);
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i) {
      rates_[i] = dists_[i].rate();
      total += rates_[i];
    }
    total_rate_ = total.value();
    popularity_.resize(n);
    for (std::size_t i = 0; i < n; ++i) popularity_[i] = rates_[i] / total_rate_;

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [this](std::size_t a, std::size_t b) { return popularity_[a] > popularity_[b]; });

    tail_.assign(n + 1, 0.0);
    CompensatedSum run;
    for (std::size_t k = n; k-- > 0;) {
      run += popularity_[order_[k]];
      tail_[k] = run.value();
    }
  }

  std::size_t size() const noexcept { return dists_.size(); }
  double rate(std::size_t i) const { return rates_.at(i); }
  double popularity(std::size_t i) const { return popularity_.at(i); }
  const InterRequestDistribution& dist(std::size_t i) const { return dists_.at(i); }
  std::size_t class_of(std::size_t i) const { return class_of_.at(i); }
  double total_rate() const noexcept { return total_rate_; }

  const std::vector<double>& rates() const noexcept { return rates_; }
  const std::vector<double>& popularities() const noexcept { return popularity_; }
  const std::vector<InterRequestDistribution>& dists() const noexcept { return dists_; }

  // sorted_order()[k] is the index of the (k+1)-th most popular content;
  // ties keep index order.
  const std::vector<std::size_t>& sorted_order() const noexcept { return order_; }

  // Rate of the k-th most popular content, k in [1, n].
  double sorted_rate(std::size_t k) const {
    if (k < 1 || k > size()) throw ConfigError("popularity rank out of range");
    return rates_[order_[k - 1]];
  }

  // Aggregate popularity of the n - i least popular contents.
  double tail(std::size_t i) const {
    if (i > size()) throw ConfigError("tail index out of range");
    return tail_[i];
  }

  // The standardized families present in the catalog, one per scale family.
  std::vector<InterRequestDistribution> scale_families() const {
    std::vector<InterRequestDistribution> out;
    for (const auto& d : dists_) {
      bool seen = false;
      for (const auto& e : out) {
        if (e.same_scale_family(d)) {
          seen = true;
          break;
        }
      }
      if (!seen) out.push_back(d.standardized());
    }
    return out;
  }

 private:
  std::vector<InterRequestDistribution> dists_;
  std::vector<std::size_t> class_of_;
  std::vector<double> rates_;
  std::vector<double> popularity_;
  std::vector<std::size_t> order_;
  std::vector<double> tail_;
  double total_rate_ = 0.0;
};

inline double tail(const ContentCatalog& catalog, std::size_t i) { return catalog.tail(i); }

// Maps a content index to its (standardized) inter-request family.
using FamilyAssignment = std::function<InterRequestDistribution(std::size_t)>;

inline FamilyAssignment same_family(InterRequestDistribution family) {
  return [f = std::move(family)](std::size_t) { return f; };
}

// lambda_i = p_i * total_rate, content i's distribution rescaled to mean 1 / lambda_i.
inline ContentCatalog catalog_from_popularity(const std::vector<double>& p, double total_rate,
                                              const FamilyAssignment& family, std::vector<std::size_t> class_of = {}) {
  if (!(total_rate > 0.0) || !std::isfinite(total_rate)) throw ConfigError("total rate must be positive");
  std::vector<InterRequestDistribution> dists;
  dists.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lambda = p[i] * total_rate;
    if (!(lambda > 0.0)) throw ConfigError("content " + std::to_string(i + 1) + " has zero request rate");
    dists.push_back(family(i).with_mean(1.0 / lambda));
  }
  return ContentCatalog(std::move(dists), std::move(class_of));
}

inline ContentCatalog build_catalog(const PopularityLaw& law, std::size_t n, double total_rate,
                                    const FamilyAssignment& family) {
  return catalog_from_popularity(popularity_weights(law, n), total_rate, family);
}

inline ContentCatalog build_catalog(const PopularityLaw& law, std::size_t n, double total_rate,
                                    const InterRequestDistribution& family = InterRequestDistribution{}) {
  return build_catalog(law, n, total_rate, same_family(family));
}

// Catalog with explicit per-content rates, all from one scale family.
inline ContentCatalog catalog_from_rates(const std::vector<double>& rates,
                                         const InterRequestDistribution& family = InterRequestDistribution{}) {
  std::vector<InterRequestDistribution> dists;
  dists.reserve(rates.size());
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("request rates must be positive");
    dists.push_back(family.with_mean(1.0 / r));
  }
  return ContentCatalog(std::move(dists));
}

// One class of a multi-class catalog: a fraction `weight` of the n contents,
// popularity shape f and standardized inter-request family.
struct CatalogClass {
  double weight = 1.0;
  PopularityDensity density;
  InterRequestDistribution family;
};

inline std::vector<std::size_t> class_sizes(const std::vector<CatalogClass>& classes, std::size_t n) {
  if (classes.empty()) throw ConfigError("at least one class is required");
  CompensatedSum wsum;
  for (const auto& c : classes) {
    if (!(c.weight > 0.0)) throw ConfigError("class weights must be positive");
    wsum += c.weight;
  }
  if (std::abs(wsum.value() - 1.0) > 1e-9) throw ConfigError("class weights must sum to 1");
  std::vector<std::size_t> sizes(classes.size());
  std::size_t used = 0;
  for (std::size_t j = 0; j + 1 < classes.size(); ++j) {
    sizes[j] = static_cast<std::size_t>(std::llround(classes[j].weight * static_cast<double>(n)));
    used += sizes[j];
  }
  if (used >= n) throw ConfigError("catalog too small for the requested classes");
  sizes.back() = n - used;
  for (std::size_t s : sizes)
    if (s == 0) throw ConfigError("catalog too small: a class received no contents");
  return sizes;
}

// Class j holds about weight_j * n contents; its k-th content has weight
// f_j((k - 1/2) / n_j) / n before global normalization. Contents are laid out
// class by class.
inline ContentCatalog build_multiclass_catalog(const std::vector<CatalogClass>& classes, std::size_t n,
                                               double total_rate) {
  const auto sizes = class_sizes(classes, n);
  std::vector<double> p;
  std::vector<std::size_t> cls;
  p.reserve(n);
  cls.reserve(n);
  CompensatedSum s;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    for (std::size_t k = 0; k < sizes[j]; ++k) {
      const double w = classes[j].density((static_cast<double>(k) + 0.5) / static_cast<double>(sizes[j]));
      if (!(w > 0.0)) throw ConfigError("density law gives zero popularity in class " + std::to_string(j));
      p.push_back(w / static_cast<double>(n));
      cls.push_back(j);
      s += p.back();
    }
  }
  const double z = s.value();
  for (double& v : p) v /= z;
  return catalog_from_popularity(
      p, total_rate, [&](std::size_t i) { return classes[cls[i]].family; }, cls);
}

struct P1Report {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma = 0.0;
  double cache_size = 0.0;
  double lhs = 0.0;  // P(ceil(kappa1 C))
  double rhs = 0.0;  // gamma * P(floor(kappa2 C))
  bool holds = false;
};

inline P1Report check_P1(const ContentCatalog& catalog, double C, double kappa1, double kappa2, double gamma) {
  if (!(C > 0.0)) throw ConfigError("cache size must be positive");
  if (!(kappa2 >= 0.0 && kappa2 <= 1.0)) throw ConfigError("kappa2 must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(kappa1 > 0.0)) throw ConfigError("kappa1 must be positive");
  const double hi = std::ceil(kappa1 * C);
  if (hi > static_cast<double>(catalog.size())) throw ConfigError("kappa1 too large for catalog");
  const auto lo = static_cast<std::size_t>(std::floor(kappa2 * C));
  P1Report r{kappa1, kappa2, gamma, C, catalog.tail(static_cast<std::size_t>(hi)), 0.0, false};
  r.rhs = gamma * catalog.tail(lo);
  r.holds = r.lhs > r.rhs;
  return r;
}

}  // namespace lruttl
