#pragma once

// Event-driven simulation of an LRU or TTL (timer reset on every request)
// cache fed by independent stationary renewal request streams. Hit
// indicators are recorded at request epochs.

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "lruttl/approx.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/popularity.hpp"
#include "lruttl/rng.hpp"

namespace lruttl {

struct LruPolicy {
  std::size_t capacity = 1;
};
struct TtlPolicy {
  double timer = 1.0;
};
using CachePolicy = std::variant<LruPolicy, TtlPolicy>;

// Total requests including warmup.
struct EventCount {
  std::uint64_t events = 0;
};
// Total virtual time including warmup.
struct VirtualTime {
  double time = 0.0;
};
// Requests counted after warmup.
struct MeasuredEvents {
  std::uint64_t events = 0;
};
// Warmup ends once virtual time reaches 20 T (T the characteristic time for
// LRU, the timer for TTL) and at least 5 n requests have been processed.
struct DefaultWarmup {};

using Horizon = std::variant<EventCount, VirtualTime, MeasuredEvents>;
using Warmup = std::variant<EventCount, VirtualTime, DefaultWarmup>;

// Called for every request: (time, content, hit, measured).
using TraceFn = std::function<void(double, std::size_t, bool, bool)>;

struct SimulationConfig {
  ContentCatalog catalog;
  CachePolicy policy;
  Horizon horizon = MeasuredEvents{1000000};
  Warmup warmup = DefaultWarmup{};
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::size_t tau_stride = 0;  // 0 disables tau sampling
  std::size_t max_tau_samples = 1000000;
  // LRU only: also evaluate a TTL cache with this timer on the same requests.
  // The paired difference is a low-variance estimate of LRU minus TTL.
  std::optional<double> shadow_ttl = std::nullopt;
};

inline void validate(const SimulationConfig& cfg) {
  const std::size_t n = cfg.catalog.size();
  if (const auto* l = std::get_if<LruPolicy>(&cfg.policy)) {
    if (l->capacity == 0) throw ConfigError("LRU capacity must be positive");
    if (l->capacity > n) throw ConfigError("LRU capacity exceeds catalog size");
    if (cfg.shadow_ttl && !(*cfg.shadow_ttl > 0.0)) throw ConfigError("shadow TTL timer must be positive");
  } else {
    if (cfg.shadow_ttl) throw ConfigError("shadow TTL applies to LRU runs only");
    const double T = std::get<TtlPolicy>(cfg.policy).timer;
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("TTL timer must be positive");
  }
  if (cfg.replications == 0) throw ConfigError("replications must be at least 1");
  if (const auto* h = std::get_if<EventCount>(&cfg.horizon)) {
    if (h->events == 0) throw ConfigError("horizon must be positive");
    if (const auto* w = std::get_if<EventCount>(&cfg.warmup); w && w->events >= h->events)
      throw ConfigError("horizon smaller than warmup");
  } else if (const auto* h = std::get_if<VirtualTime>(&cfg.horizon)) {
    if (!(h->time > 0.0)) throw ConfigError("horizon must be positive");
    if (const auto* w = std::get_if<VirtualTime>(&cfg.warmup); w && w->time >= h->time)
      throw ConfigError("horizon smaller than warmup");
  } else if (std::get<MeasuredEvents>(cfg.horizon).events == 0) {
    throw ConfigError("horizon must be positive");
  }
  if (const auto* w = std::get_if<VirtualTime>(&cfg.warmup); w && !(w->time >= 0.0))
    throw ConfigError("warmup time must be nonnegative");
}

// ---------------------------------------------------------------------------
// Request streams.

struct StreamStates {
  std::vector<double> next_arrival;
  std::vector<CounterRng> rngs;
};

// First arrival of each content drawn from its age distribution, so every
// stream starts in its stationary regime. Streams are keyed on
// (seed, replication, content).
inline StreamStates init_stationary(const ContentCatalog& catalog, std::uint64_t seed, std::uint64_t replication = 0) {
  StreamStates s;
  const std::size_t n = catalog.size();
  s.next_arrival.resize(n);
  s.rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.rngs.emplace_back(derive_key(seed, replication, i));
    s.next_arrival[i] = catalog.dist(i).sample_age(s.rngs.back());
  }
  return s;
}

// ---------------------------------------------------------------------------
// LRU recency list: intrusive doubly linked list over content indices,
// most recent at the head.

class LruState {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  LruState(std::size_t n, std::size_t capacity)
      : capacity_(capacity),
        prev_(n, npos),
        next_(n, npos),
        resident_(n, 0),
        last_(n, -std::numeric_limits<double>::infinity()) {}

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return count_; }
  bool resident(std::size_t i) const { return resident_[i] != 0; }
  double last_request(std::size_t i) const { return last_[i]; }
  std::size_t head() const noexcept { return head_; }
  std::size_t tail() const noexcept { return tail_; }
  std::size_t next(std::size_t i) const { return next_[i]; }

  // Request of content i at time now; returns true on a hit.
  bool access(std::size_t i, double now) {
    const bool hit = resident_[i] != 0;
    if (hit) {
      unlink(i);
    } else {
      if (count_ == capacity_) evict_tail();
      resident_[i] = 1;
      ++count_;
    }
    push_front(i);
    last_[i] = now;
    assert(count_ <= capacity_);
    return hit;
  }

  // Contents from most to least recent.
  std::vector<std::size_t> recency_order() const {
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t k = head_; k != npos; k = next_[k]) out.push_back(k);
    return out;
  }

 private:
  void unlink(std::size_t i) {
    const std::size_t p = prev_[i];
    const std::size_t q = next_[i];
    if (p != npos) next_[p] = q; else head_ = q;
    if (q != npos) prev_[q] = p; else tail_ = p;
    prev_[i] = next_[i] = npos;
  }

  void push_front(std::size_t i) {
    prev_[i] = npos;
    next_[i] = head_;
    if (head_ != npos) prev_[head_] = i; else tail_ = i;
    head_ = i;
  }

  void evict_tail() {
    const std::size_t t = tail_;
    unlink(t);
    resident_[t] = 0;
    --count_;
  }

  std::size_t capacity_;
  std::size_t count_ = 0;
  std::size_t head_ = npos;
  std::size_t tail_ = npos;
  std::vector<std::size_t> prev_;
  std::vector<std::size_t> next_;
  std::vector<unsigned char> resident_;
  std::vector<double> last_;
};

// tau = now - (last request time of the C-th most recently requested
// distinct content). O(1) when C equals the capacity, O(C) otherwise.
// Empty when fewer than C distinct contents are known.
inline std::optional<double> measure_tau(const LruState& state, double now, std::size_t C) {
  if (C == 0 || state.size() < C) return std::nullopt;
  if (C == state.capacity()) return now - state.last_request(state.tail());
  std::size_t k = state.head();
  for (std::size_t r = 1; r < C; ++r) k = state.next(k);
  return now - state.last_request(k);
}

// ---------------------------------------------------------------------------
// Reports.

struct ReplicationResult {
  std::vector<std::uint64_t> requests;
  std::vector<std::uint64_t> hits;
  std::vector<std::uint64_t> shadow_hits;    // TTL hits on the same requests
  std::vector<std::uint64_t> disagreements;  // requests where the two indicators differ
  double measured_time = 0.0;
  std::uint64_t warmup_events = 0;
  std::vector<double> tau_samples;
};

struct SimulationReport {
  std::vector<std::uint64_t> requests;  // r_i
  std::vector<std::uint64_t> hits;      // h_i
  std::vector<double> hit_rate;         // h_i / r_i (NaN when r_i = 0)
  std::vector<double> stderr_hit;
  std::uint64_t total_requests = 0;
  std::uint64_t total_hits = 0;
  double aggregate = 0.0;
  double aggregate_stderr = 0.0;
  std::vector<double> replication_aggregates;
  // Present when a shadow TTL timer was configured.
  std::vector<std::uint64_t> shadow_hits;
  std::vector<double> diff_rate;    // (h_i - shadow_i) / r_i
  std::vector<double> diff_stderr;
  double aggregate_diff = 0.0;
  double aggregate_diff_stderr = 0.0;
  double elapsed = 0.0;  // measured virtual time summed over replications
  std::size_t replications = 0;
  std::vector<double> tau_samples;
};

namespace detail {

inline double warmup_reference_time(const SimulationConfig& cfg) {
  if (const auto* l = std::get_if<LruPolicy>(&cfg.policy)) {
    if (l->capacity >= cfg.catalog.size()) return 0.0;
    return characteristic_time(cfg.catalog, static_cast<double>(l->capacity)).T;
  }
  return std::get<TtlPolicy>(cfg.policy).timer;
}

// Ratio estimator sum h / sum r with its standard error across replications;
// the binomial error when only one replication is available.
// `second_moment` is sum of squared per-request values, used for the
// single-replication error; it defaults to the 0/1 indicator case.
inline std::pair<double, double> ratio_estimate(const std::vector<double>& h, const std::vector<double>& r,
                                                std::optional<double> second_moment = std::nullopt) {
  const std::size_t R = h.size();
  CompensatedSum hs, rs;
  for (std::size_t k = 0; k < R; ++k) {
    hs += h[k];
    rs += r[k];
  }
  if (!(rs.value() > 0.0)) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double est = hs.value() / rs.value();
  if (R < 2) {
    const double q = second_moment ? *second_moment / rs.value() : est;
    return {est, std::sqrt(std::max(0.0, q - est * est) / rs.value())};
  }
  const double rbar = rs.value() / static_cast<double>(R);
  CompensatedSum v;
  for (std::size_t k = 0; k < R; ++k) {
    const double d = h[k] - est * r[k];
    v += d * d;
  }
  const double se = std::sqrt(v.value() / (static_cast<double>(R) * static_cast<double>(R - 1))) / rbar;
  return {est, se};
}

}  // namespace detail

// One replication. `warmup_T` is the reference time for DefaultWarmup.
inline ReplicationResult run_replication(const SimulationConfig& cfg, std::uint64_t replication, double warmup_T,
                                         const TraceFn& trace = {}) {
  const auto& cat = cfg.catalog;
  const std::size_t n = cat.size();
  StreamStates streams = init_stationary(cat, cfg.seed, replication);

  using Entry = std::pair<double, std::uint32_t>;
  std::vector<Entry> heap;
  heap.reserve(n);
  for (std::size_t i = 0; i < n; ++i) heap.emplace_back(streams.next_arrival[i], static_cast<std::uint32_t>(i));
  // Earliest time first, ties by content index.
  const auto later = [](const Entry& a, const Entry& b) { return a > b; };
  std::make_heap(heap.begin(), heap.end(), later);

  const auto* lru_policy = std::get_if<LruPolicy>(&cfg.policy);
  std::optional<LruState> lru;
  std::vector<double> last;
  double timer = 0.0;
  const bool shadow = lru_policy && cfg.shadow_ttl.has_value();
  if (lru_policy) {
    lru.emplace(n, lru_policy->capacity);
    if (shadow) timer = *cfg.shadow_ttl;
  } else {
    timer = std::get<TtlPolicy>(cfg.policy).timer;
    last.assign(n, -std::numeric_limits<double>::infinity());
  }

  std::uint64_t warm_events = 0;
  double warm_time = 0.0;
  bool default_warmup = false;
  if (const auto* w = std::get_if<EventCount>(&cfg.warmup)) {
    warm_events = w->events;
  } else if (const auto* w = std::get_if<VirtualTime>(&cfg.warmup)) {
    warm_time = w->time;
  } else {
    default_warmup = true;
    warm_events = 5 * static_cast<std::uint64_t>(n);
    warm_time = 20.0 * warmup_T;
  }

  ReplicationResult res;
  res.requests.assign(n, 0);
  res.hits.assign(n, 0);
  if (shadow) {
    res.shadow_hits.assign(n, 0);
    res.disagreements.assign(n, 0);
  }
  bool measuring = false;
  double start_time = 0.0;
  double now = 0.0;
  std::uint64_t processed = 0;
  std::uint64_t measured = 0;
  std::uint64_t tau_counter = 0;

  for (;;) {
    const Entry top = heap.front();
    const double t = top.first;
    const std::size_t i = top.second;

    if (!measuring) {
      const bool events_ok = processed >= warm_events;
      const bool time_ok = t >= warm_time;
      const bool done = default_warmup ? (events_ok && time_ok)
                                       : (std::holds_alternative<EventCount>(cfg.warmup) ? events_ok : time_ok);
      if (done) {
        measuring = true;
        start_time = processed == 0 ? 0.0 : now;
        res.warmup_events = processed;
      }
    }
    if (const auto* h = std::get_if<EventCount>(&cfg.horizon)) {
      if (processed >= h->events) break;
    } else if (const auto* h = std::get_if<VirtualTime>(&cfg.horizon)) {
      if (t > h->time) {
        now = h->time;
        break;
      }
    } else if (measured >= std::get<MeasuredEvents>(cfg.horizon).events) {
      break;
    }

    now = t;
    bool hit;
    if (lru) {
      if (measuring && cfg.tau_stride > 0 && res.tau_samples.size() < cfg.max_tau_samples &&
          (tau_counter++ % cfg.tau_stride) == 0) {
        if (auto tau = measure_tau(*lru, now, lru->capacity())) res.tau_samples.push_back(*tau);
      }
      const bool ttl_hit = shadow && (now - lru->last_request(i)) < timer;
      hit = lru->access(i, now);
      if (shadow) {
        if (measuring) {
          res.shadow_hits[i] += ttl_hit ? 1 : 0;
          res.disagreements[i] += (ttl_hit != hit) ? 1 : 0;
        }
      }
    } else {
      hit = (now - last[i]) < timer;
      last[i] = now;
    }
    if (measuring) {
      ++res.requests[i];
      res.hits[i] += hit ? 1 : 0;
      ++measured;
    }
    if (trace) trace(now, i, hit, measuring);
    ++processed;

    std::pop_heap(heap.begin(), heap.end(), later);
    heap.back().first = t + cat.dist(i).sample(streams.rngs[i]);
    std::push_heap(heap.begin(), heap.end(), later);
  }
  if (!measuring) throw ConfigError("horizon smaller than warmup");
  res.measured_time = now - start_time;
  return res;
}

inline SimulationReport merge_replications(const std::vector<ReplicationResult>& reps) {
  SimulationReport out;
  if (reps.empty()) return out;
  const std::size_t n = reps.front().requests.size();
  const std::size_t R = reps.size();
  out.replications = R;
  out.requests.assign(n, 0);
  out.hits.assign(n, 0);
  out.hit_rate.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.stderr_hit.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> hr(R), rr(R);
  CompensatedSum elapsed;
  for (std::size_t k = 0; k < R; ++k) {
    elapsed += reps[k].measured_time;
    std::uint64_t h = 0, r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      h += reps[k].hits[i];
      r += reps[k].requests[i];
    }
    hr[k] = static_cast<double>(h);
    rr[k] = static_cast<double>(r);
    out.replication_aggregates.push_back(r > 0 ? hr[k] / rr[k] : std::numeric_limits<double>::quiet_NaN());
    out.tau_samples.insert(out.tau_samples.end(), reps[k].tau_samples.begin(), reps[k].tau_samples.end());
  }
  out.elapsed = elapsed.value();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> h(R), r(R);
    for (std::size_t k = 0; k < R; ++k) {
      h[k] = static_cast<double>(reps[k].hits[i]);
      r[k] = static_cast<double>(reps[k].requests[i]);
      out.hits[i] += reps[k].hits[i];
      out.requests[i] += reps[k].requests[i];
    }
    if (out.requests[i] > 0) {
      const auto [est, se] = detail::ratio_estimate(h, r);
      out.hit_rate[i] = est;
      out.stderr_hit[i] = se;
    }
    out.total_hits += out.hits[i];
    out.total_requests += out.requests[i];
  }
  const auto [agg, agg_se] = detail::ratio_estimate(hr, rr);
  out.aggregate = agg;
  out.aggregate_stderr = agg_se;

  if (!reps.front().shadow_hits.empty()) {
    out.shadow_hits.assign(n, 0);
    out.diff_rate.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.diff_stderr.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> dagg(R, 0.0);
    double dis_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> d(R), r(R);
      double dis = 0.0;
      for (std::size_t k = 0; k < R; ++k) {
        const double di = static_cast<double>(reps[k].hits[i]) - static_cast<double>(reps[k].shadow_hits[i]);
        d[k] = di;
        dagg[k] += di;
        r[k] = static_cast<double>(reps[k].requests[i]);
        dis += static_cast<double>(reps[k].disagreements[i]);
        out.shadow_hits[i] += reps[k].shadow_hits[i];
      }
      dis_total += dis;
      if (out.requests[i] > 0) {
        const auto [est, se] = detail::ratio_estimate(d, r, dis);
        out.diff_rate[i] = est;
        out.diff_stderr[i] = se;
      }
    }
    const auto [dest, dse] = detail::ratio_estimate(dagg, rr, dis_total);
    out.aggregate_diff = dest;
    out.aggregate_diff_stderr = dse;
  }
  return out;
}

// Runs all replications, up to `threads` at a time, and merges them in
// replication order so the report does not depend on scheduling.
inline SimulationReport replicate(const SimulationConfig& cfg, std::size_t threads = 1) {
  validate(cfg);
  const double warmup_T = std::holds_alternative<DefaultWarmup>(cfg.warmup) ? detail::warmup_reference_time(cfg) : 0.0;
  const std::size_t R = cfg.replications;
  std::vector<ReplicationResult> reps(R);
  threads = std::max<std::size_t>(1, std::min(threads, R));
  if (threads == 1) {
    for (std::size_t k = 0; k < R; ++k) reps[k] = run_replication(cfg, k, warmup_T);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < R; k = next++) {
          try {
            reps[k] = run_replication(cfg, k, warmup_T);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  return merge_replications(reps);
}

// Single run (replication 0 only), with an optional per-request trace.
inline SimulationReport run(const SimulationConfig& cfg, const TraceFn& trace = {}) {
  validate(cfg);
  const double warmup_T = std::holds_alternative<DefaultWarmup>(cfg.warmup) ? detail::warmup_reference_time(cfg) : 0.0;
  return merge_replications({run_replication(cfg, 0, warmup_T, trace)});
}

struct TauSummary {
  std::size_t samples = 0;
  std::vector<double> quantile_levels;
  std::vector<double> quantiles;  // of tau / T
  double frac_above = 0.0;        // P[tau > (1 + x) T]
  double frac_below = 0.0;        // P[tau < (1 - x) T]
  double frac_outside = 0.0;      // P[|tau / T - 1| > x]
};

inline TauSummary summarize_tau(std::vector<double> samples, double T, double x,
                                std::vector<double> levels = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
  TauSummary s;
  s.samples = samples.size();
  s.quantile_levels = std::move(levels);
  if (samples.empty()) return s;
  std::size_t above = 0, below = 0;
  for (double& v : samples) {
    v /= T;
    above += v > 1.0 + x ? 1 : 0;
    below += v < 1.0 - x ? 1 : 0;
  }
  const double m = static_cast<double>(samples.size());
  s.frac_above = static_cast<double>(above) / m;
  s.frac_below = static_cast<double>(below) / m;
  s.frac_outside = static_cast<double>(above + below) / m;
  std::sort(samples.begin(), samples.end());
  for (double q : s.quantile_levels) {
    const auto k = static_cast<std::size_t>(std::min(m - 1.0, std::floor(q * (m - 1.0) + 0.5)));
    s.quantiles.push_back(samples[k]);
  }
  return s;
}

}  // namespace lruttl
