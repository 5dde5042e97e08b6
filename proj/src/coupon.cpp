#include "consensus_lab/coupon.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/parallel.hpp"

namespace consensus_lab::coupon {

double harmonic(std::size_t n) {
  long double h = 0.0L;
  for (std::size_t k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
  return static_cast<double>(h);
}

double harmonic_interp(double x) {
  if (!(x >= 0.0)) throw InvalidParameter("h(x) needs x >= 0");
  const double whole = std::floor(x);
  const auto k = static_cast<std::size_t>(whole);
  return harmonic(k) + (x - whole) / static_cast<double>(k + 1);
}

HarmonicTable::HarmonicTable(std::size_t max) : values_{0.0} { extend(max); }

void HarmonicTable::extend(std::size_t max) {
  values_.reserve(max + 1);
  while (values_.size() <= max) {
    const std::size_t k = values_.size();
    values_.push_back(harmonic(k));
  }
}

double HarmonicTable::operator[](std::size_t n) {
  extend(n);
  return values_[n];
}

double HarmonicTable::interp(double x) {
  if (!(x >= 0.0)) throw InvalidParameter("h(x) needs x >= 0");
  const double whole = std::floor(x);
  const auto k = static_cast<std::size_t>(whole);
  return (*this)[k] + (x - whole) / static_cast<double>(k + 1);
}

double collector_bound(std::size_t n, double rate_denominator, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("q must lie in (0,1]");
  if (!(rate_denominator > 0.0)) throw InvalidParameter("N must be positive");
  return rate_denominator * harmonic(n) / q;
}

// --- arrival couplings -------------------------------------------------------

namespace {

void check_rate(std::size_t types, double rate_denominator) {
  if (!(rate_denominator >= static_cast<double>(types)) || !(rate_denominator >= 1.0)) {
    throw InvalidParameter("need N >= n (and N >= 1)");
  }
}

}  // namespace

ArrivalCoupling ArrivalCoupling::independent(std::size_t types, double rate_denominator) {
  check_rate(types, rate_denominator);
  ArrivalCoupling c(types, rate_denominator, "independent");
  c.independent_ = true;
  return c;
}

ArrivalCoupling ArrivalCoupling::single(std::size_t types, double rate_denominator) {
  std::vector<ArrivalEvent> events;
  for (std::uint32_t t = 0; t < types; ++t) events.push_back({1.0 / rate_denominator, {t}});
  return from_events(types, rate_denominator, std::move(events), "single");
}

ArrivalCoupling ArrivalCoupling::bundled(std::size_t types, double rate_denominator) {
  std::vector<std::uint32_t> all(types);
  for (std::uint32_t t = 0; t < types; ++t) all[t] = t;
  std::vector<ArrivalEvent> events;
  if (types > 0) events.push_back({1.0 / rate_denominator, std::move(all)});
  return from_events(types, rate_denominator, std::move(events), "bundled");
}

ArrivalCoupling ArrivalCoupling::from_events(std::size_t types, double rate_denominator,
                                             std::vector<ArrivalEvent> events, std::string name) {
  check_rate(types, rate_denominator);
  std::vector<double> marginal(types, 0.0);
  double total = 0.0;
  for (const auto& ev : events) {
    if (!(ev.probability >= 0.0)) throw InvalidParameter("event probability must be non-negative");
    total += ev.probability;
    std::unordered_set<std::uint32_t> seen;
    for (auto t : ev.types) {
      if (t >= types) throw InvalidParameter("event names an unknown type");
      if (!seen.insert(t).second) throw InvalidParameter("event repeats a type");
      marginal[t] += ev.probability;
    }
  }
  if (total > 1.0 + 1e-12) throw InvalidParameter("event probabilities sum above 1");
  const double target = 1.0 / rate_denominator;
  for (std::size_t t = 0; t < types; ++t) {
    if (std::abs(marginal[t] - target) > 1e-12) {
      throw InvalidParameter("type " + std::to_string(t) + " arrives with probability " +
                             std::to_string(marginal[t]) + ", not 1/N");
    }
  }

  ArrivalCoupling c(types, rate_denominator, std::move(name));
  c.events_ = std::move(events);
  double acc = 0.0;
  for (const auto& ev : c.events_) {
    acc += ev.probability;
    c.cumulative_.push_back(acc);
  }
  return c;
}

double ArrivalCoupling::marginal(std::size_t type) const {
  if (type >= types_) throw InvalidParameter("unknown type");
  if (independent_) return 1.0 / rate_denominator_;
  double m = 0.0;
  for (const auto& ev : events_)
    if (std::find(ev.types.begin(), ev.types.end(), type) != ev.types.end()) m += ev.probability;
  return m;
}

bool ArrivalCoupling::exclusive() const noexcept {
  if (independent_) return types_ <= 1;
  return std::all_of(events_.begin(), events_.end(),
                     [](const ArrivalEvent& ev) { return ev.types.size() <= 1 || ev.probability == 0.0; });
}

void ArrivalCoupling::sample(Rng& rng, std::vector<std::uint32_t>& arrivals) const {
  arrivals.clear();
  if (independent_) {
    std::bernoulli_distribution arrive(1.0 / rate_denominator_);
    for (std::uint32_t t = 0; t < types_; ++t)
      if (arrive(rng)) arrivals.push_back(t);
    return;
  }
  if (events_.empty()) return;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return;
  const auto& ev = events_[static_cast<std::size_t>(it - cumulative_.begin())];
  arrivals.assign(ev.types.begin(), ev.types.end());
}

// --- index maps ---------------------------------------------------------------

IndexMap::IndexMap(std::size_t types, Fn fn, std::string name)
    : types_(types), fn_(std::move(fn)), name_(std::move(name)) {
  if (!fn_) throw InvalidParameter("index map needs a function");
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t j = 0; j < types_; ++j) {
    seen.clear();
    for (std::uint64_t k = 1; k <= kInjectivityPrefix; ++k) {
      if (!seen.insert(fn_(j, k)).second) {
        throw InvalidParameter("index map repeats a variable for type " + std::to_string(j));
      }
    }
  }
}

IndexMap IndexMap::independent(std::size_t types) {
  const std::uint64_t n = std::max<std::size_t>(types, 1);
  return IndexMap(types, [n](std::size_t j, std::uint64_t k) { return (k - 1) * n + j; }, "independent");
}

IndexMap IndexMap::shared(std::size_t types) {
  return IndexMap(types, [](std::size_t, std::uint64_t k) { return k; }, "shared");
}

IndexMap IndexMap::blocks(std::size_t types, std::size_t block) {
  if (block == 0) throw InvalidParameter("block size must be positive");
  const std::uint64_t groups = (std::max<std::size_t>(types, 1) + block - 1) / block;
  return IndexMap(
      types, [groups, block](std::size_t j, std::uint64_t k) { return (k - 1) * groups + j / block; },
      "blocks:" + std::to_string(block));
}

IndexMap IndexMap::shifted(std::size_t types, std::uint64_t shift) {
  return IndexMap(
      types, [shift](std::size_t j, std::uint64_t k) { return j * shift + k; },
      "shifted:" + std::to_string(shift));
}

// --- simulations -------------------------------------------------------------

void CouponSpec::validate() const {
  if (!(rate_denominator >= static_cast<double>(n))) throw InvalidParameter("need N >= n");
  if (const auto* cg = std::get_if<ConnectedGeometrics>(&target)) {
    if (!(cg->q > 0.0 && cg->q <= 1.0)) throw InvalidParameter("q must lie in (0,1]");
    if (cg->map.types() != n) throw InvalidParameter("index map covers a different number of types");
    if (slow_keep && !(*slow_keep > 0.0 && *slow_keep <= cg->q)) {
      throw InvalidParameter("slow keep probability must lie in (0, q]");
    }
  } else if (slow_keep) {
    throw InvalidParameter("a slow type needs geometric targets (keep probability q)");
  }
}

std::uint64_t simulate_multipass(const ArrivalCoupling& coupling, Rng& rng) {
  const std::size_t n = coupling.types();
  std::vector<char> have(n, 0);
  std::size_t remaining = n;
  std::vector<std::uint32_t> arrivals;
  std::uint64_t t = 0;
  while (remaining > 0) {
    ++t;
    coupling.sample(rng, arrivals);
    for (auto type : arrivals) {
      if (!have[type]) {
        have[type] = 1;
        --remaining;
      }
    }
  }
  return t;
}

std::uint64_t simulate_connected_geometrics(const ArrivalCoupling& coupling, double q,
                                            const IndexMap& map, Rng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("q must lie in (0,1]");
  const std::size_t n = coupling.types();
  if (map.types() != n) throw InvalidParameter("index map covers a different number of types");

  std::unordered_map<std::uint64_t, char> revealed;
  std::bernoulli_distribution success(q);
  std::vector<std::uint64_t> received(n, 0);
  std::vector<char> done(n, 0);
  std::size_t remaining = n;
  std::vector<std::uint32_t> arrivals;
  std::uint64_t t = 0;
  while (remaining > 0) {
    ++t;
    coupling.sample(rng, arrivals);
    for (auto type : arrivals) {
      if (done[type]) continue;
      const std::uint64_t index = map(type, ++received[type]);
      auto [it, fresh] = revealed.try_emplace(index, 0);
      if (fresh) it->second = success(rng) ? 1 : 0;
      if (it->second) {
        done[type] = 1;
        --remaining;
      }
    }
  }
  return t;
}

std::vector<std::uint64_t> sample_targets(const IndexMap& map, double q, Rng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("q must lie in (0,1]");
  std::unordered_map<std::uint64_t, char> revealed;
  std::bernoulli_distribution success(q);
  std::vector<std::uint64_t> targets(map.types(), 0);
  for (std::size_t j = 0; j < map.types(); ++j) {
    for (std::uint64_t k = 1;; ++k) {
      auto [it, fresh] = revealed.try_emplace(map(j, k), 0);
      if (fresh) it->second = success(rng) ? 1 : 0;
      if (it->second) {
        targets[j] = k;
        break;
      }
    }
  }
  return targets;
}

SlowTypeRun simulate_slow_type(std::size_t n, double rate_denominator, double q, double q_slow,
                               Rng& rng) {
  if (n == 0) return {0, 0, false};
  check_rate(n, rate_denominator);
  if (!(q > 0.0 && q <= 1.0) || !(q_slow > 0.0 && q_slow <= q)) {
    throw InvalidParameter("need 0 < q_slow <= q <= 1");
  }
  const double receive = static_cast<double>(n) / rate_denominator;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<char> have_fast(n, 0), have_slow(n, 0);
  std::size_t left_fast = n, left_slow = n;
  SlowTypeRun run{0, 0, false};
  std::uint64_t t = 0;
  while (left_fast > 0 || left_slow > 0) {
    ++t;
    if (receive < 1.0 && unit(rng) >= receive) continue;
    const std::size_t type = pick(rng);
    const double u = unit(rng);
    const bool keep_fast = u < q;
    const bool keep_slow = u < (type == 0 ? q_slow : q);
    if (keep_fast && !have_fast[type]) {
      have_fast[type] = 1;
      if (--left_fast == 0) run.time = t;
    }
    if (keep_slow && !have_slow[type]) {
      have_slow[type] = 1;
      if (--left_slow == 0) {
        run.slow_time = t;
        run.slow_finished_on_type1 = type == 0;
      }
    }
  }
  return run;
}

double slow_type_last_probability(std::size_t n, double q, double q_slow) {
  long double prod = 1.0L;
  for (std::size_t k = 1; k < n; ++k) {
    const long double kq = static_cast<long double>(k) * q;
    prod *= kq / (kq + q_slow);
  }
  return static_cast<double>(prod);
}

std::uint64_t simulate(const CouponSpec& spec, const ArrivalCoupling& coupling, Rng& rng) {
  if (coupling.types() != spec.n) throw InvalidParameter("coupling covers a different number of types");
  if (std::abs(coupling.rate_denominator() - spec.rate_denominator) > 1e-12 * spec.rate_denominator) {
    throw InvalidParameter("coupling uses a different rate");
  }
  if (const auto* cg = std::get_if<ConnectedGeometrics>(&spec.target)) {
    if (spec.slow_keep) {
      return simulate_slow_type(spec.n, spec.rate_denominator, cg->q, *spec.slow_keep, rng).slow_time;
    }
    return simulate_connected_geometrics(coupling, cg->q, cg->map, rng);
  }
  return simulate_multipass(coupling, rng);
}

double CollectorStats::stderr_of_mean() const {
  return replications == 0 ? 0.0 : std::sqrt(variance / static_cast<double>(replications));
}

CollectorStats summarize_times(std::vector<std::uint64_t> times) {
  CollectorStats s;
  s.replications = times.size();
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (auto t : times) {
    ++k;
    const double x = static_cast<double>(t);
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.variance = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  s.times = std::move(times);
  return s;
}

CollectorStats run_collector(const CouponSpec& spec, const ArrivalCoupling& coupling,
                             std::size_t replications, std::uint64_t seed, std::size_t workers) {
  spec.validate();
  if (replications == 0) throw InvalidParameter("need at least one replication");
  std::vector<std::uint64_t> times(replications);
  parallel_for(replications, workers ? workers : default_worker_count(), [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    times[i] = simulate(spec, coupling, rng);
  });
  return summarize_times(std::move(times));
}

}  // namespace consensus_lab::coupon
