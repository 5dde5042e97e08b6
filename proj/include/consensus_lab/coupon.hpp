#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "consensus_lab/rng.hpp"

namespace consensus_lab::coupon {

/// H_n = 1 + 1/2 + ... + 1/n (H_0 = 0).
double harmonic(std::size_t n);

/// h(x): equal to H_n at integers, linear in between. Concave on [0, inf).
double harmonic_interp(double x);

/// Cached H_0..H_max; grows on demand.
class HarmonicTable {
 public:
  explicit HarmonicTable(std::size_t max = 0);

  double operator[](std::size_t n);
  double interp(double x);
  std::size_t cached_max() const noexcept { return values_.size() - 1; }

 private:
  void extend(std::size_t max);
  std::vector<double> values_;
};

/// q^-1 * N * H_n: expected-time bound for collecting n types at per-type
/// rate 1/N with geometric(q) targets.
double collector_bound(std::size_t n, double rate_denominator, double q);

struct ArrivalEvent {
  double probability;
  std::vector<std::uint32_t> types;
};

/// Joint law of which coupon types arrive in a single step. Every type
/// arrives with marginal probability exactly 1/N; the constructors check this
/// analytically.
class ArrivalCoupling {
 public:
  /// Each type arrives independently with probability 1/N.
  static ArrivalCoupling independent(std::size_t types, double rate_denominator);
  /// At most one coupon per step, uniformly typed: the classical collector. Needs N >= n.
  static ArrivalCoupling single(std::size_t types, double rate_denominator);
  /// All types arrive together with probability 1/N.
  static ArrivalCoupling bundled(std::size_t types, double rate_denominator);
  /// Mutually exclusive events, each delivering a set of distinct types.
  /// Throws InvalidParameter unless every type's marginal is 1/N (within
  /// 1e-12) and the event probabilities sum to at most 1.
  static ArrivalCoupling from_events(std::size_t types, double rate_denominator,
                                     std::vector<ArrivalEvent> events, std::string name = "events");

  std::size_t types() const noexcept { return types_; }
  double rate_denominator() const noexcept { return rate_denominator_; }
  const std::string& name() const noexcept { return name_; }
  double marginal(std::size_t type) const;
  /// True when two coupons can never arrive in the same step.
  bool exclusive() const noexcept;

  /// Replaces `arrivals` with the types received in one step.
  void sample(Rng& rng, std::vector<std::uint32_t>& arrivals) const;

 private:
  ArrivalCoupling(std::size_t types, double rate_denominator, std::string name)
      : types_(types), rate_denominator_(rate_denominator), name_(std::move(name)) {}

  std::size_t types_;
  double rate_denominator_;
  std::string name_;
  bool independent_ = false;
  std::vector<ArrivalEvent> events_;
  std::vector<double> cumulative_;
};

/// Index sequences i(j, 1), i(j, 2), ... (k >= 1) selecting which shared
/// Bernoulli variables feed type j's geometric target. Injectivity in k is
/// checked over the first kInjectivityPrefix entries of every type.
class IndexMap {
 public:
  using Fn = std::function<std::uint64_t(std::size_t type, std::uint64_t k)>;
  static constexpr std::uint64_t kInjectivityPrefix = 256;

  IndexMap(std::size_t types, Fn fn, std::string name);

  /// Disjoint sequences: independent geometric targets.
  static IndexMap independent(std::size_t types);
  /// Every type reads the same sequence: all targets equal.
  static IndexMap shared(std::size_t types);
  /// Types j and j' share a sequence iff j / block == j' / block.
  static IndexMap blocks(std::size_t types, std::size_t block);
  /// i(j, k) = j * shift + k: neighbouring types overlap on their tails.
  static IndexMap shifted(std::size_t types, std::uint64_t shift);

  std::size_t types() const noexcept { return types_; }
  const std::string& name() const noexcept { return name_; }
  std::uint64_t operator()(std::size_t type, std::uint64_t k) const { return fn_(type, k); }

 private:
  std::size_t types_;
  Fn fn_;
  std::string name_;
};

struct SingleTarget {};
struct ConnectedGeometrics {
  double q;
  IndexMap map;
};
using TargetModel = std::variant<SingleTarget, ConnectedGeometrics>;

/// Collector experiment: n types received at rate 1/N each; targets per
/// `target`. With `slow_keep` set, type 1 (index 0) coupons are kept with
/// that probability instead of q (requires ConnectedGeometrics targets).
struct CouponSpec {
  std::size_t n = 1;
  double rate_denominator = 1.0;
  TargetModel target = SingleTarget{};
  std::optional<double> slow_keep;

  void validate() const;
};

/// First step at which every type has arrived at least once.
std::uint64_t simulate_multipass(const ArrivalCoupling& coupling, Rng& rng);

/// First step at which every type j has received Y_j coupons, where the Y_j
/// are realized lazily from one shared Bernoulli(q) sequence through `map`.
std::uint64_t simulate_connected_geometrics(const ArrivalCoupling& coupling, double q,
                                            const IndexMap& map, Rng& rng);

/// Realizes the targets Y_1..Y_n upfront from a fresh Bernoulli(q) sequence.
std::vector<std::uint64_t> sample_targets(const IndexMap& map, double q, Rng& rng);

/// Two coupled collectors on one arrival stream (a single coupon with
/// probability n/N, uniform type). Other types are kept with probability q in
/// both; type 1 is kept with probability q in the first, q_slow in the second,
/// and a kept type-1 coupon in the second is always kept in the first.
struct SlowTypeRun {
  std::uint64_t time;
  std::uint64_t slow_time;
  bool slow_finished_on_type1;
};
SlowTypeRun simulate_slow_type(std::size_t n, double rate_denominator, double q, double q_slow, Rng& rng);

/// prod_{k=1}^{n-1} kq / (kq + q_slow): chance that type 1 is the last kept type.
double slow_type_last_probability(std::size_t n, double q, double q_slow);

/// Dispatches on the target model, and on the slow type when set.
std::uint64_t simulate(const CouponSpec& spec, const ArrivalCoupling& coupling, Rng& rng);

struct CollectorStats {
  std::size_t replications = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<std::uint64_t> times;

  double stderr_of_mean() const;
};

/// Replication i uses make_stream(seed, i); workers as in process-core.
CollectorStats run_collector(const CouponSpec& spec, const ArrivalCoupling& coupling,
                             std::size_t replications, std::uint64_t seed, std::size_t workers = 0);

CollectorStats summarize_times(std::vector<std::uint64_t> times);

}  // namespace consensus_lab::coupon
