// Domain model for destructive object handling: instances, allocations,
// expected-surviving-value evaluation and structural classification.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace doh {

/// Malformed or out-of-range input (bad dimensions, probabilities outside (0,1], ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A special-case solver was asked to solve an instance outside its class.
class ClassMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A configured state or enumeration cap would be exceeded.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Above this many objects on one handler the survival product is taken in log space.
inline constexpr std::size_t kLogSpaceThreshold = 32;

/// n objects with values v_j and a k x n matrix of non-self-destruction
/// probabilities p_ij (row = handler). Immutable once built.
class Instance {
 public:
  Instance() = default;

  /// `probs` holds k rows of n entries each.
  Instance(std::vector<double> values, const std::vector<std::vector<double>>& probs)
      : values_(std::move(values)), k_(probs.size()) {
    if (values_.empty()) throw ValidationError("values: at least one object is required");
    if (k_ == 0) throw ValidationError("probs: at least one handler row is required");
    probs_.reserve(k_ * values_.size());
    for (std::size_t i = 0; i < k_; ++i) {
      if (probs[i].size() != values_.size()) {
        throw ValidationError("probs[" + std::to_string(i) + "]: expected " +
                              std::to_string(values_.size()) + " columns, got " +
                              std::to_string(probs[i].size()));
      }
      probs_.insert(probs_.end(), probs[i].begin(), probs[i].end());
    }
    validate();
  }

  /// Row-major k x n probability matrix.
  Instance(std::vector<double> values, std::size_t k, std::vector<double> flat_probs)
      : values_(std::move(values)), probs_(std::move(flat_probs)), k_(k) {
    if (values_.empty()) throw ValidationError("values: at least one object is required");
    if (k_ == 0) throw ValidationError("probs: at least one handler row is required");
    if (probs_.size() != k_ * values_.size()) {
      throw ValidationError("probs: expected " + std::to_string(k_) + "x" +
                            std::to_string(values_.size()) + " entries");
    }
    validate();
  }

  std::size_t n() const noexcept { return values_.size(); }
  std::size_t k() const noexcept { return k_; }

  double value(std::size_t j) const { return values_[j]; }
  std::span<const double> values() const noexcept { return values_; }

  double prob(std::size_t i, std::size_t j) const { return probs_[i * n() + j]; }
  double log_prob(std::size_t i, std::size_t j) const { return log_probs_[i * n() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(probs_).subspan(i * n(), n());
  }
  std::span<const double> log_row(std::size_t i) const {
    return std::span<const double>(log_probs_).subspan(i * n(), n());
  }
  std::span<const double> flat_probs() const noexcept { return probs_; }

  double total_value() const noexcept { return total_value_; }

  /// Sub-instance keeping only the listed handler rows, in the given order.
  Instance restrict_handlers(std::span<const std::size_t> handlers) const {
    std::vector<double> flat;
    flat.reserve(handlers.size() * n());
    for (std::size_t h : handlers) {
      auto r = row(h);
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return Instance(values_, handlers.size(), std::move(flat));
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.k_ == b.k_ && a.values_ == b.values_ && a.probs_ == b.probs_;
  }

 private:
  void validate() {
    for (std::size_t j = 0; j < values_.size(); ++j) {
      const double v = values_[j];
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw ValidationError("values[" + std::to_string(j) + "]: must be a finite number > 0");
      }
    }
    for (std::size_t idx = 0; idx < probs_.size(); ++idx) {
      const double p = probs_[idx];
      if (!(p > 0.0 && p <= 1.0)) {
        throw ValidationError("probs[" + std::to_string(idx / values_.size()) + "][" +
                              std::to_string(idx % values_.size()) + "]: must lie in (0, 1]");
      }
    }
    log_probs_.resize(probs_.size());
    std::transform(probs_.begin(), probs_.end(), log_probs_.begin(),
                   [](double p) { return std::log(p); });
    total_value_ = 0.0;
    for (double v : values_) total_value_ += v;
  }

  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> log_probs_;
  std::size_t k_ = 0;
  double total_value_ = 0.0;
};

/// Object -> handler map (0-based internally). Only the exactly-one matching
/// solver produces kUnassigned entries.
class Allocation {
 public:
  static constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

  Allocation() = default;
  explicit Allocation(std::vector<std::uint32_t> handlers) : handlers_(std::move(handlers)) {}
  Allocation(std::size_t n, std::uint32_t handler) : handlers_(n, handler) {}
  Allocation(std::initializer_list<std::uint32_t> handlers) : handlers_(handlers) {}

  std::size_t size() const noexcept { return handlers_.size(); }
  std::uint32_t operator[](std::size_t j) const { return handlers_[j]; }
  std::uint32_t& operator[](std::size_t j) { return handlers_[j]; }
  std::span<const std::uint32_t> handlers() const noexcept { return handlers_; }
  bool is_total() const {
    return std::none_of(handlers_.begin(), handlers_.end(),
                        [](std::uint32_t h) { return h == kUnassigned; });
  }

  /// Objects per handler.
  std::vector<std::size_t> counts(std::size_t k) const {
    std::vector<std::size_t> c(k, 0);
    for (auto h : handlers_)
      if (h != kUnassigned) ++c[h];
    return c;
  }

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  std::vector<std::uint32_t> handlers_;
};

inline void validate_allocation(const Instance& inst, const Allocation& alloc,
                                bool require_total = true) {
  if (alloc.size() != inst.n()) {
    throw ValidationError("assignment: expected " + std::to_string(inst.n()) + " entries, got " +
                          std::to_string(alloc.size()));
  }
  for (std::size_t j = 0; j < alloc.size(); ++j) {
    const auto h = alloc[j];
    if (h == Allocation::kUnassigned) {
      if (require_total) {
        throw ValidationError("assignment[" + std::to_string(j) + "]: object is unassigned");
      }
      continue;
    }
    if (h >= inst.k()) {
      throw ValidationError("assignment[" + std::to_string(j) + "]: handler out of range");
    }
  }
}

struct HandlerTotals {
  double value = 0.0;  // V_i
  double prob = 1.0;   // P_i
  double es = 0.0;     // V_i * P_i
};

struct EsBreakdown {
  std::vector<HandlerTotals> per_handler;
  double total = 0.0;
};

namespace detail {

/// Reusable buffers for repeated evaluation of the same instance.
struct EvalScratch {
  std::vector<double> value;
  std::vector<double> prob;
  std::vector<double> log_prob;
  std::vector<std::size_t> count;

  void reset(std::size_t k) {
    value.assign(k, 0.0);
    prob.assign(k, 1.0);
    log_prob.assign(k, 0.0);
    count.assign(k, 0);
  }

  double handler_prob(std::size_t i) const {
    return count[i] > kLogSpaceThreshold ? std::exp(log_prob[i]) : prob[i];
  }
};

/// Fills `s` with per-handler sums and returns the total ES. Unassigned
/// objects contribute nothing.
inline double accumulate(const Instance& inst, std::span<const std::uint32_t> handlers,
                         EvalScratch& s) {
  s.reset(inst.k());
  const std::size_t n = inst.n();
  for (std::size_t j = 0; j < n; ++j) {
    const auto h = handlers[j];
    if (h == Allocation::kUnassigned) continue;
    s.value[h] += inst.value(j);
    s.prob[h] *= inst.prob(h, j);
    s.log_prob[h] += inst.log_prob(h, j);
    ++s.count[h];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < inst.k(); ++i) {
    if (s.count[i] != 0) total += s.value[i] * s.handler_prob(i);
  }
  return total;
}

}  // namespace detail

/// Expected surviving value of `alloc`, per handler and in total.
inline EsBreakdown evaluate(const Instance& inst, const Allocation& alloc) {
  validate_allocation(inst, alloc, /*require_total=*/false);
  detail::EvalScratch s;
  EsBreakdown out;
  out.total = detail::accumulate(inst, alloc.handlers(), s);
  out.per_handler.resize(inst.k());
  for (std::size_t i = 0; i < inst.k(); ++i) {
    auto& h = out.per_handler[i];
    if (s.count[i] == 0) continue;  // empty handler: V=0, P=1, ES=0
    h.value = s.value[i];
    h.prob = s.handler_prob(i);
    h.es = h.value * h.prob;
  }
  return out;
}

/// Survival product for a handler holding `count` objects, choosing direct or
/// log-space evaluation the same way evaluate() does.
inline double survival_prob(double direct, double log_sum, std::size_t count) {
  return count > kLogSpaceThreshold ? std::exp(log_sum) : direct;
}

enum class InstanceClass {
  General,
  IdenticalObjects,
  IdenticalHandlersValues,
  IdenticalRisks,
  AllIdentical,
  OnePerHandler,
};

inline std::string_view to_string(InstanceClass c) {
  switch (c) {
    case InstanceClass::General: return "general";
    case InstanceClass::IdenticalObjects: return "identical-objects";
    case InstanceClass::IdenticalHandlersValues: return "identical-handlers-values";
    case InstanceClass::IdenticalRisks: return "identical-risks";
    case InstanceClass::AllIdentical: return "all-identical";
    case InstanceClass::OnePerHandler: return "one-per-handler";
  }
  return "unknown";
}

/// Structural predicates behind classify(); exact float equality.
inline bool values_identical(const Instance& inst) {
  auto v = inst.values();
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

/// p_ij depends only on the handler i.
inline bool probs_row_constant(const Instance& inst) {
  for (std::size_t i = 0; i < inst.k(); ++i) {
    auto r = inst.row(i);
    if (!std::all_of(r.begin(), r.end(), [&](double p) { return p == r.front(); })) return false;
  }
  return true;
}

/// p_ij depends only on the object j.
inline bool probs_column_constant(const Instance& inst) {
  auto first = inst.row(0);
  for (std::size_t i = 1; i < inst.k(); ++i) {
    if (!std::equal(first.begin(), first.end(), inst.row(i).begin())) return false;
  }
  return true;
}

/// Most specific structural class. OnePerHandler is a constraint chosen by the
/// caller and is never returned here.
inline InstanceClass classify(const Instance& inst) {
  const bool same_v = values_identical(inst);
  const bool by_row = probs_row_constant(inst);
  const bool by_col = probs_column_constant(inst);
  if (same_v && by_row && by_col) return InstanceClass::AllIdentical;
  if (same_v && by_row) return InstanceClass::IdenticalObjects;
  if (same_v && by_col) return InstanceClass::IdenticalHandlersValues;
  if (by_row) return InstanceClass::IdenticalRisks;
  return InstanceClass::General;
}

using Meta = std::map<std::string, std::string>;

struct SolveReport {
  Allocation allocation;
  double es = 0.0;
  std::string solver_name;
  std::chrono::duration<double, std::milli> wall_time{0};
  Meta meta;
};

/// Shortest "%.12g" rendering, used for every number written into metadata.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::chrono::duration<double, std::milli> elapsed() const {
    return std::chrono::steady_clock::now() - start_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Builds a report whose ES is recomputed from scratch.
inline SolveReport make_report(const Instance& inst, Allocation alloc, std::string solver_name,
                               const Stopwatch& clock, Meta meta = {}) {
  SolveReport r;
  r.es = evaluate(inst, alloc).total;
  r.allocation = std::move(alloc);
  r.solver_name = std::move(solver_name);
  r.meta = std::move(meta);
  r.wall_time = clock.elapsed();
  return r;
}

/// |a-b| <= tol * max(|a|,|b|), with exact equality always accepted.
inline bool approx_equal(double a, double b, double rel_tol = 1e-9) {
  if (a == b) return true;
  return std::fabs(a - b) <= rel_tol * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace doh
