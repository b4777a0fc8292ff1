#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace voi {

enum class DistributionKind { gumbel, normal, lognormal, uniform };

std::string_view to_string(DistributionKind kind);
DistributionKind parse_distribution_kind(std::string_view name);

/// Univariate distribution of an uncertain input.
///
/// Parameterizations:
///   gumbel     location m, scale beta (maxima convention, larger x = larger load)
///   normal     mean, standard deviation
///   lognormal  mean and standard deviation of the variable itself; the
///              log-space parameters are derived on construction
///   uniform    lower, upper
///
/// Parameters are validated by the factory functions, so every instance is
/// valid and the evaluation functions below never re-check them.
class DistributionSpec {
 public:
  static DistributionSpec gumbel(double location, double scale = 1.0);
  static DistributionSpec normal(double mean, double std);
  static DistributionSpec lognormal(double mean, double std);
  static DistributionSpec uniform(double lower, double upper);

  DistributionKind kind() const noexcept { return kind_; }

  /// The two construction parameters, in the order of the factory call.
  double first() const noexcept { return p1_; }
  double second() const noexcept { return p2_; }

  /// Log-space mean and standard deviation (lognormal only).
  double log_mu() const noexcept { return mu_ln_; }
  double log_sigma() const noexcept { return sigma_ln_; }

  bool operator==(const DistributionSpec&) const = default;

 private:
  DistributionSpec(DistributionKind kind, double p1, double p2);

  DistributionKind kind_;
  double p1_;
  double p2_;
  double mu_ln_ = 0.0;
  double sigma_ln_ = 0.0;
};

inline constexpr double kEulerGamma = 0.57721566490153286061;

double pdf(const DistributionSpec& spec, double x);
double cdf(const DistributionSpec& spec, double x);
/// Inverse cdf; p must lie in the open interval (0, 1).
double quantile(const DistributionSpec& spec, double p);
double mean(const DistributionSpec& spec);
double stddev(const DistributionSpec& spec);
/// Support bounds, possibly infinite.
double support_lower(const DistributionSpec& spec);
double support_upper(const DistributionSpec& spec);

double standard_normal_cdf(double z);
double standard_normal_quantile(double p);

/// Counter-based random stream.
///
/// Draw i of a stream is a pure function of (seed, stream_id, i), so any
/// partition of the index range across threads yields the same numbers.
/// split() derives statistically independent child streams.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t bits_at(std::uint64_t index) const noexcept;
  /// Uniform draw in the open interval (0, 1) at an absolute index.
  double uniform_at(std::uint64_t index) const noexcept;
  /// Next uniform draw; advances the stream.
  double uniform() noexcept { return uniform_at(counter_++); }
  void skip(std::uint64_t n) noexcept { counter_ += n; }

  RandomSource split(std::uint64_t child) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// n independent draws by inverse transform. Advances src by n.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RandomSource& src);

}  // namespace voi
