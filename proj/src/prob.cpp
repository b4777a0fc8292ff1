#include "voi/prob.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::gumbel: return "gumbel";
    case DistributionKind::normal: return "normal";
    case DistributionKind::lognormal: return "lognormal";
    case DistributionKind::uniform: return "uniform";
  }
  return "unknown";
}

DistributionKind parse_distribution_kind(std::string_view name) {
  if (name == "gumbel") return DistributionKind::gumbel;
  if (name == "normal") return DistributionKind::normal;
  if (name == "lognormal") return DistributionKind::lognormal;
  if (name == "uniform") return DistributionKind::uniform;
  throw ConfigError("unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec::DistributionSpec(DistributionKind kind, double p1, double p2)
    : kind_(kind), p1_(p1), p2_(p2) {
  if (!finite(p1) || !finite(p2)) throw ConfigError("distribution parameters must be finite");
  switch (kind) {
    case DistributionKind::gumbel:
      if (!(p2 > 0)) throw ConfigError("gumbel scale must be positive");
      break;
    case DistributionKind::normal:
      if (!(p2 > 0)) throw ConfigError("normal std must be positive");
      break;
    case DistributionKind::lognormal: {
      if (!(p1 > 0)) throw ConfigError("lognormal mean must be positive");
      if (!(p2 > 0)) throw ConfigError("lognormal std must be positive");
      const double cv = p2 / p1;
      const double s2 = std::log1p(cv * cv);
      sigma_ln_ = std::sqrt(s2);
      mu_ln_ = std::log(p1) - 0.5 * s2;
      break;
    }
    case DistributionKind::uniform:
      if (!(p1 < p2)) throw ConfigError("uniform lower must be below upper");
      break;
  }
}

DistributionSpec DistributionSpec::gumbel(double location, double scale) {
  return {DistributionKind::gumbel, location, scale};
}
DistributionSpec DistributionSpec::normal(double mean, double std) {
  return {DistributionKind::normal, mean, std};
}
DistributionSpec DistributionSpec::lognormal(double mean, double std) {
  return {DistributionKind::lognormal, mean, std};
}
DistributionSpec DistributionSpec::uniform(double lower, double upper) {
  return {DistributionKind::uniform, lower, upper};
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double pdf(const DistributionSpec& spec, double x) {
  const double a = spec.first();
  const double b = spec.second();
  switch (spec.kind()) {
    case DistributionKind::gumbel: {
      const double z = (x - a) / b;
      return std::exp(-z - std::exp(-z)) / b;
    }
    case DistributionKind::normal: {
      const double z = (x - a) / b;
      return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
    }
    case DistributionKind::lognormal: {
      if (x <= 0) return 0.0;
      const double z = (std::log(x) - spec.log_mu()) / spec.log_sigma();
      return std::exp(-0.5 * z * z) / (x * spec.log_sigma() * std::sqrt(2.0 * std::numbers::pi));
    }
    case DistributionKind::uniform:
      return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
  }
  return 0.0;
}

double cdf(const DistributionSpec& spec, double x) {
  const double a = spec.first();
  const double b = spec.second();
  switch (spec.kind()) {
    case DistributionKind::gumbel: return std::exp(-std::exp(-(x - a) / b));
    case DistributionKind::normal: return standard_normal_cdf((x - a) / b);
    case DistributionKind::lognormal:
      if (x <= 0) return 0.0;
      return standard_normal_cdf((std::log(x) - spec.log_mu()) / spec.log_sigma());
    case DistributionKind::uniform:
      if (x <= a) return 0.0;
      if (x >= b) return 1.0;
      return (x - a) / (b - a);
  }
  return 0.0;
}

double quantile(const DistributionSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
  const double a = spec.first();
  const double b = spec.second();
  switch (spec.kind()) {
    case DistributionKind::gumbel: return a - b * std::log(-std::log(p));
    case DistributionKind::normal: return a + b * standard_normal_quantile(p);
    case DistributionKind::lognormal:
      return std::exp(spec.log_mu() + spec.log_sigma() * standard_normal_quantile(p));
    case DistributionKind::uniform: return a + p * (b - a);
  }
  return 0.0;
}

double mean(const DistributionSpec& spec) {
  switch (spec.kind()) {
    case DistributionKind::gumbel: return spec.first() + kEulerGamma * spec.second();
    case DistributionKind::normal:
    case DistributionKind::lognormal: return spec.first();
    case DistributionKind::uniform: return 0.5 * (spec.first() + spec.second());
  }
  return 0.0;
}

double stddev(const DistributionSpec& spec) {
  switch (spec.kind()) {
    case DistributionKind::gumbel: return spec.second() * std::numbers::pi / std::sqrt(6.0);
    case DistributionKind::normal:
    case DistributionKind::lognormal: return spec.second();
    case DistributionKind::uniform: return (spec.second() - spec.first()) / std::sqrt(12.0);
  }
  return 0.0;
}

double support_lower(const DistributionSpec& spec) {
  switch (spec.kind()) {
    case DistributionKind::lognormal: return 0.0;
    case DistributionKind::uniform: return spec.first();
    default: return -std::numeric_limits<double>::infinity();
  }
}

double support_upper(const DistributionSpec& spec) {
  if (spec.kind() == DistributionKind::uniform) return spec.second();
  return std::numeric_limits<double>::infinity();
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(seed ^ mix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

std::uint64_t RandomSource::bits_at(std::uint64_t index) const noexcept {
  return mix64(key_ + mix64(index));
}

double RandomSource::uniform_at(std::uint64_t index) const noexcept {
  // 53 random bits, shifted to the centre of their cell: never 0 or 1.
  const std::uint64_t m = bits_at(index) >> 11;
  return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

RandomSource RandomSource::split(std::uint64_t child) const noexcept {
  return RandomSource(seed_, mix64(stream_id_ * 0x2545f4914f6cdd1dULL + child + 1));
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RandomSource& src) {
  std::vector<double> out(n);
  const std::uint64_t start = src.position();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = quantile(spec, src.uniform_at(start + i));
  });
  src.skip(n);
  return out;
}

}  // namespace voi
