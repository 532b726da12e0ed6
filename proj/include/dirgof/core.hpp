#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dirgof {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Row-major storage of n points on the sphere, one point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Rng = std::mt19937_64;

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  length_mismatch,
  unsupported_scheme,
  nonconvergent_quadrature,
  inadmissible_kernel,
  rank_deficient,
  no_convergence,
  data_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::unsupported_scheme: return "unsupported-scheme";
    case ErrorCode::nonconvergent_quadrature: return "nonconvergent-quadrature";
    case ErrorCode::inadmissible_kernel: return "inadmissible-kernel";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::data_error: return "data-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

/// Independent generator for a (seed, key...) tuple. Streams for different
/// keys do not depend on how many draws were taken from any other stream.
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace dirgof
