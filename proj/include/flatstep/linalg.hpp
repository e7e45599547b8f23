#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatstep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrKind {
  InvalidInput,
  BranchError,
  StepTooLarge,
  Unsupported,
  NumericalError,
  Unstable,
  OutOfDomain,
  NotAWall,
  PoleAtWall,
  DegenerateStationaryPoint,
  DegenerateSwitch,
  NotSPD,
  NotConverged,
  OracleContractViolation,
};

struct Error : std::runtime_error {
  ErrKind kind;
  Error(ErrKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(ErrKind k, const std::string& msg) { throw Error(k, msg); }

inline bool all_finite(const Matrix& a) { return a.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 1)
    fail(ErrKind::InvalidInput, std::string(who) + ": matrix must be square");
}

inline void require_finite(const Matrix& a, const char* who) {
  if (!all_finite(a)) fail(ErrKind::InvalidInput, std::string(who) + ": non-finite entries");
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrKind::InvalidInput, std::string(who) + ": dimension mismatch");
}

inline double fro(const Matrix& a) { return a.norm(); }

/// Matrix exponential (scaling-and-squaring with a diagonal Pade approximant).
Matrix expm(const Matrix& a);

/// Principal matrix logarithm (inverse scaling-and-squaring on the Schur form).
/// Throws BranchError if the spectrum touches the closed negative real axis.
Matrix logm(const Matrix& a);

/// [A,B] = AB - BA.
Matrix commutator(const Matrix& a, const Matrix& b);

/// Relative symmetry defect ||A - A^T||_F / ||A||_F (0 for the zero matrix).
double symmetry_defect(const Matrix& a);

bool is_spd(const Matrix& a);
inline void require_spd(const Matrix& a, const char* who) {
  if (!is_spd(a)) fail(ErrKind::NotSPD, std::string(who) + ": matrix not SPD");
}

/// Least-squares slope of log(err) vs log(h). Pairs with err <= floor are skipped.
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err,
                    double floor = 1e-300);

// ---------------------------------------------------------------------------
// Reproducible RNG. The generator is splitmix64 (Steele, Lea, Vigna 2014):
//   state += 0x9E3779B97F4A7C15; z = state;
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//   return z ^ (z >> 31);
// Doubles are the top 53 bits / 2^53; normals come from Box-Muller.
// Replica streams are derived as splitmix64_mix(seed ^ (stream * GOLDEN)).
// ---------------------------------------------------------------------------
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one draw per call, pair cached).
  double normal();
  /// Rademacher +-1.
  double rademacher() { return (next() & 1u) ? 1.0 : -1.0; }

  Matrix random_matrix(int n, double scale = 1.0);
  Matrix random_symmetric(int n, double scale = 1.0);
  /// SPD with spectrum in [lo,hi], random orthogonal eigenbasis.
  Matrix random_spd(int n, double lo, double hi);
  Vector random_vector(int n, double scale = 1.0);
  Vector random_unit(int n);

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stream derivation for parallel replicas: documented mixing of seed and id.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (stream * 0x9E3779B97F4A7C15ULL));
  return g.next();
}

}  // namespace flatstep
