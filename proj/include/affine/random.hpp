#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "affine/estimate.hpp"

namespace affine {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-derived substream seed: distinct (seed, stream) pairs give
/// statistically independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

/// Draws per chunk. Each chunk owns the substream derive_seed(seed, chunk),
/// so results do not depend on how chunks are spread over workers.
inline constexpr std::size_t kChunkSize = 4096;

void set_worker_count(int workers);
int worker_count();

/// Pooled sample moments of k simultaneously estimated quantities.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int k = 1);

  void add(std::span<const double> x);
  void add_nonfinite() { ++nonfinite_; }
  /// Chan-style merge; the merge order is fixed by the caller.
  void merge(const MomentAccumulator& other);

  int width() const { return k_; }
  std::size_t count() const { return count_; }
  std::size_t nonfinite() const { return nonfinite_; }
  double mean(int i) const { return mean_[i]; }
  /// Sample covariance between outputs i and j.
  double covariance(int i, int j) const;
  /// Standard error of mean(i).
  double std_error(int i) const;

 private:
  int k_;
  std::size_t count_ = 0;
  std::size_t nonfinite_ = 0;
  Vec mean_;
  Vec comoment_;  // k x k
};

/// draw(rng, out) writes k values for one sample; a sample with any
/// non-finite value is counted and excluded from the moments.
using SampleFn = std::function<void(Rng&, std::span<double>)>;

MomentAccumulator run_chunked(std::size_t samples, std::uint64_t seed, int k, const SampleFn& draw);

/// Calls body(rng, begin, end) once per chunk of [0, count) with the chunk's
/// substream, spreading chunks over the workers.
using ChunkFn = std::function<void(Rng&, std::size_t, std::size_t)>;
void for_each_chunk(std::size_t count, std::uint64_t seed, const ChunkFn& body);

/// Package output i of an accumulator, scaling value and error by `scale`.
MCEstimate to_estimate(const MomentAccumulator& acc, int i, std::uint64_t seed, double scale = 1.0);

/// mean(i) / mean(j) with a delta-method error that accounts for the
/// covariance of the two outputs.
MCEstimate ratio_of_means(const MomentAccumulator& acc, int i, int j, std::uint64_t seed);

/// Uniform direction on S^{d-1} by normalizing a standard Gaussian vector.
void uniform_direction(Rng& rng, std::span<double> out);

/// Uniform point in the Euclidean ball of radius r.
void uniform_in_ball(Rng& rng, double radius, std::span<double> out);

}  // namespace affine
