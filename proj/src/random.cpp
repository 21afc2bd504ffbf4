#include "affine/random.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace affine {

namespace {

std::atomic<int> g_workers{0};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

void set_worker_count(int workers) { g_workers.store(std::max(0, workers)); }

int worker_count() {
  const int w = g_workers.load();
  if (w > 0) return w;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

MomentAccumulator::MomentAccumulator(int k)
    : k_(k), mean_(static_cast<std::size_t>(k), 0.0), comoment_(static_cast<std::size_t>(k) * k, 0.0) {}

void MomentAccumulator::add(std::span<const double> x) {
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  double delta_old[kMaxDim];
  for (int i = 0; i < k_; ++i) {
    delta_old[i] = x[i] - mean_[i];
    mean_[i] += delta_old[i] * inv;
  }
  for (int i = 0; i < k_; ++i) {
    const double delta_new = x[i] - mean_[i];
    for (int j = 0; j < k_; ++j) comoment_[static_cast<std::size_t>(i) * k_ + j] += delta_old[j] * delta_new;
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  nonfinite_ += other.nonfinite_;
  if (other.count_ == 0) return;
  if (count_ == 0) {
    const auto nf = nonfinite_;
    *this = other;
    nonfinite_ = nf;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  double delta[kMaxDim];
  for (int i = 0; i < k_; ++i) delta[i] = other.mean_[i] - mean_[i];
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * k_ + j;
      comoment_[idx] += other.comoment_[idx] + delta[i] * delta[j] * na * nb / n;
    }
  for (int i = 0; i < k_; ++i) mean_[i] += delta[i] * nb / n;
  count_ += other.count_;
}

double MomentAccumulator::covariance(int i, int j) const {
  if (count_ < 2) return 0.0;
  return comoment_[static_cast<std::size_t>(i) * k_ + j] / static_cast<double>(count_ - 1);
}

double MomentAccumulator::std_error(int i) const {
  if (count_ < 2) return 0.0;
  return std::sqrt(std::max(0.0, covariance(i, i)) / static_cast<double>(count_));
}

namespace {

void run_parallel(std::size_t chunks, const std::function<void(std::size_t)>& run_chunk) {
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
    });
}

}  // namespace

void for_each_chunk(std::size_t count, std::uint64_t seed, const ChunkFn& body) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<std::exception_ptr> errors(chunks);
  run_parallel(chunks, [&](std::size_t c) {
    try {
      Rng rng = make_stream(seed, c);
      body(rng, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

MomentAccumulator run_chunked(std::size_t samples, std::uint64_t seed, int k, const SampleFn& draw) {
  if (k < 1 || k > kMaxDim) throw std::invalid_argument("run_chunked: unsupported output width");
  const std::size_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  std::vector<MomentAccumulator> partial(chunks, MomentAccumulator(k));
  for_each_chunk(samples, seed, [&](Rng& rng, std::size_t begin, std::size_t end) {
    double out[kMaxDim];
    MomentAccumulator& acc = partial[begin / kChunkSize];
    for (std::size_t s = begin; s < end; ++s) {
      draw(rng, std::span<double>(out, static_cast<std::size_t>(k)));
      bool finite = true;
      for (int i = 0; i < k; ++i) finite = finite && std::isfinite(out[i]);
      if (finite)
        acc.add(std::span<const double>(out, static_cast<std::size_t>(k)));
      else
        acc.add_nonfinite();
    }
  });
  MomentAccumulator total(k);
  for (const auto& p : partial) total.merge(p);
  return total;
}

MCEstimate to_estimate(const MomentAccumulator& acc, int i, std::uint64_t seed, double scale) {
  MCEstimate e;
  e.value = acc.count() ? acc.mean(i) * scale : 0.0;
  e.std_error = acc.std_error(i) * std::abs(scale);
  e.samples = acc.count() + acc.nonfinite();
  e.nonfinite = acc.nonfinite();
  e.seed = seed;
  return e;
}

MCEstimate ratio_of_means(const MomentAccumulator& acc, int i, int j, std::uint64_t seed) {
  MCEstimate e;
  e.samples = acc.count() + acc.nonfinite();
  e.nonfinite = acc.nonfinite();
  e.seed = seed;
  if (acc.count() == 0) return e;
  const double a = acc.mean(i), b = acc.mean(j);
  e.value = a / b;
  const double n = static_cast<double>(acc.count());
  const double var = (acc.covariance(i, i) / (b * b) - 2.0 * a * acc.covariance(i, j) / (b * b * b) +
                      a * a * acc.covariance(j, j) / (b * b * b * b)) /
                     n;
  e.std_error = std::sqrt(std::max(0.0, var));
  return e;
}

void uniform_direction(Rng& rng, std::span<double> out) {
  std::normal_distribution<double> normal;
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (auto& x : out) {
      x = normal(rng);
      r2 += x * x;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  for (auto& x : out) x *= inv;
}

void uniform_in_ball(Rng& rng, double radius, std::span<double> out) {
  uniform_direction(rng, out);
  std::uniform_real_distribution<double> unif;
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(out.size()));
  for (auto& x : out) x *= r;
}

}  // namespace affine
