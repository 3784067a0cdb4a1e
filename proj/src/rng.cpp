#include "siv/rng.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <numeric>
#include <utility>

namespace siv {

std::vector<std::size_t> sample_with_replacement(Rng& rng, std::size_t N, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> pick(0, N - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t N, std::size_t n) {
  std::vector<std::size_t> pool(N);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n && i + 1 < N; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, N - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  return pool;
}

}  // namespace siv
