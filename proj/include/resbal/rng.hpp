#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace resbal {

// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
// independent sequence; `substream(k)` derives the k-th child sequence, so a
// replication's draws depend only on (seed, k) and never on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  bool bernoulli(double prob) { return uniform() < prob; }
  // Uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound);

  Rng substream(std::uint64_t index) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace resbal
