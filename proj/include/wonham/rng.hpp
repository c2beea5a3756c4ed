#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace wonham {

// Independent stream keyed by (master seed, tags...). Equal keys give equal
// streams on every thread, so fan-out order never changes a result.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> tags);

  double uniform();                 // [0, 1)
  double normal();                  // N(0, 1)
  double exponential(double rate);  // rate > 0
  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t id() const noexcept { return id_; }

 private:
  std::uint64_t id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream tags used across the library.
enum class StreamTag : std::uint64_t {
  Path = 1,
  Ctmc = 2,
  Observation = 3,
  Inner = 4,
  Backward = 5,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace wonham
