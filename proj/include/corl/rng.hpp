#pragma once

#include <cstdint>
#include <random>

namespace corl {

// Purpose tag for deriving independent substreams from one master seed.
// Every stochastic consumer owns its own (seed, user, purpose) stream, so
// results do not depend on evaluation order or thread scheduling.
enum class Stream : std::uint64_t {
  CoefPerturb = 1,
  InitState,
  StateNoise,
  RewardNoise,
  ActionDraw,
  EvalInitState,
  EvalStateNoise,
  EvalRewardNoise,
  EvalActionDraw,
};

std::uint64_t splitmix64(std::uint64_t x);

// Stable seed for the (master, user, purpose) substream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t user, Stream purpose);

// One random source owned by a single consumer. Keeping the normal
// distribution's pair cache inside the stream keeps replay exact.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t user, Stream purpose)
      : engine_(derive_seed(master, user, purpose)) {}

  // Standard normal draw.
  double gauss() { return normal_(engine_); }

  // Uniform draw in [0, 1).
  double uniform() { return uniform_(engine_); }

  // 1 with probability p1, else 0.
  int bernoulli(double p1) { return uniform() < p1 ? 1 : 0; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// The bundle of streams one simulated user consumes during a run.
struct UserStreams {
  RngStream init;
  RngStream state;
  RngStream reward;
  RngStream action;

  UserStreams(std::uint64_t master, int user_id)
      : init(master, static_cast<std::uint64_t>(user_id), Stream::InitState),
        state(master, static_cast<std::uint64_t>(user_id), Stream::StateNoise),
        reward(master, static_cast<std::uint64_t>(user_id), Stream::RewardNoise),
        action(master, static_cast<std::uint64_t>(user_id), Stream::ActionDraw) {}
};

}  // namespace corl
