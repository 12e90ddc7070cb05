#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thinshell {

using scalar = double;

template <class S> using VecX = Eigen::VectorX<S>;
template <class S> using MatX = Eigen::MatrixX<S>;
template <class S> using ArrX = Eigen::ArrayX<S>;

template <class S> constexpr S pi_v = std::numbers::pi_v<S>;
template <class S> constexpr S four_pi = S(4) * std::numbers::pi_v<S>;

// Caller passed inconsistent shapes / operator kinds.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Construction-time parameter problems (grid sizes, eps range, ...).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A time-stepper produced a non-finite state.
struct divergence_error : std::runtime_error {
  std::size_t step;
  explicit divergence_error(std::size_t step_index)
      : std::runtime_error("non-finite state at step " + std::to_string(step_index)),
        step(step_index) {}
};

// Flat index of the (l, m) coefficient, |m| <= l: l^2 + l + m.
constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int sh_count(int lmax) { return (lmax + 1) * (lmax + 1); }

// Stream-function coefficients exclude l = 0.
constexpr int stream_index(int l, int m) { return sh_index(l, m) - 1; }
constexpr int stream_count(int lmax) { return sh_count(lmax) - 1; }

}  // namespace thinshell
