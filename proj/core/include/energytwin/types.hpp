#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace energytwin {

/// Simulation time step. One tick is one hour of simulated time.
struct Tick {
  std::int64_t index = 0;

  constexpr Tick() = default;
  constexpr explicit Tick(std::int64_t i) : index(i) {}

  constexpr int hour_of_day() const { return static_cast<int>(index % 24); }
  constexpr int day_of_week() const { return static_cast<int>((index / 24) % 7); }

  constexpr Tick next() const { return Tick{index + 1}; }
  constexpr Tick operator+(std::int64_t n) const { return Tick{index + n}; }

  friend constexpr auto operator<=>(Tick, Tick) = default;
};

inline std::ostream& operator<<(std::ostream& os, Tick t) { return os << t.index; }

/// Unique agent name; lexicographic order is the delivery order.
class AgentId {
 public:
  AgentId() = default;
  explicit AgentId(std::string name) : name_(std::move(name)) {}

  const std::string& str() const { return name_; }
  bool empty() const { return name_.empty(); }

  friend auto operator<=>(const AgentId&, const AgentId&) = default;

 private:
  std::string name_;
};

inline std::ostream& operator<<(std::ostream& os, const AgentId& id) { return os << id.str(); }

// Hours per tick. The whole model runs on hourly steps.
inline constexpr double kTickHours = 1.0;

}  // namespace energytwin

template <>
struct std::hash<energytwin::AgentId> {
  std::size_t operator()(const energytwin::AgentId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
