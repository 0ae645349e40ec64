#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "scte/errors.hpp"
#include "scte/linalg.hpp"

namespace scte {

/// Both potential outcome vectors, plus the generating coefficients when the
/// data is synthetic (absent for ingested data).
struct PotentialOutcomes {
  Vector y1;
  Vector y0;
  std::optional<Vector> beta1;
  std::optional<Vector> beta0;
  double sigma = 0.0;

  Index n() const { return y0.size(); }
};

enum class Arm : std::uint8_t { control = 0, treatment = 1 };

/// Access-logged view over (y1, y0). A design may read at most one arm per
/// unit; the second-arm request throws. The log is append-only.
class OutcomeOracle {
 public:
  OutcomeOracle(Vector y1, Vector y0)
      : y1_(std::move(y1)), y0_(std::move(y0)), seen_(y0_.size(), kUnread) {
    if (y1_.size() != y0_.size())
      throw DimensionMismatch("OutcomeOracle: arm lengths differ");
  }

  explicit OutcomeOracle(const PotentialOutcomes& po) : OutcomeOracle(po.y1, po.y0) {}

  Index n() const { return y0_.size(); }

  double read(Index unit, Arm arm) {
    if (unit < 0 || unit >= n()) throw DimensionMismatch("OutcomeOracle: unit out of range");
    const std::int8_t want = static_cast<std::int8_t>(arm);
    if (seen_[static_cast<std::size_t>(unit)] != kUnread &&
        seen_[static_cast<std::size_t>(unit)] != want)
      throw OracleViolation("OutcomeOracle: both arms requested for unit " +
                            std::to_string(unit));
    if (seen_[static_cast<std::size_t>(unit)] == kUnread) ++revealed_;
    seen_[static_cast<std::size_t>(unit)] = want;
    log_.emplace_back(unit, arm);
    return arm == Arm::treatment ? y1_(unit) : y0_(unit);
  }

  Index revealed_count() const { return revealed_; }

  // kUnread, or the arm that was revealed.
  std::int8_t arm_seen(Index unit) const { return seen_[static_cast<std::size_t>(unit)]; }

  const std::vector<std::pair<Index, Arm>>& access_log() const { return log_; }

  static constexpr std::int8_t kUnread = -1;

 private:
  Vector y1_;
  Vector y0_;
  std::vector<std::int8_t> seen_;
  std::vector<std::pair<Index, Arm>> log_;
  Index revealed_ = 0;
};

}  // namespace scte
