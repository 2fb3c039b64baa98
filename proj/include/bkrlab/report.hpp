#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>

namespace bkr {

inline constexpr double kSlackTolerance = 1e-9;

/// Short number for witness strings (6 significant digits).
inline std::string fmt_short(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

enum class Method { exact, monte_carlo };

inline const char* method_name(Method m) { return m == Method::exact ? "exact" : "monte-carlo"; }

struct McInterval {
  std::size_t samples = 0;
  double lhs_half_width = 0.0;  // 99% normal-approximation half widths
  double rhs_half_width = 0.0;
};

/// Outcome of evaluating one inequality LHS <= RHS.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = true;
  std::string witness;
  Method method = Method::exact;
  std::optional<McInterval> mc;
  /// Reported for information only; not backed by a theorem of this engine
  /// and ignored by exit-code logic.
  bool observation = false;
};

inline double allowed_excess(double rhs) { return kSlackTolerance * std::max(1.0, rhs); }

inline InequalityReport make_report(std::string name, double lhs, double rhs, std::string witness = {}) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = lhs <= rhs + allowed_excess(rhs);
  r.witness = std::move(witness);
  return r;
}

/// MC variant: the comparison widens by both confidence half widths, so a
/// tight inequality is not flagged from sampling noise alone.
inline InequalityReport make_mc_report(std::string name, double lhs, double rhs, McInterval ci,
                                       std::string witness = {}) {
  auto r = make_report(std::move(name), lhs, rhs, std::move(witness));
  r.method = Method::monte_carlo;
  r.mc = ci;
  r.holds = lhs <= rhs + allowed_excess(rhs) + ci.lhs_half_width + ci.rhs_half_width;
  return r;
}

inline InequalityReport as_observation(InequalityReport r) {
  r.observation = true;
  return r;
}

}  // namespace bkr
