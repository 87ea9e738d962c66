#include "genfpk/history.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "genfpk/errors.hpp"

namespace genfpk {

MomentHistory::MomentHistory(std::vector<int> degrees) : degrees_(std::move(degrees)) {}

void MomentHistory::append(double t, double r_hprime, std::vector<double> r_gk) {
  if (r_gk.size() != degrees_.size())
    throw UsageError("MomentHistory: moment vector size does not match the tracked degrees");
  double q = 0.0;
  if (!times_.empty()) {
    if (!(t > times_.back())) throw UsageError("MomentHistory: times must increase");
    q = prefix_.back() + 0.5 * (t - times_.back()) * (r_hprime_.back() + r_hprime);
  }
  times_.push_back(t);
  r_hprime_.push_back(r_hprime);
  r_gk_.push_back(std::move(r_gk));
  prefix_.push_back(q);
}

void MomentHistory::replace_last(double r_hprime, std::vector<double> r_gk) {
  if (times_.empty()) throw UsageError("MomentHistory: no node to replace");
  const double t = times_.back();
  pop_back();
  append(t, r_hprime, std::move(r_gk));
}

void MomentHistory::pop_back() {
  if (times_.empty()) throw UsageError("MomentHistory: pop from empty history");
  times_.pop_back();
  r_hprime_.pop_back();
  r_gk_.pop_back();
  prefix_.pop_back();
}

std::size_t MomentHistory::cell_of(double s) const {
  if (times_.size() < 2) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), s);
  std::size_t j = static_cast<std::size_t>(std::distance(times_.begin(), it));
  j = j == 0 ? 0 : j - 1;
  return std::min(j, times_.size() - 2);
}

double MomentHistory::prefix_at(double s) const {
  if (times_.empty()) throw UsageError("MomentHistory: empty history");
  const double span = times_.back() - times_.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (s < times_.front() - slack || s > times_.back() + slack)
    throw UsageError("MomentHistory: time outside the recorded history");
  if (times_.size() == 1) return prefix_.front();
  const std::size_t j = cell_of(s);
  const double dt = times_[j + 1] - times_[j];
  const double u = s - times_[j];
  return prefix_[j] + u * r_hprime_[j] + 0.5 * u * u * (r_hprime_[j + 1] - r_hprime_[j]) / dt;
}

}  // namespace genfpk
