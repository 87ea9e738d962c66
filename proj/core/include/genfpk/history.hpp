#pragma once

#include <cstddef>
#include <vector>

namespace genfpk {

/// Time series of the response moments feeding the VADA diffusion:
/// R_{h'}(t_j), R_{g'_k}(t_j) for every nonlinear degree k, and the prefix
/// integrals Q(t_j) = int_{t0}^{t_j} R_{h'}(u) du accumulated by the
/// trapezoid rule.
class MomentHistory {
 public:
  explicit MomentHistory(std::vector<int> degrees = {});

  const std::vector<int>& degrees() const noexcept { return degrees_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  /// Appends a node; the time must exceed the last stored time.
  void append(double t, double r_hprime, std::vector<double> r_gk);
  /// Overwrites the moments of the last node and recomputes its prefix integral.
  void replace_last(double r_hprime, std::vector<double> r_gk);
  void pop_back();

  double time(std::size_t i) const { return times_[i]; }
  double r_hprime(std::size_t i) const { return r_hprime_[i]; }
  const std::vector<double>& r_gk(std::size_t i) const { return r_gk_[i]; }
  double prefix(std::size_t i) const { return prefix_[i]; }

  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }

  /// Q(s) for any s in [t0, t_last]; inside a cell R_{h'} is taken linear,
  /// which reproduces the trapezoid prefix at the nodes.
  double prefix_at(double s) const;
  /// Index j of the cell [t_j, t_{j+1}] containing s.
  std::size_t cell_of(double s) const;

 private:
  std::vector<int> degrees_;
  std::vector<double> times_;
  std::vector<double> r_hprime_;
  std::vector<std::vector<double>> r_gk_;
  std::vector<double> prefix_;
};

}  // namespace genfpk
