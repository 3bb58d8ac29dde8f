#include "kvlab/grid.hpp"

#include <numeric>

namespace kvlab {

GridSpec::GridSpec(int nx, int ny) {
  if (nx != ny) throw std::invalid_argument("grid must be square (nx == ny)");
  if (nx < 8) throw std::invalid_argument("grid needs at least 8 cells per side");
  n_ = nx;
  h_ = 1.0 / nx;
  if (h_ * nx != 1.0)
    throw std::invalid_argument("h*n is not exactly 1 for n = " + std::to_string(nx));
}

void VelocityField::clear_boundary() {
  const int n = grid_.n();
  for (int j = 0; j < n; ++j) {
    u(0, j) = 0.0;
    u(n, j) = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    v(i, 0) = 0.0;
    v(i, n) = 0.0;
  }
}

bool VelocityField::boundary_is_zero() const {
  const int n = grid_.n();
  for (int j = 0; j < n; ++j)
    if (u(0, j) != 0.0 || u(n, j) != 0.0) return false;
  for (int i = 0; i < n; ++i)
    if (v(i, 0) != 0.0 || v(i, n) != 0.0) return false;
  return true;
}

VelocityField& VelocityField::operator+=(const VelocityField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

VelocityField& VelocityField::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

VelocityField& VelocityField::axpy(double s, const VelocityField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
  return *this;
}

VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
VelocityField operator*(double s, VelocityField a) { return a *= s; }

double PressureField::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / double(data_.size());
}

void PressureField::remove_mean() {
  const double m = mean();
  for (auto& x : data_) x -= m;
}

PressureField& PressureField::operator+=(const PressureField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

PressureField& PressureField::operator-=(const PressureField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

PressureField& PressureField::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

PressureField& PressureField::axpy(double s, const PressureField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
  return *this;
}

PressureField operator+(PressureField a, const PressureField& b) { return a += b; }
PressureField operator-(PressureField a, const PressureField& b) { return a -= b; }
PressureField operator*(double s, PressureField a) { return a *= s; }

void FlowParameters::validate() const {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
}

double inner(const VelocityField& a, const VelocityField& b) {
  require_same(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  const double h = a.grid().h();
  return s * h * h;
}

double inner(const PressureField& a, const PressureField& b) {
  require_same(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  const double h = a.grid().h();
  return s * h * h;
}

}  // namespace kvlab
