#pragma once
// Staggered (MAC) grid and field containers on the unit square.
//
// Layout: x-velocity lives on vertical faces (i*h, (j+1/2)*h) for
// i in [0, n], j in [0, n); y-velocity on horizontal faces
// ((i+1/2)*h, j*h) for i in [0, n), j in [0, n]; pressure at cell
// centers. Faces on the wall (i == 0, n for u; j == 0, n for v) are
// held at zero.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvlab {

class GridMismatch : public std::invalid_argument {
 public:
  GridMismatch() : std::invalid_argument("fields live on different grids") {}
};

class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int nx, int ny);
  static GridSpec square(int n) { return GridSpec(n, n); }

  int nx() const { return n_; }
  int ny() const { return n_; }
  int n() const { return n_; }
  double h() const { return h_; }

  std::size_t u_count() const { return std::size_t(n_ + 1) * n_; }
  std::size_t v_count() const { return std::size_t(n_) * (n_ + 1); }
  std::size_t velocity_count() const { return u_count() + v_count(); }
  std::size_t cell_count() const { return std::size_t(n_) * n_; }

  std::size_t u_index(int i, int j) const { return std::size_t(i) * n_ + j; }
  std::size_t v_index(int i, int j) const {
    return u_count() + std::size_t(i) * (n_ + 1) + j;
  }
  std::size_t cell_index(int i, int j) const { return std::size_t(i) * n_ + j; }

  bool operator==(const GridSpec&) const = default;

 private:
  int n_ = 0;
  double h_ = 0.0;
};

inline void require_same(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw GridMismatch();
}

class VelocityField {
 public:
  VelocityField() = default;
  explicit VelocityField(const GridSpec& g) : grid_(g), data_(g.velocity_count(), 0.0) {}

  const GridSpec& grid() const { return grid_; }

  double& u(int i, int j) { return data_[grid_.u_index(i, j)]; }
  double u(int i, int j) const { return data_[grid_.u_index(i, j)]; }
  double& v(int i, int j) { return data_[grid_.v_index(i, j)]; }
  double v(int i, int j) const { return data_[grid_.v_index(i, j)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  // Zeroes every wall face.
  void clear_boundary();
  bool boundary_is_zero() const;

  VelocityField& operator+=(const VelocityField& o);
  VelocityField& operator-=(const VelocityField& o);
  VelocityField& operator*=(double s);
  // this += s * o
  VelocityField& axpy(double s, const VelocityField& o);

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

VelocityField operator+(VelocityField a, const VelocityField& b);
VelocityField operator-(VelocityField a, const VelocityField& b);
VelocityField operator*(double s, VelocityField a);

class PressureField {
 public:
  PressureField() = default;
  explicit PressureField(const GridSpec& g) : grid_(g), data_(g.cell_count(), 0.0) {}

  const GridSpec& grid() const { return grid_; }
  double& operator()(int i, int j) { return data_[grid_.cell_index(i, j)]; }
  double operator()(int i, int j) const { return data_[grid_.cell_index(i, j)]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::size_t size() const { return data_.size(); }

  double mean() const;
  void remove_mean();

  PressureField& operator+=(const PressureField& o);
  PressureField& operator-=(const PressureField& o);
  PressureField& operator*=(double s);
  PressureField& axpy(double s, const PressureField& o);

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

PressureField operator+(PressureField a, const PressureField& b);
PressureField operator-(PressureField a, const PressureField& b);
PressureField operator*(double s, PressureField a);

struct FlowParameters {
  double nu = 1.0;
  double kappa = 0.0;

  // Throws std::invalid_argument unless nu > 0 and kappa >= 0.
  void validate() const;
};

// Discrete L2 inner products (midpoint rule on native control volumes).
double inner(const VelocityField& a, const VelocityField& b);
double inner(const PressureField& a, const PressureField& b);

}  // namespace kvlab
