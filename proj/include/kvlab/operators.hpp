#pragma once
// Discrete differential operators on the MAC grid.

#include <span>

#include "kvlab/grid.hpp"

namespace kvlab {

// 5-point Laplacian per velocity component. Wall-tangential neighbours
// use the reflected ghost value (-u), so the result vanishes on walls.
VelocityField laplacian(const VelocityField& f);

// Cell-centred face-difference divergence.
PressureField divergence(const VelocityField& f);

// Face-centred pressure differences on interior faces; exact negative
// adjoint of divergence in the discrete L2 pairing.
VelocityField gradient(const PressureField& p);

// Skew-symmetrised convection form 1/2 (v.grad w, phi) - 1/2 (v.grad phi, w).
double trilinear_b(const VelocityField& v, const VelocityField& w, const VelocityField& phi);

// Field whose L2 pairing with phi reproduces trilinear_b(v, w, phi).
VelocityField convection_operator(const VelocityField& v, const VelocityField& w);

struct Projection {
  VelocityField velocity;   // divergence-free part
  PressureField potential;  // mean-zero phi with f = velocity + grad(phi)
};

// Leray projection through a cell-centred Neumann Poisson solve.
Projection project(const VelocityField& f);

// -P(laplacian(f)), the discrete Stokes operator applied to f.
VelocityField stokes_apply(const VelocityField& f);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double max = 0.0;
};

// For velocity fields h1_semi^2 == -<laplacian(f), f>.
Norms norms(const VelocityField& f);
// For pressure fields h1_semi is the l2 norm of gradient(p).
Norms norms(const PressureField& p);

// <f, (-laplacian)^{-1} f>^{1/2}
double h_minus1_norm(const VelocityField& f);

// L4 norm of the cell-centre interpolant |u|.
double l4_norm(const VelocityField& f);

// Velocity from a node stream function: u = d(psi)/dy, v = -d(psi)/dx.
// psi holds (n+1)^2 node values, index i*(n+1)+j; wall nodes must be zero.
VelocityField curl_of_stream(const GridSpec& g, std::span<const double> psi);

}  // namespace kvlab
