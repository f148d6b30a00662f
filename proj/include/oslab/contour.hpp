#pragma once

#include <Eigen/Dense>
#include <complex>

#include "oslab/errors.hpp"

namespace oslab::contour {

// Largest eigenvalue of the symmetric part (A + A*)/2; nonpositive for a
// dissipative generator.
double dissipativity_defect(const Eigen::MatrixXcd& a);

struct ContourOptions {
    double tolerance = 1e-9;  // absolute accuracy target for the integral
    double lambdaCap = 5e7;   // refuse truncation radii beyond this
    long maxEvaluations = 20000000;
    // skip the straight-line reference inside deformed_contour_check; the
    // horizontal contour carries an exp(t/2) amplification that makes it
    // pointless for large t, while the pushed-down path stays cheap
    bool compareStraight = true;
};

// Evaluate exp(tA) (I - A)^{-k} u through the half-plane contour integral
//   -(1/2 pi) Int_{Im lambda = 1/2} exp(-i t lambda) (1 + i lambda)^{-k}
//                       (A + i lambda)^{-1} u  d lambda.
// Requires k >= 2 (integrand decay), t >= 0 and dissipative A; throws
// NotDissipativeError or TailTooLargeError accordingly.
Eigen::VectorXcd semigroup_contour(const Eigen::MatrixXcd& a, int k, double t,
                                   const Eigen::VectorXcd& u,
                                   const ContourOptions& opts = {});

struct DeformedCheck {
    Eigen::VectorXcd straight;  // value along the horizontal contour (empty if skipped)
    Eigen::VectorXcd deformed;  // value along the pushed-down contour
    double difference = 0.0;    // norm of the discrepancy (NaN if skipped)
};

// Push the contour down to Im lambda = -depth, with vertical connectors at
// the truncation ends and a circular detour of radius arcRadius over the
// origin (arcRadius > depth required). Poles of the resolvent sitting on
// the deformed path raise PoleOnPathError. When no pole lies between the
// two contours the difference is pure quadrature error.
DeformedCheck deformed_contour_check(const Eigen::MatrixXcd& a, int k, double t,
                                     const Eigen::VectorXcd& u, double depth,
                                     double arcRadius = 0.0, const ContourOptions& opts = {});

// Block resolvent of the first-order formulation of the damped wave system,
// assembled from a cutoff chi and the cut-off Helmholtz resolvent
// R = chi (-Lap - lambda^2)^{-1} chi:
//   [ i lambda R          -R        ]
//   [ chi^2 + lambda^2 R  i lambda R ]
// (all blocks share the cutoff). Sizes must agree.
Eigen::MatrixXcd generator_block_resolvent(std::complex<double> lambda,
                                           const Eigen::MatrixXcd& cutoffResolvent,
                                           const Eigen::VectorXd& chi);

} // namespace oslab::contour
