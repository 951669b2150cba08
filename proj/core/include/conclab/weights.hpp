#pragma once

#include <Eigen/Dense>
#include <optional>

#include "conclab/sampling.hpp"

namespace conclab {

/// Weight matrix Theta(O) with Theta_ij = sqrt((O_ij^2 + O_ji^2) / 2).
/// Symmetric by construction; every row sum of the Hadamard square
/// (Theta_ij^2) equals 1 to high accuracy because O has orthonormal rows
/// and columns.
struct WeightMatrix {
    int n = 0;
    Eigen::MatrixXd theta;
    std::optional<OrthogonalMatrix> source;

    /// max |row sum of Theta_ij^2 - 1| over rows.
    double hadamard_row_defect() const;
    double max_entry() const { return theta.maxCoeff(); }
};

WeightMatrix build_theta(const OrthogonalMatrix& o);

/// Tail certificate for the maximal weight entry at threshold
/// t * sqrt(log(n) / n), for n >= 4:
///   P(max Theta >= t sqrt(log n / n)) <= 8 / (t sqrt(2 pi)) * n^(-t^2/8 + 2),
/// with the simplified bound 8 / (t sqrt(2 pi)) * n^(-3) available once
/// t >= sqrt(40). Both values are capped at 1; t = 0 returns the trivial
/// bound 1.
struct MaxWeightTailBound {
    double bound = 1.0;
    std::optional<double> simplified; // set when t >= sqrt(40)
    double threshold = 0.0;           // t * sqrt(log n / n)
};

MaxWeightTailBound max_weight_tail_certificate(int n, double t);

} // namespace conclab
