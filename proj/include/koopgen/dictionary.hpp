#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopgen/dynamics.hpp"

namespace koopgen {

/// A single closed-form observable test function (monomial).
struct Observable {
    Eigen::VectorXi exponents;  // nonnegative, one per coordinate
    std::string label;          // e.g. "x1^2*x2"

    double operator()(const Eigen::VectorXd& x) const;
};

/// Ordered dictionary Z of observables; the ordering is part of the
/// on-disk format.
struct Dictionary {
    std::vector<Observable> entries;
    int dimension = 0;

    int size() const { return static_cast<int>(entries.size()); }
    // Stable identity hash of dimension + ordered labels.
    std::uint64_t basis_id() const;
};

// 2-D monomials x1^i x2^j, j-major: [z00, z10, ..., z_{mi,0}, z01, ...].
Dictionary monomials_2d(int max_i, int max_j);

// 1-D monomials x^n for n in [min_n, max_n].
Dictionary monomials_1d(int min_n, int max_n);

// "monomials2d:max_i=3,max_j=2" or "monomials1d:min_n=1,max_n=3".
Dictionary dictionary_from_spec(const std::string& spec);

// Row vector [z_0(x), ..., z_{N-1}(x)].
Eigen::RowVectorXd evaluate(const Dictionary& dict, const Eigen::VectorXd& x);

// Exact Lie derivative grad(z)(x) . f(x) by symbolic differentiation of
// the monomial. Test-oracle quality; exact up to f's own evaluation.
double analytic_generator_apply(const VectorField& field, const Observable& obs,
                                const Eigen::VectorXd& x);

/// Coefficients over a specific dictionary, tagged with its identity.
struct WeightVector {
    Eigen::VectorXcd coefficients;
    std::uint64_t basis_id = 0;
};

// evaluate(dict, x) . w. Throws BasisMismatchError on identity mismatch.
std::complex<double> reconstruct(const Dictionary& dict, const WeightVector& w,
                                 const Eigen::VectorXd& x);

// Index of the coordinate monomial x_k (0-based k) in the dictionary,
// or -1 if absent.
int coordinate_index(const Dictionary& dict, int k);

}  // namespace koopgen
