#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace secbeam {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

constexpr double kLn2 = 0.6931471805599453;

inline double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double clip_nonneg(double x) { return x > 0.0 ? x : 0.0; }

inline double log2_1p(double x) { return std::log1p(x) / kLn2; }

inline double min_eigenvalue(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace secbeam
