#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace phdae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Numerical policy shared by every routine that has to make a rank,
/// positive-semidefiniteness, or subspace-equality decision.
///
/// rank_rel     relative singular-value cutoff; the absolute threshold is
///              rank_rel * max(sigma_max, 1) * max(rows, cols).
/// psd_rel      relative eigenvalue slack for PSD verdicts; the absolute
///              slack is psd_rel * max(spectral norm, 1).
/// sub_tol      absolute threshold on residuals and on the sine of the
///              largest principal angle in subspace comparisons.
///
/// Both scale factors floor at 1 so the thresholds stay strictly positive;
/// otherwise near-zero matrices (the plus-form of a Dirac structure, the
/// symmetric part of a skew map) would have their roundoff noise classified
/// as signal.
struct Tolerance {
    double rank_rel = 1e-10;
    double psd_rel = 1e-9;
    double sub_tol = 1e-9;

    double rank_cutoff(double sigma_max, Index rows, Index cols) const {
        return rank_rel * std::max(sigma_max, 1.0) * static_cast<double>(std::max(rows, cols));
    }
    double psd_slack(double spectral_norm) const {
        return psd_rel * std::max(spectral_norm, 1.0);
    }
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input: non-finite entries, inconsistent dimensions.
struct InvalidInput : Error {
    using Error::Error;
};

/// A structure-defining condition failed. Carries which condition, the
/// residual magnitude, and (when meaningful) a witness vector on which the
/// offending quadratic form is negative.
struct ConditionViolation : Error {
    std::string condition;
    double residual;
    Vector witness;

    ConditionViolation(std::string cond, double res, Vector wit = {})
        : Error("condition violated: " + cond + " (residual " + std::to_string(res) + ")"),
          condition(std::move(cond)),
          residual(res),
          witness(std::move(wit)) {}
};

struct NotMaximalMonotone : Error {
    using Error::Error;
};

/// An operation's entry requirement failed; `which` names the offending one.
struct PreconditionFailed : Error {
    std::string which;
    double residual;

    PreconditionFailed(std::string w, double res)
        : Error("precondition failed: " + w), which(std::move(w)), residual(res) {}
};

struct SingularStepPencil : Error {
    using Error::Error;
};

struct SingularResolvent : Error {
    using Error::Error;
};

struct InfeasibleConstraints : Error {
    using Error::Error;
};

inline void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite())
        throw InvalidInput(std::string(name) + ": non-finite entries");
}

}  // namespace phdae
