#pragma once

// Shared aliases and the error type used across the library.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>
#include <utility>

namespace bhrc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Two failure classes map to the CLI exit codes: bad inputs or configuration
// exit with 2, broken runtime invariants with 3.
struct error : std::runtime_error {
  std::string code;
  bool config;
  error(std::string c, const std::string& msg, bool cfg)
      : std::runtime_error(c + ": " + msg), code(std::move(c)), config(cfg) {}
};

[[noreturn]] inline void fail_config(const std::string& code, const std::string& msg) {
  throw error(code, msg, true);
}

[[noreturn]] inline void fail_invariant(const std::string& code, const std::string& msg) {
  throw error(code, msg, false);
}

inline void check_config(bool ok, const std::string& code, const std::string& msg) {
  if (!ok) fail_config(code, msg);
}

inline void check_invariant(bool ok, const std::string& code, const std::string& msg) {
  if (!ok) fail_invariant(code, msg);
}

}  // namespace bhrc
