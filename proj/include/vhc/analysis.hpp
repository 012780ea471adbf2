#pragma once

// End-to-end decision: regularity, the orthogonal-forces shortcut, then the
// 1-D test, the flat/cylinder search or the curved Ricci pipeline.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vhc/holonomy.hpp"
#include "vhc/metrize2d.hpp"
#include "vhc/models.hpp"

namespace vhc {

/// Raised for cases outside the decision procedures (dimension ≥ 3,
/// curvature vanishing on part of the grid only, flat but not a cylinder
/// with a unique invariant metric).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

struct AnalysisOptions {
  std::size_t grid = 0;     // points per coordinate; 0 = model default
  double tol = 1e-7;        // recurrence residual threshold
  double flat_tol = 1e-8;   // curvature below this counts as zero
  double curved_tol = 1e-6; // ... and above this as nowhere zero
  CylinderSearchOptions cylinder;
  std::size_t el_states = 50;
  std::uint64_t seed = 1;
};

enum class Verdict { lagrangian, not_lagrangian };
const char* to_string(Verdict v);

struct MetricSample {
  std::vector<double> theta;
  Mat<double> metric;
  double potential = 0.0;
};

struct AnalysisResult {
  std::string model;
  std::map<std::string, double> params;
  std::size_t reduced_dim = 0;
  Verdict verdict = Verdict::not_lagrangian;
  bool metrizable = false;
  bool potential_exists = false;
  std::string method;
  std::string note;
  RegularityReport regularity;
  OrthogonalityReport orthogonality;
  double max_curvature = std::numeric_limits<double>::quiet_NaN();
  double min_curvature = std::numeric_limits<double>::quiet_NaN();
  double recurrence_residual = std::numeric_limits<double>::quiet_NaN();
  double closedness_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> loop_integrals;
  std::string ric_sign;
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  double int_psi2 = std::numeric_limits<double>::quiet_NaN();
  double int_psi1_m = std::numeric_limits<double>::quiet_NaN();
  std::vector<TransportMap> holonomy;
  /// max |θ̈_EL − θ̈| over random states; NaN without a structure.
  double el_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<MetricSample> samples;

  /// Reconstructed structure (empty fields when absent). For 1-D models the
  /// metric is the 1x1 field M and the potential P_C.
  Field metric;
  Field potential;

  bool lagrangian() const { return verdict == Verdict::lagrangian; }
  /// The structure as a LagrangianReport, for energy audits.
  LagrangianReport structure() const;
};

/// Throws UnsupportedError for cases outside the procedures and
/// PreconditionError if the constraint is not regular on the grid.
AnalysisResult analyze(const ModelBundle& bundle, const AnalysisOptions& opts = {});

/// Random states in the grid's bounding box with θ̇ ∈ [−1, 1]ⁿ.
std::vector<std::pair<std::vector<double>, std::vector<double>>> random_states(const ModelBundle& bundle,
                                                                              std::size_t count,
                                                                              std::uint64_t seed,
                                                                              std::size_t grid = 0);

}  // namespace vhc
