#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "odt/analysis.hpp"
#include "odt/geometry.hpp"
#include "odt/inversion.hpp"
#include "odt/phase_retrieval.hpp"
#include "odt/types.hpp"

namespace odt {

// ---------------------------------------------------------------------------
// .odtb arrays
//
// "ODTB", u8 version = 1, u8 dtype (0 real f64, 1 complex f64 pairs),
// u8 ndim, u8 reserved = 0, ndim x u64 dims, payload; all little-endian,
// row-major with the last axis fastest.

enum class FormatErrc { bad_magic = 1, bad_version, bad_dtype, truncated, io_failure };

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FormatErrc code() const { return code_; }

 private:
  FormatErrc code_;
};

enum class Dtype : std::uint8_t { real64 = 0, complex128 = 1 };

struct OdtbArray {
  Dtype dtype = Dtype::real64;
  std::vector<std::uint64_t> dims;
  RealVec real;        // dtype real64
  ComplexVec complex;  // dtype complex128

  std::size_t count() const;
};

void write_odtb(std::ostream& os, const OdtbArray& a);
OdtbArray read_odtb(std::istream& is);
void write_odtb(const std::string& path, const OdtbArray& a);
OdtbArray read_odtb(const std::string& path);

/// Potential as a real array of dims (K, K[, K]).
OdtbArray to_odtb(const ScatteringPotential& f);
ScatteringPotential potential_from_odtb(const OdtbArray& a);

/// Field stacks as complex (M, N[, N]); magnitude stacks as real arrays.
OdtbArray to_odtb(const MeasurementStack& s);
MeasurementStack stack_from_odtb(const OdtbArray& a);

// ---------------------------------------------------------------------------
// Run configuration: "key = value" lines, '#' comments.

struct RunConfig {
  ExperimentConfig experiment;
  Method method = Method::pdtv;
  double lambda = 0.05;
  int J_CG = 20;
  int J_PD = 50;
  int J_IO = 20;
  double beta = 0.7;
  std::optional<double> r_s;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  IoVariant variant = IoVariant::hio;
  Method inner = Method::pdtv;
  WeightsMode weights = WeightsMode::quadrature;
  bool warm_start = true;
  std::optional<double> tvd_lambda;
  std::string input;
  std::string output;

  double support_radius() const;
  ReconstructOptions reconstruct_options() const;
  IoOptions io_options() const;
  MdOptions md_options() const;
};

/// Throws std::invalid_argument naming the key on unknown keys, malformed
/// values and constraint violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Reports and tables

/// One JSON object per line: {iter, residual, tv, tau, sigma, wall_ms}, absent
/// fields omitted.
void write_report(std::ostream& os, const ReconstructionReport& report);

/// "start:stop:log:count" or "start:stop:lin:count".
std::vector<double> parse_lambdas(const std::string& text);

void write_lcurve_tsv(std::ostream& os, const std::vector<LcurvePoint>& points);

std::string read_text_file(const std::string& path);

}  // namespace odt
