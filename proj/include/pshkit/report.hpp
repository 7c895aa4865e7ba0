#pragma once

// JSON and CSV serialization of reports.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pshkit/verify.hpp"

namespace pshkit {

nlohmann::json to_json(const ComplexPoint2& q);
nlohmann::json to_json(const TransformParams& params, const ConstantEstimates& est);
nlohmann::json to_json(const EtaResult& r);
/// {check, params, n_samples, min_margin, argmin, pass, per_eta, ...}; the
/// per-sample margins go to CSV, not JSON.
nlohmann::json to_json(const VerificationReport& rep);
/// Summary of a scan: sample count, weak count, max_A and its point.
nlohmann::json summary_json(const ObstructionScan& scan);

/// One row of samples.csv. Empty optionals print as "n/a".
struct SampleRow {
  ComplexPoint2 q;
  double rho = 0.0;
  double dist = 0.0;
  std::string cls;
  std::optional<double> A;
  std::optional<double> margin;
};

void write_samples_csv(std::ostream& os, const std::vector<SampleRow>& rows);
/// side,eta,delta,pass,min_margin,n_samples,z1re,z1im,z2re,z2im,error
void write_df_csv(std::ostream& os, const std::vector<VerificationReport>& reports);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

}  // namespace pshkit
