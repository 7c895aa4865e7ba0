#include "pshkit/report.hpp"

#include <charconv>
#include <ostream>

namespace pshkit {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json to_json(const ComplexPoint2& q) {
  return {{"z1re", q.z1.real()}, {"z1im", q.z1.imag()}, {"z2re", q.z2.real()}, {"z2im", q.z2.imag()}};
}

json to_json(const TransformParams& p, const ConstantEstimates& est) {
  return {{"epsilon", p.epsilon}, {"K", p.K},   {"C", p.C},   {"eta", p.eta},
          {"delta", p.delta},     {"D", p.D},   {"c3", est.c3}, {"c4", est.c4},
          {"A_max", est.A_max},   {"side", to_string(p.side)}};
}

json to_json(const EtaResult& r) {
  json j = {{"eta", r.eta},           {"delta", r.delta},         {"pass", r.pass},
            {"min_margin", r.min_margin}, {"n_samples", r.n_samples}, {"argmin", to_json(r.argmin)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json to_json(const VerificationReport& rep) {
  json per_eta = json::array();
  for (const EtaResult& r : rep.per_eta) per_eta.push_back(to_json(r));
  json j = {{"check", rep.check},
            {"params", to_json(rep.params, rep.estimates)},
            {"n_samples", rep.n_samples},
            {"min_margin", rep.min_margin},
            {"argmin", to_json(rep.argmin_point)},
            {"argmin_index", rep.argmin},
            {"tolerance", rep.tolerance},
            {"pass", rep.pass},
            {"weak_count", rep.weak_count},
            {"K_tried", rep.K_tried},
            {"per_eta", per_eta},
            {"wall_time", rep.wall_time}};
  j["best_eta"] = rep.best_eta ? json(*rep.best_eta) : json(nullptr);
  return j;
}

json summary_json(const ObstructionScan& scan) {
  json j = {{"n_samples", scan.rows.size()}, {"weak_count", scan.weak_count}};
  j["max_A"] = scan.max_A ? json(*scan.max_A) : json(nullptr);
  j["argmax"] = scan.argmax ? to_json(scan.rows[*scan.argmax].p) : json(nullptr);
  return j;
}

namespace {

std::string opt(const std::optional<double>& x) { return x ? format_double(*x) : "n/a"; }

void point_cols(std::ostream& os, const ComplexPoint2& q) {
  os << format_double(q.z1.real()) << ',' << format_double(q.z1.imag()) << ',' << format_double(q.z2.real())
     << ',' << format_double(q.z2.imag());
}

}  // namespace

void write_samples_csv(std::ostream& os, const std::vector<SampleRow>& rows) {
  os << "z1re,z1im,z2re,z2im,rho,dist,class,A_p,margin\n";
  for (const SampleRow& r : rows) {
    point_cols(os, r.q);
    os << ',' << format_double(r.rho) << ',' << format_double(r.dist) << ',' << r.cls << ',' << opt(r.A) << ','
       << opt(r.margin) << '\n';
  }
}

void write_df_csv(std::ostream& os, const std::vector<VerificationReport>& reports) {
  os << "side,eta,delta,pass,min_margin,n_samples,z1re,z1im,z2re,z2im,error\n";
  for (const VerificationReport& rep : reports) {
    for (const EtaResult& r : rep.per_eta) {
      os << to_string(rep.params.side) << ',' << format_double(r.eta) << ',' << format_double(r.delta) << ','
         << (r.pass ? "true" : "false") << ',' << format_double(r.min_margin) << ',' << r.n_samples << ',';
      point_cols(os, r.argmin);
      // Errors are free text; keep the column CSV-safe.
      std::string err = r.error;
      for (char& c : err) {
        if (c == ',' || c == '\n' || c == '"') c = ';';
      }
      os << ',' << err << '\n';
    }
  }
}

}  // namespace pshkit
