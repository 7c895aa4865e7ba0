#include "pshkit/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pshkit/errors.hpp"
#include "pshkit/finite_diff.hpp"
#include "pshkit/parse.hpp"
#include "pshkit/report.hpp"

namespace pshkit {

using nlohmann::json;

namespace {

double number_at(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(where + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown field " + where + "." + it.key());
    }
  }
}

const json& object_at(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_object()) throw ConfigError(std::string(key) + " must be an object");
  return v;
}

bool valid_eta(double eta) { return std::isfinite(eta) && eta > 0.0 && eta != 1.0; }

}  // namespace

void DomainConfig::validate() const {
  if (rho.empty()) throw ConfigError("rho is required");
  if (!parse(rho).real_valued()) throw ConfigError("rho must be a real-valued expression");
  if (!box.valid()) throw ConfigError("box must have four finite intervals with lo < hi");
  const Tolerances& t = tolerances;
  for (double x : {t.boundary_tol, t.tau_weak, t.psd_tol, t.floor}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("tolerances must be positive");
  }
  if (sampling.n_boundary == 0) throw ConfigError("sampling.n_boundary must be positive");
  if (sampling.depths.empty()) throw ConfigError("sampling.depths must be non-empty");
  for (double d : sampling.depths) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("sampling.depths must be positive");
  }
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) throw ConfigError("params.epsilon must be positive");
  if (!(params.K >= 0.0) || !std::isfinite(params.K)) throw ConfigError("params.K must be non-negative");
  if (params.C && (!(*params.C >= 0.0) || !std::isfinite(*params.C))) {
    throw ConfigError("params.C must be non-negative");
  }
  if (params.eta && !valid_eta(*params.eta)) throw ConfigError("params.eta must be positive and differ from 1");
  for (double eta : eta_grid) {
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta_grid entries must lie in (0,1)");
  }
}

DomainConfig parse_config(const json& doc) {
  DomainConfig cfg;
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"name", "rho", "box", "tolerances", "sampling", "params", "eta_grid"}, "config");
    if (!doc.contains("rho")) throw ConfigError("missing required field rho");
    if (!doc.contains("box")) throw ConfigError("missing required field box");
    if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();
    if (!doc.at("rho").is_string()) throw ConfigError("rho must be a string");
    cfg.rho = doc.at("rho").get<std::string>();

    const json& box = doc.at("box");
    if (!box.is_array() || box.size() != 4) throw ConfigError("box must be four [lo, hi] pairs");
    for (std::size_t i = 0; i < 4; ++i) {
      const std::vector<double> r = numbers(box[i], "box[" + std::to_string(i) + "]");
      if (r.size() != 2) throw ConfigError("box[" + std::to_string(i) + "] must be [lo, hi]");
      cfg.box.ranges[i] = {r[0], r[1]};
    }

    if (doc.contains("tolerances")) {
      const json& t = object_at(doc, "tolerances");
      reject_unknown(t, {"boundary_tol", "tau_weak", "psd_tol", "floor"}, "tolerances");
      if (t.contains("boundary_tol")) cfg.tolerances.boundary_tol = number_at(t, "boundary_tol", "tolerances");
      if (t.contains("tau_weak")) cfg.tolerances.tau_weak = number_at(t, "tau_weak", "tolerances");
      if (t.contains("psd_tol")) cfg.tolerances.psd_tol = number_at(t, "psd_tol", "tolerances");
      if (t.contains("floor")) cfg.tolerances.floor = number_at(t, "floor", "tolerances");
    }
    if (doc.contains("sampling")) {
      const json& s = object_at(doc, "sampling");
      reject_unknown(s, {"n_boundary", "depths", "seed"}, "sampling");
      if (s.contains("n_boundary")) {
        if (!s.at("n_boundary").is_number_unsigned()) throw ConfigError("sampling.n_boundary must be a positive integer");
        cfg.sampling.n_boundary = s.at("n_boundary").get<std::size_t>();
      }
      if (s.contains("depths")) cfg.sampling.depths = numbers(s.at("depths"), "sampling.depths");
      if (s.contains("seed")) {
        if (!s.at("seed").is_number_unsigned()) throw ConfigError("sampling.seed must be a non-negative integer");
        cfg.sampling.seed = s.at("seed").get<std::uint64_t>();
      }
    }
    if (doc.contains("params")) {
      const json& p = object_at(doc, "params");
      reject_unknown(p, {"epsilon", "K", "C", "eta"}, "params");
      if (p.contains("epsilon")) cfg.params.epsilon = number_at(p, "epsilon", "params");
      if (p.contains("K")) cfg.params.K = number_at(p, "K", "params");
      if (p.contains("C") && !p.at("C").is_null()) cfg.params.C = number_at(p, "C", "params");
      if (p.contains("eta") && !p.at("eta").is_null()) cfg.params.eta = number_at(p, "eta", "params");
    }
    if (doc.contains("eta_grid")) cfg.eta_grid = numbers(doc.at("eta_grid"), "eta_grid");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

DomainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  DomainConfig cfg = parse_config(doc);
  if (cfg.name.empty()) cfg.name = path.stem().string();
  return cfg;
}

json to_json(const DomainConfig& cfg) {
  json box = json::array();
  for (const auto& r : cfg.box.ranges) box.push_back({r.first, r.second});
  json params = {{"epsilon", cfg.params.epsilon}, {"K", cfg.params.K}};
  if (cfg.params.C) params["C"] = *cfg.params.C;
  if (cfg.params.eta) params["eta"] = *cfg.params.eta;
  return {{"name", cfg.name},
          {"rho", cfg.rho},
          {"box", box},
          {"tolerances",
           {{"boundary_tol", cfg.tolerances.boundary_tol},
            {"tau_weak", cfg.tolerances.tau_weak},
            {"psd_tol", cfg.tolerances.psd_tol},
            {"floor", cfg.tolerances.floor}}},
          {"sampling",
           {{"n_boundary", cfg.sampling.n_boundary}, {"depths", cfg.sampling.depths}, {"seed", cfg.sampling.seed}}},
          {"params", params},
          {"eta_grid", cfg.eta_grid}};
}

std::vector<std::string> fixture_names() { return {"ball", "example-2-3", "example-2-3-fixed"}; }

DomainConfig fixture(const std::string& name) {
  DomainConfig cfg;
  cfg.name = name;
  // Near the origin, thin in Im w so the sampled patch hugs the weak circle's
  // tangent line {z = 0, Im w = 0}.
  const Box origin_patch{{{{-0.1, 0.1}, {-0.1, 0.1}, {-0.05, 0.05}, {-0.005, 0.005}}}};
  if (name == "ball") {
    cfg.rho = "abs2(z1) + abs2(z2) - 1";
    cfg.box = Box::cube(-1.2, 1.2);
  } else if (name == "example-2-3") {
    // (Re w + |w|² + |z|⁴)(1 + |z|²) expanded
    cfg.rho = "re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3";
    cfg.box = origin_patch;
  } else if (name == "example-2-3-fixed") {
    cfg.rho = "re(z2) + abs2(z2) + abs2(z1)^2";
    cfg.box = origin_patch;
  } else {
    throw ConfigError("unknown fixture '" + name + "' (known: ball, example-2-3, example-2-3-fixed)");
  }
  return cfg;
}

void apply(DomainConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.sampling.seed = *o.seed;
  if (o.epsilon) cfg.params.epsilon = *o.epsilon;
  if (o.eta) cfg.params.eta = *o.eta;
  if (o.C) cfg.params.C = *o.C;
  if (o.K) cfg.params.K = *o.K;
  if (o.n_boundary) cfg.sampling.n_boundary = *o.n_boundary;
  cfg.validate();
}

json strip_wall_time(json j) {
  if (j.is_object()) {
    j.erase("wall_time");
    for (auto& [key, value] : j.items()) value = strip_wall_time(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_wall_time(value);
  }
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

std::unique_ptr<BoundaryGeometry> make_geometry(const DomainConfig& cfg) {
  GeometryOptions opts;
  opts.boundary_tol = cfg.tolerances.boundary_tol;
  opts.tau_weak = cfg.tolerances.tau_weak;
  return std::make_unique<BoundaryGeometry>(parse(cfg.rho), opts);
}

SamplingPlan make_plan(const DomainConfig& cfg) {
  SamplingPlan plan;
  plan.box = cfg.box;
  plan.n_boundary = cfg.sampling.n_boundary;
  plan.depths = cfg.sampling.depths;
  plan.seed = cfg.sampling.seed;
  return plan;
}

MainEstimateOptions main_options(const DomainConfig& cfg) {
  MainEstimateOptions m;
  m.epsilon = cfg.params.epsilon;
  m.C = cfg.params.C;
  m.K = cfg.params.K;
  m.tolerance = cfg.tolerances.psd_tol;
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

void write_report(const std::filesystem::path& out_dir, const json& report) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "report.json", report.dump(2) + "\n");
}

std::string point_text(const ComplexPoint2& q) {
  std::ostringstream os;
  os << "(" << format_double(q.z1.real()) << (q.z1.imag() < 0 ? "" : "+") << format_double(q.z1.imag()) << "i, "
     << format_double(q.z2.real()) << (q.z2.imag() < 0 ? "" : "+") << format_double(q.z2.imag()) << "i)";
  return os.str();
}

CommandResult failure(const char* command, int code, const std::string& kind, const std::string& message,
                      std::optional<std::size_t> offset = std::nullopt) {
  CommandResult res;
  res.exit_code = code;
  res.report = {{"command", command}, {"pass", false}, {"error", {{"kind", kind}, {"message", message}}}};
  if (offset) res.report["error"]["offset"] = *offset;
  res.summary = std::string(command) + ": " + kind + " error: " + message;
  return res;
}

template <class F>
CommandResult guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    return failure(command, 2, "parse", e.what(), e.offset());
  } catch (const ConfigError& e) {
    return failure(command, 2, "config", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return failure(command, 2, "io", e.what());
  } catch (const UndersamplingError& e) {
    return failure(command, 1, "undersampling", e.what());
  } catch (const Error& e) {
    return failure(command, 1, "verification", e.what());
  }
}

std::vector<SampleRow> collar_rows(const BoundaryGeometry& geom, const SampleSet& s, const std::vector<CollarSample>& collar,
                                   const VerificationReport& rep, std::size_t n_depths) {
  std::vector<SampleRow> rows;
  rows.reserve(collar.size());
  for (std::size_t i = 0; i < collar.size(); ++i) {
    const BoundaryPoint& foot = s.boundary[i / n_depths];
    rows.push_back({collar[i].q, geom.value(collar[i].q), collar[i].d, to_string(foot.classification),
                    foot.obstruction, rep.margins[i]});
  }
  return rows;
}

}  // namespace

CommandResult cmd_classify(const DomainConfig& cfg, const std::filesystem::path& out_dir) {
  return guarded("classify", [&] {
    const auto t0 = Clock::now();
    cfg.validate();
    const auto geom = make_geometry(cfg);
    const SamplingPlan plan = make_plan(cfg);
    std::vector<BoundaryPoint> boundary = sample_boundary(*geom, plan.box, plan.n_boundary, plan.seed);
    WeakSearchOptions weak = plan.weak;
    weak.seed = plan.seed ^ 0x9e3779b97f4a7c15ull;
    for (BoundaryPoint& bp : search_weak_points(*geom, plan.box, boundary, weak)) boundary.push_back(bp);
    const ObstructionScan scan = obstruction_scan(boundary);

    CommandResult res;
    json summary = summary_json(scan);
    summary["strict_count"] = scan.rows.size() - scan.weak_count;
    res.report = {{"command", "classify"}, {"domain", cfg.name}, {"config", to_json(cfg)}, {"summary", summary},
                  {"pass", true}};
    res.report["wall_time"] = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream text;
    text << "classify " << cfg.name << ": " << scan.rows.size() << " boundary samples, " << scan.weak_count
         << " weak";
    if (scan.max_A) text << ", max A_p = " << format_double(*scan.max_A) << " at " << point_text(scan.rows[*scan.argmax].p);
    res.summary = text.str();

    if (!out_dir.empty()) {
      write_report(out_dir, res.report);
      std::vector<SampleRow> rows;
      rows.reserve(boundary.size());
      for (const BoundaryPoint& bp : boundary) {
        rows.push_back({bp.p, bp.rho, 0.0, to_string(bp.classification), bp.obstruction, bp.levi_LL / bp.hessian_scale});
      }
      std::ostringstream csv;
      write_samples_csv(csv, rows);
      write_text(out_dir / "samples.csv", csv.str());
    }
    return res;
  });
}

CommandResult cmd_verify(const DomainConfig& cfg, const std::filesystem::path& out_dir) {
  return guarded("verify", [&] {
    const auto t0 = Clock::now();
    cfg.validate();
    const auto geom = make_geometry(cfg);
    const SampleSet samples = build_samples(*geom, make_plan(cfg));
    const MainEstimateOptions opts = main_options(cfg);
    const VerificationReport in = run_main_estimate_pipeline(*geom, samples, Side::interior, opts);
    const VerificationReport out = run_main_estimate_pipeline(*geom, samples, Side::exterior, opts);

    CommandResult res;
    const bool pass = in.pass && out.pass;
    res.exit_code = pass ? 0 : 1;
    res.report = {{"command", "verify"},  {"domain", cfg.name},   {"config", to_json(cfg)},
                  {"pass", pass},         {"checks", {to_json(in), to_json(out)}}};
    std::ostringstream text;
    text << "verify " << cfg.name << ": " << (pass ? "PASS" : "FAIL");
    for (const VerificationReport* r : {&in, &out}) {
      text << "\n  " << r->check << ": " << (r->pass ? "pass" : "FAIL") << "  C = " << format_double(r->params.C)
           << "  K = " << format_double(r->params.K) << "  min margin = " << format_double(r->min_margin)
           << "  (" << r->n_samples << " collar samples, " << r->weak_count << " weak)";
      if (!r->pass) text << "\n    witness " << point_text(r->argmin_point);
    }
    if (!pass) {
      const VerificationReport& bad = in.pass ? out : in;
      res.report["witness"] = {{"check", bad.check}, {"point", to_json(bad.argmin_point)}, {"margin", bad.min_margin}};
    }
    res.report["wall_time"] = std::chrono::duration<double>(Clock::now() - t0).count();
    res.summary = text.str();

    if (!out_dir.empty()) {
      write_report(out_dir, res.report);
      std::vector<SampleRow> rows = collar_rows(*geom, samples, samples.collar_in, in, cfg.sampling.depths.size());
      for (SampleRow& r : collar_rows(*geom, samples, samples.collar_out, out, cfg.sampling.depths.size())) {
        rows.push_back(std::move(r));
      }
      std::ostringstream csv;
      write_samples_csv(csv, rows);
      write_text(out_dir / "samples.csv", csv.str());
    }
    return res;
  });
}

CommandResult cmd_df_exponent(const DomainConfig& cfg, const std::filesystem::path& out_dir) {
  return guarded("df-exponent", [&] {
    const auto t0 = Clock::now();
    cfg.validate();
    const auto geom = make_geometry(cfg);
    const SampleSet samples = build_samples(*geom, make_plan(cfg));

    std::vector<VerificationReport> reports;
    for (Side side : {Side::interior, Side::exterior}) {
      ExponentOptions opts;
      opts.main = main_options(cfg);
      opts.floor = cfg.tolerances.floor;
      if (side == Side::interior) opts.eta_grid = cfg.eta_grid;
      if (cfg.params.eta && ((*cfg.params.eta < 1.0) == (side == Side::interior))) opts.eta_grid = {*cfg.params.eta};
      std::vector<ComplexPoint2> region;
      for (const CollarSample& c : side == Side::interior ? samples.collar_in : samples.collar_out) {
        region.push_back(c.q);
      }
      reports.push_back(estimate_df_exponent(*geom, samples, region, side, opts));
    }

    CommandResult res;
    const bool pass = reports[0].pass && reports[1].pass;
    res.exit_code = pass ? 0 : 1;
    auto eta_json = [](const VerificationReport& r) { return r.best_eta ? json(*r.best_eta) : json(nullptr); };
    res.report = {{"command", "df-exponent"},
                  {"domain", cfg.name},
                  {"config", to_json(cfg)},
                  {"pass", pass},
                  {"eta_interior", eta_json(reports[0])},
                  {"eta_exterior", eta_json(reports[1])},
                  {"checks", {to_json(reports[0]), to_json(reports[1])}}};
    res.report["wall_time"] = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream text;
    text << "df-exponent " << cfg.name << ": " << (pass ? "PASS" : "FAIL");
    for (const VerificationReport& r : reports) {
      text << "\n  " << to_string(r.params.side) << " (C = " << format_double(r.params.C)
           << ", K = " << format_double(r.params.K) << ", D = " << format_double(r.params.D) << ")";
      for (const EtaResult& e : r.per_eta) {
        text << "\n    eta = " << format_double(e.eta) << "  " << (e.pass ? "pass" : "FAIL")
             << "  min margin = " << format_double(e.min_margin);
        if (!e.error.empty()) text << "  (" << e.error << ")";
      }
      text << "\n    chosen eta: " << (r.best_eta ? format_double(*r.best_eta) : "none");
    }
    res.summary = text.str();

    if (!out_dir.empty()) {
      write_report(out_dir, res.report);
      std::ostringstream csv;
      write_df_csv(csv, reports);
      write_text(out_dir / "df.csv", csv.str());
    }
    return res;
  });
}

namespace {

struct InvariantResult {
  std::string fixture;
  std::string invariant;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

void run_invariants(const DomainConfig& cfg, const SelftestOptions& opts, std::vector<InvariantResult>& out) {
  auto record = [&](const char* name, double value, double threshold, bool pass, std::string detail = {}) {
    out.push_back({cfg.name, name, pass, value, threshold, std::move(detail)});
  };
  try {
    ScalarField rho = parse(cfg.rho);
    if (opts.flip_sign) rho = (-rho).assume_real();
    GeometryOptions gopts;
    gopts.boundary_tol = cfg.tolerances.boundary_tol;
    gopts.tau_weak = cfg.tolerances.tau_weak;
    const BoundaryGeometry geom(rho, gopts);
    SamplingPlan plan = make_plan(cfg);
    plan.n_boundary = opts.n_boundary;
    plan.seed = opts.seed;
    const SampleSet samples = build_samples(geom, plan);

    double frame_err = 0.0, defect = 0.0, residual = 0.0, idem = 0.0;
    double min_ll = std::numeric_limits<double>::infinity();
    for (const BoundaryPoint& bp : samples.boundary) {
      const LocalFrame f = geom.frame_at(bp.p);
      const complex l_rho = bp.grad.c1 * f.L.v1 + bp.grad.c2 * f.L.v2;
      frame_err = std::max({frame_err, std::abs(f.L.dot(f.N)), std::abs(f.L.norm() - 1.0), std::abs(f.N.norm() - 1.0),
                            std::abs(l_rho)});
      const HermitianForm2 h = geom.levi(bp.p);
      defect = std::max(defect, h.hermitian_defect() / h.scale());
      residual = std::max(residual, std::abs(bp.rho));
      const Projection again = project_to_boundary(geom, bp.p);
      idem = std::max(idem, std::sqrt(std::norm(again.p.z1 - bp.p.z1) + std::norm(again.p.z2 - bp.p.z2)));
      min_ll = std::min(min_ll, bp.levi_LL / bp.hessian_scale);
    }
    record("frame-orthonormality", frame_err, 1e-10, frame_err <= 1e-10);
    record("hermitian-hessian", defect, 1e-12, defect <= 1e-12);
    record("boundary-residual", residual, cfg.tolerances.boundary_tol, residual <= cfg.tolerances.boundary_tol);
    record("projection-idempotence", idem, 1e-12, idem <= 1e-12);
    record("pseudoconvexity", min_ll, -cfg.tolerances.tau_weak, min_ll >= -cfg.tolerances.tau_weak,
           "min H(L,L)/scale over boundary samples");

    double worst_slope = std::numeric_limits<double>::infinity();
    bool all_second_order = true;
    const ComplexPoint2 q = samples.boundary.front().p;
    for (const WirtingerIndex& idx : WirtingerIndex::all_up_to(2)) {
      if (idx.order() == 0) continue;
      const FdConvergence c = fd_convergence(rho, idx, q);
      if (!c.exact) worst_slope = std::min(worst_slope, c.slope);
      all_second_order = all_second_order && c.second_order();
    }
    record("derivative-oracle", std::isfinite(worst_slope) ? worst_slope : 2.0, 1.8, all_second_order,
           "worst finite-difference log-log slope");

    MainEstimateOptions m;
    m.tolerance = cfg.tolerances.psd_tol;
    const VerificationReport rep = run_main_estimate_pipeline(geom, samples, Side::interior, m);
    record("main-estimate-interior", rep.min_margin, -rep.tolerance, rep.pass,
           rep.pass ? std::string{} : "witness " + point_text(rep.argmin_point));
  } catch (const Error& e) {
    record("pipeline", 0.0, 0.0, false, e.what());
  }
}

}  // namespace

CommandResult cmd_selftest(const SelftestOptions& opts) {
  const auto t0 = Clock::now();
  std::vector<InvariantResult> results;
  for (const std::string& name : fixture_names()) run_invariants(fixture(name), opts, results);

  CommandResult res;
  bool pass = true;
  json rows = json::array();
  std::ostringstream text;
  for (const InvariantResult& r : results) {
    pass = pass && r.pass;
    json row = {{"fixture", r.fixture}, {"invariant", r.invariant}, {"pass", r.pass}, {"value", r.value},
                {"threshold", r.threshold}};
    if (!r.detail.empty()) row["detail"] = r.detail;
    rows.push_back(row);
    text << (r.pass ? "ok   " : "FAIL ") << r.fixture << ": " << r.invariant << " (" << format_double(r.value)
         << ")";
    if (!r.pass && !r.detail.empty()) text << " " << r.detail;
    text << "\n";
  }
  text << "selftest: " << (pass ? "PASS" : "FAIL");
  res.exit_code = pass ? 0 : 1;
  res.report = {{"command", "selftest"}, {"pass", pass}, {"flip_sign", opts.flip_sign}, {"results", rows}};
  res.report["wall_time"] = std::chrono::duration<double>(Clock::now() - t0).count();
  res.summary = text.str();
  return res;
}

}  // namespace pshkit
