#include "wproj/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

EmpiricalMeasure load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset: " + path);
  std::vector<double> values, weights;
  bool any_weight = false;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    double v = 0, w = 1;
    size_t comma = t.find(',');
    bool ok;
    if (comma == std::string::npos) {
      ok = parse_double(t, v);
    } else {
      ok = parse_double(trim(t.substr(0, comma)), v) &&
           parse_double(trim(t.substr(comma + 1)), w);
      if (ok) any_weight = true;
    }
    if (!ok) {
      if (first_content) {  // a single header line is allowed
        first_content = false;
        continue;
      }
      throw input_error(path + ":" + std::to_string(lineno) + ": cannot parse row '" + t + "'");
    }
    first_content = false;
    values.push_back(v);
    weights.push_back(w);
  }
  if (values.empty()) throw input_error(path + ": no data rows");
  if (any_weight) return build_empirical(values, weights);
  return build_empirical(values);
}

InputDigest digest_of(const EmpiricalMeasure& m) {
  InputDigest d;
  d.count = m.size();
  d.min = m.x.front();
  d.max = m.x.back();
  d.mean = 0;
  for (int i = 0; i < m.size(); ++i) d.mean += m.w[i] * m.x[i];
  return d;
}

Quantile FitDocument::quantile() const {
  if (model == "logconcave") {
    if (point_mass) {
      StepQuantile s;
      s.part.u = {0.0, 1.0};
      s.y = {atom};
      return s;
    }
    return LogConcaveQuantile{Partition{u}, c, h, q};
  }
  return PwAffineQuantile{Partition{u}, q};
}

FitDocument make_document(const MonotoneFit& fit, const InputDigest& digest) {
  FitDocument doc;
  doc.model = "monotone";
  doc.u = fit.part.u;
  doc.q = fit.q;
  doc.density = monotone_density(fit);
  doc.w2 = fit.w2;
  doc.report = fit.report;
  doc.digest = digest;
  return doc;
}

FitDocument make_document(const LogConcaveFit& fit, const InputDigest& digest) {
  FitDocument doc;
  doc.model = "logconcave";
  doc.u = fit.part.u;
  doc.point_mass = fit.point_mass;
  doc.w2 = fit.w2;
  doc.report = fit.report;
  doc.digest = digest;
  if (fit.point_mass) {
    doc.atom = fit.atom;
    doc.u = {0.0, 1.0};
  } else {
    doc.q = fit.q;
    doc.c = fit.c;
    doc.h = fit.h;
    doc.density = logconcave_density(fit);
  }
  return doc;
}

FitDocument make_document_grenander(const PwAffineQuantile& gq, const DensityModel& d,
                                    double w2, const InputDigest& digest) {
  FitDocument doc;
  doc.model = "grenander";
  doc.u = gq.part.u;
  doc.q = gq.q;
  doc.density = d;
  doc.w2 = w2;
  doc.report.status = SolveStatus::Optimal;
  doc.digest = digest;
  return doc;
}

namespace {

json density_to_json(const DensityModel& d) {
  json segs = json::array();
  for (const auto& s : d.segments)
    segs.push_back({{"x_lo", s.x_lo}, {"x_hi", s.x_hi}, {"f_lo", s.f_lo}, {"beta", s.beta}});
  return {{"segments", std::move(segs)},
          {"support_lo", d.support_lo},
          {"support_hi", d.support_hi},
          {"boundary_atom", d.boundary_atom},
          {"atom_mass", d.atom_mass}};
}

DensityModel density_from_json(const json& j) {
  DensityModel d;
  d.support_lo = j.value("support_lo", 0.0);
  d.support_hi = j.value("support_hi", 0.0);
  d.boundary_atom = j.value("boundary_atom", false);
  d.atom_mass = j.value("atom_mass", 0.0);
  if (j.contains("segments"))
    for (const auto& s : j.at("segments"))
      d.segments.push_back({s.at("x_lo").get<double>(), s.at("x_hi").get<double>(),
                            s.at("f_lo").get<double>(), s.at("beta").get<double>()});
  return d;
}

}  // namespace

void write_fit(const FitDocument& doc, const std::string& path) {
  json j = {{"schema_version", doc.schema_version},
            {"model", doc.model},
            {"u", doc.u},
            {"q", doc.q},
            {"point_mass", doc.point_mass},
            {"atom", doc.atom},
            {"w2", doc.w2},
            {"density", density_to_json(doc.density)},
            {"report",
             {{"iterations", doc.report.iterations},
              {"primal_residual", doc.report.primal_residual},
              {"dual_residual", doc.report.dual_residual},
              {"objective", doc.report.objective},
              {"status", to_string(doc.report.status)}}},
            {"digest",
             {{"count", doc.digest.count},
              {"min", doc.digest.min},
              {"max", doc.digest.max},
              {"mean", doc.digest.mean}}}};
  if (doc.model == "logconcave" && !doc.point_mass) {
    j["c"] = doc.c;
    j["h"] = doc.h;
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

FitDocument read_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open fit document: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error(path + ": invalid JSON (" + e.what() + ")");
  }
  FitDocument doc;
  try {
    doc.schema_version = j.at("schema_version").get<int>();
    if (doc.schema_version != 1)
      throw input_error(path + ": unsupported schema_version");
    doc.model = j.at("model").get<std::string>();
    if (doc.model != "monotone" && doc.model != "logconcave" && doc.model != "grenander")
      throw input_error(path + ": unknown model '" + doc.model + "'");
    doc.u = j.at("u").get<std::vector<double>>();
    doc.q = j.value("q", std::vector<double>{});
    doc.c = j.value("c", 0.0);
    doc.h = j.value("h", std::vector<double>{});
    doc.point_mass = j.value("point_mass", false);
    doc.atom = j.value("atom", 0.0);
    doc.w2 = j.value("w2", 0.0);
    if (j.contains("density")) doc.density = density_from_json(j.at("density"));
    if (j.contains("report")) {
      const json& r = j.at("report");
      doc.report.iterations = r.value("iterations", 0);
      doc.report.primal_residual = r.value("primal_residual", 0.0);
      doc.report.dual_residual = r.value("dual_residual", 0.0);
      doc.report.objective = r.value("objective", 0.0);
      std::string st = r.value("status", "Optimal");
      doc.report.status = st == "Optimal"      ? SolveStatus::Optimal
                          : st == "Infeasible" ? SolveStatus::Infeasible
                                               : SolveStatus::MaxIter;
    }
    if (j.contains("digest")) {
      const json& g = j.at("digest");
      doc.digest.count = g.value("count", static_cast<std::int64_t>(0));
      doc.digest.min = g.value("min", 0.0);
      doc.digest.max = g.value("max", 0.0);
      doc.digest.mean = g.value("mean", 0.0);
    }
  } catch (const json::exception& e) {
    throw input_error(path + ": malformed fit document (" + std::string(e.what()) + ")");
  }
  if (doc.u.size() < 2) throw input_error(path + ": grid needs at least two points");
  if (doc.model != "logconcave" || !doc.point_mass) {
    if (doc.q.size() != doc.u.size())
      throw input_error(path + ": grid and knot values must align");
  }
  if (doc.model == "logconcave" && !doc.point_mass && doc.h.size() != doc.u.size())
    throw input_error(path + ": reciprocal slopes must align with the grid");
  return doc;
}

void write_plot_csv(const DensityModel& d, const std::string& path, int points) {
  if (points < 2) throw input_error("plot grid needs at least two points");
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output: " + path);
  out << "x,f\n" << std::setprecision(17);
  double lo = d.support_lo, hi = d.support_hi;
  for (int i = 0; i < points; ++i) {
    double x = lo + (hi - lo) * i / (points - 1);
    out << x << "," << d.eval(x) << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

namespace {

TruthComponent component_from_json(const json& j) {
  TruthComponent c;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "point_mass") {
    c.kind = TruthComponent::Kind::PointMass;
    c.p1 = j.at("at").get<double>();
  } else if (kind == "uniform") {
    c.kind = TruthComponent::Kind::Uniform;
    c.p1 = j.at("lo").get<double>();
    c.p2 = j.at("hi").get<double>();
    if (!(c.p2 > c.p1)) throw input_error("uniform component needs hi > lo");
  } else if (kind == "exponential") {
    c.kind = TruthComponent::Kind::Exponential;
    c.p1 = j.at("rate").get<double>();
    if (!(c.p1 > 0)) throw input_error("exponential rate must be positive");
  } else if (kind == "gamma") {
    c.kind = TruthComponent::Kind::Gamma;
    c.p1 = j.at("shape").get<double>();
    c.p2 = j.at("rate").get<double>();
    if (!(c.p1 > 0 && c.p2 > 0)) throw input_error("gamma shape and rate must be positive");
  } else if (kind == "normal") {
    c.kind = TruthComponent::Kind::Normal;
    c.p1 = j.at("mean").get<double>();
    c.p2 = j.at("sigma").get<double>();
    if (!(c.p2 > 0)) throw input_error("normal sigma must be positive");
  } else {
    throw input_error("unknown truth component kind '" + kind + "'");
  }
  return c;
}

TruthSpec truth_from_json(const json& j) {
  TruthSpec t;
  t.name = j.value("name", "");
  const json& comps = j.contains("components") ? j.at("components") : j;
  if (comps.is_array()) {
    double total = 0;
    for (const auto& cj : comps) {
      t.comp.push_back(component_from_json(cj));
      double w = cj.value("weight", 1.0);
      if (!(w > 0)) throw input_error("component weights must be positive");
      t.weight.push_back(w);
      total += w;
    }
    for (double& w : t.weight) w /= total;
  } else {
    t.comp.push_back(component_from_json(comps));
    t.weight.push_back(1.0);
  }
  if (t.comp.empty()) throw input_error("truth spec has no components");
  return t;
}

}  // namespace

SimulateConfig load_simulate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error(path + ": invalid JSON (" + e.what() + ")");
  }
  SimulateConfig cfg;
  try {
    cfg.truth = truth_from_json(j.at("truth"));
    cfg.ns = j.at("ns").get<std::vector<int>>();
    std::string model = j.at("model").get<std::string>();
    if (model == "monotone")
      cfg.model = Model::Monotone;
    else if (model == "logconcave")
      cfg.model = Model::LogConcave;
    else
      throw input_error(path + ": model must be 'monotone' or 'logconcave'");
    cfg.reps = j.value("reps", 20);
    cfg.k = j.value("grid_size", 200);
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(1));
    cfg.max_iter = j.value("max_iter", 0);
  } catch (const json::exception& e) {
    throw input_error(path + ": malformed config (" + std::string(e.what()) + ")");
  }
  for (int n : cfg.ns)
    if (n <= 0) throw input_error(path + ": sample sizes must be positive");
  if (cfg.ns.empty()) throw input_error(path + ": ns must be non-empty");
  if (cfg.reps <= 0) throw input_error(path + ": reps must be positive");
  if (cfg.k < 1) throw input_error(path + ": grid_size must be positive");
  if (cfg.max_iter < 0) throw input_error(path + ": max_iter must be nonnegative");
  return cfg;
}

}  // namespace wproj
