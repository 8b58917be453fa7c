#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wproj/baselines.hpp"
#include "wproj/logconcave.hpp"
#include "wproj/monotone.hpp"
#include "wproj/verify.hpp"

namespace wproj {

// CSV: one value per line or "value,weight"; one optional header line.
EmpiricalMeasure load_dataset(const std::string& path);

struct InputDigest {
  std::int64_t count = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
};

InputDigest digest_of(const EmpiricalMeasure& m);

// Serialized fit: everything needed to reconstruct the quantile and density.
// Reals are written as shortest round-trip decimals, so write -> read is
// lossless.
struct FitDocument {
  int schema_version = 1;
  std::string model;  // "monotone" | "logconcave" | "grenander"
  std::vector<double> u;
  std::vector<double> q;
  double c = 0;                 // logconcave only
  std::vector<double> h;        // logconcave only
  bool point_mass = false;
  double atom = 0;
  DensityModel density;
  double w2 = 0;
  SolverReport report;
  InputDigest digest;

  Quantile quantile() const;
};

FitDocument make_document(const MonotoneFit& fit, const InputDigest& digest);
FitDocument make_document(const LogConcaveFit& fit, const InputDigest& digest);
FitDocument make_document_grenander(const PwAffineQuantile& gq, const DensityModel& d,
                                    double w2, const InputDigest& digest);

void write_fit(const FitDocument& doc, const std::string& path);
FitDocument read_fit(const std::string& path);

// Density plot data: `x,f` rows on an evenly spaced grid over the support.
void write_plot_csv(const DensityModel& d, const std::string& path, int points = 512);

struct SimulateConfig {
  TruthSpec truth;
  std::vector<int> ns;
  int reps = 20;
  Model model = Model::Monotone;
  int k = 200;
  std::uint64_t seed = 1;
  int max_iter = 0;  // 0 = model default
};

// JSON file: {"truth": {...}, "ns": [...], "reps": R, "model": "...",
// "grid_size": K, "seed": S, "max_iter": I (optional)}.
SimulateConfig load_simulate_config(const std::string& path);

}  // namespace wproj
