#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spincim/attack_lab.hpp"
#include "spincim/cost_model.hpp"
#include "spincim/random.hpp"

namespace spincim::sca {

struct Features {
  double duration_ns = 0.0;
  double energy_fj = 0.0;
};

struct LabeledObservation {
  Features features;
  CostClass label = CostClass::Read0;
};

struct ObservationNoise {
  double sigma_duration_ns = 0.0;
  double sigma_energy_fj = 0.0;
};

/// `per_class` noisy observations of each class centred on its cost-table
/// row. Each class draws from its own stream keyed by (seed, class), so the
/// shared classes of the 4- and 11-class sets see identical noise.
std::vector<LabeledObservation> generate_observations(std::span<const CostClass> classes,
                                                      const std::map<CostClass, OpCost>& table,
                                                      std::size_t per_class, ObservationNoise noise,
                                                      std::uint64_t seed);

/// Nearest-centroid attacker with a pooled diagonal covariance; the Bayes
/// classifier when classes are Gaussian with shared diagonal noise.
class CentroidClassifier {
 public:
  /// Throws MissingClass when any of `classes` has no observation.
  static CentroidClassifier train(std::span<const LabeledObservation> observations,
                                  std::span<const CostClass> classes);

  CostClass classify(const Features& f) const;
  const std::vector<CostClass>& classes() const { return classes_; }
  const Features& centroid(CostClass c) const;
  /// Pooled per-feature variance.
  const Features& variance() const { return variance_; }

  /// Smallest whitened distance between two centroids.
  double min_separation() const;
  /// min_separation() below 2 (pairwise error above ~16%).
  bool ill_separated() const { return min_separation() < 2.0; }

 private:
  double distance2(const Features& f, const Features& centre) const;

  std::vector<CostClass> classes_;
  std::vector<Features> centroids_;
  Features variance_;
  Features weight_;
};

struct ConfusionMatrix {
  std::vector<CostClass> classes;
  /// rows: true class, columns: predicted; each row sums to 1.
  std::vector<std::vector<double>> matrix;
  double accuracy = 0.0;

  std::string to_csv() const;
};

ConfusionMatrix confusion_matrix(const CentroidClassifier& classifier,
                                 std::span<const LabeledObservation> test_set);

/// Train and test at one noise level; train and test use disjoint seeds.
ConfusionMatrix classification_experiment(std::span<const CostClass> classes,
                                          const std::map<CostClass, OpCost>& table, std::size_t per_class,
                                          ObservationNoise noise, std::uint64_t seed);

/// Dataset CSV: label,duration_ns,energy_fJ
std::string observations_to_csv(std::span<const LabeledObservation> observations);

// ---- Hamming-weight leakage of word writes ----

/// Number of `1` bits implied by the energy of one PerBitWrites word write.
std::size_t hamming_weight_from_energy(double energy_fj, std::size_t width, const CostTable& table,
                                       TableVariant variant);

/// Trace must hold exactly one Write event.
std::size_t hamming_weight_attack(const ExecutionTrace& trace, std::size_t width, const CostTable& table,
                                  TableVariant variant);
std::size_t hamming_weight_attack(const PowerTrace& trace, std::size_t width, const CostTable& table,
                                  TableVariant variant);

/// Exact-recovery rate for random `width`-bit words with Gaussian energy noise.
attack::McReport hamming_weight_recovery(std::size_t width, double sigma_energy_fj, const CostTable& table,
                                         TableVariant variant, std::uint64_t trials, std::uint64_t seed);

// ---- CIM op + Write `0` hiding a Write `1` ----

struct ObscuringRow {
  ObservationNoise noise;
  attack::McReport as_write1;  ///< composite windows labelled Write `1`
};

struct ObscuringReport {
  Features composite;
  Features write1;
  Features write0;
  double composite_to_write1 = 0.0;
  double write1_to_write0 = 0.0;
  std::vector<ObscuringRow> rows;

  std::string to_json() const;
};

/// Attacker trained on the standard 4-class table classifies windows of
/// (`cim_op` + Write `0`) costed with the enhanced table.
ObscuringReport obscuring_experiment(std::span<const ObservationNoise> noise_levels, const CostTable& table,
                                     std::size_t per_class, std::uint64_t trials, std::uint64_t seed,
                                     CostClass cim_op = CostClass::CimADD);

}  // namespace spincim::sca
