#include "spincim/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "spincim/errors.hpp"
#include "spincim/format.hpp"
#include "spincim/stats.hpp"

namespace spincim::sca {

namespace {

std::uint64_t class_id(CostClass c) {
  const auto it = std::find(kEnhancedClasses.begin(), kEnhancedClasses.end(), c);
  return static_cast<std::uint64_t>(it - kEnhancedClasses.begin());
}

const OpCost& row(const std::map<CostClass, OpCost>& table, CostClass c) {
  const auto it = table.find(c);
  if (it == table.end()) throw UnknownOp(std::string(to_string(c)) + " missing from cost table");
  return it->second;
}

constexpr std::uint64_t kTestSeedOffset = 0x9E3779B97F4A7C15ull;

}  // namespace

std::vector<LabeledObservation> generate_observations(std::span<const CostClass> classes,
                                                      const std::map<CostClass, OpCost>& table,
                                                      std::size_t per_class, ObservationNoise noise,
                                                      std::uint64_t seed) {
  std::vector<LabeledObservation> out;
  out.reserve(classes.size() * per_class);
  for (CostClass c : classes) {
    const OpCost& centre = row(table, c);
    auto rng = RandomStream::for_trial(seed, class_id(c));
    for (std::size_t i = 0; i < per_class; ++i) {
      const double nd = rng.normal();
      const double ne = rng.normal();
      out.push_back({{centre.delay_ns + noise.sigma_duration_ns * nd, centre.energy_fj + noise.sigma_energy_fj * ne}, c});
    }
  }
  return out;
}

CentroidClassifier CentroidClassifier::train(std::span<const LabeledObservation> observations,
                                             std::span<const CostClass> classes) {
  CentroidClassifier clf;
  clf.classes_.assign(classes.begin(), classes.end());
  clf.centroids_.assign(classes.size(), Features{});
  std::vector<std::size_t> counts(classes.size(), 0);
  const auto slot = [&](CostClass c) -> std::size_t {
    const auto it = std::find(clf.classes_.begin(), clf.classes_.end(), c);
    return static_cast<std::size_t>(it - clf.classes_.begin());
  };
  for (const auto& o : observations) {
    const auto k = slot(o.label);
    if (k == clf.classes_.size()) continue;
    clf.centroids_[k].duration_ns += o.features.duration_ns;
    clf.centroids_[k].energy_fj += o.features.energy_fj;
    ++counts[k];
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (counts[k] == 0) throw MissingClass("no training observation for class " + std::string(to_string(classes[k])));
    clf.centroids_[k].duration_ns /= static_cast<double>(counts[k]);
    clf.centroids_[k].energy_fj /= static_cast<double>(counts[k]);
  }

  double ss_d = 0.0, ss_e = 0.0, sq_d = 0.0, sq_e = 0.0;
  std::size_t n = 0;
  for (const auto& o : observations) {
    const auto k = slot(o.label);
    if (k == clf.classes_.size()) continue;
    const double dd = o.features.duration_ns - clf.centroids_[k].duration_ns;
    const double de = o.features.energy_fj - clf.centroids_[k].energy_fj;
    ss_d += dd * dd;
    ss_e += de * de;
    sq_d += o.features.duration_ns * o.features.duration_ns;
    sq_e += o.features.energy_fj * o.features.energy_fj;
    ++n;
  }
  const double dof = static_cast<double>(n > classes.size() ? n - classes.size() : n);
  clf.variance_ = {ss_d / dof, ss_e / dof};
  // Floor relative to the feature scale so a common rescaling of both
  // features leaves decisions unchanged.
  const double floor_d = 1e-12 * std::max(sq_d / static_cast<double>(n), std::numeric_limits<double>::min());
  const double floor_e = 1e-12 * std::max(sq_e / static_cast<double>(n), std::numeric_limits<double>::min());
  clf.weight_ = {1.0 / std::max(clf.variance_.duration_ns, floor_d), 1.0 / std::max(clf.variance_.energy_fj, floor_e)};
  return clf;
}

double CentroidClassifier::distance2(const Features& f, const Features& c) const {
  const double dd = f.duration_ns - c.duration_ns;
  const double de = f.energy_fj - c.energy_fj;
  return dd * dd * weight_.duration_ns + de * de * weight_.energy_fj;
}

CostClass CentroidClassifier::classify(const Features& f) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids_.size(); ++k) {
    const double d = distance2(f, centroids_[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return classes_.at(best);
}

const Features& CentroidClassifier::centroid(CostClass c) const {
  const auto it = std::find(classes_.begin(), classes_.end(), c);
  if (it == classes_.end()) throw MissingClass(std::string(to_string(c)) + " is not a trained class");
  return centroids_[static_cast<std::size_t>(it - classes_.begin())];
}

double CentroidClassifier::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids_.size(); ++j) best = std::min(best, distance2(centroids_[i], centroids_[j]));
  }
  return std::sqrt(best);
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (auto c : classes) out << ',' << to_string(c);
  out << '\n';
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out << to_string(classes[i]);
    for (double v : matrix[i]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion_matrix(const CentroidClassifier& classifier,
                                 std::span<const LabeledObservation> test_set) {
  ConfusionMatrix cm;
  cm.classes = classifier.classes();
  const std::size_t k = cm.classes.size();
  std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(k, 0));
  const auto slot = [&](CostClass c) {
    const auto it = std::find(cm.classes.begin(), cm.classes.end(), c);
    if (it == cm.classes.end()) throw MissingClass("test label " + std::string(to_string(c)) + " was never trained");
    return static_cast<std::size_t>(it - cm.classes.begin());
  };
  std::size_t correct = 0;
  for (const auto& o : test_set) {
    const auto t = slot(o.label);
    const auto p = slot(classifier.classify(o.features));
    ++counts[t][p];
    correct += t == p;
  }
  cm.matrix.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t total = 0;
    for (auto c : counts[i]) total += c;
    for (std::size_t j = 0; j < k; ++j) {
      cm.matrix[i][j] = total ? static_cast<double>(counts[i][j]) / static_cast<double>(total) : 0.0;
    }
  }
  cm.accuracy = test_set.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_set.size());
  return cm;
}

ConfusionMatrix classification_experiment(std::span<const CostClass> classes,
                                          const std::map<CostClass, OpCost>& table, std::size_t per_class,
                                          ObservationNoise noise, std::uint64_t seed) {
  const auto train = generate_observations(classes, table, per_class, noise, seed);
  const auto test = generate_observations(classes, table, per_class, noise, seed + kTestSeedOffset);
  return confusion_matrix(CentroidClassifier::train(train, classes), test);
}

std::string observations_to_csv(std::span<const LabeledObservation> observations) {
  std::ostringstream out;
  out << "label,duration_ns,energy_fJ\n";
  for (const auto& o : observations) {
    out << to_string(o.label) << ',' << format_double(o.features.duration_ns) << ','
        << format_double(o.features.energy_fj) << '\n';
  }
  return out.str();
}

// ---- Hamming weight ----

std::size_t hamming_weight_from_energy(double energy_fj, std::size_t width, const CostTable& table,
                                       TableVariant variant) {
  const auto& rows = table.rows(variant);
  const double e1 = row(rows, CostClass::Write1).energy_fj;
  const double e0 = row(rows, CostClass::Write0).energy_fj;
  if (e1 == e0) throw ConfigError("Write 1 and Write 0 energies are equal; Hamming weight is unobservable");
  const double estimate = std::round((energy_fj - static_cast<double>(width) * e0) / (e1 - e0));
  return static_cast<std::size_t>(std::clamp(estimate, 0.0, static_cast<double>(width)));
}

std::size_t hamming_weight_attack(const ExecutionTrace& trace, std::size_t width, const CostTable& table,
                                  TableVariant variant) {
  if (trace.size() != 1) {
    throw MalformedTrace("expected exactly one word write, trace has " + std::to_string(trace.size()) + " events");
  }
  const auto& e = trace.events().front();
  if (e.kind != CostClass::Write1 && e.kind != CostClass::Write0) {
    throw MalformedTrace("expected a word write, got " + std::string(to_string(e.kind)));
  }
  return hamming_weight_from_energy(e.energy_fj, width, table, variant);
}

std::size_t hamming_weight_attack(const PowerTrace& trace, std::size_t width, const CostTable& table,
                                  TableVariant variant) {
  if (trace.power.empty()) throw MalformedTrace("power trace is empty");
  return hamming_weight_from_energy(trace.integral(), width, table, variant);
}

attack::McReport hamming_weight_recovery(std::size_t width, double sigma_energy_fj, const CostTable& table,
                                         TableVariant variant, std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto& rows = table.rows(variant);
  const double e1 = row(rows, CostClass::Write1).energy_fj;
  const double e0 = row(rows, CostClass::Write0).energy_fj;
  const double half_step = std::abs(e1 - e0) / 2.0;
  const double tail = sigma_energy_fj > 0.0 ? normal_tail(half_step / sigma_energy_fj) : 0.0;
  std::vector<std::uint8_t> hits(trials);
  std::vector<double> probabilities(trials);
  for (std::uint64_t i = 0; i < trials; ++i) {
    auto rng = RandomStream::for_trial(seed, i);
    const auto ctx = DataContext::of(rng.bits(), width);
    const double energy = static_cast<double>(ctx.ones) * e1 + static_cast<double>(ctx.zeros) * e0 +
                          sigma_energy_fj * rng.normal();
    hits[i] = hamming_weight_from_energy(energy, width, table, variant) == ctx.ones;
    const bool edge = ctx.ones == 0 || ctx.ones == width;
    probabilities[i] = edge ? 1.0 - tail : 1.0 - 2.0 * tail;
  }
  return attack::make_report(hits, probabilities, seed);
}

// ---- obscuring ----

std::string ObscuringReport::to_json() const {
  nlohmann::ordered_json j;
  j["composite"] = {{"duration_ns", composite.duration_ns}, {"energy_fJ", composite.energy_fj}};
  j["write1"] = {{"duration_ns", write1.duration_ns}, {"energy_fJ", write1.energy_fj}};
  j["write0"] = {{"duration_ns", write0.duration_ns}, {"energy_fJ", write0.energy_fj}};
  j["distance_composite_to_write1"] = composite_to_write1;
  j["distance_write1_to_write0"] = write1_to_write0;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json jr;
    jr["sigma_duration_ns"] = r.noise.sigma_duration_ns;
    jr["sigma_energy_fJ"] = r.noise.sigma_energy_fj;
    jr["as_write1"] = nlohmann::ordered_json::parse(r.as_write1.to_json());
    rows_json.push_back(jr);
  }
  j["rows"] = rows_json;
  return j.dump(2);
}

namespace {

// Probability that an observation centred on `x` is nearest to `target`
// among `centres`, under the true diagonal noise. Grid quadrature over +-8
// sigma.
double gaussian_label_probability(const Features& x, ObservationNoise noise, const std::vector<Features>& centres,
                                  std::size_t target) {
  const double sd = noise.sigma_duration_ns;
  const double se = noise.sigma_energy_fj;
  const auto nearest = [&](double d, double e) {
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centres.size(); ++k) {
      const double dd = (d - centres[k].duration_ns) / (sd > 0 ? sd : 1.0);
      const double de = (e - centres[k].energy_fj) / (se > 0 ? se : 1.0);
      const double v = dd * dd + de * de;
      if (v < best_v) {
        best_v = v;
        best = k;
      }
    }
    return best;
  };
  if (sd <= 0.0 || se <= 0.0) return nearest(x.duration_ns, x.energy_fj) == target ? 1.0 : 0.0;
  constexpr int kSteps = 400;
  constexpr double kSpan = 8.0;
  const double h = 2.0 * kSpan / kSteps;
  double p = 0.0;
  for (int i = 0; i < kSteps; ++i) {
    const double u = -kSpan + (i + 0.5) * h;
    const double wu = std::exp(-0.5 * u * u);
    for (int j = 0; j < kSteps; ++j) {
      const double v = -kSpan + (j + 0.5) * h;
      if (nearest(x.duration_ns + sd * u, x.energy_fj + se * v) == target) p += wu * std::exp(-0.5 * v * v);
    }
  }
  return std::clamp(p * h * h / (2.0 * M_PI), 0.0, 1.0);
}

double euclid(const Features& a, const Features& b) {
  return std::hypot(a.duration_ns - b.duration_ns, a.energy_fj - b.energy_fj);
}

}  // namespace

ObscuringReport obscuring_experiment(std::span<const ObservationNoise> noise_levels, const CostTable& table,
                                     std::size_t per_class, std::uint64_t trials, std::uint64_t seed,
                                     CostClass cim_op) {
  ObscuringReport report;
  const OpCost& op = row(table.enhanced, cim_op);
  const OpCost& w0_enh = row(table.enhanced, CostClass::Write0);
  report.composite = {op.delay_ns + w0_enh.delay_ns, op.energy_fj + w0_enh.energy_fj};
  const OpCost& w1 = row(table.standard, CostClass::Write1);
  const OpCost& w0 = row(table.standard, CostClass::Write0);
  report.write1 = {w1.delay_ns, w1.energy_fj};
  report.write0 = {w0.delay_ns, w0.energy_fj};
  report.composite_to_write1 = euclid(report.composite, report.write1);
  report.write1_to_write0 = euclid(report.write1, report.write0);

  std::vector<Features> centres;
  std::size_t write1_slot = 0;
  for (CostClass c : kStandardClasses) {
    if (c == CostClass::Write1) write1_slot = centres.size();
    const OpCost& r = row(table.standard, c);
    centres.push_back({r.delay_ns, r.energy_fj});
  }

  for (std::size_t level = 0; level < noise_levels.size(); ++level) {
    const auto noise = noise_levels[level];
    const std::uint64_t level_seed = seed + level;
    const auto train = generate_observations(kStandardClasses, table.standard, per_class, noise, level_seed);
    const auto clf = CentroidClassifier::train(train, kStandardClasses);
    std::vector<std::uint8_t> hits(trials);
    for (std::uint64_t i = 0; i < trials; ++i) {
      auto rng = RandomStream::for_trial(level_seed + kTestSeedOffset, i);
      const Features obs{report.composite.duration_ns + noise.sigma_duration_ns * rng.normal(),
                         report.composite.energy_fj + noise.sigma_energy_fj * rng.normal()};
      hits[i] = clf.classify(obs) == CostClass::Write1;
    }
    const double p = gaussian_label_probability(report.composite, noise, centres, write1_slot);
    report.rows.push_back({noise, attack::make_report(hits, std::vector<double>(trials, p), level_seed)});
  }
  return report;
}

}  // namespace spincim::sca
