#include "knnshap/synth.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "knnshap/errors.hpp"
#include "knnshap/random.hpp"

namespace knnshap {

void SynthConfig::validate() const {
  if (n == 0) throw UsageError("synthetic dataset needs n >= 1");
  if (d == 0) throw UsageError("synthetic dataset needs d >= 1");
  if (task == Task::classification && classes < 1) {
    throw UsageError("synthetic classification needs at least one class");
  }
  if (!(contrast >= 0.0) || !std::isfinite(contrast)) {
    throw UsageError("contrast knob must be a finite non-negative number");
  }
  if (!(label_noise >= 0.0)) throw UsageError("label noise must be non-negative");
}

namespace {

Dataset draw(const SynthConfig& config, std::size_t count) {
  std::mt19937_64 gen(mix_seed(config.seed, 0));
  NormalSampler normal;
  const std::size_t classes = config.task == Task::classification ? config.classes : 1;
  const std::size_t clusters = config.clusters > 0 ? config.clusters : 8 * classes;
  std::vector<double> centres(clusters * config.d);
  for (double& v : centres) v = config.contrast * normal(gen);
  std::vector<double> coef(config.d);
  for (double& v : coef) v = normal(gen) / std::sqrt(static_cast<double>(config.d));

  std::mt19937_64 points(mix_seed(config.seed, 1));
  NormalSampler noise;
  std::vector<double> x(count * config.d);
  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = static_cast<std::size_t>(uniform_below(points, clusters));
    double dot = 0.0;
    for (std::size_t j = 0; j < config.d; ++j) {
      const double v = centres[c * config.d + j] + noise(points);
      x[i * config.d + j] = v;
      dot += coef[j] * v;
    }
    y[i] = config.task == Task::classification
               ? static_cast<double>(c % classes)
               : dot + config.label_noise * noise(points);
  }
  return Dataset(std::move(x), config.d, std::move(y), config.task);
}

}  // namespace

Dataset synthesize(const SynthConfig& config) {
  config.validate();
  return draw(config, config.n);
}

std::pair<Dataset, QuerySet> synthesize_split(const SynthConfig& config, std::size_t test_n) {
  config.validate();
  if (test_n == 0) throw UsageError("need at least one test point");
  Dataset all = draw(config, config.n + test_n);
  std::vector<std::size_t> train(config.n);
  std::vector<std::size_t> test(test_n);
  for (std::size_t i = 0; i < config.n; ++i) train[i] = i;
  for (std::size_t i = 0; i < test_n; ++i) test[i] = config.n + i;
  return {all.subset(train), all.subset(test)};
}

}  // namespace knnshap
