#include "wcrc/samplers.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

namespace wcrc {

namespace {

IndexSet full_population(Index n) {
  IndexSet all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  return all;
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

void ImportanceConfig::validate() const {
  if (inclusion_probs.size() == 0) invalid("inclusion_probs must be non-empty");
  for (double p : inclusion_probs) {
    if (!(p > 0.0 && p <= 1.0)) invalid("inclusion probabilities must lie in (0, 1]");
  }
  if (num_scenarios <= 0) invalid("num_scenarios must be positive");
}

void SnowballConfig::validate() const {
  if (num_points < 2) invalid("snowball needs at least two points");
  if (!(recruits_per_node >= 1 && recruits_per_node <= neighbor_count &&
        neighbor_count < num_points)) {
    invalid("need 1 <= recruits_per_node <= neighbor_count < num_points");
  }
  if (sample_size < 1 || sample_size > num_points) {
    invalid("sample_size must lie in [1, num_points]");
  }
  if (num_scenarios <= 0) invalid("num_scenarios must be positive");
}

void SelectiveConfig::validate() const {
  if (n < 2 || !std::has_single_bit(static_cast<std::uint64_t>(n))) {
    invalid("selective prediction needs n a power of two, n >= 2");
  }
  if (!enumerate && num_scenarios <= 0) invalid("num_scenarios must be positive");
}

GeometricPopulation make_geometric_population(Index n, int k, std::uint64_t seed) {
  if (n < 1 || k < 0 || k >= n) invalid("need 0 <= k < n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GeometricPopulation pop;
  pop.points.resize(n, 2);
  for (Index j = 0; j < n; ++j) {
    pop.points(j, 0) = unit(rng);
    pop.points(j, 1) = unit(rng);
  }
  pop.neighbors.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j) {
    std::size_t c = 0;
    for (Index l = 0; l < n; ++l) {
      if (l == j) continue;
      dist[c++] = {(pop.points.row(j) - pop.points.row(l)).squaredNorm(), l};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& out = pop.neighbors[static_cast<std::size_t>(j)];
    for (int r = 0; r < k; ++r) out.push_back(dist[static_cast<std::size_t>(r)].second);
  }
  return pop;
}

ScenarioDistribution gen_importance(const ImportanceConfig& cfg) {
  cfg.validate();
  const Index n = cfg.inclusion_probs.size();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const IndexSet target = full_population(n);
  std::vector<std::pair<IndexSet, IndexSet>> pairs;
  pairs.reserve(static_cast<std::size_t>(cfg.num_scenarios));
  for (int i = 0; i < cfg.num_scenarios; ++i) {
    IndexSet sample;
    while (sample.empty()) {
      for (Index j = 0; j < n; ++j) {
        if (unit(rng) < cfg.inclusion_probs[j]) sample.push_back(j);
      }
    }
    pairs.emplace_back(std::move(sample), target);
  }
  return ScenarioDistribution::uniform(n, pairs, "importance");
}

std::pair<GeometricPopulation, ScenarioDistribution> gen_snowball(const SnowballConfig& cfg) {
  cfg.validate();
  const Index n = cfg.num_points;
  std::mt19937_64 rng(cfg.rng_seed);
  GeometricPopulation pop = make_geometric_population(n, cfg.neighbor_count, rng());
  const IndexSet target = full_population(n);
  const auto s = static_cast<std::size_t>(cfg.sample_size);

  std::vector<std::pair<IndexSet, IndexSet>> pairs;
  pairs.reserve(static_cast<std::size_t>(cfg.num_scenarios));
  std::vector<char> in_sample(static_cast<std::size_t>(n));
  IndexSet choice;
  for (int i = 0; i < cfg.num_scenarios; ++i) {
    std::fill(in_sample.begin(), in_sample.end(), 0);
    IndexSet sample;
    std::deque<Index> frontier;
    auto recruit = [&](Index j) {
      in_sample[static_cast<std::size_t>(j)] = 1;
      sample.push_back(j);
      frontier.push_back(j);
    };
    auto reseed = [&] {
      IndexSet free;
      for (Index j = 0; j < n; ++j) {
        if (!in_sample[static_cast<std::size_t>(j)]) free.push_back(j);
      }
      std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
      recruit(free[pick(rng)]);
    };
    reseed();
    while (sample.size() < s) {
      if (frontier.empty()) {
        reseed();
        continue;
      }
      const Index node = frontier.front();
      frontier.pop_front();
      choice.clear();
      std::sample(pop.neighbors[static_cast<std::size_t>(node)].begin(),
                  pop.neighbors[static_cast<std::size_t>(node)].end(), std::back_inserter(choice),
                  cfg.recruits_per_node, rng);
      std::shuffle(choice.begin(), choice.end(), rng);
      for (Index c : choice) {
        if (sample.size() >= s) break;
        if (!in_sample[static_cast<std::size_t>(c)]) recruit(c);
      }
    }
    std::sort(sample.begin(), sample.end());
    pairs.emplace_back(std::move(sample), target);
  }
  ScenarioDistribution dist = ScenarioDistribution::uniform(n, pairs, "snowball");
  return {std::move(pop), std::move(dist)};
}

ScenarioDistribution gen_selective(const SelectiveConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n;
  const int levels = std::countr_zero(static_cast<std::uint64_t>(n));
  auto pair_for = [n](Index t, Index w) {
    IndexSet sample(static_cast<std::size_t>(t));
    std::iota(sample.begin(), sample.end(), Index{0});
    IndexSet target;
    for (Index j = t; j < std::min(t + w, n); ++j) target.push_back(j);
    return std::make_pair(std::move(sample), std::move(target));
  };

  std::vector<std::pair<IndexSet, IndexSet>> pairs;
  if (cfg.enumerate) {
    for (Index t = 1; t < n; ++t) {
      for (int l = 0; l < levels; ++l) pairs.push_back(pair_for(t, Index{1} << l));
    }
  } else {
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_int_distribution<Index> pick_t(1, n - 1);
    std::uniform_int_distribution<int> pick_level(0, levels - 1);
    for (int i = 0; i < cfg.num_scenarios; ++i) {
      const Index t = pick_t(rng);
      pairs.push_back(pair_for(t, Index{1} << pick_level(rng)));
    }
  }
  return ScenarioDistribution::uniform(n, pairs, "selective");
}

DataValues spatial_values(const GeometricPopulation& pop) {
  return (pop.points.col(0) + pop.points.col(1)).array() - 1.0;
}

void save_points_csv(const GeometricPopulation& pop, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << "index,x,y\n" << std::setprecision(17);
  for (Index j = 0; j < pop.size(); ++j) {
    out << j << ',' << pop.points(j, 0) << ',' << pop.points(j, 1) << '\n';
  }
}

}  // namespace wcrc
