#ifndef LATTICEME_CHAIN_HPP
#define LATTICEME_CHAIN_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

// Posterior sample storage and summaries.

namespace latticeme {

struct Chain {
  std::string name;
  std::vector<double> draws;  // post burn-in, thinned
};

struct ChainSet {
  long n_iter = 0;
  long burn_in = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  std::vector<Chain> chains;
  std::map<std::string, double> acceptance;  // per Metropolis block

  const Chain* find(const std::string& name) const {
    for (const auto& c : chains)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Shortest interval whose endpoints are samples i and i + ceil(level*n) of
// the sorted draws (ties broken by the smallest lower endpoint). Requires at
// least 100 samples.
std::pair<double, double> hpd_interval(std::span<const double> samples, double level);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hpd_lo = 0.0;
  double hpd_hi = 0.0;
};

ParamSummary summarize_chain(const Chain& c, double level = 0.95);

double mean_of(std::span<const double> v);
double sd_of(std::span<const double> v);  // n-1 denominator

}  // namespace latticeme

#endif
