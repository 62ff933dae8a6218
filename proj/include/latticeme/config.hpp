#ifndef LATTICEME_CONFIG_HPP
#define LATTICEME_CONFIG_HPP

#include <map>
#include <string>

#include "latticeme/hier.hpp"
#include "latticeme/simulate.hpp"
#include "latticeme/study.hpp"

// Flat key-value configuration with [section] headers and '#' comments.
// Unknown keys are rejected with their line number; invariant violations
// name the offending field.
//
//   [simulate]
//   n_b_per_side = 19
//   spacing = 40
//   ...
//   [schedule]
//   iters = 10000
//   burn_in = 10000
//   [study]
//   replicates = 100
//   models = hier, simple, spatial
//   [scenario.s220]        # overrides of [simulate] keys per scenario
//   sigma = 220

namespace latticeme {

class ConfigMap {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text, const std::string& origin = "<config>");

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
  const std::map<std::string, Entry>& section(const std::string& s) const;
  std::vector<std::string> section_names() const;
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::string origin_;
};

double parse_double(const ConfigMap::Entry& e, const std::string& key);
long parse_long(const ConfigMap::Entry& e, const std::string& key);
bool parse_bool(const ConfigMap::Entry& e, const std::string& key);

// [simulate] plus any [scenario.*] overrides applied on top.
SimConfig parse_sim_config(const ConfigMap& cfg);
McmcSchedule parse_schedule(const ConfigMap& cfg, const McmcSchedule& defaults);
HierPriors parse_priors(const ConfigMap& cfg, const HierPriors& defaults);
StudyConfig parse_study_config(const ConfigMap& cfg);

struct FitFileConfig {
  int n_b_per_side = 0;  // required for grid topology
  int h_a = 6;
  int h_b = 5;
};
FitFileConfig parse_fit_config(const ConfigMap& cfg);

}  // namespace latticeme

#endif
