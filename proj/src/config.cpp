#include "latticeme/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "latticeme/errors.hpp"

namespace latticeme {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(const std::string& key, const ConfigMap::Entry&)>;

// Walk a section, dispatching every key; unknown keys are an error.
void apply_section(const ConfigMap& cfg, const std::string& name,
                   const std::map<std::string, Setter>& setters) {
  if (!cfg.has_section(name)) return;
  for (const auto& [key, entry] : cfg.section(name)) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      std::ostringstream msg;
      msg << cfg.origin() << ":" << entry.line << ": unknown key '" << key
          << "' in section [" << name << "]";
      throw ParseError(msg.str(), entry.line);
    }
    it->second(key, entry);
  }
}

std::map<std::string, Setter> sim_setters(SimConfig& c) {
  auto d = [](double& field) {
    return [&field](const std::string& key, const ConfigMap::Entry& e) {
      field = parse_double(e, key);
    };
  };
  auto i = [](int& field) {
    return [&field](const std::string& key, const ConfigMap::Entry& e) {
      field = static_cast<int>(parse_long(e, key));
    };
  };
  return {
      {"n_b_per_side", i(c.n_b_per_side)},
      {"spacing", d(c.spacing)},
      {"sigma_b", d(c.sigma_b)},
      {"beta0", d(c.beta0)},
      {"mu_beta_a", d(c.mu_beta_a)},
      {"mu_beta_b", d(c.mu_beta_b)},
      {"sd_beta_a", d(c.sd_beta_a)},
      {"sd_beta_b", d(c.sd_beta_b)},
      {"alpha0", d(c.alpha0)},
      {"alpha1", d(c.alpha1)},
      {"sigma_a", d(c.sigma_a)},
      {"r", d(c.r)},
      {"rho", d(c.rho)},
      {"psi_a", d(c.psi_a)},
      {"psi_b", d(c.psi_b)},
      {"sigma", d(c.sigma)},
      {"r_pix", d(c.r_pix)},
      {"rho_pix", d(c.rho_pix)},
      {"h_a", i(c.h_a)},
      {"h_b", i(c.h_b)},
      {"background_sd", d(c.background_sd)},
      {"margin", i(c.margin)},
      {"seed",
       [&c](const std::string& key, const ConfigMap::Entry& e) {
         c.seed = static_cast<std::uint64_t>(parse_long(e, key));
       }},
  };
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(origin + ": unterminated section header", lineno);
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ParseError(origin + ": empty section name", lineno);
      cfg.sections_[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ": expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(origin + ": empty key", lineno);
    if (current.empty())
      throw ParseError(origin + ": key '" + key + "' outside any [section]", lineno);
    if (cfg.sections_[current].count(key))
      throw ParseError(origin + ": duplicate key '" + key + "'", lineno);
    cfg.sections_[current][key] = {value, lineno};
  }
  return cfg;
}

const std::map<std::string, ConfigMap::Entry>& ConfigMap::section(const std::string& s) const {
  const auto it = sections_.find(s);
  if (it == sections_.end()) throw DomainError("missing config section: [" + s + "]");
  return it->second;
}

std::vector<std::string> ConfigMap::section_names() const {
  std::vector<std::string> names;
  names.reserve(sections_.size());
  for (const auto& [name, entries] : sections_) names.push_back(name);
  return names;
}

double parse_double(const ConfigMap::Entry& e, const std::string& key) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end)
    throw ParseError("key '" + key + "': expected a number, got '" + e.value + "'", e.line);
  return v;
}

long parse_long(const ConfigMap::Entry& e, const std::string& key) {
  long v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end)
    throw ParseError("key '" + key + "': expected an integer, got '" + e.value + "'", e.line);
  return v;
}

bool parse_bool(const ConfigMap::Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("key '" + key + "': expected a boolean, got '" + e.value + "'", e.line);
}

SimConfig parse_sim_config(const ConfigMap& cfg) {
  SimConfig c;
  auto setters = sim_setters(c);
  apply_section(cfg, "simulate", setters);
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string(e.what()) + " (section [simulate])", 0);
  }
  return c;
}

McmcSchedule parse_schedule(const ConfigMap& cfg, const McmcSchedule& defaults) {
  McmcSchedule s = defaults;
  apply_section(
      cfg, "schedule",
      {
          {"iters",
           [&s](const std::string& k, const ConfigMap::Entry& e) { s.iters = parse_long(e, k); }},
          {"burn_in",
           [&s](const std::string& k, const ConfigMap::Entry& e) { s.burn_in = parse_long(e, k); }},
          {"thin",
           [&s](const std::string& k, const ConfigMap::Entry& e) {
             s.thin = static_cast<int>(parse_long(e, k));
           }},
          {"seed",
           [&s](const std::string& k, const ConfigMap::Entry& e) {
             s.seed = static_cast<std::uint64_t>(parse_long(e, k));
           }},
      });
  if (s.iters < 1 || s.burn_in < 0 || s.thin < 1)
    throw ParseError("schedule: iters >= 1, burn_in >= 0, thin >= 1 required", 0);
  return s;
}

HierPriors parse_priors(const ConfigMap& cfg, const HierPriors& defaults) {
  HierPriors p = defaults;
  auto d = [](double& field) {
    return [&field](const std::string& key, const ConfigMap::Entry& e) {
      field = parse_double(e, key);
    };
  };
  apply_section(cfg, "priors",
                {
                    {"sigma2_beta_prior_varscale", d(p.sigma2_beta_prior_varscale)},
                    {"psi_log_var", d(p.psi_log_var)},
                    {"rho_pix_log_var", d(p.rho_pix_log_var)},
                    {"rho_log_var", d(p.rho_log_var)},
                    {"alpha_var", d(p.alpha_var)},
                    {"beta0_var", d(p.beta0_var)},
                    {"mu_beta_var", d(p.mu_beta_var)},
                    {"ssvs",
                     [&p](const std::string& k, const ConfigMap::Entry& e) {
                       p.ssvs = parse_bool(e, k);
                     }},
                    {"ssvs_slab_sd", d(p.ssvs_slab_sd)},
                    {"ssvs_prior_inclusion", d(p.ssvs_prior_inclusion)},
                });
  return p;
}

StudyConfig parse_study_config(const ConfigMap& cfg) {
  StudyConfig sc;
  const SimConfig base = parse_sim_config(cfg);
  sc.schedule = parse_schedule(cfg, McmcSchedule{4000, 2000, 1, 1});

  apply_section(
      cfg, "study",
      {
          {"replicates",
           [&sc](const std::string& k, const ConfigMap::Entry& e) {
             sc.n_replicates = static_cast<int>(parse_long(e, k));
           }},
          {"jobs",
           [&sc](const std::string& k, const ConfigMap::Entry& e) {
             sc.jobs = static_cast<int>(parse_long(e, k));
           }},
          {"models",
           [&sc](const std::string& k, const ConfigMap::Entry& e) {
             (void)k;
             sc.models.clear();
             std::istringstream in(e.value);
             std::string tok;
             while (std::getline(in, tok, ',')) {
               tok = trim(tok);
               if (!tok.empty()) sc.models.push_back(tok);
             }
           }},
      });

  // Scenario sections override the base [simulate] values.
  bool any = false;
  for (const auto& name : cfg.section_names()) {
    if (name.rfind("scenario.", 0) != 0) continue;
    any = true;
    Scenario s;
    s.name = name.substr(std::string("scenario.").size());
    s.sim = base;
    auto setters = sim_setters(s.sim);
    setters["sigma2_beta_prior_varscale"] = [&s](const std::string& key,
                                                 const ConfigMap::Entry& e) {
      s.sigma2_beta_prior_varscale = parse_double(e, key);
    };
    setters["ssvs"] = [&s](const std::string& key, const ConfigMap::Entry& e) {
      s.ssvs = parse_bool(e, key);
    };
    apply_section(cfg, name, setters);
    s.sim.validate();
    sc.scenarios.push_back(std::move(s));
  }
  if (!any) sc.scenarios.push_back({"base", base, 625.0, false});
  sc.validate();
  return sc;
}

FitFileConfig parse_fit_config(const ConfigMap& cfg) {
  FitFileConfig f;
  apply_section(cfg, "fit",
                {
                    {"n_b_per_side",
                     [&f](const std::string& k, const ConfigMap::Entry& e) {
                       f.n_b_per_side = static_cast<int>(parse_long(e, k));
                     }},
                    {"h_a",
                     [&f](const std::string& k, const ConfigMap::Entry& e) {
                       f.h_a = static_cast<int>(parse_long(e, k));
                     }},
                    {"h_b",
                     [&f](const std::string& k, const ConfigMap::Entry& e) {
                       f.h_b = static_cast<int>(parse_long(e, k));
                     }},
                });
  return f;
}

}  // namespace latticeme
