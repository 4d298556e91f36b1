#include "dllab/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"

namespace dllab::pipeline {

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

void put(std::map<std::string, std::string>& m, const std::string& section, const Entries& entries) {
  for (const auto& [k, v] : entries) m[section + "." + k] = v;
}

Entries training(const std::string& epochs, const std::string& batch, const std::string& lr) {
  return {{"epochs", epochs}, {"batch", batch}, {"lr", lr}, {"weight_decay", "1e-4"}, {"clip", "1.0"},
          {"ema_decay", "0.999"}, {"validation", "0.1"}, {"patience", "10"}};
}

std::string system_section(io::SystemId id) {
  switch (id) {
    case io::SystemId::sburgers: return "burgers";
    case io::SystemId::sdarcy: return "darcy";
    case io::SystemId::ks: return "ks";
    case io::SystemId::kolmogorov: return "kolmogorov";
    case io::SystemId::synthetic: return "synthetic";
    case io::SystemId::ensemble: break;
  }
  throw ConfigError("system '" + io::system_name(id) + "' has no generator");
}

boost::property_tree::ptree parse_ini(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return tree;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::desk;
  if (name == "paper") return Scale::paper;
  throw ConfigError("unknown scale '" + name + "' (expected desk or paper)");
}

std::string scale_name(Scale s) { return s == Scale::desk ? "desk" : "paper"; }

RunConfig RunConfig::preset(io::SystemId system, Scale scale) {
  const bool desk = scale == Scale::desk;
  const bool two_d = system == io::SystemId::sdarcy || system == io::SystemId::kolmogorov;
  const bool rollout = system == io::SystemId::ks || system == io::SystemId::kolmogorov;
  RunConfig c;
  auto& m = c.values_;
  put(m, "run", {{"system", io::system_name(system)}, {"scale", scale_name(scale)}, {"seed", "0"},
                 {"precision", "float32"}});
  if (rollout) {
    // train/test count trajectories; segment and horizon count steps.
    put(m, "data", {{"train", desk ? "40" : "1024"}, {"test", desk ? "8" : "128"}, {"segment", "50"},
                    {"horizon", "100"}, {"warmup", system == io::SystemId::ks ? "100" : "400"}});
  } else {
    put(m, "data", {{"train", desk ? "2000" : "10000"}, {"test", "32"},
                    {"realizations", system == io::SystemId::synthetic ? "1" : "64"}});
  }
  switch (system) {
    case io::SystemId::sburgers:
      put(m, "burgers", {{"n", desk ? "64" : "256"}, {"nu", "0.1"}, {"macro_dt", "1.0"},
                         {"substep", desk ? "1e-3" : "1e-4"}, {"sigma", "1.0"}, {"w1", "1.0"}, {"w2", "0.5"},
                         {"w3", "0.1"}, {"ic_decay", "2"}, {"ic_amplitude", "1.0"}});
      break;
    case io::SystemId::sdarcy:
      put(m, "darcy", {{"n", desk ? "32" : "128"}, {"high", "12"}, {"low", "3"}, {"decay", "2"}, {"lambda", "0.1"},
                       {"sigma_ln", "10"}, {"ell_ln", "0.2"}, {"sigma_gp", "10"}, {"ell_gp", "0.5"},
                       {"jitter", "1e-5"}, {"cg_tol", "1e-6"}, {"cg_max_iter", "5000"}});
      break;
    case io::SystemId::ks:
      put(m, "ks", {{"n", desk ? "64" : "256"}, {"length", "60"}, {"substep", "0.01"}, {"substeps", "100"},
                    {"order", "2"}, {"ic_decay", "2"}, {"ic_amplitude", "1.0"}});
      break;
    case io::SystemId::kolmogorov:
      put(m, "kolmogorov", {{"n", desk ? "32" : "128"}, {"nu", "1e-2"}, {"drag", "0.1"}, {"forcing_wavenumber", "4"},
                            {"forcing_amplitude", "1.0"}, {"substep", "0.01"}, {"substeps", "25"},
                            {"ic_decay", "2"}, {"ic_amplitude", "1.0"}});
      break;
    case io::SystemId::synthetic:
      put(m, "synthetic", {{"n", desk ? "64" : "256"}, {"terms", "4"}, {"ic_decay", "2"}, {"ic_amplitude", "1.0"}});
      break;
    case io::SystemId::ensemble: throw ConfigError("ensemble files are produced by the sampler, not generated");
  }
  const std::string modes = desk ? (two_d ? "8" : "21") : "32";
  const std::string width = desk ? (two_d ? "16" : "32") : "64";
  put(m, "encoder", {{"rank", desk ? "16" : "64"}, {"width", width}, {"modes", modes}, {"layers", "4"},
                     {"projection", desk ? "64" : "128"}, {"nf_features", desk ? "32" : "64"}});
  put(m, "dll", {{"cond_width", width}, {"cond_modes", modes}, {"cond_layers", "4"},
                 {"cond_projection", desk ? "64" : "128"}, {"cond_features", "64"}, {"cond_dim", "64"},
                 {"hidden", desk ? "256" : "512"}, {"hidden_layers", "3"}, {"time_dim", "32"}, {"draws", "8"},
                 {"steps", "10"}});
  put(m, "fno", {{"width", width}, {"modes", modes}, {"layers", "4"}, {"projection", desk ? "64" : "128"}});
  const std::string epochs = desk ? "100" : (rollout ? "500" : "100");
  put(m, "train_encoder", training(epochs, "32", "1e-3"));
  put(m, "train_dll", training(epochs, "32", "1e-3"));
  put(m, "train_fno", training(epochs, "32", "1e-3"));
  put(m, "eval", {{"members", "32"}, {"directions", "128"}, {"seed", "0"}});
  if (rollout) put(m, "rollout", {{"horizon", "100"}, {"members", "32"}, {"seed", "0"}});
  return c;
}

RunConfig RunConfig::from_text(const std::string& text) {
  const auto tree = parse_ini(text);
  const auto run = tree.get_child_optional("run");
  if (!run || !run->get_optional<std::string>("system")) throw ConfigError("config needs [run] system");
  const auto scale = run->get<std::string>("scale", "desk");
  RunConfig c = preset(io::parse_system(trim(run->get<std::string>("system"))), parse_scale(trim(scale)));
  c.merge_text(text);
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void RunConfig::merge_text(const std::string& text) {
  const auto tree = parse_ini(text);
  for (const auto& [section, child] : tree) {
    if (child.empty() && !child.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : child) set(section + "." + key, trim(value.data()));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  if (key == "run.system" && value != it->second) throw ConfigError("run.system cannot be changed over a preset");
  if (key == "run.scale" && value != it->second) throw ConfigError("run.scale cannot be changed over a preset");
  it->second = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected section.key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string s = str(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
  }
}

long RunConfig::integer(const std::string& key) const {
  const std::string s = str(key);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  const std::string s = str(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("key '" + key + "' expects a seed");
  return v;
}

std::string RunConfig::canonical(const std::vector<std::string>& sections) const {
  std::ostringstream out;
  std::string current;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (!sections.empty() && std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::uint64_t RunConfig::digest(const std::vector<std::string>& sections) const {
  return digest_of(canonical(sections));
}

std::vector<std::string> RunConfig::data_sections() const { return {"data", system_section(system())}; }

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << canonical();
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace dllab::pipeline
