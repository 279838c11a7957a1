#include "pdd/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>

#include "pdd/error.hpp"

namespace pdd {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema{
    {"problem", {"type", "lo", "hi", "horizon", "intensity", "sigma", "payoff_scale", "polynomial"}},
    {"partition", {"axis", "subdomains"}},
    {"interface", {"levels", "samples", "mc_dt", "target_std_error", "max_samples", "degree"}},
    {"solver", {"dx", "dy", "dt", "picard_tol", "elliptic_tol"}},
    {"branching", {"prune_limit"}},
    {"run", {"seed", "workers", "model_processors"}},
    {"output", {"error_lo", "error_hi", "x_min", "x_max", "stride"}},
};

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = kSchema.find(section);
    require(it != kSchema.end(), ErrorKind::Configuration, "unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      (void)value;
      require(it->second.count(key) > 0, ErrorKind::Configuration, "unknown key " + section + "." + key);
    }
  }
}

template <class T>
void read(const pt::ptree& tree, const std::string& path, T& target) {
  const auto node = tree.get_child_optional(path);
  if (!node) return;
  try {
    target = node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    fail(ErrorKind::Configuration, "cannot parse " + path + " = '" + node->data() + "'");
  }
}

template <class T>
void read(const pt::ptree& tree, const std::string& path, std::optional<T>& target) {
  if (!tree.get_child_optional(path)) return;
  T value{};
  read(tree, path, value);
  target = value;
}

std::vector<double> parse_list(const std::string& text, const std::string& path) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  for (auto& part : parts) {
    boost::trim(part);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      require(used == part.size(), ErrorKind::Configuration, "trailing characters");
    } catch (const std::logic_error&) {
      fail(ErrorKind::Configuration, "cannot parse " + path + " entry '" + part + "'");
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::Configuration, std::string("malformed config: ") + e.what());
  }
  check_schema(tree);

  RunConfig run;
  PddConfig& c = run.pdd;
  std::string type = "kpp";
  read(tree, "problem.type", type);
  if (type == "kpp") {
    KppSpec kpp;
    read(tree, "problem.lo", kpp.lo);
    read(tree, "problem.hi", kpp.hi);
    read(tree, "problem.horizon", kpp.horizon);
    c.problem = kpp;
  } else if (type == "cva") {
    CvaSpec cva;
    read(tree, "problem.lo", cva.lo);
    read(tree, "problem.hi", cva.hi);
    read(tree, "problem.horizon", cva.horizon);
    read(tree, "problem.intensity", cva.intensity);
    read(tree, "problem.sigma", cva.sigma);
    read(tree, "problem.payoff_scale", cva.payoff_scale);
    if (const auto poly = tree.get_optional<std::string>("problem.polynomial")) {
      cva.polynomial = parse_list(*poly, "problem.polynomial");
    }
    c.problem = cva;
    c.error_lo = cva.lo;
    c.error_hi = cva.hi;
  } else if (type == "elliptic") {
    c.problem = make_manufactured_problem();
    c.levels = 9;
    c.samples = 10000;
    c.mc_dt = 1e-3;
    c.solver_dx = 1.0 / 64;
    c.solver_dy = 1.0 / 64;
  } else {
    fail(ErrorKind::Configuration, "unknown problem type '" + type + "'");
  }

  read(tree, "partition.axis", c.axis);
  read(tree, "partition.subdomains", c.subdomains);
  read(tree, "interface.levels", c.levels);
  read(tree, "interface.samples", c.samples);
  read(tree, "interface.mc_dt", c.mc_dt);
  read(tree, "interface.target_std_error", c.target_std_error);
  read(tree, "interface.max_samples", c.max_samples);
  read(tree, "interface.degree", c.degree);
  read(tree, "solver.dx", c.solver_dx);
  read(tree, "solver.dy", c.solver_dy);
  read(tree, "solver.dt", c.solver_dt);
  read(tree, "solver.picard_tol", c.picard_tol);
  read(tree, "solver.elliptic_tol", c.elliptic_tol);
  read(tree, "branching.prune_limit", c.prune_limit);
  read(tree, "run.seed", c.seed);
  read(tree, "run.workers", c.workers);
  read(tree, "run.model_processors", c.model_processors);
  read(tree, "output.error_lo", c.error_lo);
  read(tree, "output.error_hi", c.error_hi);
  read(tree, "output.x_min", run.output.x_min);
  read(tree, "output.x_max", run.output.x_max);
  read(tree, "output.stride", run.output.stride);
  require(run.output.stride >= 1, ErrorKind::Configuration, "output.stride must be >= 1");
  return run;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Configuration, "cannot open config file " + path);
  return parse_config(in);
}

}  // namespace pdd
