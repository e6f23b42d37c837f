#include "goalfv/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace goalfv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::map<std::string, std::map<std::string, std::string>> out;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (out[section].count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    out[section][key] = val;
  }
  return out;
}

namespace {

class SectionReader {
 public:
  SectionReader(const std::map<std::string, std::string>* kv, std::string name)
      : kv_(kv), name_(std::move(name)) {}

  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  std::string str(const std::string& key, const std::string& fallback) {
    mark(key);
    if (!has(key)) return fallback;
    return kv_->at(key);
  }
  double num(const std::string& key, double fallback) {
    mark(key);
    if (!has(key)) return fallback;
    try {
      return std::stod(kv_->at(key));
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + kv_->at(key) + "'");
    }
  }
  long integer(const std::string& key, long fallback) {
    mark(key);
    if (!has(key)) return fallback;
    try {
      return std::stol(kv_->at(key));
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": not an integer: '" + kv_->at(key) + "'");
    }
  }
  bool flag(const std::string& key, bool fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const std::string v = kv_->at(key);
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("[" + name_ + "] " + key + ": not a boolean: '" + v + "'");
  }

  void check_consumed() const {
    if (!kv_) return;
    for (const auto& [key, val] : *kv_) {
      if (!used_.count(key))
        throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
    }
  }

 private:
  void mark(const std::string& key) { used_.insert(key); }
  const std::map<std::string, std::string>* kv_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const auto ini = parse_ini(path);
  const auto section = [&](const char* name) -> const std::map<std::string, std::string>* {
    auto it = ini.find(name);
    return it == ini.end() ? nullptr : &it->second;
  };
  for (const auto& [name, kv] : ini) {
    if (name != "flow" && name != "mesh" && name != "adapt" && name != "train" &&
        name != "run")
      throw ConfigError("unknown config section [" + name + "]");
  }

  RunConfig cfg;

  SectionReader mesh(section("mesh"), "mesh");
  cfg.mesh_source = mesh.str("source", cfg.mesh_source);
  cfg.mesh_path = mesh.str("path", cfg.mesh_path);
  cfg.profile = mesh.str("profile", cfg.profile);
  cfg.n_around = static_cast<int>(mesh.integer("n_around", cfg.n_around));
  cfg.n_radial = static_cast<int>(mesh.integer("n_radial", cfg.n_radial));
  cfg.farfield_radius = mesh.num("farfield_radius", cfg.farfield_radius);
  cfg.initial_uniform_refine =
      static_cast<int>(mesh.integer("uniform_refine", cfg.initial_uniform_refine));
  mesh.check_consumed();
  if (cfg.mesh_source != "naca" && cfg.mesh_source != "file")
    throw ConfigError("[mesh] source must be 'naca' or 'file'");
  if (cfg.mesh_source == "file") {
    if (cfg.mesh_path.empty()) throw ConfigError("[mesh] source=file needs path");
    if (!std::filesystem::exists(cfg.mesh_path))
      throw ConfigError("[mesh] path does not exist: " + cfg.mesh_path);
  }

  SectionReader flow(section("flow"), "flow");
  cfg.flow.mach = flow.num("mach", cfg.flow.mach);
  cfg.flow.alpha_deg = flow.num("alpha", cfg.flow.alpha_deg);
  cfg.flow.gamma = flow.num("gamma", cfg.flow.gamma);
  flow.check_consumed();
  if (!(cfg.flow.mach > 0.0)) throw ConfigError("[flow] mach must be positive");
  if (!(cfg.flow.gamma > 1.0)) throw ConfigError("[flow] gamma must exceed 1");

  SectionReader adapt(section("adapt"), "adapt");
  {
    const std::string kind = adapt.str("functional", "drag");
    if (kind == "drag")
      cfg.functional = FunctionalKind::Drag;
    else if (kind == "lift")
      cfg.functional = FunctionalKind::Lift;
    else
      throw ConfigError("[adapt] functional must be drag or lift");
  }
  cfg.adapt.proportion = adapt.num("proportion", cfg.adapt.proportion);
  cfg.adapt.coarsen_fraction = adapt.num("coarsen_fraction", cfg.adapt.coarsen_fraction);
  cfg.adapt.max_rounds = static_cast<int>(adapt.integer("max_rounds", cfg.adapt.max_rounds));
  {
    const std::string mode = adapt.str("tol_mode", "dynamic");
    if (mode == "dynamic") {
      cfg.adapt.tol_dynamic = true;
    } else if (mode == "constant") {
      cfg.adapt.tol_dynamic = false;
    } else {
      throw ConfigError("[adapt] tol_mode must be dynamic or constant");
    }
  }
  cfg.adapt.constant_tol = adapt.num("constant_tol", cfg.adapt.constant_tol);
  cfg.adapt.solve_fine_primal = adapt.flag("solve_fine_primal", cfg.adapt.solve_fine_primal);
  adapt.check_consumed();
  if (!(cfg.adapt.proportion + cfg.adapt.coarsen_fraction < 1.0))
    throw ConfigError("[adapt] proportion + coarsen_fraction must stay below 1");

  SectionReader train(section("train"), "train");
  cfg.train.learning_rate = train.num("learning_rate", cfg.train.learning_rate);
  cfg.train.batch_size = static_cast<int>(train.integer("batch_size", cfg.train.batch_size));
  cfg.train.epochs = static_cast<int>(train.integer("epochs", cfg.train.epochs));
  cfg.train.k_folds = static_cast<int>(train.integer("k_folds", cfg.train.k_folds));
  cfg.train.dropout = train.num("dropout", cfg.train.dropout);
  cfg.train.loss_epsilon = train.num("loss_epsilon", cfg.train.loss_epsilon);
  cfg.train.seed = static_cast<std::uint64_t>(train.integer("seed", 1));
  {
    const std::string widths = train.str("hidden", "");
    if (!widths.empty()) {
      cfg.hidden_widths.clear();
      std::istringstream ws(widths);
      std::string tok;
      while (std::getline(ws, tok, ',')) cfg.hidden_widths.push_back(std::stoi(tok));
    }
  }
  train.check_consumed();

  SectionReader run(section("run"), "run");
  cfg.case_name = run.str("case", cfg.case_name);
  cfg.threads = static_cast<int>(run.integer("threads", cfg.threads));
  cfg.seed = static_cast<std::uint64_t>(run.integer("seed", 1));
  cfg.out_dir = run.str("out", cfg.out_dir);
  cfg.reference_uniform_refine =
      static_cast<int>(run.integer("reference_uniform_refine", cfg.reference_uniform_refine));
  cfg.newton.tol_residual = run.num("newton_tol", cfg.newton.tol_residual);
  cfg.newton.max_iterations =
      static_cast<int>(run.integer("newton_max_iterations", cfg.newton.max_iterations));
  cfg.newton.alpha_reg = run.num("alpha_reg", cfg.newton.alpha_reg);
  {
    const std::string lm = run.str("linear", "multilevel");
    if (lm == "multilevel")
      cfg.newton.linear_method = LinearMethod::Multilevel;
    else if (lm == "gmres")
      cfg.newton.linear_method = LinearMethod::GMRES;
    else
      throw ConfigError("[run] linear must be multilevel or gmres");
  }
  cfg.newton.linear.tol_rel = run.num("linear_tol", cfg.newton.linear.tol_rel);
  {
    const std::string sch = run.str("scheme", "hllc");
    if (sch == "hllc")
      cfg.newton.residual.scheme = FluxScheme::HLLC;
    else if (sch == "llf")
      cfg.newton.residual.scheme = FluxScheme::LLF;
    else
      throw ConfigError("[run] scheme must be hllc or llf");
  }
  cfg.newton.residual.use_limiter = run.flag("limiter", cfg.newton.residual.use_limiter);
  cfg.dual.tol_rel = run.num("dual_tol", cfg.dual.tol_rel);
  {
    const std::string dm = run.str("dual_linear", "gmres");
    if (dm == "gmres")
      cfg.dual.method = LinearMethod::GMRES;
    else if (dm == "multilevel")
      cfg.dual.method = LinearMethod::Multilevel;
    else
      throw ConfigError("[run] dual_linear must be gmres or multilevel");
  }
  cfg.dual.alpha_reg = cfg.newton.alpha_reg;
  cfg.dual.residual = cfg.newton.residual;
  run.check_consumed();
  if (cfg.threads < 1) throw ConfigError("[run] threads must be >= 1");

  return cfg;
}

}  // namespace goalfv
