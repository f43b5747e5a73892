#include "lnainfer/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "lnainfer/chain_io.hpp"
#include "lnainfer/density.hpp"
#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": '" + key + "' is missing or has the wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const std::string& key, const std::string& where, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = get<T>(j, key, where);
}

GammaLaw read_law(const json& j, const std::string& where) {
  check_keys(j, where, {"mean", "variance"});
  return {get<double>(j, "mean", where), get<double>(j, "variance", where)};
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "mh") return KernelKind::metropolis_hastings;
  if (s == "mtm") return KernelKind::multiple_try;
  throw InputError("sampler.cell_kernel must be 'mh' or 'mtm', got '" + s + "'");
}

std::string write_file_error(const fs::path& p) { return "cannot write '" + p.string() + "'"; }

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError(write_file_error(p));
  return out;
}

json params_json(const ModelParams& p, double kappa) {
  if (const auto* t = std::get_if<TranslationParams>(&p)) {
    const TranslationTilde s = reparameterize_translation(*t, kappa);
    return {{"natural", {{"tau2", t->tau2}, {"delta2", t->delta2}, {"phi2_0", t->phi2_0}, {"sigma_u2", t->sigma_u2}}},
            {"sampler",
             {{"delta2", s.delta2}, {"tau2_tilde", s.tau2_tilde}, {"sigma_u2", s.sigma_u2}, {"phi2_0_tilde", s.phi2_0_tilde}}}};
  }
  const auto& q = std::get<TranscriptionParams>(p);
  const TranscriptionTilde s = reparameterize_transcription(q, kappa);
  return {{"natural",
           {{"tau1", q.tau1}, {"delta1", q.delta1}, {"alpha", q.alpha}, {"delta2", q.delta2},
            {"phi1_0", q.phi1_0}, {"phi2_0", q.phi2_0}, {"sigma_u2", q.sigma_u2}}},
          {"sampler",
           {{"delta1", s.delta1}, {"alpha_tilde", s.alpha_tilde}, {"tau1_tilde", s.tau1_tilde},
            {"sigma_u2", s.sigma_u2}, {"delta2", s.delta2}, {"phi1_0_tilde", s.phi1_0_tilde},
            {"phi2_0_tilde", s.phi2_0_tilde}}}};
}

void write_curve(std::ostream& out, const std::string& series, const DensityCurve& c) {
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    out << series << ',' << format_double(c.grid[g]) << ',' << format_double(c.density[g]) << '\n';
  }
}

}  // namespace

Command command_from_string(const std::string& s) {
  if (s == "simulate") return Command::simulate;
  if (s == "fit") return Command::fit;
  if (s == "summarize") return Command::summarize;
  throw InputError("unknown command '" + s + "'");
}

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, "config",
             {"schema_version", "experiment", "data", "out", "chain_file", "time_unit", "chain", "sampler", "priors",
              "simulation", "truth"});
  if (j.contains("schema_version") && get<int>(j, "schema_version", "config") != kSchemaVersion) {
    throw InputError("config: unsupported schema_version");
  }
  RunConfig c;
  c.base_dir = base_dir;
  c.experiment = experiment_from_string(get<std::string>(j, "experiment", "config"));
  if (j.contains("data")) c.data = get<std::string>(j, "data", "config");
  if (j.contains("out")) c.out = get<std::string>(j, "out", "config");
  if (j.contains("chain_file")) c.chain_file = get<std::string>(j, "chain_file", "config");
  if (j.contains("time_unit")) c.time_unit = time_unit_from_string(get<std::string>(j, "time_unit", "config"));

  if (j.contains("chain")) {
    const json& ch = j.at("chain");
    check_keys(ch, "chain", {"iterations", "burn_in", "thin", "seed", "kappa_init"});
    read_optional(ch, "iterations", "chain", c.fit.iterations);
    if (ch.contains("burn_in") && !ch.at("burn_in").is_null()) c.fit.burn_in = get<std::size_t>(ch, "burn_in", "chain");
    read_optional(ch, "thin", "chain", c.fit.thin);
    read_optional(ch, "seed", "chain", c.fit.seed);
    read_optional(ch, "kappa_init", "chain", c.fit.kappa_init);
  }
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    check_keys(s, "sampler", {"cell_kernel", "m_try", "rho", "initial_step", "adaptation"});
    if (s.contains("cell_kernel")) c.fit.cell_kernel = kernel_from_string(get<std::string>(s, "cell_kernel", "sampler"));
    read_optional(s, "m_try", "sampler", c.fit.m_try);
    if (s.contains("rho") && !s.at("rho").is_null()) c.fit.rho = get<double>(s, "rho", "sampler");
    read_optional(s, "initial_step", "sampler", c.fit.initial_step);
    if (s.contains("adaptation")) {
      const json& a = s.at("adaptation");
      check_keys(a, "sampler.adaptation", {"window", "target_scalar", "target_block", "freeze"});
      read_optional(a, "window", "sampler.adaptation", c.fit.adaptation.window);
      read_optional(a, "target_scalar", "sampler.adaptation", c.fit.adaptation.target_scalar);
      read_optional(a, "target_block", "sampler.adaptation", c.fit.adaptation.target_block);
      read_optional(a, "freeze", "sampler.adaptation", c.fit.adaptation.freeze);
    }
  }
  if (j.contains("priors")) {
    const json& p = j.at("priors");
    check_keys(p, "priors", {"vague_mean", "delta2"});
    read_optional(p, "vague_mean", "priors", c.fit.priors.vague_mean);
    if (p.contains("delta2")) {
      if (p.at("delta2").is_null()) {
        c.fit.priors.delta2_prior.reset();
      } else {
        const GammaLaw law = read_law(p.at("delta2"), "priors.delta2");
        c.fit.priors.delta2_prior = GammaMeanVar{law.mean, law.variance};
      }
    }
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    check_keys(s, "simulation", {"cells", "observations", "interval", "kappa", "seed", "populations", "initial"});
    StudyConfig study;
    study.experiment = c.experiment;
    study.cells = get<std::size_t>(s, "cells", "simulation");
    study.observations = get<std::size_t>(s, "observations", "simulation");
    read_optional(s, "interval", "simulation", study.interval);
    study.kappa = get<double>(s, "kappa", "simulation");
    read_optional(s, "seed", "simulation", study.seed);
    const json& pops = s.at("populations");
    check_keys(pops, "simulation.populations", {"tau1", "delta1", "alpha", "tau2", "delta2", "sigma_u2"});
    for (const auto& [name, law] : pops.items()) study.populations[name] = read_law(law, "simulation.populations." + name);
    const json& init = s.at("initial");
    check_keys(init, "simulation.initial", {"phi1_0", "phi2_0"});
    for (const auto& [name, v] : init.items()) study.initial[name] = get<double>(init, name, "simulation.initial");
    c.simulation = study;
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return from_json(j, base);
}

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = to_string(experiment);
  j["data"] = data.generic_string();
  j["out"] = out.generic_string();
  if (chain_file) j["chain_file"] = chain_file->generic_string();
  j["time_unit"] = time_unit == TimeUnit::hours ? "hours" : "minutes";
  j["chain"] = {{"iterations", fit.iterations}, {"thin", fit.thin}, {"seed", fit.seed}, {"kappa_init", fit.kappa_init}};
  if (fit.burn_in) j["chain"]["burn_in"] = *fit.burn_in;
  json sampler = {{"m_try", fit.m_try},
                  {"initial_step", fit.initial_step},
                  {"adaptation",
                   {{"window", fit.adaptation.window},
                    {"target_scalar", fit.adaptation.target_scalar},
                    {"target_block", fit.adaptation.target_block},
                    {"freeze", fit.adaptation.freeze}}}};
  if (fit.cell_kernel) sampler["cell_kernel"] = *fit.cell_kernel == KernelKind::multiple_try ? "mtm" : "mh";
  if (fit.rho) sampler["rho"] = *fit.rho;
  j["sampler"] = sampler;
  j["priors"] = {{"vague_mean", fit.priors.vague_mean}, {"delta2", nullptr}};
  if (fit.priors.delta2_prior) {
    j["priors"]["delta2"] = {{"mean", fit.priors.delta2_prior->mean}, {"variance", fit.priors.delta2_prior->variance}};
  }
  if (simulation) {
    json pops = json::object();
    for (const auto& [name, law] : simulation->populations) pops[name] = {{"mean", law.mean}, {"variance", law.variance}};
    j["simulation"] = {{"cells", simulation->cells},
                       {"observations", simulation->observations},
                       {"interval", simulation->interval},
                       {"kappa", simulation->kappa},
                       {"seed", simulation->seed},
                       {"populations", pops},
                       {"initial", simulation->initial}};
  }
  return j;
}

fs::path RunConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

fs::path RunConfig::chain_path() const { return chain_file ? resolve(*chain_file) : out_dir() / "chain.csv"; }

void RunConfig::validate(Command command) const {
  switch (command) {
    case Command::simulate:
      if (!simulation) throw InputError("simulate needs a 'simulation' block in the config");
      if (simulation->experiment != experiment) throw InputError("simulation experiment does not match the config");
      simulation->validate();
      break;
    case Command::fit:
      fit.validate();
      if (!fs::is_regular_file(data_path())) throw InputError("data file '" + data_path().string() + "' does not exist");
      if (fit.cell_kernel == KernelKind::multiple_try || (!fit.cell_kernel && experiment == Experiment::transcription)) {
        if (fit.m_try < 2) throw InputError("sampler.m_try must be at least 2");
        const double rho = fit.rho.value_or(default_antithetic_rho(fit.m_try));
        if (rho > 0.0 || rho < -1.0 / static_cast<double>(fit.m_try - 1)) {
          throw InputError("sampler.rho must lie in [-1/(m_try-1), 0]");
        }
      }
      if (!(fit.priors.vague_mean > 0.0)) throw InputError("priors.vague_mean must be positive");
      break;
    case Command::summarize:
      if (!fs::is_regular_file(chain_path())) throw InputError("chain file '" + chain_path().string() + "' does not exist");
      break;
  }
}

void run_simulate(const RunConfig& config, std::ostream& log) {
  config.validate(Command::simulate);
  const fs::path dir = config.out_dir();
  fs::create_directories(dir);
  const SyntheticDataset study = generate_study(*config.simulation);
  write_dataset_csv(dir / "observations.csv", study.observations());

  RunConfig next = config;
  next.data = "observations.csv";
  next.out = ".";
  next.chain_file.reset();
  json truth = next.to_json();
  json cells = json::array();
  for (const auto& cell : study.cells) {
    json entry = params_json(cell.truth, study.config.kappa);
    entry["name"] = cell.name;
    cells.push_back(entry);
  }
  truth["truth"] = {{"kappa", study.config.kappa}, {"cells", cells}};
  open_out(dir / "truth.json") << truth.dump(2) << '\n';
  log << "simulated " << study.cells.size() << " cells x " << study.config.observations << " observations into "
      << dir.string() << '\n';
}

bool run_fit(const RunConfig& config, std::ostream& log) {
  config.validate(Command::fit);
  const fs::path dir = config.out_dir();
  fs::create_directories(dir);
  const MultiCellDataset data = ingest(config.data_path(), config.time_unit);
  const FitResult result = fit(config.experiment, data, config.fit);

  json embedded = config.to_json();
  embedded.erase("out");
  embedded.erase("chain_file");
  embedded.erase("simulation");
  json extra = {{"experiment", to_string(config.experiment)},
                {"config", embedded},
                {"warnings", result.warnings},
                {"numerical_rejections", result.numerical_rejections},
                {"failed", result.failed}};
  if (result.failed) extra["failure"] = result.failure;
  write_chain(dir / "chain", result.chain, extra);
  {
    std::ofstream out = open_out(dir / "summary.csv");
    write_summary_csv(out, result.summary);
  }
  for (const auto& w : result.warnings) log << "warning: " << w << '\n';
  for (const auto& a : result.chain.acceptance) {
    log << "acceptance " << a.name << ": " << format_double(a.rate()) << '\n';
  }
  for (const auto& row : result.summary) {
    if (row.name.find('.') != std::string::npos) continue;
    log << row.name << " " << format_double(row.median) << " (" << format_double(row.lower) << ", "
        << format_double(row.upper) << ")\n";
  }
  if (result.failed) log << "chain stopped early: " << result.failure << '\n';
  return !result.failed;
}

void run_summarize(const RunConfig& config, std::ostream& log) {
  config.validate(Command::summarize);
  const PosteriorChain chain = read_chain(config.chain_path());
  const fs::path dir = config.out_dir() / "densities";
  fs::create_directories(dir);

  std::vector<std::string> cells;
  std::map<std::string, std::vector<std::size_t>> by_param;  // parameter -> column per cell
  std::vector<std::size_t> globals;
  for (std::size_t j = 0; j < chain.names.size(); ++j) {
    const std::string& n = chain.names[j];
    const auto dot = n.find('.');
    if (dot == std::string::npos) {
      globals.push_back(j);
      continue;
    }
    const std::string cell = n.substr(0, dot);
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
    by_param[n.substr(dot + 1)].push_back(j);
  }
  const auto has = [&](const std::string& n) {
    return std::find(chain.names.begin(), chain.names.end(), n) != chain.names.end();
  };

  for (std::size_t j : globals) {
    std::ofstream out = open_out(dir / (chain.names[j] + ".csv"));
    out << "series,x,density\n";
    write_curve(out, "posterior", kernel_density(chain.column(j)));
  }

  std::map<std::string, std::vector<double>> medians;
  for (const auto& [param, columns] : by_param) {
    std::vector<std::vector<double>> samples;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j : columns) {
      samples.push_back(chain.column(j));
      const auto& s = samples.back();
      const double h = silverman_bandwidth(s);
      lo = std::min(lo, *std::min_element(s.begin(), s.end()) - 3.0 * h);
      hi = std::max(hi, *std::max_element(s.begin(), s.end()) + 3.0 * h);
      medians[param].push_back(quantile(s, 0.5));
    }
    std::ofstream out = open_out(dir / ("cell_" + param + ".csv"));
    out << "series,x,density\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      write_curve(out, chain.names[columns[c]].substr(0, chain.names[columns[c]].find('.')),
                  kernel_density(samples[c], lo, hi));
    }
    if (has("mu_" + param) && has("var_" + param)) {
      const double mean = sample_mean(chain.column("mu_" + param));
      const double var = sample_mean(chain.column("var_" + param));
      write_curve(out, "population", gamma_density_curve(mean, var, lo, hi));
    }
  }

  std::ofstream corr = open_out(dir / "spearman.csv");
  corr << "x,y,spearman\n";
  if (medians.count("sigma_u2")) {
    std::vector<double> sigma_u;
    for (double v : medians["sigma_u2"]) sigma_u.push_back(std::sqrt(v));
    for (const std::string level : {"phi1_0_tilde", "phi2_0_tilde"}) {
      if (!medians.count(level)) continue;
      const auto& phi = medians[level];
      std::ofstream out = open_out(dir / ("scatter_sigma_u_" + level + ".csv"));
      out << "cell,sigma_u," << level << '\n';
      for (std::size_t c = 0; c < cells.size(); ++c) {
        out << cells[c] << ',' << format_double(sigma_u[c]) << ',' << format_double(phi[c]) << '\n';
      }
      const double rho = spearman_correlation(sigma_u, phi);
      corr << "sigma_u," << level << ',' << format_double(rho) << '\n';
      log << "Spearman(sigma_u, " << level << ") = " << format_double(rho) << '\n';
    }
  }
  log << "wrote densities for " << chain.names.size() << " columns into " << dir.string() << '\n';
}

int run_command(Command command, const fs::path& config_path, const CommandOptions& options, std::ostream& log,
                std::ostream& err) {
  try {
    RunConfig config = RunConfig::load(config_path);
    if (options.out) {
      config.out = fs::absolute(*options.out);
    }
    if (options.seed) {
      config.fit.seed = *options.seed;
      if (config.simulation) config.simulation->seed = *options.seed;
    }
    switch (command) {
      case Command::simulate:
        run_simulate(config, log);
        return 0;
      case Command::fit:
        return run_fit(config, log) ? 0 : 3;
      case Command::summarize:
        run_summarize(config, log);
        return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace lnainfer
