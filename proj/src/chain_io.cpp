#include "lnainfer/chain_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lnainfer/dataset_io.hpp"
#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  return out;
}

double parse_field(const std::string& s, const std::string& source, std::size_t row, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError(source + ": row " + std::to_string(row) + ", column '" + column + "': malformed number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_chain_csv(std::ostream& out, const PosteriorChain& chain) {
  out << "iteration,log_posterior";
  for (const auto& n : chain.names) out << ',' << n;
  out << '\n';
  const std::size_t cols = chain.names.size();
  for (std::size_t r = 0; r < chain.rows(); ++r) {
    out << chain.burn_in + r * chain.thin << ',' << format_double(chain.log_posterior[r]);
    for (std::size_t j = 0; j < cols; ++j) out << ',' << format_double(chain.values[r * cols + j]);
    out << '\n';
  }
}

PosteriorChain read_chain_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty chain file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "iteration" || header[1] != "log_posterior") {
    throw InputError(source + ": chain header must start with 'iteration,log_posterior'");
  }
  PosteriorChain chain;
  chain.names.assign(header.begin() + 2, header.end());
  std::size_t row = 1;
  std::vector<double> values(chain.names.size());
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw InputError(source + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
    parse_field(fields[0], source, row, "iteration");
    const double lp = parse_field(fields[1], source, row, "log_posterior");
    for (std::size_t j = 0; j < values.size(); ++j) values[j] = parse_field(fields[j + 2], source, row, header[j + 2]);
    chain.append(values, lp);
  }
  if (chain.rows() == 0) throw InputError(source + ": chain has no rows");
  return chain;
}

nlohmann::json chain_sidecar(const PosteriorChain& chain, const nlohmann::json& extra) {
  nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
  j["schema_version"] = kSchemaVersion;
  j["seed"] = chain.seed;
  j["thin"] = chain.thin;
  j["burn_in"] = chain.burn_in;
  j["rows"] = chain.rows();
  j["columns"] = chain.names;
  nlohmann::json acc = nlohmann::json::array();
  for (const auto& a : chain.acceptance) {
    acc.push_back({{"block", a.name}, {"attempts", a.attempts}, {"accepts", a.accepts}, {"rate", a.rate()}});
  }
  j["acceptance"] = acc;
  if (chain.rows() >= 100) {
    const ChainDiagnostics d = diagnostics(chain);
    nlohmann::json diag = nlohmann::json::array();
    for (std::size_t k = 0; k < d.names.size(); ++k) {
      diag.push_back({{"parameter", d.names[k]},
                      {"ess", d.ess[k].ess},
                      {"degenerate", d.ess[k].degenerate},
                      {"geweke_z", d.geweke[k]}});
    }
    j["diagnostics"] = diag;
  }
  return j;
}

void write_chain(const std::filesystem::path& stem, const PosteriorChain& chain, const nlohmann::json& extra) {
  std::filesystem::path csv = stem;
  csv += ".csv";
  std::filesystem::path json = stem;
  json += ".json";
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw InputError("cannot write '" + csv.string() + "'");
    write_chain_csv(out, chain);
  }
  std::ofstream out(json, std::ios::binary);
  if (!out) throw InputError("cannot write '" + json.string() + "'");
  out << chain_sidecar(chain, extra).dump(2) << '\n';
}

PosteriorChain read_chain(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw InputError("cannot open chain file '" + csv.string() + "'");
  PosteriorChain chain = read_chain_csv(in, csv.string());
  std::filesystem::path json = csv;
  json.replace_extension(".json");
  std::ifstream side(json);
  if (!side) return chain;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(side);
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw InputError(json.string() + ": unsupported schema_version");
    chain.seed = j.at("seed").get<std::uint64_t>();
    chain.thin = j.at("thin").get<std::size_t>();
    chain.burn_in = j.at("burn_in").get<std::size_t>();
    for (const auto& a : j.at("acceptance")) {
      chain.acceptance.push_back({a.at("block").get<std::string>(), a.at("attempts").get<std::uint64_t>(),
                                  a.at("accepts").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(json.string() + ": malformed chain sidecar: " + e.what());
  }
  return chain;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "parameter,median,lower_2.5,upper_97.5,ess,geweke_z\n";
  for (const auto& r : rows) {
    out << r.name << ',' << format_double(r.median) << ',' << format_double(r.lower) << ','
        << format_double(r.upper) << ',' << format_double(r.ess) << ',' << format_double(r.geweke_z) << '\n';
  }
}

}  // namespace lnainfer
