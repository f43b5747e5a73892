#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnainfer/diagnostics.hpp"
#include "lnainfer/mcmc.hpp"

namespace lnainfer {

inline constexpr int kSchemaVersion = 1;

/// Columns: iteration, log_posterior, then the chain's parameter names.
void write_chain_csv(std::ostream& out, const PosteriorChain& chain);
PosteriorChain read_chain_csv(std::istream& in, const std::string& source = "<stream>");

/// Sidecar metadata: schema_version, seed, thinning, burn-in, column names,
/// acceptance counters, per-column diagnostics (when the chain has at least
/// 100 rows) and whatever the caller puts in `extra`.
nlohmann::json chain_sidecar(const PosteriorChain& chain, const nlohmann::json& extra = nlohmann::json::object());

/// Writes `<stem>.csv` and `<stem>.json`.
void write_chain(const std::filesystem::path& stem, const PosteriorChain& chain,
                 const nlohmann::json& extra = nlohmann::json::object());
/// Reads a chain CSV and, when present, the sidecar next to it.
PosteriorChain read_chain(const std::filesystem::path& csv);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace lnainfer
