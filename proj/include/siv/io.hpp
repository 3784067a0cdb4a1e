// CSV ingestion and the machine-readable outputs: estimate JSON, locus
// CSV, Monte Carlo tables and generated datasets.
#pragma once

#include "siv/dataset.hpp"
#include "siv/dgp.hpp"
#include "siv/estimator.hpp"
#include "siv/search.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace siv {

inline constexpr int kSchemaVersion = 1;

struct IngestResult {
  Dataset data;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;  // rows with a missing or non-numeric used cell
};

// Reads a comma-separated file with a header row. Only `used_columns` are
// kept (every column when empty); rows with a missing or non-numeric cell
// in a kept column are dropped. Throws FileNotFound, ParseError(line,
// column) on malformed quoting or a wrong field count, InvalidInput on an
// unknown used column, TooFewRows when fewer than min_rows rows remain.
IngestResult ingest_csv(const std::string& path, const std::vector<std::string>& used_columns = {},
                        std::size_t min_rows = 10);
IngestResult parse_csv(std::istream& in, const std::vector<std::string>& used_columns = {},
                       std::size_t min_rows = 10);

// 17 significant digits.
std::string format_double(double v);

void write_csv(const Dataset& data, std::ostream& out);

// Columns: delta, criterion, corr_s_x, first_stage_F, plus a trailing
// `selected` flag marking the grid interval holding delta0.
void write_locus_csv(const DeltaLocus& locus, std::ostream& out,
                     std::optional<double> delta0 = std::nullopt);

void write_mc_csv(const McSummary& summary, std::ostream& out);
void write_replications_csv(const McSummary& summary, std::ostream& out);

nlohmann::ordered_json estimate_json(const SivEstimate& est);
nlohmann::ordered_json bootstrap_json(const BootstrapResult& boot);
// {"schema_version", "data", "estimates", "bootstrap"}
nlohmann::ordered_json estimate_report(const std::vector<SivEstimate>& estimates,
                                       const BootstrapResult* boot, std::size_t rows_dropped);
std::string dump_json(const nlohmann::ordered_json& j);

}  // namespace siv
