#include "siv/io.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace siv {

namespace {

using json = nlohmann::ordered_json;

// Splits one logical record. Quoted fields may span physical lines;
// `line` advances for each newline consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields, long& line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  const long start_line = line + 1;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw Error(ErrorKind::ParseError, "unterminated quoted field", start_line,
                static_cast<long>(fields.size() + 1));
  }
  if (!any) return false;
  ++line;
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_or_null(const std::optional<T>& v) {
  if (!v) return json(nullptr);
  if constexpr (std::is_floating_point_v<T>) return number_or_null(*v);
  return json(*v);
}

std::string_view sign_policy_name(SignPolicy p) {
  switch (p) {
    case SignPolicy::automatic: return "auto";
    case SignPolicy::positive: return "positive";
    case SignPolicy::negative: return "negative";
  }
  return "auto";
}

}  // namespace

IngestResult parse_csv(std::istream& in, const std::vector<std::string>& used_columns,
                       std::size_t min_rows) {
  long line = 0;
  std::vector<std::string> header;
  if (!read_record(in, header, line)) {
    throw Error(ErrorKind::TooFewRows, "file is empty");
  }
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) header.front().erase(0, 3);

  std::vector<std::string> keep = used_columns.empty() ? header : used_columns;
  std::vector<std::size_t> index;
  for (const auto& name : keep) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::InvalidInput, "column '" + name + "' not in header");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  IngestResult out;
  std::vector<std::vector<double>> cols(keep.size());
  std::vector<std::string> fields;
  while (true) {
    const long record_line = line + 1;
    if (!read_record(in, fields, line)) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::ParseError,
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  record_line, static_cast<long>(std::min(fields.size(), header.size()) + 1));
    }
    ++out.rows_read;
    std::vector<double> row;
    row.reserve(index.size());
    bool complete = true;
    for (std::size_t j : index) {
      const auto v = parse_number(fields[j]);
      if (!v) {
        complete = false;
        break;
      }
      row.push_back(*v);
    }
    if (!complete) {
      ++out.rows_dropped;
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
  }
  const std::size_t n = cols.empty() ? 0 : cols.front().size();
  if (n < min_rows) {
    throw Error(ErrorKind::TooFewRows, "only " + std::to_string(n) + " complete rows (need " +
                                           std::to_string(min_rows) + ")");
  }
  for (std::size_t j = 0; j < keep.size(); ++j) out.data.add_column(keep[j], std::move(cols[j]));
  return out;
}

IngestResult ingest_csv(const std::string& path, const std::vector<std::string>& used_columns,
                        std::size_t min_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open '" + path + "'");
  return parse_csv(in, used_columns, min_rows);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Dataset& data, std::ostream& out) {
  const auto& names = data.names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      out << (j ? "," : "") << format_double(data.column(names[j])[i]);
    }
    out << '\n';
  }
}

void write_locus_csv(const DeltaLocus& locus, std::ostream& out, std::optional<double> delta0) {
  out << "delta,criterion,corr_s_x,first_stage_F,selected\n";
  const auto& p = locus.points;
  std::optional<std::size_t> flagged;
  if (delta0 && !p.empty()) {
    flagged = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].delta <= *delta0) flagged = i;
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << format_double(p[i].delta) << ',' << format_double(p[i].criterion) << ','
        << format_double(p[i].corr_s_x) << ',' << format_double(p[i].first_stage_F) << ','
        << (flagged && *flagged == i ? 1 : 0) << '\n';
  }
}

void write_mc_csv(const McSummary& s, std::ostream& out) {
  const DgpConfig& c = s.config;
  out << "# population_size=" << c.population_size << " sample_size=" << c.sample_size
      << " generations=" << c.n_generations << " draws=" << c.n_draws
      << " sign=" << (c.sign == EndogeneitySign::positive ? "positive" : "negative")
      << " exogenous=" << (c.exogenous ? 1 : 0) << " heteroscedasticity=" << format_double(c.heteroscedasticity)
      << " construction=" << (c.construction == DgpConstruction::latent ? "latent" : "literal")
      << " seed=" << c.seed << " beta_true=2\n";
  out << "method,mean_beta,std_error,ci_low,ci_high,bias,rmse,n_success,n_failed\n";
  for (const McRow& r : s.rows) {
    out << method_name(r.method) << ',' << format_double(r.mean_beta) << ','
        << format_double(r.std_error) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << ',' << format_double(r.bias) << ',' << format_double(r.rmse)
        << ',' << r.n_success << ',' << r.n_failed << '\n';
  }
}

void write_replications_csv(const McSummary& s, std::ostream& out) {
  out << "generation,draw,method,beta,delta0,k,error\n";
  for (const McReplication& r : s.replications) {
    out << r.generation << ',' << r.draw << ',' << method_name(r.method) << ','
        << (r.beta ? format_double(*r.beta) : "") << ',' << (r.delta0 ? format_double(*r.delta0) : "")
        << ',' << r.k << ',' << r.error << '\n';
  }
}

json estimate_json(const SivEstimate& e) {
  json j;
  j["method"] = std::string(method_name(e.method));
  j["regressor"] = e.regressor;
  j["beta_hat"] = number_or_null(e.beta_hat);
  j["se"] = number_or_null(e.se);
  j["ci_low"] = number_or_null(e.ci_low);
  j["ci_high"] = number_or_null(e.ci_high);
  j["ci_kind"] = e.ci_kind;
  j["delta0"] = optional_or_null(e.delta0);
  j["k"] = e.k;
  j["sign_verdict"] = e.verdict ? json(std::string(verdict_name(*e.verdict))) : json(nullptr);
  j["first_stage_F"] = optional_or_null(e.first_stage_F);
  j["weak_instrument"] = optional_or_null(e.weak_instrument);
  j["wu_hausman_p"] = optional_or_null(e.wu_hausman_p);
  j["wu_hausman_degenerate"] = e.wu_hausman_degenerate;
  j["sargan_p"] = optional_or_null(e.sargan_p);
  j["adj_r2"] = number_or_null(e.adj_r2);
  j["n_used"] = e.n_used;
  return j;
}

json bootstrap_json(const BootstrapResult& b) {
  json j;
  j["B"] = b.B;
  j["seed"] = b.seed;
  j["sign_used"] = std::string(sign_policy_name(b.sign_used));
  j["successes"] = b.estimates.size();
  j["failures"] = b.failures;
  j["mean_beta"] = number_or_null(b.mean_beta);
  j["se"] = number_or_null(b.se);
  j["ci_percentile"] = json::array({number_or_null(b.ci_low), number_or_null(b.ci_high)});
  j["ci_normal"] = json::array({number_or_null(b.normal_ci_low), number_or_null(b.normal_ci_high)});
  j["mean_delta0"] = optional_or_null(b.mean_delta0);
  j["estimates"] = b.estimates;
  j["delta0s"] = b.delta0s;
  j["replication"] = b.replication;
  return j;
}

json estimate_report(const std::vector<SivEstimate>& estimates, const BootstrapResult* boot,
                     std::size_t rows_dropped) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["data"] = {{"n_used", estimates.empty() ? 0 : estimates.front().n_used},
               {"rows_dropped", rows_dropped}};
  json list = json::array();
  for (const auto& e : estimates) list.push_back(estimate_json(e));
  j["estimates"] = std::move(list);
  j["bootstrap"] = boot ? bootstrap_json(*boot) : json(nullptr);
  return j;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace siv
