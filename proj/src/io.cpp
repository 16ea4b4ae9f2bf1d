#include "zne/io.hpp"

#include "zne/format.hpp"
#include "zne/models.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace zne {

namespace {

using nlohmann::json;

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void append_vector(std::string& out, const Eigen::VectorXd& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

/// Applies `per_line` to every non-empty line, converting any Error raised
/// inside into a DataError that names the line.
template <typename Fn>
void for_each_line(const std::string& path, Fn per_line) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      per_line(line);
    } catch (const DataError&) {
      throw;
    } catch (const json::exception& e) {
      throw DataError(path + " line " + std::to_string(number) + ": " +
                          e.what(),
                      number);
    } catch (const Error& e) {
      throw DataError(path + " line " + std::to_string(number) + ": " +
                          e.what(),
                      number);
    }
  }
}

const json& require_key(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw StructuralError(std::string("missing key '") + key + "'");
  }
  return *it;
}

double require_finite_number(const json& obj, const char* key) {
  const json& v = require_key(obj, key);
  if (!v.is_number()) {
    throw StructuralError(std::string("key '") + key + "' must be a number");
  }
  double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw StructuralError(std::string("key '") + key + "' must be finite");
  }
  return d;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require_key(obj, key);
  if (!v.is_string()) {
    throw StructuralError(std::string("key '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

long require_integer(const json& obj, const char* key) {
  const json& v = require_key(obj, key);
  if (!v.is_number_integer()) {
    throw StructuralError(std::string("key '") + key + "' must be an integer");
  }
  return v.get<long>();
}

Eigen::VectorXd require_number_array(const json& obj, const char* key) {
  const json& v = require_key(obj, key);
  if (!v.is_array()) {
    throw StructuralError(std::string("key '") + key + "' must be an array");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const json& e : v) {
    if (!e.is_number()) {
      throw StructuralError(std::string("key '") + key +
                            "' must contain only numbers");
    }
    double d = e.get<double>();
    if (!std::isfinite(d)) {
      throw StructuralError(std::string("key '") + key +
                            "' must contain finite numbers");
    }
    out[i++] = d;
  }
  return out;
}

}  // namespace

std::string record_to_json(const ExperimentRecord& record) {
  std::string out = "{\"id\":";
  append_escaped(out, record.id);
  out += ",\"curve_id\":";
  append_escaped(out, record.curve_id);
  out += ",\"backend\":";
  append_escaped(out, record.backend);
  out += ",\"lambdas\":";
  append_vector(out, record.lambdas);
  out += ",\"expectations\":";
  append_vector(out, record.expectations);
  out += ",\"ideal\":";
  out += format_double(record.ideal);
  out += ",\"repetition\":";
  out += std::to_string(record.repetition);
  out += ",\"shots\":";
  out += std::to_string(record.shots);
  out += ",\"meta\":{";
  bool first = true;
  for (const auto& [key, value] : record.meta) {
    if (!first) out += ',';
    first = false;
    append_escaped(out, key);
    out += ':';
    append_escaped(out, value);
  }
  out += "}}";
  return out;
}

ExperimentRecord record_from_json(const std::string& text) {
  json obj = json::parse(text);
  if (!obj.is_object()) throw StructuralError("record line must be an object");

  ExperimentRecord rec;
  rec.id = require_string(obj, "id");
  rec.curve_id = require_string(obj, "curve_id");
  rec.backend = require_string(obj, "backend");
  rec.lambdas = require_number_array(obj, "lambdas");
  rec.expectations = require_number_array(obj, "expectations");
  rec.ideal = require_finite_number(obj, "ideal");
  rec.repetition = static_cast<int>(require_integer(obj, "repetition"));
  rec.shots = require_integer(obj, "shots");
  if (obj.contains("meta")) {
    const json& meta = obj["meta"];
    if (!meta.is_object()) throw StructuralError("key 'meta' must be an object");
    for (auto it = meta.begin(); it != meta.end(); ++it) {
      if (!it.value().is_string()) {
        throw StructuralError("meta values must be strings");
      }
      rec.meta[it.key()] = it.value().get<std::string>();
    }
  }

  if (rec.id.empty()) throw StructuralError("record id must be non-empty");
  if (rec.shots < 1) throw StructuralError("shots must be >= 1");
  if (rec.repetition < 0) throw StructuralError("repetition must be >= 0");
  if (rec.ideal < -1.0 || rec.ideal > 1.0) {
    throw StructuralError("ideal must lie in [-1, 1]");
  }
  for (Eigen::Index i = 0; i < rec.expectations.size(); ++i) {
    if (rec.expectations[i] < -1.0 || rec.expectations[i] > 1.0) {
      throw StructuralError("expectations must lie in [-1, 1]");
    }
  }
  // Delegates the lambda checks (>= 1, pairwise distinct) to the series
  // invariants.
  ScaleSeries validation(rec.lambdas, rec.expectations);
  return rec;
}

std::vector<ExperimentRecord> read_dataset(const std::string& path) {
  std::vector<ExperimentRecord> records;
  for_each_line(path, [&](const std::string& line) {
    records.push_back(record_from_json(line));
  });
  return records;
}

void write_dataset(const std::string& path,
                   const std::vector<ExperimentRecord>& records) {
  std::ofstream out = open_for_write(path);
  for (const ExperimentRecord& rec : records) {
    out << record_to_json(rec) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string result_row_to_json(const ResultRow& row) {
  std::string out = "{\"record_id\":";
  append_escaped(out, row.record_id);
  out += ",\"spec\":";
  append_escaped(out, row.spec);
  out += ",\"family\":";
  append_escaped(out, row.family_key);
  out += ",\"bounded\":";
  out += row.bounded ? "true" : "false";
  out += ",\"lambda_set\":";
  append_escaped(out, row.lambda_key);
  out += ",\"backend\":";
  append_escaped(out, row.backend);
  out += ",\"width\":";
  append_escaped(out, row.width);
  out += ",\"ideal\":";
  out += format_double(row.ideal);
  out += ",\"status\":";
  append_escaped(out, to_string(row.status));
  if (row.zne) {
    out += ",\"zne\":";
    out += format_double(*row.zne);
  }
  if (row.sse) {
    out += ",\"sse\":";
    out += format_double(*row.sse);
  }
  out += ",\"starts_used\":";
  out += std::to_string(row.starts_used);
  out += '}';
  return out;
}

void write_results(const std::string& path,
                   const std::vector<ResultRow>& rows) {
  std::ofstream out = open_for_write(path);
  for (const ResultRow& row : rows) {
    out << result_row_to_json(row) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<ResultRow> read_results(const std::string& path) {
  std::vector<ResultRow> rows;
  for_each_line(path, [&](const std::string& line) {
    json obj = json::parse(line);
    if (!obj.is_object()) throw StructuralError("result line must be an object");
    ResultRow row;
    row.record_id = require_string(obj, "record_id");
    row.spec = require_string(obj, "spec");
    row.family_key = require_string(obj, "family");
    const json& bounded = require_key(obj, "bounded");
    if (!bounded.is_boolean()) {
      throw StructuralError("key 'bounded' must be a boolean");
    }
    row.bounded = bounded.get<bool>();
    row.lambda_key = require_string(obj, "lambda_set");
    row.backend = require_string(obj, "backend");
    row.width = require_string(obj, "width");
    row.ideal = require_finite_number(obj, "ideal");
    row.status = fit_status_from_string(require_string(obj, "status"));
    if (obj.contains("zne")) row.zne = require_finite_number(obj, "zne");
    if (obj.contains("sse")) row.sse = require_finite_number(obj, "sse");
    row.starts_used = static_cast<int>(require_integer(obj, "starts_used"));
    rows.push_back(std::move(row));
  });
  return rows;
}

std::string fit_result_to_json(const FitResult& result) {
  std::string out = "{\"spec\":";
  append_escaped(out, spec_id(result.spec));
  out += ",\"status\":";
  append_escaped(out, to_string(result.status));
  if (result.zne_estimate) {
    out += ",\"zne\":";
    out += format_double(*result.zne_estimate);
  }
  if (result.sse) {
    out += ",\"sse\":";
    out += format_double(*result.sse);
  }
  if (result.params) {
    out += ",\"params\":";
    append_vector(out, result.params->values);
    if (result.spec.family == ModelFamily::PolyExp && !result.spec.bounded) {
      out += ",\"sign\":";
      out += std::to_string(result.params->sign);
    }
  }
  out += ",\"starts_used\":";
  out += std::to_string(result.starts_used);
  out += ",\"settings\":{\"max_iterations\":";
  out += std::to_string(result.solver_settings.max_iterations);
  out += ",\"gradient_tolerance\":";
  out += format_double(result.solver_settings.gradient_tolerance);
  out += ",\"objective_rel_tolerance\":";
  out += format_double(result.solver_settings.objective_rel_tolerance);
  out += ",\"memory_pairs\":";
  out += std::to_string(result.solver_settings.memory_pairs);
  out += "}}";
  return out;
}

namespace {

std::string mean_sd_cell(const std::optional<MeanSd>& value) {
  if (!value) return "-";
  return format_mean_sd(value->mean, value->sd);
}

}  // namespace

void write_summary(const std::string& path,
                   const std::vector<PairedGroupSummary>& groups) {
  std::ofstream out = open_for_write(path);
  out << "family\tlambda_set\tbackend\twidth\tk\tmax_count\t"
         "coverage_bounded\tcoverage_unbounded\tcoverage_matched\t"
         "mae_bounded\tmae_unbounded\tmse_bounded\tmse_unbounded\t"
         "wilcoxon_p\tholm_p\tcohens_d\teffect\tsignificant\n";
  for (const PairedGroupSummary& g : groups) {
    out << g.key.family_key << '\t' << g.key.lambda_key << '\t'
        << g.key.backend << '\t' << g.key.width << '\t'
        << g.coverage.matched_count << '\t' << g.coverage.max_count << '\t'
        << format_percent(g.coverage.bounded_rate) << '\t'
        << format_percent(g.coverage.unbounded_rate) << '\t'
        << format_percent(g.coverage.matched_rate) << '\t'
        << mean_sd_cell(g.mae_bounded) << '\t'
        << mean_sd_cell(g.mae_unbounded) << '\t'
        << mean_sd_cell(g.mse_bounded) << '\t'
        << mean_sd_cell(g.mse_unbounded) << '\t'
        << (g.wilcoxon ? format_scientific_2sig(g.wilcoxon->p_value) : "-")
        << '\t' << (g.p_holm ? format_scientific_2sig(*g.p_holm) : "-")
        << '\t' << (g.effect.d ? format_scientific_2sig(*g.effect.d) : "-")
        << '\t' << to_string(g.effect.category) << '\t'
        << (g.significant ? "yes" : "no") << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_deltas(const std::string& path,
                  const std::vector<PairedGroupSummary>& groups) {
  std::ofstream out = open_for_write(path);
  for (const PairedGroupSummary& g : groups) {
    std::string line = "{\"family\":";
    append_escaped(line, g.key.family_key);
    line += ",\"lambda_set\":";
    append_escaped(line, g.key.lambda_key);
    line += ",\"backend\":";
    append_escaped(line, g.key.backend);
    line += ",\"width\":";
    append_escaped(line, g.key.width);
    line += ",\"k\":";
    line += std::to_string(g.deltas.size());
    line += ",\"delta\":[";
    for (std::size_t i = 0; i < g.deltas.size(); ++i) {
      if (i > 0) line += ',';
      line += format_double(g.deltas[i]);
    }
    line += "]}";
    out << line << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<DeltaGroup> read_deltas(const std::string& path) {
  std::vector<DeltaGroup> groups;
  for_each_line(path, [&](const std::string& line) {
    json obj = json::parse(line);
    if (!obj.is_object()) throw StructuralError("delta line must be an object");
    DeltaGroup g;
    g.key.family_key = require_string(obj, "family");
    g.key.lambda_key = require_string(obj, "lambda_set");
    g.key.backend = require_string(obj, "backend");
    g.key.width = require_string(obj, "width");
    long k = require_integer(obj, "k");
    Eigen::VectorXd deltas = require_number_array(obj, "delta");
    if (k != deltas.size()) {
      throw StructuralError("declared k does not match the delta count");
    }
    g.deltas.assign(deltas.data(), deltas.data() + deltas.size());
    groups.push_back(std::move(g));
  });
  return groups;
}

}  // namespace zne
