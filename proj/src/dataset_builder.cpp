#include "stcorpus/dataset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "stcorpus/errors.hpp"

namespace stcorpus {

Thresholds FilterPolicy::thresholds_for(LangCode lang) const {
  if (auto it = per_language_overrides.find(lang); it != per_language_overrides.end()) return it->second;
  return {sigma_min, tau_min};
}

void FilterPolicy::validate() const {
  auto check = [](const Thresholds& t, std::string_view where) {
    if (!(t.sigma_min >= -1.0 && t.sigma_min <= 1.0))
      throw ConfigError(std::string(where) + ": sigma_min must lie in [-1, 1]");
    if (!(t.tau_min >= 0.0 && t.tau_min <= 1.0)) throw ConfigError(std::string(where) + ": tau_min must lie in [0, 1]");
  };
  check({sigma_min, tau_min}, "filter policy");
  for (const auto& [lang, t] : per_language_overrides) check(t, "override for " + std::string(lang.str()));
}

std::map<LangCode, Thresholds> parse_overrides(std::string_view json_text, Thresholds defaults) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("overrides: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("overrides must be a JSON object");
  std::map<LangCode, Thresholds> out;
  for (const auto& [code, v] : j.items()) {
    if (!LangCode::is_registered(code)) throw ConfigError("overrides: unknown language '" + code + "'");
    if (!v.is_object()) throw ConfigError("overrides: entry for " + code + " must be an object");
    Thresholds t = defaults;
    for (const auto& [key, x] : v.items()) {
      if (!x.is_number()) throw ConfigError("overrides: " + code + "." + key + " must be a number");
      if (key == "sigma_min")
        t.sigma_min = x.get<double>();
      else if (key == "tau_min")
        t.tau_min = x.get<double>();
      else
        throw ConfigError("overrides: unknown key " + code + "." + key);
    }
    out[LangCode::parse(code)] = t;
  }
  return out;
}

std::string format_overrides(const std::map<LangCode, Thresholds>& overrides) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [lang, t] : overrides)
    j[std::string(lang.str())] = nlohmann::ordered_json{{"sigma_min", t.sigma_min}, {"tau_min", t.tau_min}};
  return j.dump(2) + "\n";
}

namespace {

void push(Manifest& out, const Manifest& in, std::size_t i) {
  out.records.push_back(in.records[i]);
  if (!in.source_lines.empty()) out.source_lines.push_back(in.source_lines[i]);
}

}  // namespace

FilterResult filter_manifest(const Manifest& m, const FilterPolicy& policy) {
  policy.validate();
  FilterResult r;
  r.kept.split = r.dropped.split = m.split;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& rec = m.records[i];
    bool keep;
    if (!rec.scores) {
      if (rec.provenance == Provenance::mined)
        throw ValidationError("sigma", "mined record without scores", m.source_lines.empty() ? 0 : m.source_lines[i]);
      keep = true;
    } else {
      const auto t = policy.thresholds_for(rec.direction.indic());
      keep = rec.scores->sigma >= t.sigma_min && rec.scores->tau >= t.tau_min;
    }
    push(keep ? r.kept : r.dropped, m, i);
  }
  return r;
}

void SampleSpec::validate() const {
  if (!(target_seconds > 0.0) || !std::isfinite(target_seconds))
    throw ConfigError("target_seconds must be a positive number");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SampleResult sample_test_set(const Manifest& m, const SampleSpec& spec) {
  spec.validate();
  const std::int64_t target_us = to_micros(spec.target_seconds);

  std::map<std::pair<LangCode, LangCode>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& d = m.records[i].direction;
    groups[{d.source, d.target}].push_back(i);
  }

  SampleResult r;
  r.test.split = Split::test;
  r.train.split = Split::train;
  std::vector<bool> in_test(m.records.size(), false);
  for (auto& [key, idx] : groups) {
    const std::string name = std::string(key.first.str()) + "-" + std::string(key.second.str());
    std::mt19937_64 rng(spec.seed ^ fnv1a64(name));
    std::vector<std::size_t> order = idx;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[bounded_draw(rng, k)]);

    GroupReport g;
    g.direction = m.records[idx.front()].direction;
    g.records = idx.size();
    std::int64_t total_us = 0, test_us = 0;
    for (auto i : idx) total_us += to_micros(m.records[i].duration());
    for (auto i : order) {
      if (test_us >= target_us) break;
      in_test[i] = true;
      test_us += to_micros(m.records[i].duration());
      ++g.test_records;
    }
    g.total_seconds = static_cast<double>(total_us) / 1e6;
    g.test_seconds = static_cast<double>(test_us) / 1e6;
    g.saturated = g.test_records == g.records;
    if (g.saturated)
      r.warnings.push_back(name + ": group holds " + std::to_string(g.total_seconds) + " s for a target of " +
                           std::to_string(spec.target_seconds) + " s; whole group assigned to test");
    r.groups.push_back(g);
  }
  for (std::size_t i = 0; i < m.records.size(); ++i) push(in_test[i] ? r.test : r.train, m, i);
  return r;
}

std::string format_sample_report(const SampleResult& r) {
  nlohmann::ordered_json j;
  j["test_records"] = r.test.records.size();
  j["train_records"] = r.train.records.size();
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : r.groups) {
    j["groups"].push_back({{"src_lang", std::string(g.direction.source.str())},
                           {"tgt_lang", std::string(g.direction.target.str())},
                           {"records", g.records},
                           {"test_records", g.test_records},
                           {"total_seconds", g.total_seconds},
                           {"test_seconds", g.test_seconds},
                           {"saturated", g.saturated}});
  }
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string format_hours(std::int64_t micros) {
  constexpr std::int64_t kPerHundredth = 36'000'000;  // microseconds in 0.01 h
  const bool neg = micros < 0;
  const std::int64_t a = neg ? -micros : micros;
  std::int64_t q = a / kPerHundredth;
  const std::int64_t rem = a % kPerHundredth;
  if (2 * rem > kPerHundredth || (2 * rem == kPerHundredth && q % 2 == 1)) ++q;
  std::string frac = std::to_string(q % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (neg && q != 0 ? "-" : "") + std::to_string(q / 100) + "." + frac;
}

std::string StatsColumn::label() const {
  return direction + "/" + std::string(to_string(provenance)) + "/" + std::string(to_string(split));
}

StatsTable stats_report(std::span<const Manifest> manifests) {
  std::map<LangCode, std::map<StatsColumn, StatsCell>> acc;
  std::map<StatsColumn, bool> seen;
  for (const auto& m : manifests) {
    for (const auto& rec : m.records) {
      StatsColumn c{std::string(rec.direction.label()), rec.provenance, m.split};
      acc[rec.direction.indic()][c] += StatsCell{to_micros(rec.duration()), 1};
      seen[c] = true;
    }
  }
  StatsTable t;
  for (const auto& [c, _] : seen) t.columns.push_back(c);
  t.column_totals.assign(t.columns.size(), {});
  for (const auto& [lang, row] : acc) {
    t.languages.push_back(lang);
    std::vector<StatsCell> cells(t.columns.size());
    StatsCell total;
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
      if (auto it = row.find(t.columns[k]); it != row.end()) cells[k] = it->second;
      total += cells[k];
      t.column_totals[k] += cells[k];
    }
    t.cells.push_back(std::move(cells));
    t.row_totals.push_back(total);
    t.grand_total += total;
  }
  return t;
}

namespace {

std::vector<std::vector<std::string>> stats_rows(const StatsTable& t) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"language"};
  for (const auto& c : t.columns) {
    header.push_back(c.label() + ":hours");
    header.push_back(c.label() + ":utterances");
  }
  header.push_back("total:hours");
  header.push_back("total:utterances");
  rows.push_back(std::move(header));

  auto line = [](std::string name, const std::vector<StatsCell>& cells, const StatsCell& total) {
    std::vector<std::string> r{std::move(name)};
    for (const auto& c : cells) {
      r.push_back(format_hours(c.micros));
      r.push_back(std::to_string(c.utterances));
    }
    r.push_back(format_hours(total.micros));
    r.push_back(std::to_string(total.utterances));
    return r;
  };
  for (std::size_t i = 0; i < t.languages.size(); ++i)
    rows.push_back(line(std::string(t.languages[i].str()), t.cells[i], t.row_totals[i]));
  rows.push_back(line("total", t.column_totals, t.grand_total));
  return rows;
}

}  // namespace

std::string stats_csv(const StatsTable& t) {
  std::string out;
  for (const auto& row : stats_rows(t)) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      out += row[k];
    }
    out += '\n';
  }
  return out;
}

std::string stats_text(const StatsTable& t) {
  const auto rows = stats_rows(t);
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) line += "  ";
      const std::string pad(width[k] - row[k].size(), ' ');
      line += k == 0 ? row[k] + pad : pad + row[k];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

}  // namespace stcorpus
