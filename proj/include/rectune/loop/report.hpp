#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "rectune/loop/loop.hpp"

namespace rectune::loop {

struct ReportRow {
  int round = 0;
  std::size_t arm_count = 0;
  std::optional<double> best_utility;
  std::string best_task;
  std::string best_config;
  std::optional<ab::MetricReport> results;
};

struct EliteRow {
  std::string task_id;
  double utility = 0.0;
  std::string config;
  std::map<std::string, double> adjusted;
};

struct ReportData {
  std::string skill;
  std::vector<std::string> metrics;  // north-star metrics in declaration order
  std::vector<ReportRow> rounds;
  std::vector<EliteRow> elites;

  bool empty() const noexcept { return rounds.empty(); }
};

inline ReportData collect_report(const fs::path& root) {
  const Workdir wd{root};
  const RunManifest m = load_manifest(root);
  const auto skill = skills::SkillRepository(wd.skills()).latest(m.skill);
  const auto store = mem::MemoryStore::open_reader(wd.memory(m.skill));
  ReportData d;
  d.skill = m.skill;
  d.metrics = skill.north_star.metric_names();
  for (const auto& r : m.rounds) {
    ReportRow row{r.round, r.arm_count, r.best_utility, r.best_task_id.value_or(""), "", std::nullopt};
    if (r.best_task_id && store.has_task(*r.best_task_id)) {
      const auto t = store.read_task(*r.best_task_id);
      row.best_config = t.config;
      row.results = t.results;
    }
    d.rounds.push_back(std::move(row));
  }
  for (const auto& e : store.read_archive().entries)
    d.elites.push_back({e.task_id, e.utility, store.read_task(e.task_id).config, e.adjusted});
  return d;
}

namespace detail {

// Shortest round-trip decimal, shared by both formats so they agree exactly.
inline std::string num(double v) { return json(v).dump(); }

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

struct Cell {
  std::string delta, p, sig;
};

inline Cell cell(const ReportRow& r, const std::string& metric) {
  if (!r.results) return {};
  auto it = r.results->find(metric);
  if (it == r.results->end()) return {};
  return {opt_num(it->second.relative_delta_pct), num(it->second.p_value), it->second.significant ? "yes" : "no"};
}

inline std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace detail

inline std::string render_markdown(const ReportData& d) {
  std::ostringstream out;
  out << "# Tuning report: " << d.skill << "\n\n";
  if (d.empty()) {
    out << "No completed rounds yet.\n";
    return out.str();
  }
  out << "## Rounds\n\n| Round | Arms | Best utility | Best task |";
  for (const auto& m : d.metrics) out << " " << m << " delta % | " << m << " p-value | " << m << " significant |";
  out << " Best config |\n|---|---|---|---|";
  for (std::size_t i = 0; i < d.metrics.size(); ++i) out << "---|---|---|";
  out << "---|\n";
  for (const auto& r : d.rounds) {
    out << "| " << r.round << " | " << r.arm_count << " | " << detail::opt_num(r.best_utility) << " | " << r.best_task
        << " |";
    for (const auto& m : d.metrics) {
      const auto c = detail::cell(r, m);
      out << " " << c.delta << " | " << c.p << " | " << c.sig << " |";
    }
    out << " `" << detail::md_escape(r.best_config) << "` |\n";
  }
  out << "\n## Elite archive\n\n";
  if (d.elites.empty()) {
    out << "No feasible completed tasks.\n";
    return out.str();
  }
  out << "| Rank | Task | Utility |";
  for (const auto& m : d.metrics) out << " " << m << " (adjusted) |";
  out << " Config |\n|---|---|---|";
  for (std::size_t i = 0; i < d.metrics.size(); ++i) out << "---|";
  out << "---|\n";
  for (std::size_t i = 0; i < d.elites.size(); ++i) {
    const auto& e = d.elites[i];
    out << "| " << i + 1 << " | " << e.task_id << " | " << detail::num(e.utility) << " |";
    for (const auto& m : d.metrics) {
      auto it = e.adjusted.find(m);
      out << " " << (it == e.adjusted.end() ? "" : detail::num(it->second)) << " |";
    }
    out << " `" << detail::md_escape(e.config) << "` |\n";
  }
  return out.str();
}

// RFC 4180: CRLF records, fields with comma, quote, CR or LF are quoted and
// embedded quotes doubled.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\r\n";
}

inline std::string render_rounds_csv(const ReportData& d) {
  std::vector<std::string> header{"round", "arm_count", "best_utility", "best_task"};
  for (const auto& m : d.metrics) {
    header.push_back(m + "_delta_pct");
    header.push_back(m + "_p_value");
    header.push_back(m + "_significant");
  }
  header.push_back("best_config");
  std::string out = csv_row(header);
  for (const auto& r : d.rounds) {
    std::vector<std::string> f{std::to_string(r.round), std::to_string(r.arm_count), detail::opt_num(r.best_utility),
                               r.best_task};
    for (const auto& m : d.metrics) {
      const auto c = detail::cell(r, m);
      f.insert(f.end(), {c.delta, c.p, c.sig});
    }
    f.push_back(r.best_config);
    out += csv_row(f);
  }
  return out;
}

inline std::string render_elites_csv(const ReportData& d) {
  std::vector<std::string> header{"rank", "task_id", "utility"};
  for (const auto& m : d.metrics) header.push_back(m + "_adjusted");
  header.push_back("config");
  std::string out = csv_row(header);
  for (std::size_t i = 0; i < d.elites.size(); ++i) {
    const auto& e = d.elites[i];
    std::vector<std::string> f{std::to_string(i + 1), e.task_id, detail::num(e.utility)};
    for (const auto& m : d.metrics) {
      auto it = e.adjusted.find(m);
      f.push_back(it == e.adjusted.end() ? "" : detail::num(it->second));
    }
    f.push_back(e.config);
    out += csv_row(f);
  }
  return out;
}

// Writes reports/report.md, or reports/rounds.csv + reports/elites.csv.
inline std::vector<fs::path> write_report(const fs::path& root, const std::string& format) {
  const Workdir wd{root};
  const ReportData d = collect_report(root);
  std::vector<fs::path> out;
  fs::create_directories(wd.reports());
  if (format == "md") {
    out.push_back(wd.reports() / "report.md");
    atomic_write_text(out.back(), render_markdown(d));
  } else if (format == "csv") {
    out.push_back(wd.reports() / "rounds.csv");
    atomic_write_text(out.back(), render_rounds_csv(d));
    out.push_back(wd.reports() / "elites.csv");
    atomic_write_text(out.back(), render_elites_csv(d));
  } else {
    throw ValidationError("format must be md or csv", "format");
  }
  return out;
}

}  // namespace rectune::loop
