// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstdio>
#include <sstream>
#include <string>

#include "rfood/error.hpp"
#include "rfood/experiment.hpp"

namespace rfood {

namespace {

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("grid: cannot parse number '" + s + "'");
  }
}

std::vector<double> unit_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::AlphaBeta: return "alpha_beta";
    case SweepKind::Lambda: return "lambda";
    case SweepKind::Snr: return "snr";
    case SweepKind::OodHoldout: return "ood_holdout";
  }
  return "unknown";
}

SweepKind parse_sweep_kind(std::string_view name) {
  for (auto k : {SweepKind::AlphaBeta, SweepKind::Lambda, SweepKind::Snr, SweepKind::OodHoldout})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown sweep kind '" + std::string(name) + "'");
}

std::vector<GridPoint> default_grid(SweepKind kind, const SynthConfig& data) {
  std::vector<GridPoint> grid;
  switch (kind) {
    case SweepKind::AlphaBeta:
      for (double a : unit_grid())
        for (double b : unit_grid()) grid.emplace_back(std::pair{a, b});
      break;
    case SweepKind::Lambda:
      for (double l : unit_grid()) grid.emplace_back(l);
      break;
    case SweepKind::Snr:
      for (double s : snr_grid()) grid.emplace_back(s);
      break;
    case SweepKind::OodHoldout:
      for (auto k : data.ood_kinds) grid.emplace_back(k);
      break;
  }
  return grid;
}

std::vector<GridPoint> parse_grid(SweepKind kind, std::string_view text, const SynthConfig& data) {
  if (text == "default") return default_grid(kind, data);
  std::vector<GridPoint> grid;
  if (text.empty()) throw ConfigError("grid: empty grid");
  for (const auto& item : split_list(text, ',')) {
    if (item.empty()) throw ConfigError("grid: empty grid point");
    switch (kind) {
      case SweepKind::AlphaBeta: {
        const auto parts = split_list(item, ':');
        if (parts.size() != 2) throw ConfigError("grid: alpha_beta points are 'alpha:beta'");
        grid.emplace_back(std::pair{parse_number(parts[0]), parse_number(parts[1])});
        break;
      }
      case SweepKind::Lambda:
      case SweepKind::Snr: grid.emplace_back(parse_number(item)); break;
      case SweepKind::OodHoldout: grid.emplace_back(parse_ood_kind(item)); break;
    }
  }
  return grid;
}

std::string format_point(const GridPoint& point) {
  if (const auto* v = std::get_if<double>(&point)) return fixed6(*v);
  if (const auto* p = std::get_if<std::pair<double, double>>(&point))
    return fixed6(p->first) + ":" + fixed6(p->second);
  return std::string(to_string(std::get<OodKind>(point)));
}

std::vector<SweepRow> sweep(SweepKind kind, std::span<const GridPoint> grid,
                            const SynthConfig& data, const PipelineConfig& base) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  std::vector<SweepRow> rows;
  const auto point_kind_ok = [&](const GridPoint& p) {
    switch (kind) {
      case SweepKind::AlphaBeta: return std::holds_alternative<std::pair<double, double>>(p);
      case SweepKind::Lambda:
      case SweepKind::Snr: return std::holds_alternative<double>(p);
      case SweepKind::OodHoldout: return std::holds_alternative<OodKind>(p);
    }
    return false;
  };
  for (const auto& p : grid)
    if (!point_kind_ok(p)) throw ConfigError("sweep: grid point type does not match kind");

  if (kind == SweepKind::AlphaBeta || kind == SweepKind::Lambda) {
    const auto manifest = make_dataset(data);
    const auto features = build_features(manifest, SynthSource(data), base);
    for (const auto& p : grid) {
      PipelineConfig cfg = base;
      if (kind == SweepKind::AlphaBeta) {
        const auto& [a, b] = std::get<std::pair<double, double>>(p);
        cfg.selection.alpha = a;
        cfg.selection.beta = b;
      } else {
        cfg.fusion.lambda = std::get<double>(p);
      }
      rows.push_back({format_point(p), evaluate(features, cfg).metrics});
    }
    return rows;
  }
  for (const auto& p : grid) {
    SynthConfig d = data;
    if (kind == SweepKind::Snr) d.snr_db = {std::get<double>(p)};
    else d.ood_kinds = {std::get<OodKind>(p)};
    const auto manifest = make_dataset(d);
    rows.push_back({format_point(p), run_experiment(manifest, SynthSource(d), base).metrics});
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows, const nlohmann::json& seeds) {
  std::ostringstream out;
  out << "# seeds: " << seeds.dump() << "\n";
  out << "point,accuracy,recall,f1,auroc,wem,closed_set_accuracy\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << r.point << ',' << fixed6(m.accuracy) << ',' << fixed6(m.recall) << ','
        << fixed6(m.f1) << ',' << fixed6(m.auroc) << ',' << fixed6(m.wem) << ','
        << fixed6(m.closed_set_accuracy) << "\n";
  }
  return out.str();
}

}  // namespace rfood
