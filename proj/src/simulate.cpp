#include "tpaug/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tpaug/errors.hpp"

namespace tpaug {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double pct(double v, double ref) { return ref > 0.0 ? 100.0 * v / ref : 0.0; }

std::string row_label(Method m, Selection s) {
  return std::string(to_string(m)) + "/" + std::string(to_string(s));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  if (cfg.runs < 1) throw ArgumentError("runs must be >= 1");
  if (cfg.train_situations < 2 || cfg.validation_situations < 1) {
    throw ArgumentError("need >= 2 training and >= 1 validation situations");
  }
  SimulationResult out;
  out.config = cfg;

  const DatasetFile all = generate_2d_task(cfg.train_situations + cfg.validation_situations,
                                           cfg.samples_per_demo, cfg.seed);
  std::vector<Demonstration> train(all.demos.begin(), all.demos.begin() + cfg.train_situations);
  std::vector<Demonstration> validation(all.demos.begin() + cfg.train_situations, all.demos.end());
  out.train = DatasetFile::from_demos(train);
  out.validation = DatasetFile::from_demos(validation);

  EmConfig em = default_em_config(Mode::TimeBased);
  em.seed = derive_seed(cfg.seed, 0);
  out.initial_model = fit(train, cfg.components, em);
  out.initial_train_cost = selection_cost(out.initial_model, train).mean;
  out.initial_validation_cost = selection_cost(out.initial_model, validation).mean;

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (std::size_t si = 0; si < cfg.selections.size(); ++si) {
      SimulationRow row;
      row.method = cfg.methods[mi];
      row.selection = cfg.selections[si];
      const std::uint64_t stream =
          static_cast<std::uint64_t>(row.method) * 2 + static_cast<std::uint64_t>(row.selection) + 1;
      double best_cost = std::numeric_limits<double>::infinity();
      for (int r = 0; r < cfg.runs; ++r) {
        AugmentConfig ac;
        ac.method = row.method;
        ac.selection = row.selection;
        ac.max_demos = cfg.max_demos;
        ac.max_iters = cfg.max_iters;
        ac.snr_db = cfg.snr_db;
        ac.components = cfg.components;
        ac.seed = derive_seed(derive_seed(cfg.seed, stream), static_cast<std::uint64_t>(r));
        ac.em = em;
        AugmentResult res = run_augmentation(train, validation, ac);

        RunOutcome o;
        o.train_cost = selection_cost(res.model, train).mean;
        o.validation_cost = selection_cost(res.model, validation).mean;
        o.accepted = static_cast<int>(res.dataset.size()) - cfg.train_situations;
        o.log = std::move(res.log);
        if (o.log.final_cost < best_cost) {
          best_cost = o.log.final_cost;
          row.best_run = row.runs.size();
          row.best_model = res.model;
        }
        row.runs.push_back(std::move(o));
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::string format_cost_table(const SimulationResult& result) {
  std::ostringstream t;
  t << "method,selection,training_cost,training_pct,validation_cost,validation_pct,"
       "median_training_pct,median_validation_pct,mean_accepted\n";
  const double it = result.initial_train_cost;
  const double iv = result.initial_validation_cost;
  for (const auto& row : result.rows) {
    const auto& best = row.runs[row.best_run];
    std::vector<double> tr, va;
    double acc = 0.0;
    for (const auto& r : row.runs) {
      tr.push_back(pct(r.train_cost, it));
      va.push_back(pct(r.validation_cost, iv));
      acc += r.accepted;
    }
    t << to_string(row.method) << ',' << to_string(row.selection) << ',' << fixed(best.train_cost) << ','
      << fixed(pct(best.train_cost, it), 1) << ',' << fixed(best.validation_cost) << ','
      << fixed(pct(best.validation_cost, iv), 1) << ',' << fixed(median(tr), 1) << ','
      << fixed(median(va), 1) << ',' << fixed(acc / static_cast<double>(row.runs.size()), 2) << '\n';
  }
  t << "initial,-," << fixed(it) << ",100.0," << fixed(iv) << ",100.0,100.0,100.0,0.00\n";
  return t.str();
}

std::string format_run_table(const SimulationResult& result) {
  std::ostringstream t;
  t << "method,selection,run,accepted,iterations,selection_cost,training_cost,validation_cost\n";
  for (const auto& row : result.rows) {
    for (std::size_t r = 0; r < row.runs.size(); ++r) {
      const auto& o = row.runs[r];
      t << to_string(row.method) << ',' << to_string(row.selection) << ',' << r << ',' << o.accepted << ','
        << o.log.iterations.size() << ',' << fixed(o.log.final_cost) << ',' << fixed(o.train_cost) << ','
        << fixed(o.validation_cost) << '\n';
    }
  }
  return t.str();
}

namespace {

struct Curve {
  std::string split;
  int situation;
  std::string label;
  Eigen::MatrixXd positions;
};

std::vector<Curve> collect_curves(const SimulationResult& result) {
  std::vector<Curve> curves;
  auto add_split = [&](const std::string& split, const DatasetFile& data) {
    for (std::size_t i = 0; i < data.demos.size(); ++i) {
      const auto& demo = data.demos[i];
      const int idx = static_cast<int>(i);
      curves.push_back({split, idx, "expert", demo.positions()});
      curves.push_back({split, idx, "initial", reproduce_like(result.initial_model, demo)});
      for (const auto& row : result.rows) {
        curves.push_back({split, idx, row_label(row.method, row.selection),
                          reproduce_like(row.best_model, demo)});
      }
    }
  };
  add_split("train", result.train);
  add_split("validation", result.validation);
  return curves;
}

}  // namespace

std::string format_trajectories(const SimulationResult& result) {
  std::ostringstream t;
  t << "split,situation,model,step,x,y\n";
  for (const auto& c : collect_curves(result)) {
    for (Eigen::Index i = 0; i < c.positions.rows(); ++i) {
      t << c.split << ',' << c.situation << ',' << c.label << ',' << i << ',' << fixed(c.positions(i, 0))
        << ',' << fixed(c.positions(i, 1)) << '\n';
    }
  }
  return t.str();
}

std::string render_svg(const SimulationResult& result) {
  const auto curves = collect_curves(result);
  const int n_panels = static_cast<int>(result.train.demos.size() + result.validation.demos.size());
  constexpr double kPanel = 260.0;
  constexpr double kPad = 20.0;

  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const auto& c : curves) {
    lo_x = std::min(lo_x, c.positions.col(0).minCoeff());
    hi_x = std::max(hi_x, c.positions.col(0).maxCoeff());
    lo_y = std::min(lo_y, c.positions.col(1).minCoeff());
    hi_y = std::max(hi_y, c.positions.col(1).maxCoeff());
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double scale = (kPanel - 2 * kPad) / span;

  const char* palette[] = {"#d62728", "#2ca02c", "#17becf", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n_panels * kPanel << "\" height=\""
      << kPanel + 30 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (const auto& c : curves) {
    const int panel = (c.split == "train" ? 0 : static_cast<int>(result.train.demos.size())) + c.situation;
    std::string color = "#1f77b4";
    std::string dash;
    if (c.label == "initial") {
      color = "#000000";
      dash = " stroke-dasharray=\"4 3\"";
    } else if (c.label != "expert") {
      std::size_t idx = 0;
      for (std::size_t r = 0; r < result.rows.size(); ++r) {
        if (row_label(result.rows[r].method, result.rows[r].selection) == c.label) idx = r;
      }
      color = palette[idx % std::size(palette)];
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << (c.label == "expert" ? 2.5 : 1.2) << "\"" << dash << " points=\"";
    for (Eigen::Index i = 0; i < c.positions.rows(); ++i) {
      const double x = panel * kPanel + kPad + (c.positions(i, 0) - lo_x) * scale;
      const double y = kPanel - kPad - (c.positions(i, 1) - lo_y) * scale;
      svg << fixed(x, 2) << ',' << fixed(y, 2) << ' ';
    }
    svg << "\"><title>" << c.split << ' ' << c.situation << ' ' << c.label << "</title></polyline>\n";
  }
  for (int p = 0; p < n_panels; ++p) {
    const bool is_train = p < static_cast<int>(result.train.demos.size());
    svg << "<text x=\"" << p * kPanel + kPad << "\" y=\"" << kPanel + 18 << "\">"
        << (is_train ? "train " : "validation ")
        << (is_train ? p : p - static_cast<int>(result.train.demos.size())) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_simulation(const SimulationResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file_atomic(dir / "cost_table.csv", format_cost_table(result));
  write_file_atomic(dir / "runs.csv", format_run_table(result));
  write_file_atomic(dir / "trajectories.csv", format_trajectories(result));
  write_file_atomic(dir / "reproductions.svg", render_svg(result));
}

}  // namespace tpaug
