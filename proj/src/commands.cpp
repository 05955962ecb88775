#include "cveval/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "cveval/errors.hpp"
#include "cveval/variance_components.hpp"

namespace cveval::io {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

const std::set<std::string> kBuiltinMetrics = {"rouge1", "rouge2", "rougeL",
                                               "bleu", "vecsim"};

double score_builtin(const DatasetRecord& rec, const std::string& metric,
                     const text::EmbeddingTable* emb) {
  const auto cand = text::tokenize(rec.output_text);
  if (rec.reference_texts.empty()) return 0.0;
  std::vector<text::TokenSequence> refs;
  refs.reserve(rec.reference_texts.size());
  for (const auto& r : rec.reference_texts) refs.push_back(text::tokenize(r));

  if (metric == "bleu") return text::bleu(cand, refs);

  double best = 0.0;
  for (const auto& ref : refs) {
    double s = 0.0;
    if (metric == "rouge1") s = text::rouge_n(cand, ref, 1);
    else if (metric == "rouge2") s = text::rouge_n(cand, ref, 2);
    else if (metric == "rougeL") s = text::rouge_l(cand, ref);
    else s = text::vec_sim(cand, ref, *emb);
    best = std::max(best, s);
  }
  return best;
}

struct JudgedSample {
  std::vector<std::size_t> record_index;  // judged record per sample point
  std::vector<double> y;
  std::vector<double> g;
  AnnotationTable table;  // one row per judged record, prompt-filtered
};

JudgedSample collect_judged(const std::vector<DatasetRecord>& records,
                            const std::vector<double>& g_std,
                            const std::string& prompt, bool per_judgment) {
  JudgedSample out;
  std::vector<AnnotationRow> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<double> vals;
    for (const auto& j : records[i].judgments)
      if (j.prompt == prompt) vals.push_back(j.value);
    if (vals.empty()) continue;
    if (per_judgment) {
      for (double v : vals) {
        out.record_index.push_back(i);
        out.y.push_back(v);
        out.g.push_back(g_std[i]);
      }
    } else {
      double m = 0.0;
      for (double v : vals) m += v;
      m /= static_cast<double>(vals.size());
      out.record_index.push_back(i);
      out.y.push_back(m);
      out.g.push_back(g_std[i]);
    }
    rows.push_back(AnnotationRow{records[i].key(), std::move(vals),
                                 g_std[i]});
  }
  out.table = AnnotationTable(std::move(rows));
  return out;
}

}  // namespace

std::vector<double> metric_values(const std::vector<DatasetRecord>& records,
                                  const std::string& metric,
                                  const text::EmbeddingTable* emb) {
  std::vector<double> out;
  out.reserve(records.size());
  const bool builtin = kBuiltinMetrics.count(metric) > 0;
  if (builtin && metric == "vecsim" && emb == nullptr)
    throw MissingField("metric 'vecsim' needs an embedding table");
  for (const auto& rec : records) {
    if (builtin) {
      out.push_back(score_builtin(rec, metric, emb));
    } else {
      const auto it = rec.precomputed_metrics.find(metric);
      if (it == rec.precomputed_metrics.end())
        throw MissingField("record (" + rec.item_id + ", " + rec.system_id +
                           ") lacks precomputed metric '" + metric + "'");
      out.push_back(it->second);
    }
  }
  return out;
}

EstimateResult run_estimate(const RunConfig& cfg) {
  const auto records = load_dataset(cfg.input);
  std::optional<text::EmbeddingTable> emb;
  if (!cfg.embeddings.empty())
    emb = text::EmbeddingTable::load_file(cfg.embeddings);
  const auto raw = metric_values(records, cfg.metric,
                                 emb ? &*emb : nullptr);
  const auto std_map = fit_standardization(raw);
  const auto g_std = std_map.apply(raw);

  const auto judged =
      collect_judged(records, g_std, cfg.prompt, cfg.per_judgment);
  if (judged.y.empty())
    throw NoJudgments("no judgments found for prompt '" + cfg.prompt + "'");

  PairedSample sample(judged.y, judged.g);
  EstimateResult res;
  res.metric = cfg.metric;
  res.prompt = cfg.prompt;
  res.n_records = records.size();
  res.n_sample = sample.size();
  res.level = cfg.level;
  res.replicates = cfg.bootstrap_replicates;
  res.seed = cfg.seed;
  res.cv = control_variates(sample);
  res.simple = sample_mean(sample.y);

  const BootstrapConfig bcfg{cfg.level, cfg.bootstrap_replicates, cfg.seed};
  res.ci_cv = bootstrap_ci(BootstrapEstimator::control_variates, sample, bcfg);
  res.ci_simple = bootstrap_ci(BootstrapEstimator::sample_mean, sample, bcfg);

  // variance components from the judged table; each stays absent when the
  // data cannot support it (no replicated judgments, a single item, ...)
  try {
    res.sigma_a2_hat = estimate_annotator_variance(judged.table);
  } catch (const NoReplicatedItems&) {
  }
  if (judged.table.n_items() >= 2) {
    res.sigma_f2_hat = estimate_human_metric_variance(
        judged.table, res.sigma_a2_hat.value_or(0.0));
    if (*res.sigma_f2_hat > 0.0) {
      if (res.sigma_a2_hat)
        res.gamma_hat = *res.sigma_a2_hat / *res.sigma_f2_hat;
      // Disattenuated correlation: item means carry annotator noise, so the
      // raw Pearson against g underestimates rho; cov(f_hat, g) is still an
      // unbiased alpha estimate, and the corrected sigma_f fixes the scale.
      std::vector<double> means;
      means.reserve(judged.table.n_items());
      for (const auto& r : judged.table.rows()) {
        double m = 0.0;
        for (double v : r.judgments) m += v;
        means.push_back(m / static_cast<double>(r.judgments.size()));
      }
      std::vector<double> g_items;
      for (const auto& r : judged.table.rows()) g_items.push_back(*r.metric);
      const auto ar = estimate_alpha_rho(means, g_items);
      double rho = ar.alpha / std::sqrt(*res.sigma_f2_hat);
      if (std::abs(rho) > 1.0) {
        rho = std::clamp(rho, -1.0, 1.0);
        res.rho_clamped = true;
      }
      res.rho_hat = rho;
      if (res.gamma_hat)
        res.de_theory = data_efficiency(rho, *res.gamma_hat);
    }
  }
  return res;
}

CorrelateResult run_correlate(const RunConfig& cfg) {
  const auto records = load_dataset(cfg.input);
  std::optional<text::EmbeddingTable> emb;
  if (!cfg.embeddings.empty())
    emb = text::EmbeddingTable::load_file(cfg.embeddings);
  const auto raw = metric_values(records, cfg.metric,
                                 emb ? &*emb : nullptr);

  // judged item means per system, in file order
  std::map<std::string, std::vector<std::size_t>> by_system;
  std::vector<std::optional<double>> human(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    double m = 0.0;
    std::size_t k = 0;
    for (const auto& j : records[i].judgments)
      if (j.prompt == cfg.prompt) {
        m += j.value;
        ++k;
      }
    if (k == 0) continue;
    human[i] = m / static_cast<double>(k);
    by_system[records[i].system_id].push_back(i);
  }
  if (by_system.empty())
    throw NoJudgments("no judgments found for prompt '" + cfg.prompt + "'");

  CorrelateResult res;
  std::vector<double> sys_metric, sys_human;
  bool any_degenerate = false;
  for (const auto& [system, idx] : by_system) {
    std::vector<double> xs, ys;
    for (std::size_t i : idx) {
      xs.push_back(raw[i]);
      ys.push_back(*human[i]);
      res.scatter.push_back(
          ScatterRow{records[i].item_id, system, raw[i], *human[i]});
    }
    double mx = 0.0, my = 0.0;
    for (double v : xs) mx += v;
    for (double v : ys) my += v;
    sys_metric.push_back(mx / static_cast<double>(xs.size()));
    sys_human.push_back(my / static_cast<double>(ys.size()));
    if (xs.size() < 2) continue;
    try {
      const auto rep = correlation_report(xs, ys, CorrelationLevel::instance);
      res.rows.push_back(CorrelationRow{"instance", system, cfg.metric,
                                        rep.pearson, rep.spearman, rep.n});
    } catch (const DegenerateInput&) {
      any_degenerate = true;  // constant metric or judgments for this system
    }
  }
  if (sys_metric.size() >= 2) {
    try {
      const auto rep =
          correlation_report(sys_metric, sys_human, CorrelationLevel::system);
      res.rows.push_back(CorrelationRow{"system", "*", cfg.metric, rep.pearson,
                                        rep.spearman, rep.n});
    } catch (const DegenerateInput&) {
      any_degenerate = true;  // per-system means happen to be constant
    }
  }
  if (res.rows.empty())
    throw DegenerateInput(any_degenerate
                              ? "all systems have constant metric or judgments"
                              : "need >= 2 judged items for a correlation");
  return res;
}

PlanResult run_plan(const RunConfig& cfg) {
  PlanResult res;
  res.params = TheoryParams::from_rho(0.0, cfg.plan_sigma_f2,
                                      cfg.plan_sigma_a2, cfg.plan_rho);
  res.target_variance = cfg.target_variance;
  res.n = plan_sample_size(res.params, cfg.target_variance);
  return res;
}

TrajectoryResult run_trajectory(const RunConfig& cfg) {
  const auto records = load_dataset(cfg.input);
  std::optional<text::EmbeddingTable> emb;
  if (!cfg.embeddings.empty())
    emb = text::EmbeddingTable::load_file(cfg.embeddings);
  const auto raw = metric_values(records, cfg.metric,
                                 emb ? &*emb : nullptr);
  const auto g_std = fit_standardization(raw).apply(raw);
  const auto judged =
      collect_judged(records, g_std, cfg.prompt, cfg.per_judgment);
  if (judged.y.empty())
    throw NoJudgments("no judgments found for prompt '" + cfg.prompt + "'");
  if (cfg.n_grid.empty())
    throw Error(ErrorKind::input, "trajectory needs a nonempty --n-grid");

  PairedSample sample(judged.y, judged.g);
  const BootstrapConfig bcfg{cfg.level, cfg.bootstrap_replicates, cfg.seed};
  TrajectoryResult res;
  res.points = trajectory(sample, cfg.n_grid, cfg.reps_per_n, bcfg);
  res.empirical_de = empirical_data_efficiency(res.points);

  std::string csv = "n,width_simple,width_cv\n";
  for (const auto& p : res.points)
    csv += std::to_string(p.n) + "," + fmt(p.width_simple) + "," +
           fmt(p.width_cv) + "\n";
  csv += "empirical_de," + fmt(res.empirical_de) + ",\n";
  res.csv = std::move(csv);
  if (!cfg.svg_out.empty()) res.svg = trajectory_svg(res.points);
  return res;
}

std::vector<MetricRow> run_metrics(const RunConfig& cfg) {
  const auto records = load_dataset(cfg.input);
  std::optional<text::EmbeddingTable> emb;
  if (!cfg.embeddings.empty())
    emb = text::EmbeddingTable::load_file(cfg.embeddings);
  const auto raw = metric_values(records, cfg.metric,
                                 emb ? &*emb : nullptr);
  std::vector<MetricRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    rows.push_back(MetricRow{records[i].item_id, records[i].system_id, raw[i]});
  return rows;
}

SimulateResult run_simulate(const SimulateConfig& cfg) {
  json rep;
  rep["config"] = {
      {"mu", cfg.world.mu},
      {"sigma_f2", cfg.world.sigma_f2},
      {"sigma_a2", cfg.world.sigma_a2},
      {"alpha", cfg.world.alpha},
      {"n", cfg.world.n},
      {"seed", cfg.world.seed},
      {"g_dist", cfg.world.g_dist == sim::GDistribution::gaussian
                     ? "gaussian"
                     : "centered_exponential"},
  };
  rep["replicates"] = cfg.replicates;
  const char* est_name =
      cfg.estimator == sim::WorldEstimator::sample_mean ? "sample_mean"
      : cfg.estimator == sim::WorldEstimator::control_variates
          ? "control_variates"
          : "control_variates_oracle";
  rep["estimator"] = est_name;

  bool ok = false;
  if (cfg.mode == SimulateConfig::Mode::variance) {
    auto check =
        sim::verify_estimator_variance(cfg.world, cfg.estimator, cfg.replicates);
    if (cfg.theory_override) {
      check.theory_var = *cfg.theory_override;
      check.rel_err = check.theory_var > 0.0
                          ? std::abs(check.empirical_var - check.theory_var) /
                                check.theory_var
                          : std::abs(check.empirical_var - check.theory_var);
    }
    ok = check.rel_err <= cfg.rel_err_tol;
    rep["mode"] = "variance";
    rep["empirical_mean"] = check.empirical_mean;
    rep["empirical_var"] = check.empirical_var;
    rep["empirical_se"] = check.empirical_se;
    rep["theory_var"] = check.theory_var;
    rep["rel_err"] = check.rel_err;
    rep["tolerance"] = cfg.rel_err_tol;
  } else {
    const auto curve =
        sim::bias_curve(cfg.world, cfg.n_list, cfg.replicates, cfg.estimator);
    rep["mode"] = "bias";
    json pts = json::array();
    bool within_4se = true;
    for (const auto& p : curve.points) {
      pts.push_back({{"n", p.n}, {"bias", p.bias}, {"se", p.se}});
      if (std::abs(p.bias) > 4.0 * p.se) within_4se = false;
    }
    rep["points"] = pts;
    rep["loglog_slope"] = curve.loglog_slope;
    rep["slope_range"] = {cfg.slope_lo, cfg.slope_hi};
    rep["bias_within_4se"] = within_4se;
    // plug-in with correlation: test the decay rate; otherwise the
    // estimator is unbiased and the bias must vanish within noise
    const bool rate_check =
        cfg.estimator == sim::WorldEstimator::control_variates &&
        cfg.world.alpha != 0.0;
    ok = rate_check ? (curve.loglog_slope >= cfg.slope_lo &&
                       curve.loglog_slope <= cfg.slope_hi)
                    : within_4se;
  }
  rep["ok"] = ok;
  return SimulateResult{rep.dump(2) + "\n", ok};
}

// ---------------------------------------------------------------------------
// rendering

namespace {

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json();
}

json ci_json(const ConfidenceInterval& ci) {
  return {{"lo", ci.lo}, {"hi", ci.hi}, {"width", ci.width}};
}

std::string opt_field(const std::optional<double>& v) {
  return v ? fmt(*v) : "";
}

}  // namespace

std::string to_json(const EstimateResult& r) {
  json j;
  j["metric"] = r.metric;
  j["prompt"] = r.prompt;
  j["n_records"] = r.n_records;
  j["n_sample"] = r.n_sample;
  j["mu_hat"] = r.cv.mu_hat;
  j["alpha_hat"] = r.cv.alpha_hat;
  j["mu_hat_simple"] = r.simple.mu_hat;
  j["ci_cv"] = ci_json(r.ci_cv);
  j["ci_simple"] = ci_json(r.ci_simple);
  j["sigma_a2_hat"] = opt_json(r.sigma_a2_hat);
  j["sigma_f2_hat"] = opt_json(r.sigma_f2_hat);
  j["gamma_hat"] = opt_json(r.gamma_hat);
  j["rho_hat"] = opt_json(r.rho_hat);
  j["rho_clamped"] = r.rho_clamped;
  j["de_theory"] = opt_json(r.de_theory);
  j["level"] = r.level;
  j["bootstrap_replicates"] = r.replicates;
  j["seed"] = r.seed;
  return j.dump(2) + "\n";
}

std::string to_csv(const EstimateResult& r) {
  std::string s =
      "metric,prompt,n_records,n_sample,mu_hat,alpha_hat,mu_hat_simple,"
      "ci_cv_lo,ci_cv_hi,ci_cv_width,ci_simple_lo,ci_simple_hi,"
      "ci_simple_width,sigma_a2_hat,sigma_f2_hat,gamma_hat,rho_hat,"
      "de_theory,level,bootstrap_replicates,seed\n";
  s += r.metric + "," + r.prompt + "," + std::to_string(r.n_records) + "," +
       std::to_string(r.n_sample) + "," + fmt(r.cv.mu_hat) + "," +
       fmt(r.cv.alpha_hat) + "," + fmt(r.simple.mu_hat) + "," +
       fmt(r.ci_cv.lo) + "," + fmt(r.ci_cv.hi) + "," + fmt(r.ci_cv.width) +
       "," + fmt(r.ci_simple.lo) + "," + fmt(r.ci_simple.hi) + "," +
       fmt(r.ci_simple.width) + "," + opt_field(r.sigma_a2_hat) + "," +
       opt_field(r.sigma_f2_hat) + "," + opt_field(r.gamma_hat) + "," +
       opt_field(r.rho_hat) + "," + opt_field(r.de_theory) + "," +
       fmt(r.level) + "," + std::to_string(r.replicates) + "," +
       std::to_string(r.seed) + "\n";
  return s;
}

std::string report_json(const CorrelateResult& r) {
  json arr = json::array();
  for (const auto& row : r.rows)
    arr.push_back({{"level", row.level},
                   {"system_id", row.system_id},
                   {"metric", row.metric},
                   {"pearson", row.pearson},
                   {"spearman", row.spearman},
                   {"n", row.n}});
  return arr.dump(2) + "\n";
}

std::string report_csv(const CorrelateResult& r) {
  std::string s = "level,system_id,metric,pearson,spearman,n\n";
  for (const auto& row : r.rows)
    s += row.level + "," + row.system_id + "," + row.metric + "," +
         fmt(row.pearson) + "," + fmt(row.spearman) + "," +
         std::to_string(row.n) + "\n";
  return s;
}

std::string scatter_csv(const CorrelateResult& r) {
  std::string s = "item_id,system_id,metric,human\n";
  for (const auto& row : r.scatter)
    s += row.item_id + "," + row.system_id + "," + fmt(row.metric) + "," +
         fmt(row.human) + "\n";
  return s;
}

std::string to_json(const PlanResult& r) {
  json j;
  j["sigma_f2"] = r.params.sigma_f2;
  j["sigma_a2"] = r.params.sigma_a2;
  j["rho"] = r.params.rho;
  j["target_variance"] = r.target_variance;
  j["n"] = r.n;
  return j.dump(2) + "\n";
}

std::string to_csv(const PlanResult& r) {
  return "sigma_f2,sigma_a2,rho,target_variance,n\n" +
         fmt(r.params.sigma_f2) + "," + fmt(r.params.sigma_a2) + "," +
         fmt(r.params.rho) + "," + fmt(r.target_variance) + "," +
         std::to_string(r.n) + "\n";
}

std::string metrics_json(const std::vector<MetricRow>& rows,
                         const std::string& metric) {
  json arr = json::array();
  for (const auto& row : rows)
    arr.push_back({{"item_id", row.item_id},
                   {"system_id", row.system_id},
                   {"metric", metric},
                   {"value", row.value}});
  return arr.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricRow>& rows,
                        const std::string& metric) {
  std::string s = "item_id,system_id,metric,value\n";
  for (const auto& row : rows)
    s += row.item_id + "," + row.system_id + "," + metric + "," +
         fmt(row.value) + "\n";
  return s;
}

std::string trajectory_svg(const std::vector<TrajectoryPoint>& points) {
  const double W = 640, H = 400, ml = 60, mr = 20, mt = 20, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymax = 0.0;
  for (const auto& p : points) {
    xmin = std::min(xmin, static_cast<double>(p.n));
    xmax = std::max(xmax, static_cast<double>(p.n));
    ymax = std::max({ymax, p.width_simple, p.width_cv});
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= 0.0) ymax = 1.0;
  const auto sx = [&](double n) {
    return ml + (n - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  const auto sy = [&](double w) {
    return H - mb - w / ymax * (H - mt - mb);
  };
  const auto poly = [&](bool cv) {
    std::string pts;
    for (const auto& p : points) {
      pts += fmt(sx(static_cast<double>(p.n))) + "," +
             fmt(sy(cv ? p.width_cv : p.width_simple)) + " ";
    }
    return pts;
  };
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
       "viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(H - mb) + "\" x2=\"" +
       fmt(W - mr) + "\" y2=\"" + fmt(H - mb) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) +
       "\" y2=\"" + fmt(H - mb) + "\" stroke=\"black\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"2\" points=\"" +
       poly(false) + "\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"#ee6677\" stroke-width=\"2\" points=\"" +
       poly(true) + "\"/>\n";
  s += "<text x=\"" + fmt(W / 2) + "\" y=\"" + fmt(H - 12) +
       "\" text-anchor=\"middle\" font-size=\"13\">human judgments (n)</text>\n";
  s += "<text x=\"16\" y=\"" + fmt(H / 2) +
       "\" transform=\"rotate(-90 16 " + fmt(H / 2) +
       ")\" text-anchor=\"middle\" font-size=\"13\">80% CI width</text>\n";
  s += "<text x=\"" + fmt(W - mr - 180) + "\" y=\"" + fmt(mt + 16) +
       "\" font-size=\"12\" fill=\"#4477aa\">sample mean</text>\n";
  s += "<text x=\"" + fmt(W - mr - 180) + "\" y=\"" + fmt(mt + 32) +
       "\" font-size=\"12\" fill=\"#ee6677\">control variates</text>\n";
  s += "</svg>\n";
  return s;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::input, "cannot write to " + path);
  out << content;
}

}  // namespace cveval::io
