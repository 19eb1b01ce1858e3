#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "pskyline/cost_model.hpp"
#include "pskyline/csv_io.hpp"
#include "pskyline/harness.hpp"
#include "pskyline/imputation.hpp"
#include "pskyline/repo_index.hpp"

using namespace pskyline;

namespace {

std::vector<dd_rule> rules_or_cycle(const std::string& path, const std::vector<std::string>& header) {
  if (!path.empty()) return load_dd_rules(path, header);
  return cycle_rules(header.size());
}

void save_rules(const std::string& path, const std::vector<dd_rule>& rules, const std::vector<std::string>& header) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open " + path + " for writing");
  for (const auto& r : rules) f << format_dd_rule(r, header) << '\n';
}

void save_answers(const std::string& path, const std::vector<answer_set>& a) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open " + path + " for writing");
  write_answers(f, a);
}

void emit_metrics(const metrics& m, const std::string& json_path) {
  m.write(std::cout);
  if (json_path.empty()) return;
  std::ofstream f(json_path);
  if (!f) throw io_error("cannot open " + json_path + " for writing");
  m.write_json(f);
}

struct tuning_opts {
  double beta = 0.5;
  double eta = 0.01;
  double d2 = 0.0;
  double t_cell = 1e-6;
  double t_sr = 1e-7;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "cost model weight of cell visits")->check(CLI::Range(0.0, 1.0));
    app->add_option("--eta", eta, "tuner stopping width")->check(CLI::PositiveNumber);
    app->add_option("--d2", d2, "correlation fractal dimension, 0 means d")->check(CLI::NonNegativeNumber);
    app->add_option("--t-cell", t_cell, "seconds per visited cell")->check(CLI::PositiveNumber);
    app->add_option("--t-sr", t_sr, "seconds per refined sample")->check(CLI::PositiveNumber);
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic skyline monitoring over incomplete streams"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a repository, a complete stream and its rules");
  gen_config gc;
  std::string kind = "correlated", repo_out = "repo.csv", stream_out = "stream.csv", rules_out = "rules.txt";
  gen->add_option("--kind", kind, "uniform, correlated or anticorrelated");
  gen->add_option("-d,--dims", gc.d, "dimensionality")->check(CLI::Range(2, 64));
  gen->add_option("--repo-size", gc.repo_size, "repository rows");
  gen->add_option("--stream-size", gc.stream_size, "stream objects");
  gen->add_option("--window", gc.window, "target number of live objects");
  gen->add_option("--theta", gc.theta, "arrivals per tick")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gc.seed, "random seed");
  gen->add_option("--repo-out", repo_out);
  gen->add_option("--stream-out", stream_out);
  gen->add_option("--rules-out", rules_out);

  // mask
  auto* msk = app.add_subcommand("mask", "blank out attributes of a complete stream");
  std::string mask_in, mask_out;
  double xi = 0.3;
  size_t m = 1;
  uint64_t mask_seed = 7;
  msk->add_option("--in", mask_in, "complete stream")->required();
  msk->add_option("--out", mask_out, "incomplete stream")->required();
  msk->add_option("--xi", xi, "fraction of objects to mask")->check(CLI::Range(0.0, 1.0));
  msk->add_option("-m,--missing", m, "attributes masked per selected object");
  msk->add_option("--seed", mask_seed, "random seed");

  // index
  auto* idx = app.add_subcommand("index", "build the imputation indexes and report their shape");
  std::string idx_repo, idx_rules;
  double idx_u = 0.0;
  size_t idx_lambda = 2;
  bool tune_u = false;
  tuning_opts idx_tune;
  idx->add_option("--repo", idx_repo, "repository csv")->required();
  idx->add_option("--rules", idx_rules, "rule file, default is the attribute cycle");
  idx->add_option("-u,--cell", idx_u, "grid cell side")->check(CLI::PositiveNumber);
  idx->add_flag("--tune-u", tune_u, "pick the cell side with the cost model");
  idx->add_option("--lambda", idx_lambda, "histogram intervals per dimension")->check(CLI::PositiveNumber);
  idx_tune.add(idx);

  // run
  auto* run = app.add_subcommand("run", "replay a stream and write one answer line per tick");
  std::string run_stream, run_repo, run_rules, run_out, run_metrics_json;
  double alpha = 0.5, run_u = 0.0;
  size_t run_lambda = 2;
  tuning_opts run_tune;
  run->add_option("--stream", run_stream, "stream csv")->required();
  run->add_option("--repo", run_repo, "repository csv, needed when values are missing");
  run->add_option("--rules", run_rules, "rule file, default is the attribute cycle");
  run->add_option("--alpha", alpha, "probability threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("-u,--cell", run_u, "grid cell side, tuned when omitted")->check(CLI::PositiveNumber);
  run->add_option("--lambda", run_lambda, "histogram intervals per dimension")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "answer file")->required();
  run->add_option("--metrics-json", run_metrics_json, "also write the metrics as json");
  run_tune.add(run);

  // eval
  auto* ev = app.add_subcommand("eval", "score answer files against ground truth");
  std::string ev_answers, ev_truth;
  bool macro = false;
  ev->add_option("--answers", ev_answers, "returned answers")->required();
  ev->add_option("--truth", ev_truth, "ground-truth answers")->required();
  ev->add_flag("--macro", macro, "average precision and recall per tick instead of pooling");

  // validate-dd
  auto* vd = app.add_subcommand("validate-dd", "check that data satisfies its rules");
  std::string vd_repo, vd_stream, vd_rules;
  vd->add_option("--repo", vd_repo, "repository csv")->required();
  vd->add_option("--stream", vd_stream, "complete stream csv to check together with the repository");
  vd->add_option("--rules", vd_rules, "rule file, default is the attribute cycle");

  // experiment
  auto* ex = app.add_subcommand("experiment", "generate, mask, replay and score in one go");
  experiment_config xc = experiment_config::desk();
  bool paper_scale = false, no_truth = false;
  std::string ex_kind, ex_dir, ex_json;
  double ex_u = 0.0;
  ex->add_flag("--paper-scale", paper_scale, "use the full-size defaults");
  ex->add_option("--kind", ex_kind, "uniform, correlated or anticorrelated");
  ex->add_option("--alpha", xc.alpha, "probability threshold")->check(CLI::Range(0.0, 1.0));
  ex->add_option("-d,--dims", xc.gen.d, "dimensionality")->check(CLI::Range(2, 64));
  ex->add_option("--window", xc.gen.window, "target number of live objects");
  ex->add_option("--repo-size", xc.gen.repo_size, "repository rows");
  ex->add_option("--stream-size", xc.gen.stream_size, "stream objects");
  ex->add_option("--theta", xc.gen.theta, "arrivals per tick")->check(CLI::PositiveNumber);
  ex->add_option("-m,--missing", xc.m, "attributes masked per selected object");
  ex->add_option("--xi", xc.xi, "fraction of objects to mask")->check(CLI::Range(0.0, 1.0));
  ex->add_option("--seed", xc.gen.seed, "random seed");
  ex->add_option("-u,--cell", ex_u, "grid cell side, tuned when omitted")->check(CLI::PositiveNumber);
  ex->add_option("--lambda", xc.lambda, "histogram intervals per dimension")->check(CLI::PositiveNumber);
  ex->add_flag("--macro", xc.macro, "per-tick averaged F-score");
  ex->add_flag("--no-truth", no_truth, "skip the unmasked replay");
  ex->add_option("--out-dir", ex_dir, "write answers and truth here");
  ex->add_option("--metrics-json", ex_json, "also write the metrics as json");
  tuning_opts ex_tune;
  ex_tune.add(ex);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gc.kind = parse_kind(kind);
      auto data = gen_synthetic(gc);
      save_repository(repo_out, data.repo);
      save_stream(stream_out, data.stream);
      save_rules(rules_out, data.rules, data.repo.header);
      fmt::print("repository={} rows\nstream={} objects\nseeds={}\nrules={}\n", data.repo.rows.size(),
                 data.stream.objects.size(), data.seeds, data.rules.size());
    } else if (msk->parsed()) {
      auto s = load_stream(mask_in);
      auto out = mask_stream(s, xi, m, mask_seed);
      save_stream(mask_out, out);
      size_t masked = 0;
      for (const auto& o : out.objects) masked += !o.complete();
      fmt::print("objects={}\nmasked={}\n", out.objects.size(), masked);
    } else if (idx->parsed()) {
      auto repo = load_repository(idx_repo);
      auto rules = rules_or_cycle(idx_rules, repo.header);
      double u = idx_u;
      if (tune_u || u <= 0.0) {
        u = tune_for(repo, rules, idx_tune.beta, idx_tune.eta, idx_tune.d2, idx_tune.t_cell, idx_tune.t_sr);
        fmt::print("tuned_u={:.6g}\n", u);
      }
      imputer imp(repo, rules, u, idx_lambda);
      for (size_t a = 0; a < repo.dims(); ++a) {
        const repository_index* ix = imp.index_for(a);
        if (!ix) continue;
        fmt::print("index.{}.cells={}\nindex.{}.height={}\nindex.{}.lattice_nodes={}\n", repo.header[a],
                   ix->cell_count(), repo.header[a], ix->height(), repo.header[a],
                   imp.lattice_for(a)->nodes.size());
      }
      fmt::print("u={:.6g}\n", u);
    } else if (run->parsed()) {
      auto s = load_stream(run_stream);
      std::shared_ptr<const imputer> imp;
      double u = run_u;
      if (!run_repo.empty()) {
        auto repo = load_repository(run_repo);
        if (repo.header != s.attr_names) throw io_error("repository and stream name different attributes");
        auto rules = rules_or_cycle(run_rules, repo.header);
        if (u <= 0.0) u = tune_for(repo, rules, run_tune.beta, run_tune.eta, run_tune.d2, run_tune.t_cell, run_tune.t_sr);
        imp = std::make_shared<const imputer>(std::move(repo), rules, u, run_lambda);
      } else if (std::any_of(s.objects.begin(), s.objects.end(), [](const stream_object& o) { return !o.complete(); })) {
        throw io_error("stream has missing values; pass --repo to impute them");
      }
      engine e({alpha, s.attr_names.size()}, imp);
      std::vector<answer_set> answers;
      metrics mt = replay(e, s, &answers);
      mt.u = u;
      save_answers(run_out, answers);
      emit_metrics(mt, run_metrics_json);
    } else if (ev->parsed()) {
      auto acc = f_score(load_answers(ev_answers), load_answers(ev_truth), macro);
      for (const auto& d : acc.diagnostics) std::cerr << "warning: " << d << '\n';
      fmt::print("precision={:.6g}\nrecall={:.6g}\nf_score={:.6g}\ntrue_positive={}\nreturned={}\ntruth_answers={}\n",
                 acc.precision, acc.recall, acc.f, acc.true_positive, acc.returned, acc.expected);
    } else if (vd->parsed()) {
      auto repo = load_repository(vd_repo);
      auto rules = rules_or_cycle(vd_rules, repo.header);
      auto rows = repo.rows;
      if (!vd_stream.empty()) {
        auto s = load_stream(vd_stream);
        if (s.attr_names != repo.header) throw io_error("repository and stream name different attributes");
        for (const auto& o : s.objects) {
          if (!o.complete()) throw io_error("object " + o.id + " has missing values");
          attr_vec r;
          for (const auto& a : o.attrs) r.push_back(*a);
          rows.push_back(std::move(r));
        }
      }
      auto bad = dd_violations(rows, rules);
      for (const auto& v : bad)
        std::cerr << fmt::format("rule {} violated by rows {} and {}\n", format_dd_rule(rules[v.rule], repo.header),
                                 v.a, v.b);
      fmt::print("rows={}\nrules={}\nviolations={}\n", rows.size(), rules.size(), bad.size());
      return bad.empty() ? 0 : 1;
    } else if (ex->parsed()) {
      if (paper_scale) {
        experiment_config base = experiment_config::paper_scale();
        // flags given explicitly still win over the full-size defaults
        if (!ex->count("--window")) xc.gen.window = base.gen.window;
        if (!ex->count("--repo-size")) xc.gen.repo_size = base.gen.repo_size;
        if (!ex->count("--stream-size")) xc.gen.stream_size = base.gen.stream_size;
      }
      if (!ex_kind.empty()) xc.gen.kind = parse_kind(ex_kind);
      if (ex_u > 0.0) xc.u = ex_u;
      xc.truth = !no_truth;
      xc.beta = ex_tune.beta;
      xc.eta = ex_tune.eta;
      xc.d2 = ex_tune.d2;
      xc.t_cell = ex_tune.t_cell;
      xc.t_sr = ex_tune.t_sr;
      auto res = run_experiment(xc);
      if (!ex_dir.empty()) {
        std::filesystem::create_directories(ex_dir);
        save_answers(ex_dir + "/answers.txt", res.answers);
        if (xc.truth) save_answers(ex_dir + "/truth.txt", res.truth);
      }
      fmt::print("kind={}\nwindow_target={}\nrepo_size={}\nstream_size={}\n", kind_name(xc.gen.kind), xc.gen.window,
                 xc.gen.repo_size, xc.gen.stream_size);
      emit_metrics(res.stats, ex_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
