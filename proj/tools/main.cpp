// goalfv command-line driver: solve / adapt / train / predict / bench /
// compare over an INI run configuration.
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "goalfv/mesh_io.hpp"
#include "goalfv/pipeline.hpp"

using namespace goalfv;
namespace fs = std::filesystem;

namespace {

RunConfig load_config_with_overrides(const std::string& config_path, int threads,
                                     const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  if (threads > 0) cfg.threads = threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

void print_adapt_rounds(const AdaptRunResult& result) {
  std::printf("round  elements  ->  elements   refined   TOL            J_estimate\n");
  for (const auto& r : result.rounds) {
    std::printf("%5d  %8d  ->  %8d   %6.3f   %-12.5g   %.8f\n", r.round,
                r.elements_before, r.elements_after, r.refined_fraction, r.tol,
                r.j_estimate);
  }
  for (const auto& r : result.rounds) {
    const FitReport& f = r.distribution;
    if (!f.available) continue;
    std::printf(
        "round %d indicator fit: weibull(k=%.3f, lambda=%.3g) KS=%.4f p=%.3f | "
        "gamma(k=%.3f, theta=%.3g) KS=%.4f p=%.3f\n",
        r.round, f.weibull_shape, f.weibull_scale, f.ks_stat_weibull,
        f.ks_pvalue_weibull, f.gamma_shape, f.gamma_scale, f.ks_stat_gamma,
        f.ks_pvalue_gamma);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goalfv: goal-oriented adaptive finite-volume workbench for 2D steady Euler"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_dir, data_path, threads_list = "1";
  int threads = 0;

  const auto add_common = [&](CLI::App* cmd, bool needs_model) {
    cmd->add_option("--config", config_path, "run configuration (INI)")->required();
    cmd->add_option("--threads", threads, "OpenMP thread count override");
    cmd->add_option("--out", out_dir, "output directory override");
    if (needs_model) cmd->add_option("--model", model_path, "surrogate model file");
  };

  CLI::App* solve = app.add_subcommand("solve", "primal solve + functional value");
  add_common(solve, false);

  CLI::App* adapt = app.add_subcommand("adapt", "DWR adaptation rounds");
  add_common(adapt, true);
  bool use_surrogate = false;
  std::string dataset_out;
  adapt->add_flag("--surrogate", use_surrogate, "use the surrogate dual (needs --model)");
  adapt->add_option("--emit-dataset", dataset_out,
                    "append fine-mesh training rows to this CSV (exact dual only)");

  CLI::App* train = app.add_subcommand("train", "train the dual surrogate from a dataset");
  add_common(train, true);
  train->add_option("--data", data_path, "training dataset CSV")->required();

  CLI::App* predict = app.add_subcommand("predict", "solve, then predict the dual field");
  add_common(predict, true);

  CLI::App* bench = app.add_subcommand("bench", "parallel speedup harness");
  add_common(bench, false);
  bench->add_option("--thread-counts", threads_list, "comma-separated thread counts (default 1)");

  CLI::App* compare = app.add_subcommand("compare", "exact vs surrogate adaptation");
  add_common(compare, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      const SolveRunResult res = run_solve(cfg);
      std::printf("J = %.10f  (|R|_1 = %.3e after %d Newton iterations)\n", res.j,
                  res.residual_l1, res.newton_iterations);
    } else if (adapt->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      SurrogateModel model;
      Dataset dataset;
      const bool emit = !dataset_out.empty();
      if (use_surrogate) {
        if (model_path.empty()) {
          std::cerr << "adapt --surrogate needs --model\n";
          return 2;
        }
        model = SurrogateModel::load(model_path);
      }
      const AdaptRunResult result =
          run_adapt(cfg, use_surrogate ? DualMode::Surrogate : DualMode::Exact,
                    use_surrogate ? &model : nullptr, emit ? &dataset : nullptr);
      print_adapt_rounds(result);
      if (emit) {
        save_dataset(dataset, dataset_out);
        int small = 0, total = 0;
        for (const auto& t : dataset.targets)
          for (double v : t) {
            ++total;
            if (std::abs(v) < 0.01) ++small;
          }
        std::printf("dataset: %zu rows -> %s (%.0f%% of dual components below 0.01)\n",
                    dataset.features.size(), dataset_out.c_str(),
                    total ? 100.0 * small / total : 0.0);
      }
      std::printf("final J estimate: %.10f\n", result.final_j_estimate);
    } else if (train->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      const Dataset ds = load_dataset(data_path);
      std::printf("training on %zu rows (k=%d folds, %d epochs)\n", ds.features.size(),
                  cfg.train.k_folds, cfg.train.epochs);
      const TrainResult res = train_surrogate(ds, cfg.hidden_widths, cfg.train);
      fs::create_directories(cfg.out_dir);
      const std::string model_out =
          model_path.empty()
              ? (fs::path(cfg.out_dir) / (cfg.case_name + ".surrogate")).string()
              : model_path;
      res.model.save(model_out);
      write_fold_report_csv(
          res.folds, (fs::path(cfg.out_dir) / (cfg.case_name + "_folds.csv")).string());
      for (const auto& f : res.folds) {
        if (f.fold < 0) continue;
        std::printf("fold %d: final val loss %.5f%s\n", f.fold, f.final_val_loss,
                    f.diverged ? " (diverged)" : "");
      }
      std::printf("model -> %s\n", model_out.c_str());
    } else if (predict->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      if (model_path.empty()) {
        std::cerr << "predict needs --model\n";
        return 2;
      }
      const SurrogateModel model = SurrogateModel::load(model_path);
      omp_set_num_threads(cfg.threads);
      fs::create_directories(cfg.out_dir);
      MeshHierarchy mesh = build_mesh(cfg);
      const PatchCache cache = build_patch_cache(mesh);
      const std::vector<State4> u0(mesh.active_count(), freestream_state(cfg.flow));
      const NewtonState st = newton_solve(u0, mesh, cache, cfg.flow, cfg.newton);
      ResidualOptions relax = cfg.newton.residual;
      relax.use_limiter = false;
      const ResidualReport rr = assemble_residual(st.u, mesh, cache, cfg.flow, relax);
      const std::vector<State4> z = predict_field(model, mesh, st.u, rr.r, cfg.flow);
      CellField zf{"z", 4, std::vector<double>(4 * mesh.active_count())};
      for (int i = 0; i < mesh.active_count(); ++i)
        for (int c = 0; c < 4; ++c) zf.data[4 * i + c] = z[i][c];
      const std::string out =
          (fs::path(cfg.out_dir) / (cfg.case_name + "_dual.vtk")).string();
      write_vtk(mesh, {zf}, out);
      std::printf("predicted dual field -> %s\n", out.c_str());
    } else if (bench->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      std::vector<int> counts;
      std::istringstream ss(threads_list);
      std::string tok;
      while (std::getline(ss, tok, ',')) counts.push_back(std::stoi(tok));
      if (counts.empty()) counts.push_back(1);
      const BenchReport rep = run_bench(cfg, counts);
      write_bench_csv(rep, (fs::path(cfg.out_dir) / (cfg.case_name + "_bench.csv")).string());
      std::printf("%-32s %8s %12s %8s\n", "module", "threads", "seconds", "speedup");
      for (const auto& s : rep.samples)
        std::printf("%-32s %8d %12.6f %8.2f\n", s.module.c_str(), s.threads, s.seconds,
                    s.speedup);
      std::printf("outputs bitwise identical across thread counts: %s\n",
                  rep.outputs_bitwise_identical ? "yes" : "NO");
      for (const auto& w : rep.warnings) std::printf("note: %s\n", w.c_str());
    } else if (compare->parsed()) {
      const RunConfig cfg = load_config_with_overrides(config_path, threads, out_dir);
      if (model_path.empty()) {
        std::cerr << "compare needs --model\n";
        return 2;
      }
      const SurrogateModel model = SurrogateModel::load(model_path);
      const CompareResult res = run_compare(cfg, model);
      std::printf("reference J = %.10f\n", res.j_reference);
      std::printf("round  n_exact  err_exact    t_dual_exact  n_surr   err_surr     t_dual_surr\n");
      for (const auto& r : res.rows)
        std::printf("%5d  %7d  %-11.4e  %12.4f  %7d  %-11.4e  %12.4f\n", r.round,
                    r.elements_exact, r.j_error_exact, r.dual_seconds_exact,
                    r.elements_surrogate, r.j_error_surrogate, r.dual_seconds_surrogate);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
