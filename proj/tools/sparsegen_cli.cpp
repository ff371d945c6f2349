// Command-line front end: dataset generation, VAE training, sensing,
// recovery, property verification, experiment grids, and SVG plots.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// failure (NaN or infeasible decode).

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "sparsegen/harness.hpp"
#include "sparsegen/verify.hpp"

namespace {

using nlohmann::json;
using namespace sparsegen;

struct SolverFlags {
  SolverConfig cfg;
  std::string mode_name = "joint-subgradient";
  double latent_radius = 0;  // 0 = unconstrained

  void attach(CLI::App* app) {
    app->add_option("--lambda", cfg.lambda, "measurement-term multiplier");
    app->add_option("--step", cfg.step_size, "Adam step size");
    app->add_option("--iters", cfg.iterations, "solver iterations");
    app->add_option("--polish", cfg.polish_iterations,
                    "extra alternating-prox polish iterations");
    app->add_option("--restarts", cfg.restarts, "random restarts");
    app->add_option("--mode", mode_name, "joint-subgradient | alternating-prox");
    app->add_option("--clip-lo", cfg.clip_lo, "lower clip bound");
    app->add_option("--clip-hi", cfg.clip_hi, "upper clip bound");
    app->add_option("--latent-radius", latent_radius,
                    "project z onto this l2 ball (0 = unconstrained)");
  }

  SolverConfig resolve(const json& file_cfg, CLI::App* app) {
    auto from_file = [&](const char* flag, const char* key, auto& slot) {
      if (app->count(flag) == 0 && file_cfg.contains(key))
        slot = file_cfg.at(key).get<std::decay_t<decltype(slot)>>();
    };
    from_file("--lambda", "lambda", cfg.lambda);
    from_file("--step", "step_size", cfg.step_size);
    from_file("--iters", "iterations", cfg.iterations);
    from_file("--polish", "polish_iterations", cfg.polish_iterations);
    from_file("--restarts", "restarts", cfg.restarts);
    from_file("--mode", "mode", mode_name);
    from_file("--clip-lo", "clip_lo", cfg.clip_lo);
    from_file("--clip-hi", "clip_hi", cfg.clip_hi);
    from_file("--latent-radius", "project_latent_radius", latent_radius);
    cfg.mode = parse_solver_mode(mode_name);
    if (latent_radius > 0) cfg.project_latent_radius = latent_radius;
    return cfg;
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config: " + path);
  json parsed;
  try {
    is >> parsed;
  } catch (const json::parse_error& err) {
    throw FormatError(std::string("config parse error: ") + err.what());
  }
  if (!parsed.is_object()) throw FormatError("config must be a flat JSON object");
  return parsed;
}

std::vector<long> parse_long_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stol(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Dataset load_dataset(const std::string& path, bool binarize) {
  return load_idx(path, binarize);
}

void write_json(const json& value, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << value.dump(2) << "\n";
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os << value.dump(2) << "\n";
}

json report_to_json(const PropertyReport& r) {
  return json{{"property", property_name(r.property)},
              {"l", r.l},
              {"alpha_or_gamma", r.alpha_or_gamma},
              {"delta", r.delta},
              {"trials", r.trials},
              {"violations", r.violations},
              {"worst_ratio", r.worst_ratio}};
}

int cmd_make_data(const std::string& kind, long count, std::uint64_t seed,
                  const std::string& out) {
  Dataset ds;
  if (kind == "digits") {
    ds = make_stroke_digits(count, seed);
  } else if (kind == "glyphs") {
    ds = make_stroke_glyphs(count, seed);
  } else {
    throw std::invalid_argument("unknown dataset kind: " + kind);
  }
  save_idx(ds, out);
  std::cout << "wrote " << ds.images.size() << " " << kind << " images to " << out << "\n";
  return 0;
}

int cmd_vae_train(const std::string& data_path, bool binarize, long limit, long hidden,
                  long latent, TrainConfig cfg, const std::string& out,
                  const std::string& trace_path) {
  Dataset ds = load_dataset(data_path, binarize);
  if (limit > 0 && static_cast<std::size_t>(limit) < ds.images.size())
    ds = slice(ds, 0, static_cast<std::size_t>(limit));
  const Eigen::MatrixXd matrix = to_matrix(ds);
  VaeModel model = make_vae(matrix.rows(), hidden, latent, cfg.seed);
  const auto stats = train(model, matrix, cfg);
  save_weights(decoder_of(model), out);
  if (!trace_path.empty()) write_loss_trace(stats, trace_path);
  for (std::size_t e = 0; e < stats.size(); ++e)
    std::cout << "epoch " << e << ": neg_elbo " << stats[e].mean_neg_elbo << " bce "
              << stats[e].mean_bce << " kl " << stats[e].mean_kl << "\n";
  std::cout << "wrote decoder weights to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed sensing with sparse deviations from generative models"};
  app.require_subcommand(1);

  // ---- make-data ----
  auto* make_data = app.add_subcommand("make-data", "generate a synthetic stroke-image corpus");
  std::string md_kind = "digits", md_out;
  long md_count = 1000;
  std::uint64_t md_seed = 0;
  make_data->add_option("--kind", md_kind, "digits | glyphs");
  make_data->add_option("--count", md_count)->required();
  make_data->add_option("--seed", md_seed);
  make_data->add_option("--out", md_out)->required();

  // ---- vae-train ----
  auto* vae_cmd = app.add_subcommand("vae-train", "train the VAE and save its decoder");
  std::string vt_data, vt_out, vt_trace, vt_config;
  bool vt_binarize = false;
  long vt_limit = 0, vt_hidden = 500, vt_latent = 20;
  TrainConfig vt_cfg;
  vae_cmd->add_option("--data", vt_data, "IDX image file")->required();
  vae_cmd->add_flag("--binarize", vt_binarize);
  vae_cmd->add_option("--limit", vt_limit, "use only the first N images");
  vae_cmd->add_option("--hidden", vt_hidden);
  vae_cmd->add_option("--latent", vt_latent);
  vae_cmd->add_option("--epochs", vt_cfg.epochs);
  vae_cmd->add_option("--lr", vt_cfg.learning_rate);
  vae_cmd->add_option("--batch", vt_cfg.batch_size);
  vae_cmd->add_option("--seed", vt_cfg.seed);
  vae_cmd->add_option("--config", vt_config, "JSON config file (flags win)");
  vae_cmd->add_option("--out", vt_out, "decoder weight file")->required();
  vae_cmd->add_option("--trace", vt_trace, "per-epoch loss CSV");

  // ---- sense ----
  auto* sense_cmd = app.add_subcommand("sense", "simulate noisy acquisition of one image");
  std::string sn_data, sn_out, sn_save_ens, sn_load_ens, sn_scaling = "variance";
  bool sn_binarize = false;
  long sn_index = 0, sn_m = 100;
  double sn_noise = 0.1;
  std::uint64_t sn_seed = 0;
  sense_cmd->add_option("--data", sn_data)->required();
  sense_cmd->add_flag("--binarize", sn_binarize);
  sense_cmd->add_option("--index", sn_index);
  sense_cmd->add_option("--m", sn_m);
  sense_cmd->add_option("--noise-std", sn_noise);
  sense_cmd->add_option("--seed", sn_seed);
  sense_cmd->add_option("--scaling", sn_scaling, "variance | std (entry scale 1/m reading)");
  sense_cmd->add_option("--save-ensemble", sn_save_ens);
  sense_cmd->add_option("--load-ensemble", sn_load_ens);
  sense_cmd->add_option("--out", sn_out, "measurements JSON (default stdout)");

  // ---- recover ----
  auto* rec_cmd = app.add_subcommand("recover", "recover one image from measurements");
  std::string rc_alg = "sparse-gen", rc_weights, rc_data, rc_out, rc_blob, rc_basis = "identity",
              rc_config;
  bool rc_binarize = false;
  long rc_index = 0, rc_m = 200, rc_lasso_iters = 1000;
  double rc_noise = 0.1, rc_mu = 0.1;
  std::uint64_t rc_seed = 0;
  SolverFlags rc_solver;
  rec_cmd->add_option("--alg", rc_alg, "lasso | gen | sparse-gen");
  rec_cmd->add_option("--weights", rc_weights, "generator weight file");
  rec_cmd->add_option("--data", rc_data)->required();
  rec_cmd->add_flag("--binarize", rc_binarize);
  rec_cmd->add_option("--index", rc_index);
  rec_cmd->add_option("--m", rc_m);
  rec_cmd->add_option("--noise-std", rc_noise);
  rec_cmd->add_option("--seed", rc_seed);
  rec_cmd->add_option("--basis", rc_basis);
  rec_cmd->add_option("--mu", rc_mu, "lasso l1 weight");
  rec_cmd->add_option("--lasso-iters", rc_lasso_iters);
  rec_cmd->add_option("--config", rc_config, "JSON config file (flags win)");
  rec_cmd->add_option("--out", rc_out, "RecoveryResult JSON (default stdout)");
  rec_cmd->add_option("--xhat-blob", rc_blob, "write x_hat as raw f64 blob instead of inline");
  rc_solver.attach(rec_cmd);

  // ---- experiment / transfer ----
  auto add_grid_options = [](CLI::App* cmd, std::string& data, bool& binarize, std::string& algs,
                             std::string& ms, std::string& weights, long& images, long& offset,
                             long& trials, std::uint64_t& base_seed, double& noise,
                             std::string& basis, double& mu, long& lasso_iters, bool& timing,
                             bool& shared, std::string& xhat_dir, unsigned& threads,
                             std::string& config, std::string& out, SolverFlags& solver) {
    cmd->add_option("--data", data)->required();
    cmd->add_flag("--binarize", binarize);
    cmd->add_option("--algs", algs, "comma list: lasso,gen,sparse-gen");
    cmd->add_option("--m", ms, "comma list of measurement counts")->required();
    cmd->add_option("--weights", weights);
    cmd->add_option("--images", images, "number of images from the dataset");
    cmd->add_option("--offset", offset, "first image index");
    cmd->add_option("--trials", trials, "trials per (m) cell");
    cmd->add_option("--base-seed", base_seed);
    cmd->add_option("--noise-std", noise);
    cmd->add_option("--basis", basis);
    cmd->add_option("--mu", mu, "lasso l1 weight");
    cmd->add_option("--lasso-iters", lasso_iters);
    cmd->add_flag("--timing", timing, "record wall_ms (breaks byte-identical reruns)");
    cmd->add_flag("--shared-matrix", shared, "one ensemble per m shared across trials");
    cmd->add_option("--save-xhat", xhat_dir, "directory for raw x_hat blobs");
    cmd->add_option("--threads", threads);
    cmd->add_option("--config", config, "JSON config file (flags win)");
    cmd->add_option("--out", out)->required();
    solver.attach(cmd);
  };

  auto* exp_cmd = app.add_subcommand("experiment", "error-vs-measurements grid, CSV output");
  std::string ex_data, ex_algs = "lasso", ex_ms, ex_weights, ex_basis = "identity", ex_xhat,
              ex_config, ex_out;
  bool ex_binarize = false, ex_timing = false, ex_shared = false;
  long ex_images = 200, ex_offset = 0, ex_trials = 1, ex_lasso_iters = 1000;
  std::uint64_t ex_base_seed = 0;
  double ex_noise = 0.1, ex_mu = 0.1;
  unsigned ex_threads = 0;
  SolverFlags ex_solver;
  add_grid_options(exp_cmd, ex_data, ex_binarize, ex_algs, ex_ms, ex_weights, ex_images,
                   ex_offset, ex_trials, ex_base_seed, ex_noise, ex_basis, ex_mu, ex_lasso_iters,
                   ex_timing, ex_shared, ex_xhat, ex_threads, ex_config, ex_out, ex_solver);

  auto* tr_cmd = app.add_subcommand(
      "transfer", "experiment with a generator trained on a different source domain");
  std::string tr_data, tr_algs = "lasso,gen,sparse-gen", tr_ms, tr_weights, tr_basis = "identity",
              tr_xhat, tr_config, tr_out;
  bool tr_binarize = true, tr_timing = false, tr_shared = false;
  long tr_images = 100, tr_offset = 0, tr_trials = 1, tr_lasso_iters = 1000;
  std::uint64_t tr_base_seed = 0;
  double tr_noise = 0.1, tr_mu = 0.1;
  unsigned tr_threads = 0;
  SolverFlags tr_solver;
  std::string tr_source;
  tr_cmd->add_option("--source-weights", tr_source, "decoder trained on the source domain")
      ->required();
  add_grid_options(tr_cmd, tr_data, tr_binarize, tr_algs, tr_ms, tr_weights, tr_images, tr_offset,
                   tr_trials, tr_base_seed, tr_noise, tr_basis, tr_mu, tr_lasso_iters, tr_timing,
                   tr_shared, tr_xhat, tr_threads, tr_config, tr_out, tr_solver);

  // ---- verify ----
  auto* vf_cmd = app.add_subcommand("verify", "empirical RIP / REC / S-REC / decoder-bound checks");
  std::string vf_property = "rip", vf_mode = "vectors", vf_weights, vf_out;
  long vf_n = 256, vf_m = 160, vf_l = 5, vf_trials = 1000, vf_latent = 4;
  double vf_alpha = 0.5, vf_gamma = 0.5, vf_delta = 0.0, vf_eps = 0.0;
  std::uint64_t vf_seed = 0, vf_matrix_seed = 7;
  vf_cmd->add_option("--property", vf_property, "rip | rec | srec | lemma1");
  vf_cmd->add_option("--n", vf_n);
  vf_cmd->add_option("--m", vf_m);
  vf_cmd->add_option("--l", vf_l);
  vf_cmd->add_option("--alpha", vf_alpha);
  vf_cmd->add_option("--gamma", vf_gamma);
  vf_cmd->add_option("--delta", vf_delta);
  vf_cmd->add_option("--eps-max", vf_eps, "noise bound for lemma1");
  vf_cmd->add_option("--trials", vf_trials);
  vf_cmd->add_option("--seed", vf_seed);
  vf_cmd->add_option("--matrix-seed", vf_matrix_seed);
  vf_cmd->add_option("--mode", vf_mode, "vectors | supports | exhaustive");
  vf_cmd->add_option("--weights", vf_weights, "generator for srec (zero generator by default)");
  vf_cmd->add_option("--latent", vf_latent, "zero-generator latent dim for srec/lemma1");
  vf_cmd->add_option("--out", vf_out, "report JSON (default stdout)");

  // ---- plot ----
  auto* pl_cmd = app.add_subcommand("plot", "render error-vs-m curves from a results CSV");
  std::string pl_csv, pl_metric = "l2", pl_out;
  pl_cmd->add_option("--csv", pl_csv)->required();
  pl_cmd->add_option("--metric", pl_metric, "l1 | l2 | linf | measurement");
  pl_cmd->add_option("--out", pl_out)->required();

  // ---- grid-search ----
  auto* gs_cmd = app.add_subcommand("grid-search",
                                    "sweep lambda and step size on a validation slice");
  std::string gs_data, gs_weights, gs_lambdas = "10,100,1000", gs_steps = "0.1,0.01,0.001",
              gs_out, gs_mode = "joint-subgradient";
  bool gs_binarize = false;
  long gs_m = 100, gs_images = 5, gs_offset = 0, gs_iters = 500, gs_restarts = 3;
  double gs_noise = 0.1;
  std::uint64_t gs_seed = 0;
  gs_cmd->add_option("--data", gs_data)->required();
  gs_cmd->add_flag("--binarize", gs_binarize);
  gs_cmd->add_option("--weights", gs_weights)->required();
  gs_cmd->add_option("--m", gs_m);
  gs_cmd->add_option("--images", gs_images);
  gs_cmd->add_option("--offset", gs_offset);
  gs_cmd->add_option("--lambdas", gs_lambdas);
  gs_cmd->add_option("--steps", gs_steps);
  gs_cmd->add_option("--iters", gs_iters);
  gs_cmd->add_option("--restarts", gs_restarts);
  gs_cmd->add_option("--mode", gs_mode);
  gs_cmd->add_option("--noise-std", gs_noise);
  gs_cmd->add_option("--base-seed", gs_seed);
  gs_cmd->add_option("--out", gs_out)->required();

  try {
    app.parse(argc, argv);

    if (make_data->parsed()) return cmd_make_data(md_kind, md_count, md_seed, md_out);

    if (vae_cmd->parsed()) {
      const json file_cfg = load_config_file(vt_config);
      if (vae_cmd->count("--epochs") == 0 && file_cfg.contains("epochs"))
        vt_cfg.epochs = file_cfg.at("epochs").get<long>();
      if (vae_cmd->count("--lr") == 0 && file_cfg.contains("learning_rate"))
        vt_cfg.learning_rate = file_cfg.at("learning_rate").get<double>();
      if (vae_cmd->count("--batch") == 0 && file_cfg.contains("batch_size"))
        vt_cfg.batch_size = file_cfg.at("batch_size").get<long>();
      if (vae_cmd->count("--seed") == 0 && file_cfg.contains("seed"))
        vt_cfg.seed = file_cfg.at("seed").get<std::uint64_t>();
      return cmd_vae_train(vt_data, vt_binarize, vt_limit, vt_hidden, vt_latent, vt_cfg, vt_out,
                           vt_trace);
    }

    if (sense_cmd->parsed()) {
      const Dataset ds = load_dataset(sn_data, sn_binarize);
      if (sn_index < 0 || static_cast<std::size_t>(sn_index) >= ds.images.size())
        throw std::invalid_argument("sense: image index out of range");
      const Signal& x = ds.images[static_cast<std::size_t>(sn_index)];
      SensingEnsemble e;
      if (!sn_load_ens.empty()) {
        e = load_ensemble(sn_load_ens);
      } else {
        const auto scaling = sn_scaling == "std" ? EntryScaling::std_over_m
                                                 : EntryScaling::variance_over_m;
        e = gaussian_ensemble(sn_m, x.size(), sn_noise, ensemble_seed(sn_seed, sn_m, 0), scaling);
      }
      if (!sn_save_ens.empty()) save_ensemble(e, sn_save_ens);
      const Measurements y = sense(e, x, noise_seed(e.seed, sn_index));
      json out{{"m", e.rows()},       {"n", e.cols()},     {"noise_std", e.noise_std},
               {"seed", e.seed},      {"index", sn_index}, {"y", std::vector<double>(y.begin(), y.end())}};
      write_json(out, sn_out);
      return 0;
    }

    if (rec_cmd->parsed()) {
      const Dataset ds = load_dataset(rc_data, rc_binarize);
      if (rc_index < 0 || static_cast<std::size_t>(rc_index) >= ds.images.size())
        throw std::invalid_argument("recover: image index out of range");
      const Signal& x = ds.images[static_cast<std::size_t>(rc_index)];
      const json file_cfg = load_config_file(rc_config);
      SolverConfig cfg = rc_solver.resolve(file_cfg, rec_cmd);
      const std::uint64_t cell = ensemble_seed(rc_seed, rc_m, 0);
      cfg.seed = solver_seed(cell, rc_index, 0);
      const auto e = gaussian_ensemble(rc_m, x.size(), rc_noise, cell);
      const Measurements y = sense(e, x, noise_seed(cell, rc_index));

      RecoveryResult result;
      if (rc_alg == "lasso") {
        result = lasso(e, y, rc_mu, rc_lasso_iters, cfg.clip_lo, cfg.clip_hi);
      } else {
        if (rc_weights.empty())
          throw std::invalid_argument("recover: --weights required for " + rc_alg);
        const auto g = load_weights(rc_weights);
        if (rc_alg == "gen") {
          result = gen_recover(e, y, g, cfg);
        } else if (rc_alg == "sparse-gen") {
          result = sparse_gen(e, y, g, make_signal_basis(parse_basis_kind(rc_basis), x.size()),
                              cfg);
        } else {
          throw std::invalid_argument("unknown algorithm: " + rc_alg);
        }
      }

      const Signal diff = result.x_hat - x;
      json out{{"algorithm", rc_alg},
               {"m", rc_m},
               {"n", x.size()},
               {"seed", rc_seed},
               {"measurement_error", result.measurement_error},
               {"restarts_used", result.restarts_used},
               {"best_restart", result.best_restart},
               {"objective_initial",
                result.objective_trace.empty() ? 0.0 : result.objective_trace.front()},
               {"objective_final",
                result.objective_trace.empty() ? 0.0 : result.objective_trace.back()},
               {"l1_err", diff.lpNorm<1>()},
               {"l2_err", diff.norm()},
               {"linf_err", diff.lpNorm<Eigen::Infinity>()}};
      if (rc_blob.empty()) {
        out["x_hat"] = std::vector<double>(result.x_hat.begin(), result.x_hat.end());
      } else {
        detail::write_xhat_blob(rc_blob, result.x_hat);
        out["xhat_blob"] = rc_blob;
      }
      if (result.z_hat)
        out["z_hat"] = std::vector<double>(result.z_hat->begin(), result.z_hat->end());
      if (result.nu_hat) out["nu_l1"] = result.nu_hat->lpNorm<1>();
      write_json(out, rc_out);
      return 0;
    }

    auto run_grid = [&](CLI::App* cmd, const std::string& data, bool binarize,
                        const std::string& algs, const std::string& ms,
                        const std::string& weights, long images, long offset, long trials,
                        std::uint64_t base_seed, double noise, const std::string& basis,
                        double mu, long lasso_iters, bool timing, bool shared,
                        const std::string& xhat_dir, unsigned threads, const std::string& config,
                        const std::string& out, SolverFlags& solver,
                        const std::string& source_weights) {
      Dataset ds = load_dataset(data, binarize);
      const std::size_t want = static_cast<std::size_t>(std::max<long>(images, 1));
      if (static_cast<std::size_t>(offset) + want > ds.images.size())
        throw std::invalid_argument("experiment: dataset too small for images+offset");
      ds = slice(ds, static_cast<std::size_t>(offset), want);

      const json file_cfg = load_config_file(config);
      ExperimentGrid grid;
      grid.dataset = &ds;
      grid.algorithms = parse_name_list(algs);
      grid.m_values = parse_long_list(ms);
      grid.trials_per_cell = trials;
      grid.base_seed = base_seed;
      grid.solver = solver.resolve(file_cfg, cmd);
      grid.lasso_mu = mu;
      grid.lasso_iterations = lasso_iters;
      grid.noise_std = noise;
      grid.basis = parse_basis_kind(basis);
      grid.shared_matrix = shared;
      grid.timing = timing;
      grid.threads = threads;
      grid.xhat_dir = xhat_dir;

      GeneratorNetwork g;
      const std::string& weight_path = source_weights.empty() ? weights : source_weights;
      if (!weight_path.empty()) {
        g = load_weights(weight_path);
        grid.generator = &g;
      }
      const auto rows = run_experiment(grid);
      write_result_csv(rows, out);
      std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
      return 0;
    };

    if (exp_cmd->parsed())
      return run_grid(exp_cmd, ex_data, ex_binarize, ex_algs, ex_ms, ex_weights, ex_images,
                      ex_offset, ex_trials, ex_base_seed, ex_noise, ex_basis, ex_mu,
                      ex_lasso_iters, ex_timing, ex_shared, ex_xhat, ex_threads, ex_config,
                      ex_out, ex_solver, "");

    if (tr_cmd->parsed())
      return run_grid(tr_cmd, tr_data, tr_binarize, tr_algs, tr_ms, tr_weights, tr_images,
                      tr_offset, tr_trials, tr_base_seed, tr_noise, tr_basis, tr_mu,
                      tr_lasso_iters, tr_timing, tr_shared, tr_xhat, tr_threads, tr_config,
                      tr_out, tr_solver, tr_source);

    if (vf_cmd->parsed()) {
      const auto mode = vf_mode == "supports"     ? CheckMode::sample_supports
                        : vf_mode == "exhaustive" ? CheckMode::exhaustive
                                                  : CheckMode::sample_vectors;
      const auto e = gaussian_ensemble(vf_m, vf_n, 0, vf_matrix_seed);
      json out;
      if (vf_property == "rip") {
        out = report_to_json(check_rip(e.matrix, vf_l, vf_alpha, vf_trials, vf_seed, mode));
      } else if (vf_property == "rec") {
        out = report_to_json(check_rec(e.matrix, vf_l, vf_gamma, vf_trials, vf_seed, mode));
      } else if (vf_property == "srec") {
        GeneratorNetwork g = vf_weights.empty() ? zero_generator(vf_latent, vf_n)
                                                : load_weights(vf_weights);
        out = report_to_json(
            check_srec(e.matrix, g, vf_l, vf_gamma, vf_delta, vf_trials, vf_seed));
      } else if (vf_property == "lemma1") {
        const GeneratorNetwork g = zero_generator(vf_latent, vf_n);
        const double alpha_rip = exhaustive_rip_alpha(e.matrix, 2 * vf_l);
        const double gamma_diff =
            exhaustive_rec_gamma(e.matrix, std::min<Eigen::Index>(vf_n, 4 * vf_l));
        const double alpha = std::max(alpha_rip, 1.0 - gamma_diff);
        if (alpha >= 1)
          throw NumericError("lemma1: matrix fails exhaustive RIP/S-REC (alpha >= 1)");
        const auto report =
            check_lemma1_bound(e, g, vf_l, alpha, vf_delta, vf_eps, vf_trials, vf_seed);
        out = json{{"property", "lemma1"},
                   {"l", vf_l},
                   {"alpha_measured", alpha},
                   {"delta", vf_delta},
                   {"eps_max", vf_eps},
                   {"trials", report.trials},
                   {"violations", report.violations},
                   {"tube_violations", report.tube_violations},
                   {"worst_ratio", report.worst_ratio}};
      } else {
        throw std::invalid_argument("unknown property: " + vf_property);
      }
      write_json(out, vf_out);
      return 0;
    }

    if (pl_cmd->parsed()) {
      plot_svg(read_result_csv(pl_csv), pl_metric, pl_out);
      std::cout << "wrote " << pl_out << "\n";
      return 0;
    }

    if (gs_cmd->parsed()) {
      Dataset ds = load_dataset(gs_data, gs_binarize);
      if (static_cast<std::size_t>(gs_offset + gs_images) > ds.images.size())
        throw std::invalid_argument("grid-search: dataset too small");
      ds = slice(ds, static_cast<std::size_t>(gs_offset), static_cast<std::size_t>(gs_images));
      const auto g = load_weights(gs_weights);

      std::ofstream os(gs_out, std::ios::binary);
      if (!os) throw FormatError("cannot open for writing: " + gs_out);
      os << "lambda,step_size,mean_l2_err,mean_measurement_err\n";
      double best_l2 = std::numeric_limits<double>::infinity(), best_lambda = 0, best_step = 0;
      for (const double lambda : parse_double_list(gs_lambdas)) {
        for (const double step : parse_double_list(gs_steps)) {
          ExperimentGrid grid;
          grid.dataset = &ds;
          grid.algorithms = {"sparse-gen"};
          grid.m_values = {gs_m};
          grid.base_seed = gs_seed;
          grid.noise_std = gs_noise;
          grid.generator = &g;
          grid.solver.lambda = lambda;
          grid.solver.step_size = step;
          grid.solver.iterations = gs_iters;
          grid.solver.restarts = gs_restarts;
          grid.solver.mode = parse_solver_mode(gs_mode);
          const auto rows = run_experiment(grid);
          double mean_l2 = 0, mean_me = 0;
          for (const auto& r : rows) {
            mean_l2 += r.l2_err / rows.size();
            mean_me += r.measurement_err / rows.size();
          }
          os << detail::format_double(lambda) << ',' << detail::format_double(step) << ','
             << detail::format_double(mean_l2) << ',' << detail::format_double(mean_me) << "\n";
          if (mean_l2 < best_l2) {
            best_l2 = mean_l2;
            best_lambda = lambda;
            best_step = step;
          }
        }
      }
      std::cout << "best: lambda " << best_lambda << " step " << best_step << " mean_l2 "
                << best_l2 << "\n";
      return 0;
    }

    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const sparsegen::FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const sparsegen::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
