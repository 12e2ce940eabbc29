#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "predcode/dim.hpp"
#include "predcode/free_energy.hpp"
#include "predcode/io.hpp"
#include "predcode/pcn.hpp"
#include "predcode/rao_ballard.hpp"

namespace predcode::cli {

double RunReport::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw std::out_of_range("no metric '" + std::string(name) + "'");
}

namespace {

namespace fs = std::filesystem;

class Outputs {
 public:
  explicit Outputs(RunReport& report) : report_(report) { fs::create_directories(report.out_dir); }

  fs::path path(const std::string& relative) {
    report_.artifacts.push_back(relative);
    const fs::path p = report_.out_dir / relative;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  void metric(std::string name, double value) { report_.metrics.emplace_back(std::move(name), value); }

 private:
  RunReport& report_;
};

// Rows of `w` as tile_h x tile_w tiles in a near-square grid, each tile
// min-max scaled on its own, separated by one dark pixel.
void write_mosaic(const fs::path& path, const Matrix& w, std::size_t tile_h, std::size_t tile_w) {
  if (w.cols() != tile_h * tile_w) throw DimensionError("write_mosaic", w.shape(), {tile_h, tile_w});
  const std::size_t n = w.rows();
  const std::size_t cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  const std::size_t H = rows * (tile_h + 1) + 1, W = cols * (tile_w + 1) + 1;
  std::vector<double> img(H * W, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto gray = to_gray8(w.row(t));
    const std::size_t oy = 1 + (t / cols) * (tile_h + 1), ox = 1 + (t % cols) * (tile_w + 1);
    for (std::size_t r = 0; r < tile_h; ++r)
      for (std::size_t c = 0; c < tile_w; ++c) img[(oy + r) * W + ox + c] = gray[r * tile_w + c];
  }
  // A 0 and a 255 pixel are always present unless every tile is blank, so
  // the global rescale inside write_pgm is the identity.
  write_pgm(path, img, H, W);
}

Matrix column(const Vector& v) { return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end())); }

// ---- rb_endstopping ---------------------------------------------------------

void run_rb_endstopping(const ExperimentConfig& c, Outputs& out) {
  Rng root(c.seed);
  Rng init = root.split("init");
  Rng data = root.split("data");

  rb::RBConfig cfg;
  cfg.geometry = {c.count("dataset", "patch_size"), c.count("dataset", "patch_size"),
                  c.count("dataset", "overlap"), c.count("dataset", "patches")};
  cfg.l2_units = c.hp_count("l2_units");
  cfg.l3_units = c.hp_count("l3_units");
  cfg.k1 = c.hp("k1");
  cfg.k2 = c.hp("k2");
  cfg.init_range = c.hp("init_range");
  if (cfg.geometry.overlap >= cfg.geometry.width) {
    throw ConfigError("dataset.overlap", "'dataset.overlap' must be smaller than dataset.patch_size");
  }
  if (cfg.l3_units == 0) throw ConfigError("hyperparams.l3_units", "'hyperparams.l3_units' must be >= 1");
  rb::RBHierarchy h = rb::RBHierarchy::create(cfg, init);
  const auto& g = cfg.geometry;
  const std::size_t width = g.image_width();

  rb::BarImageOptions bar;
  bar.max_angle = c.hp("max_angle");
  bar.thickness = c.hp("bar_thickness");
  bar.noise_sd = c.hp("noise_sd");
  std::vector<std::vector<Vector>> dataset;
  for (std::size_t i = 0; i < c.count("dataset", "train_images"); ++i) {
    dataset.push_back(rb::extract_patches(rb::random_bar_image(data, g.height, width, bar), g.height,
                                          g.width, g.overlap));
  }
  const auto train = rb::rb_train(h, dataset, c.hp_count("epochs"), c.hp_count("steps_per_input"));
  {
    CsvWriter csv(out.path("train_curve.csv"), {"epoch", "layer", "mean_j"});
    for (const auto& e : train.curve) csv.field(e.epoch).field(e.layer).field(e.mean_j).end_row();
  }

  rb::BarImageOptions clean = bar;
  clean.noise_sd = 0.0;
  const Matrix rf_bar = rb::centered_bar(g.height, width, g.width, clean);
  const Matrix full_bar = rb::centered_bar(g.height, width, width, clean);
  const std::size_t steps = c.hp_count("test_steps");
  const auto intact = rb::endstopping_experiment(h, rf_bar, full_bar, steps, false);
  const auto ablated = rb::endstopping_experiment(h, rf_bar, full_bar, steps, true);
  {
    CsvWriter csv(out.path("endstopping.csv"), {"stimulus", "length", "feedback", "centre_l2_error"});
    csv.field("rf_width").field(g.width).field("intact").field(intact.e_short).end_row();
    csv.field("full_width").field(width).field("intact").field(intact.e_long).end_row();
    csv.field("rf_width").field(g.width).field("ablated").field(ablated.e_short).end_row();
    csv.field("full_width").field(width).field("ablated").field(ablated.e_long).end_row();
  }
  {
    CsvWriter csv(out.path("infer_trace.csv"),
                  {"stimulus", "feedback", "step", "j1", "j2", "rate", "centre_l2_error"});
    const std::size_t units = h.l2_units(), centre = g.count / 2;
    for (const auto* stim : {&rf_bar, &full_bar}) {
      for (bool ablate : {false, true}) {
        rb::InferOptions opts;
        opts.ablate_feedback = ablate;
        const auto patches = rb::extract_patches(*stim, g.height, g.width, g.overlap);
        const auto trace = rb::rb_infer(h, patches, steps, std::nullopt, opts);
        for (const auto& s : trace.steps) {
          double centre_sq = 0.0;
          for (std::size_t k = 0; k < units; ++k) {
            const double e = s.errors->e2[centre * units + k];
            centre_sq += e * e;
          }
          csv.field(stim == &rf_bar ? "rf_width" : "full_width")
              .field(ablate ? "ablated" : "intact")
              .field(s.step)
              .field(s.j1)
              .field(s.j2)
              .field(s.rate)
              .field(std::sqrt(centre_sq))
              .end_row();
        }
      }
    }
  }
  write_weights(out.path("w2.pcw"), h.w2);
  write_weights(out.path("w3.pcw"), h.w3);
  write_mosaic(out.path("w2_basis.pgm"), h.w2, g.height, g.width);
  write_pgm(out.path("rf_bar.pgm"), rf_bar.span(), g.height, width);
  write_pgm(out.path("full_bar.pgm"), full_bar.span(), g.height, width);

  out.metric("final_j1", train.curve[train.curve.size() - 2].mean_j);
  out.metric("final_j2", train.curve.back().mean_j);
  out.metric("e_rf_width", intact.e_short);
  out.metric("e_full_width", intact.e_long);
  out.metric("ablated_e_rf_width", ablated.e_short);
  out.metric("ablated_e_full_width", ablated.e_long);
  out.metric("endstopping", intact.e_long < intact.e_short ? 1.0 : 0.0);
}

// ---- dim_bars ---------------------------------------------------------------

std::vector<Vector> load_stacked_pgm(const fs::path& path, std::size_t side) {
  const GrayImage img = read_pgm(path);
  if (img.width != side || img.height == 0 || img.height % side != 0) {
    throw ConfigError("dataset.path", path.string() + " is " + std::to_string(img.height) + "x" +
                                          std::to_string(img.width) + "; expected a stack of " +
                                          std::to_string(side) + "x" + std::to_string(side) + " images");
  }
  std::vector<Vector> out;
  for (std::size_t k = 0; k < img.height / side; ++k) {
    Vector v(side * side);
    for (std::size_t i = 0; i < side * side; ++i) v[i] = img.pixels[k * side * side + i] / 255.0;
    out.push_back(std::move(v));
  }
  return out;
}

void run_dim_bars(const ExperimentConfig& c, Outputs& out) {
  Rng root(c.seed);
  Rng init = root.split("init");
  Rng data = root.split("data");
  const std::size_t side = c.count("dataset", "side");
  const std::string& path = c.text("dataset", "path");
  const auto images = path.empty()
                          ? dim::bars_dataset(data, side, c.number("dataset", "p_bar"),
                                              c.count("dataset", "images"))
                          : load_stacked_pgm(path, side);
  if (images.empty()) throw ConfigError("dataset.images", "'dataset.images' must be >= 1");

  dim::DIMModel m = dim::DIMModel::create(c.hp_count("units"), side * side, init, c.hp("init_max"));
  m.eps1 = c.hp("eps1");
  m.eps2 = c.hp("eps2");
  m.beta = c.hp("beta");
  dim::DIMTrainOptions opts;
  opts.epochs = c.hp_count("epochs");
  opts.r_steps = c.hp_count("r_steps");
  opts.normalize_rows = c.flag("hyperparams", "normalize_rows");
  const auto res = dim::dim_train(m, images, opts);
  {
    CsvWriter csv(out.path("kl_curve.csv"), {"epoch", "mean_kl"});
    for (std::size_t e = 0; e < res.epoch_kl.size(); ++e) csv.field(e).field(res.epoch_kl[e]).end_row();
  }
  const auto bars = dim::bar_prototypes(side);
  {
    CsvWriter csv(out.path("recovery.csv"), {"bar", "best_unit", "cosine"});
    for (std::size_t b = 0; b < bars.size(); ++b) {
      std::size_t best = 0;
      double best_cos = -1.0;
      for (std::size_t j = 0; j < m.W.rows(); ++j) {
        const double cs = cosine(m.W.row(j), bars[b].span());
        if (cs > best_cos) best_cos = cs, best = j;
      }
      csv.field(b).field(best).field(best_cos).end_row();
    }
  }
  write_weights(out.path("weights.pcw"), m.W);
  write_mosaic(out.path("basis.pgm"), m.W, side, side);
  out.metric("recovered", static_cast<double>(dim::count_recovered(m.W, bars, c.hp("recovery_threshold"))));
  out.metric("bars", static_cast<double>(bars.size()));
  out.metric("final_kl", res.epoch_kl.empty() ? 0.0 : res.epoch_kl.back());
}

// ---- fe_scalar --------------------------------------------------------------

void run_fe_scalar(const ExperimentConfig& c, Outputs& out) {
  Rng root(c.seed);
  Rng data = root.split("data");
  const double theta_true = c.number("dataset", "theta_true");
  std::vector<double> stream(c.count("dataset", "observations"));
  for (double& u : stream) {
    const double v = data.normal(c.number("dataset", "v_mean"), c.number("dataset", "v_sd"));
    u = theta_true * v + data.normal(0.0, c.number("dataset", "u_noise_sd"));
  }
  if (stream.empty()) throw ConfigError("dataset.observations", "'dataset.observations' must be >= 1");

  fe::ScalarFE s;
  s.v_p = c.hp("v_p");
  s.sigma_p2 = c.hp("sigma_p2");
  s.sigma_u2 = c.hp("sigma_u2");
  s.theta = c.hp("theta");
  if (!(s.sigma_p2 > 0.0)) throw ConfigError("hyperparams.sigma_p2", "'hyperparams.sigma_p2' must be > 0");
  if (!(s.sigma_u2 > 0.0)) throw ConfigError("hyperparams.sigma_u2", "'hyperparams.sigma_u2' must be > 0");
  fe::FEAlgorithmOptions opts;
  opts.dt = c.hp("dt");
  opts.inner_steps = c.hp_count("inner_steps");
  opts.rate = c.hp("rate");
  opts.learn = {c.flag("hyperparams", "learn_v_p"), c.flag("hyperparams", "learn_sigma_p2"),
                c.flag("hyperparams", "learn_sigma_u2"), c.flag("hyperparams", "learn_theta")};
  if (opts.inner_steps == 0) throw ConfigError("hyperparams.inner_steps", "'hyperparams.inner_steps' must be >= 1");

  {
    // Node dynamics for the first observation under the initial parameters.
    CsvWriter csv(out.path("trace.csv"), {"step", "layer", "phi_norm", "e_norm", "F"});
    fe::ScalarFE n = s;
    n.u = stream[0];
    n.phi = n.v_p;
    for (std::size_t t = 0; t <= opts.inner_steps; ++t) {
      const double F = fe::free_energy(n);
      csv.field(t).field(0).field(std::abs(n.u)).field(std::abs(n.e_u)).field(F).end_row();
      csv.field(t).field(1).field(std::abs(n.phi)).field(std::abs(n.e_p)).field(F).end_row();
      if (t < opts.inner_steps) n = fe::scalar_step(n, opts.dt);
    }
  }
  const auto res = fe::run_free_energy_algorithm(s, stream, opts);
  {
    CsvWriter csv(out.path("learning.csv"), {"observation", "u", "phi", "e_p", "e_u", "v_p",
                                              "sigma_p2", "sigma_u2", "theta", "F"});
    for (const auto& o : res.trace) {
      const auto& x = o.settled;
      csv.field(o.index).field(x.u).field(x.phi).field(x.e_p).field(x.e_u).field(x.v_p);
      csv.field(x.sigma_p2).field(x.sigma_u2).field(x.theta).field(o.F).end_row();
    }
  }
  out.metric("theta", res.model.theta);
  out.metric("theta_rel_error", std::abs(res.model.theta - theta_true) / std::abs(theta_true));
  out.metric("v_p", res.model.v_p);
  out.metric("sigma_p2", res.model.sigma_p2);
  out.metric("sigma_u2", res.model.sigma_u2);
}

// ---- fe_multilayer ----------------------------------------------------------

void run_fe_multilayer(const ExperimentConfig& c, Outputs& out) {
  Rng root(c.seed);
  Rng init = root.split("init");
  Rng data = root.split("data");
  const std::string& act = c.text("hyperparams", "activation");
  if (act != "identity" && act != "tanh") {
    throw ConfigError("hyperparams.activation", "'hyperparams.activation' must be identity or tanh, got '" + act + "'");
  }
  const std::size_t levels = c.hp_count("levels");
  if (levels == 0) throw ConfigError("hyperparams.levels", "'hyperparams.levels' must be >= 1");
  std::vector<std::size_t> dims{c.hp_count("input_dim")};
  for (std::size_t l = 0; l < levels; ++l) dims.push_back(c.hp_count("hidden_dim"));
  const double sigma = c.hp("sigma");
  if (!(sigma > 0.0)) throw ConfigError("hyperparams.sigma", "'hyperparams.sigma' must be > 0");

  fe::FENet net = fe::FENet::create(dims, init, c.hp("theta_scale"),
                                    act == "tanh" ? fe::Activation::tanh : fe::Activation::identity);
  for (auto& s : net.sigma) s.fill(sigma);
  net.prior.fill(c.hp("prior"));

  fe::GenHierarchy gen;
  gen.theta = net.theta;
  gen.h = net.h;
  for (std::size_t l = 0; l < levels; ++l) gen.sigma.emplace_back(dims[l], c.number("dataset", "obs_noise"));
  Vector top(dims.back());
  for (double& v : top) v = data.normal(0.0, c.number("dataset", "cause_sd"));
  fe::fenet_set_observation(net, fe::generative_sample(gen, top, data));

  const double dt = c.hp("dt");
  const std::size_t steps = c.hp_count("steps");
  const std::size_t every = std::max<std::size_t>(1, c.hp_count("log_every"));
  CsvWriter csv(out.path("trace.csv"), {"step", "layer", "phi_norm", "e_norm", "F"});
  auto log = [&](std::size_t step) {
    for (std::size_t l = 0; l < net.levels(); ++l) {
      csv.field(step).field(l).field(norm(net.phi[l])).field(norm(net.e[l])).field("").end_row();
    }
  };
  for (std::size_t t = 0; t < steps; ++t) {
    if (t % every == 0) log(t);
    net = fe::fenet_step(net, dt);
  }
  log(steps);
  for (std::size_t l = 0; l < net.levels(); ++l) require_finite(net.phi[l].span(), "fe_multilayer");
  out.metric("residual", fe::fenet_residual(net));
  out.metric("top_cause_error", norm(sub(net.phi.back(), top)));
}

// ---- pcn_classify -----------------------------------------------------------

pcn::Dataset make_dataset(const ExperimentConfig& c, Rng& rng, std::size_t n) {
  const std::string& source = c.text("dataset", "source");
  if (source == "raster_digits") {
    return pcn::raster_digits(rng, n, c.number("dataset", "flip_prob"), c.number("dataset", "noise_sd"));
  }
  if (source == "two_moons") return pcn::two_moons(rng, n, c.number("dataset", "moons_noise"));
  if (source == "two_gaussians") {
    return pcn::two_gaussians(rng, n, c.count("dataset", "gauss_dim"), c.number("dataset", "separation"),
                              c.number("dataset", "gauss_sd"));
  }
  throw ConfigError("dataset.source", "'dataset.source' must be raster_digits, two_moons or two_gaussians, got '" +
                                          source + "'");
}

void save_pcn(const pcn::PCNNet& n, pcn::Mode mode, Outputs& out) {
  const std::string dir = "weights/" + std::string(pcn::mode_name(mode)) + "/";
  nlohmann::ordered_json manifest;
  manifest["mode"] = pcn::mode_name(mode);
  manifest["T"] = n.T;
  manifest["k1"] = n.k1;
  manifest["beta"] = n.beta;
  manifest["skip"] = n.skip;
  manifest["matrices"] = nlohmann::json::array();
  auto save = [&](const std::string& name, const Matrix& m) {
    const std::string file = name + ".pcw";
    write_weights(out.path(dir + file), m);
    manifest["matrices"].push_back({{"name", name}, {"file", file}, {"rows", m.rows()}, {"cols", m.cols()}});
  };
  for (std::size_t l = 0; l < n.depth(); ++l) {
    const std::string p = "layer" + std::to_string(l + 1) + "_";
    save(p + "W_ff", n.layers[l].W_ff);
    save(p + "b", column(n.layers[l].b));
    save(p + "W_fb", n.layers[l].W_fb);
  }
  save("head", n.head);
  save("head_b", column(n.head_b));
  std::ofstream(out.path(dir + "manifest.json")) << manifest.dump(2) << '\n';
}

void run_pcn_classify(const ExperimentConfig& c, Outputs& out) {
  Rng root(c.seed);
  Rng init = root.split("init");
  Rng train_rng = root.split("train");
  Rng test_rng = root.split("test");
  const auto train = make_dataset(c, train_rng, c.count("dataset", "train"));
  const auto test = make_dataset(c, test_rng, c.count("dataset", "test"));
  if (train.empty() || test.empty()) throw ConfigError("dataset.train", "train and test sets must be non-empty");

  pcn::Mode mode;
  try {
    mode = pcn::parse_mode(c.text("hyperparams", "mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("hyperparams.mode", std::string("'hyperparams.mode': ") + e.what());
  }
  std::size_t classes = 0;
  for (const auto& s : train) classes = std::max(classes, s.label + 1);
  pcn::PCNConfig cfg;
  cfg.dims = {train.front().x.size()};
  for (std::size_t l = 0; l < c.hp_count("layers"); ++l) cfg.dims.push_back(c.hp_count("hidden"));
  cfg.classes = classes;
  cfg.T = c.hp_count("T");
  cfg.max_T = c.hp_count("max_T");
  cfg.k1 = c.hp("k1");
  cfg.beta = c.hp("beta");
  cfg.skip = c.flag("hyperparams", "skip");
  if (cfg.dims.size() < 2) throw ConfigError("hyperparams.layers", "'hyperparams.layers' must be >= 1");
  if (cfg.T > cfg.max_T) throw ConfigError("hyperparams.T", "'hyperparams.T' exceeds hyperparams.max_T");
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw ConfigError("hyperparams.beta", "'hyperparams.beta' must be in [0, 1]");
  if (cfg.skip && cfg.dims[0] != cfg.dims[1]) {
    throw ConfigError("hyperparams.skip", "'hyperparams.skip' needs hidden == input width");
  }
  const pcn::PCNNet base = pcn::PCNNet::create(cfg, init);

  std::vector<pcn::Mode> modes;
  if (c.flag("hyperparams", "baseline") && mode != pcn::Mode::plain) modes.push_back(pcn::Mode::plain);
  modes.push_back(mode);

  CsvWriter log(out.path("train_log.csv"),
                {"step", "mode", "T", "cross_entropy", "sum_sq_pred_error", "accuracy"});
  CsvWriter test_csv(out.path("test_metrics.csv"),
                     {"mode", "T", "accuracy", "cross_entropy", "error_before", "error_after"});
  for (pcn::Mode m : modes) {
    pcn::PCNNet net = base;
    Rng shuffle = root.split("shuffle");
    pcn::PCNTrainOptions opts;
    opts.epochs = c.hp_count("epochs");
    opts.batch = c.hp_count("batch");
    opts.lr = c.hp("lr");
    opts.mode = m;
    if (opts.batch == 0) throw ConfigError("hyperparams.batch", "'hyperparams.batch' must be >= 1");
    for (const auto& e : pcn::pcn_train(net, train, opts, shuffle)) {
      log.field(e.step).field(pcn::mode_name(e.mode)).field(e.T).field(e.cross_entropy);
      log.field(e.sum_sq_pred_error).field(e.accuracy).end_row();
    }
    const auto ev = pcn::pcn_evaluate(net, test, m);
    const std::size_t T = m == pcn::Mode::plain ? 0 : net.T;
    test_csv.field(pcn::mode_name(m)).field(T).field(ev.accuracy).field(ev.cross_entropy);
    test_csv.field(ev.error_before).field(ev.error_after).end_row();
    save_pcn(net, m, out);
    const std::string p(pcn::mode_name(m));
    out.metric(p + "_test_accuracy", ev.accuracy);
    out.metric(p + "_test_cross_entropy", ev.cross_entropy);
    out.metric(p + "_error_before", ev.error_before);
    out.metric(p + "_error_after", ev.error_after);
  }
}

void write_manifest(const ExperimentConfig& c, const RunReport& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["wall_time_s"] = r.wall_time_s;
  j["config"] = to_ini(c);
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  j["artifacts"] = r.artifacts;
  std::ofstream out(r.out_dir / "manifest.json");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (r.out_dir / "manifest.json").string());
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport report;
  report.experiment = config.experiment;
  report.seed = config.seed;
  report.out_dir = config.out_dir;
  Outputs out(report);
  const auto start = std::chrono::steady_clock::now();
  if (config.experiment == "rb_endstopping") run_rb_endstopping(config, out);
  else if (config.experiment == "dim_bars") run_dim_bars(config, out);
  else if (config.experiment == "fe_scalar") run_fe_scalar(config, out);
  else if (config.experiment == "fe_multilayer") run_fe_multilayer(config, out);
  else if (config.experiment == "pcn_classify") run_pcn_classify(config, out);
  else throw ConfigError("run.experiment", "unknown experiment '" + config.experiment + "'");
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& a : report.artifacts) {
    if (!fs::exists(report.out_dir / a)) throw std::runtime_error("artifact missing after run: " + a);
  }
  write_manifest(config, report);
  return report;
}

std::vector<RunReport> run_trials(const ExperimentConfig& config, std::size_t trials,
                                  std::size_t threads) {
  if (trials == 0) throw std::invalid_argument("run_trials: trials must be >= 1");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, trials);

  std::vector<RunReport> reports(trials);
  std::vector<std::exception_ptr> errors(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      ExperimentConfig c = config;
      c.seed = config.seed + i;
      c.out_dir = config.out_dir / ("trial_" + std::to_string(i));
      try {
        reports[i] = run_experiment(c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::string> header{"trial", "seed"};
  for (const auto& [k, v] : reports.front().metrics) header.push_back(k);
  CsvWriter csv(config.out_dir / "trials.csv", header);
  for (std::size_t i = 0; i < trials; ++i) {
    csv.field(i).field(static_cast<long long>(reports[i].seed));
    for (const auto& [k, v] : reports[i].metrics) csv.field(v);
    csv.end_row();
  }
  return reports;
}

}  // namespace predcode::cli
