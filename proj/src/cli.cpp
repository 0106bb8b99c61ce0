#include "wpca/cli.hpp"

#include "wpca/barycenter.hpp"
#include "wpca/error.hpp"
#include "wpca/geodesics.hpp"
#include "wpca/io.hpp"
#include "wpca/wpg.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wpca {

namespace {

constexpr const char* kImageConvention =
    "pixel (row, col) centered at (x, y) = (col + 0.5, row + 0.5); y grows downward";

struct Common {
  std::string output_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--output-dir", c.output_dir, "Directory for generated files");
  cmd->add_option("--format", c.format, "Measure file format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", c.seed, "Random seed");
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InvalidArgument("cannot create directory " + dir);
  return p;
}

void save_measure(const fs::path& path, const DiscreteMeasure& m) {
  if (path.extension() == ".json") {
    write_measure_json(path.string(), m);
  } else {
    write_measure_csv(path.string(), m);
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Measure files, with list manifests ({"measures": [...]}) expanded.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (p.extension() == ".json") {
      const auto j = read_json(p);
      if (j.is_object() && j.contains("measures")) {
        for (const auto& item : j.at("measures")) out.push_back(p.parent_path() / item.get<std::string>());
        continue;
      }
    }
    out.push_back(p);
  }
  if (out.empty()) throw InvalidArgument("no input measures");
  return out;
}

std::vector<DiscreteMeasure> load_all(const std::vector<fs::path>& paths) {
  std::vector<DiscreteMeasure> out;
  for (const auto& p : paths) out.push_back(read_measure(p.string()));
  return out;
}

std::string fixed_label(double t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << t;
  return os.str();
}

// ---------------------------------------------------------------- ingest

struct IngestImages {
  Common common;
  std::vector<std::string> images;
};

int ingest_images(const IngestImages& o) {
  const auto dir = prepare_dir(o.common.output_dir);
  json manifest;
  manifest["coordinate_convention"] = kImageConvention;
  manifest["measures"] = json::array();
  std::vector<Index> shape;
  for (const auto& img_path : o.images) {
    const auto img = read_pgm(img_path);
    if (shape.empty()) shape = {img.rows(), img.cols()};
    if (shape[0] != img.rows() || shape[1] != img.cols()) {
      spdlog::warn("{} is {}x{}, the first image was {}x{}", img_path, img.rows(), img.cols(), shape[0], shape[1]);
    }
    const auto name = fs::path(img_path).stem().string() + "." + o.common.format;
    save_measure(dir / name, image_to_measure(img));
    manifest["measures"].push_back(name);
  }
  manifest["image_shape"] = shape;
  write_json(dir / "manifest.json", manifest);
  spdlog::info("wrote {} measures to {}", o.images.size(), dir.string());
  return 0;
}

struct IngestColors {
  Common common;
  std::vector<std::string> images;
  Index k = 128;
};

int ingest_colors(const IngestColors& o) {
  const auto dir = prepare_dir(o.common.output_dir);
  json manifest;
  manifest["coordinate_convention"] = "RGB in [0,1]^3";
  manifest["measures"] = json::array();
  for (const auto& img_path : o.images) {
    const auto m = quantize_colors(rgb_points(read_ppm(img_path)), o.k, o.common.seed);
    const auto name = fs::path(img_path).stem().string() + "." + o.common.format;
    save_measure(dir / name, m);
    manifest["measures"].push_back(name);
  }
  write_json(dir / "manifest.json", manifest);
  return 0;
}

// ------------------------------------------------------------ barycenter

struct BarycenterCmd {
  Common common;
  std::vector<std::string> inputs;
  std::string mode = "free";
  int restarts = 1;
  bool no_input_starts = false;
  Index p = 0;
  double epsilon = 0.0;
  bool epsilon_relative = false;
  int max_iter = 0;
  std::string grid;  // HxW pixel grid for fixed mode
  std::string transport = "exact";
  std::string output;
};

Eigen::MatrixXd pixel_grid(const std::string& spec) {
  const auto x = spec.find('x');
  Index h = 0, w = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(spec);
    h = std::stol(spec.substr(0, x));
    w = std::stol(spec.substr(x + 1));
  } catch (const std::logic_error&) {
    throw InvalidArgument("grid must look like HxW");
  }
  if (h <= 0 || w <= 0) throw InvalidArgument("grid must be positive");
  Eigen::MatrixXd g(2, h * w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) g.col(r * w + c) << c + 0.5, r + 0.5;
  }
  return g;
}

// Union of the input supports in lexicographic order.
Eigen::MatrixXd support_union(const std::vector<DiscreteMeasure>& ms) {
  std::map<std::vector<double>, Index> pts;
  for (const auto& m : ms) {
    for (Index j = 0; j < m.size(); ++j) {
      pts.emplace(std::vector<double>(m.locations().col(j).data(), m.locations().col(j).data() + m.dim()), 0);
    }
  }
  Eigen::MatrixXd g(ms.front().dim(), static_cast<Index>(pts.size()));
  Index j = 0;
  for (auto& [x, idx] : pts) {
    idx = j;
    for (Index k = 0; k < g.rows(); ++k) g(k, j) = x[static_cast<std::size_t>(k)];
    ++j;
  }
  return g;
}

std::vector<Eigen::VectorXd> histograms_on(const Eigen::MatrixXd& grid, const std::vector<DiscreteMeasure>& ms) {
  std::map<std::vector<double>, Index> index;
  for (Index j = 0; j < grid.cols(); ++j) {
    index.emplace(std::vector<double>(grid.col(j).data(), grid.col(j).data() + grid.rows()), j);
  }
  std::vector<Eigen::VectorXd> out;
  for (const auto& m : ms) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(grid.cols());
    for (Index j = 0; j < m.size(); ++j) {
      const auto it = index.find(std::vector<double>(m.locations().col(j).data(), m.locations().col(j).data() + m.dim()));
      if (it == index.end()) throw InvalidArgument("input atom outside the fixed support grid");
      h[it->second] += m.weights()[j];
    }
    out.push_back(h);
  }
  return out;
}

int barycenter_cmd(const BarycenterCmd& o) {
  const auto measures = load_all(expand_inputs(o.inputs));
  DiscreteMeasure bar;
  if (o.mode == "fixed") {
    const Eigen::MatrixXd grid = o.grid.empty() ? support_union(measures) : pixel_grid(o.grid);
    FixedSupportOptions opts;
    opts.epsilon = o.epsilon;
    if (o.epsilon_relative) opts.epsilon *= cost_matrix(grid, grid).mean();
    if (o.max_iter > 0) opts.max_iter = o.max_iter;
    const auto res = barycenter_fixed_support(histograms_on(grid, measures), grid, opts);
    if (!res.converged) spdlog::warn("fixed-support barycenter stopped after {} iterations", res.iterations);
    bar = res.barycenter;
  } else if (o.mode == "free") {
    FreeSupportOptions opts;
    opts.support_size = o.p > 0 ? o.p : measures.front().size();
    opts.seed = o.common.seed;
    opts.restarts = o.restarts;
    opts.input_starts = !o.no_input_starts;
    if (o.max_iter > 0) opts.max_iter = o.max_iter;
    if (o.transport == "sinkhorn") {
      if (o.epsilon_relative) throw InvalidArgument("relative epsilon is only defined in fixed mode");
      opts.method = TransportMethod::entropic(o.epsilon);
    }
    bar = barycenter_free_support(measures, opts).barycenter;
  } else {
    bar = barycenter_multimarginal_exact(measures);
  }
  const fs::path out = o.output.empty() ? prepare_dir(o.common.output_dir) / ("barycenter." + o.common.format)
                                        : fs::path(o.output);
  if (out.has_parent_path()) prepare_dir(out.parent_path().string());
  save_measure(out, bar);
  spdlog::info("barycenter with {} atoms written to {}", bar.size(), out.string());
  return 0;
}

// ----------------------------------------------------------- interpolate

struct InterpolateCmd {
  Common common;
  std::vector<std::string> inputs;
  int t_samples = 5;
  std::string plan_csv;
};

int interpolate_cmd(const InterpolateCmd& o) {
  if (o.inputs.size() != 2) throw InvalidArgument("interpolate takes exactly two measures");
  if (o.t_samples < 2) throw InvalidArgument("--t-samples must be at least 2");
  const auto nu = read_measure(o.inputs[0]);
  const auto eta = read_measure(o.inputs[1]);
  const auto dir = prepare_dir(o.common.output_dir);
  json manifest;
  manifest["samples"] = json::array();
  for (int k = 0; k < o.t_samples; ++k) {
    const double t = static_cast<double>(k) / (o.t_samples - 1);
    const auto name = "interpolant_t" + fixed_label(t) + "." + o.common.format;
    save_measure(dir / name, mccann_interpolant(nu, eta, t));
    manifest["samples"].push_back({{"t", t}, {"path", name}});
  }
  write_json(dir / "interpolation.json", manifest);
  if (!o.plan_csv.empty()) {
    const auto plan = exact_transport(nu.weights(), eta.weights(), cost_matrix(nu.locations(), eta.locations()));
    write_plan_csv(plan, o.plan_csv);
  }
  return 0;
}

// ------------------------------------------------------------------- wpg

struct WpgCmd {
  Common common;
  std::vector<std::string> inputs;
  std::string base;
  int components = 1;
  double epsilon = 0.0;
  bool epsilon_relative = false;
  double lambda = 1.0;
  double beta = 0.0;
  int grid_k = 17;
  int max_iter = 200;
  double tol = 1e-5;
  std::vector<double> t_samples{0.0, 0.25, 0.5, 0.75, 1.0};
  std::string transport = "exact";
  std::string projection = "auto";
  double relaxation = 1.0;
  bool translation_only = false;
};

int wpg_cmd(const WpgCmd& o) {
  const auto paths = expand_inputs(o.inputs);
  const auto measures = load_all(paths);
  const auto base = read_measure(o.base);

  SolverConfig cfg;
  cfg.lambda = o.lambda;
  if (o.beta > 0.0) cfg.beta = o.beta;
  cfg.grid_k = o.grid_k;
  cfg.n_components = o.components;
  cfg.max_outer_iter = o.max_iter;
  cfg.obj_tol = o.tol;
  cfg.seed = o.common.seed;
  cfg.transport_solver = o.transport == "sinkhorn" ? TransportMethod::Kind::sinkhorn
                                                   : TransportMethod::Kind::exact;
  cfg.projection_solver = o.projection == "exact"      ? ProjectionSolver::exact
                          : o.projection == "sinkhorn" ? ProjectionSolver::sinkhorn
                                                       : ProjectionSolver::automatic;
  cfg.fields = o.translation_only ? FieldFamily::translation : FieldFamily::general;
  cfg.sinkhorn_relaxation = o.relaxation;
  cfg.epsilon = o.epsilon;
  if (o.epsilon_relative) {
    const auto compact = base.without_null_atoms();
    double mean = 0.0;
    for (const auto& m : measures) mean += cost_matrix(compact.locations(), m.locations()).mean();
    cfg.epsilon *= mean / static_cast<double>(measures.size());
  }
  for (double t : o.t_samples) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("sample times must lie in [0,1]");
  }

  const auto res = fit(measures, base, cfg);

  const auto dir = prepare_dir(o.common.output_dir);
  const std::string ext = "." + o.common.format;
  save_measure(dir / ("base" + ext), res.base);
  json manifest;
  manifest["config"] = {{"lambda", cfg.lambda},
                        {"beta", cfg.beta ? json(*cfg.beta) : json(nullptr)},
                        {"beta_default", 1.0 / (2.0 * static_cast<double>(measures.size()))},
                        {"grid_k", cfg.grid_k},
                        {"epsilon", cfg.epsilon},
                        {"n_components", cfg.n_components},
                        {"max_outer_iter", cfg.max_outer_iter},
                        {"obj_tol", cfg.obj_tol},
                        {"seed", cfg.seed},
                        {"transport_solver", o.transport},
                        {"projection_solver", o.projection},
                        {"sinkhorn_relaxation", cfg.sinkhorn_relaxation},
                        {"fields", o.translation_only ? "translation" : "general"},
                        {"t_samples", o.t_samples}};
  manifest["base_measure_path"] = "base" + ext;
  manifest["coordinate_convention"] = kImageConvention;
  manifest["inputs"] = json::array();
  for (const auto& p : paths) {
    manifest["inputs"].push_back(fs::relative(fs::absolute(p), fs::absolute(dir)).generic_string());
  }
  manifest["components"] = json::array();
  for (std::size_t c = 0; c < res.components.size(); ++c) {
    const auto& comp = res.components[c];
    const std::string stem = "component_" + std::to_string(c + 1);
    write_field_csv((dir / (stem + "_v1.csv")).string(), comp.v1);
    write_field_csv((dir / (stem + "_v2.csv")).string(), comp.v2);
    json entry;
    entry["v1_path"] = stem + "_v1.csv";
    entry["v2_path"] = stem + "_v2.csv";
    entry["samples"] = json::array();
    const auto g = res.geodesic(c);
    for (double t : o.t_samples) {
      const auto name = stem + "_t" + fixed_label(t) + ext;
      save_measure(dir / name, sample_geodesic(g, t));
      entry["samples"].push_back({{"t", t}, {"path", name}});
    }
    entry["objective_trace"] = comp.objective_trace;
    entry["projection_times"] = comp.projection_times;
    entry["iterations"] = comp.iterations;
    entry["converged"] = comp.converged;
    // Every candidate step, including rejected ones.
    entry["steps"] = json::array();
    for (const auto& st : comp.steps) {
      entry["steps"].push_back({{"step", st.step},
                                {"halvings", st.halvings},
                                {"surrogate_start", st.surrogate_start},
                                {"surrogate_gradient", st.surrogate_gradient},
                                {"surrogate_projected", st.surrogate_projected},
                                {"objective", st.objective},
                                {"accepted", st.accepted}});
    }
    manifest["components"].push_back(entry);
  }
  write_json(dir / "manifest.json", manifest);
  spdlog::info("manifest written to {}", (dir / "manifest.json").string());
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderCmd {
  Common common;
  std::vector<std::string> inputs;
  std::string kind = "scatter";
  std::string output;
  std::string manifest;
  Index height = 0;
  Index width = 0;
  bool y_down = false;
  std::vector<Index> axes{0, 1};
  std::vector<std::string> labels;
  std::string title;
};

void render_measures(const std::vector<DiscreteMeasure>& ms, const std::vector<std::string>& labels,
                     const RenderCmd& o, const fs::path& out) {
  if (out.has_parent_path()) prepare_dir(out.parent_path().string());
  if (o.kind == "scatter") {
    std::vector<ScatterLayer> layers;
    for (std::size_t i = 0; i < ms.size(); ++i) layers.push_back({ms[i], i < labels.size() ? labels[i] : ""});
    ScatterOptions so;
    so.y_down = o.y_down;
    so.title = o.title;
    if (o.axes.size() != 2) throw InvalidArgument("--axes takes two coordinates");
    so.axes = {o.axes[0], o.axes[1]};
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + out.string());
    f << render_scatter_svg(layers, so);
  } else if (o.kind == "raster") {
    if (ms.size() != 1) throw InvalidArgument("raster rendering takes one measure");
    if (o.height <= 0 || o.width <= 0) throw InvalidArgument("--height and --width are required");
    write_pgm(out.string(), measure_to_raster(ms.front(), o.height, o.width));
  } else {
    if (ms.size() != 1) throw InvalidArgument("palette rendering takes one measure");
    write_ppm(out.string(), render_palette_strip(ms.front(), o.width > 0 ? o.width : 400,
                                                 o.height > 0 ? o.height : 40));
  }
}

std::string extension_for(const std::string& kind) {
  return kind == "scatter" ? ".svg" : kind == "raster" ? ".pgm" : ".ppm";
}

int render_cmd(const RenderCmd& o) {
  if (!o.manifest.empty()) {
    // One figure per component (scatter) or per sample (raster, palette).
    const fs::path mpath(o.manifest);
    const auto j = read_json(mpath);
    const auto dir = prepare_dir(o.common.output_dir);
    const auto root = mpath.parent_path();
    for (std::size_t c = 0; c < j.at("components").size(); ++c) {
      const auto& comp = j.at("components")[c];
      const std::string stem = "component_" + std::to_string(c + 1);
      std::vector<DiscreteMeasure> ms;
      std::vector<std::string> labels;
      for (const auto& s : comp.at("samples")) {
        ms.push_back(read_measure((root / s.at("path").get<std::string>()).string()));
        labels.push_back("t = " + fixed_label(s.at("t").get<double>()));
      }
      if (o.kind == "scatter") {
        render_measures(ms, labels, o, dir / (stem + ".svg"));
      } else {
        for (std::size_t i = 0; i < ms.size(); ++i) {
          const auto t = comp.at("samples")[i].at("t").get<double>();
          render_measures({ms[i]}, {}, o, dir / (stem + "_t" + fixed_label(t) + extension_for(o.kind)));
        }
      }
    }
    return 0;
  }
  if (o.inputs.empty()) throw InvalidArgument("nothing to render");
  const auto paths = expand_inputs(o.inputs);
  std::vector<std::string> labels = o.labels;
  if (labels.empty()) {
    for (const auto& p : paths) labels.push_back(p.stem().string());
  }
  const fs::path out = o.output.empty() ? prepare_dir(o.common.output_dir) / ("render" + extension_for(o.kind))
                                        : fs::path(o.output);
  render_measures(load_all(paths), labels, o, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Wasserstein principal geodesics toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  IngestImages ii;
  auto* c_ii = app.add_subcommand("ingest-images", "Grayscale PGM images to measures on pixel centers");
  add_common(c_ii, ii.common);
  c_ii->add_option("images", ii.images, "PGM files")->required()->check(CLI::ExistingFile);

  IngestColors ic;
  auto* c_ic = app.add_subcommand("ingest-colors", "PPM images to k-means color palettes");
  add_common(c_ic, ic.common);
  c_ic->add_option("images", ic.images, "PPM files")->required()->check(CLI::ExistingFile);
  c_ic->add_option("-k,--k", ic.k, "Palette size")->check(CLI::PositiveNumber);

  BarycenterCmd bc;
  auto* c_bc = app.add_subcommand("barycenter", "Wasserstein barycenter of measures");
  add_common(c_bc, bc.common);
  c_bc->add_option("inputs", bc.inputs, "Measure files or list manifests")->required();
  c_bc->add_option("--mode", bc.mode, "fixed, free or exact")->check(CLI::IsMember({"fixed", "free", "exact"}));
  c_bc->add_option("--p", bc.p, "Support size (free mode)");
  c_bc->add_option("--restarts", bc.restarts, "Pooled k-means starts (free mode)")->check(CLI::PositiveNumber);
  c_bc->add_flag("--no-input-starts", bc.no_input_starts, "Skip the per-input starts (free mode)");
  c_bc->add_option("--epsilon", bc.epsilon, "Entropic regularization");
  c_bc->add_flag("--epsilon-relative", bc.epsilon_relative, "Scale epsilon by the mean grid cost");
  c_bc->add_option("--max-iter", bc.max_iter, "Iteration cap");
  c_bc->add_option("--grid", bc.grid, "Fixed support: HxW pixel grid (default: union of supports)");
  c_bc->add_option("--transport", bc.transport, "Plans in free mode")->check(CLI::IsMember({"exact", "sinkhorn"}));
  c_bc->add_option("-o,--output", bc.output, "Output measure file");

  InterpolateCmd ip;
  auto* c_ip = app.add_subcommand("interpolate", "McCann interpolation between two measures");
  add_common(c_ip, ip.common);
  c_ip->add_option("inputs", ip.inputs, "Two measure files")->required()->expected(2);
  c_ip->add_option("--t-samples", ip.t_samples, "Number of evenly spaced times");
  c_ip->add_option("--plan-csv", ip.plan_csv, "Also write the optimal plan as row,col,mass");

  WpgCmd wp;
  auto* c_wp = app.add_subcommand("wpg", "Wasserstein principal geodesics");
  add_common(c_wp, wp.common);
  c_wp->add_option("inputs", wp.inputs, "Measure files or list manifests")->required();
  c_wp->add_option("--base", wp.base, "Barycenter of the inputs")->required()->check(CLI::ExistingFile);
  c_wp->add_option("--components", wp.components, "Number of components")->check(CLI::PositiveNumber);
  c_wp->add_option("--epsilon", wp.epsilon, "Sinkhorn regularization");
  c_wp->add_flag("--epsilon-relative", wp.epsilon_relative, "Scale epsilon by the mean base-to-input cost");
  c_wp->add_option("--lambda", wp.lambda, "Weight of the proportionality penalty");
  c_wp->add_option("--beta", wp.beta, "Gradient step (default 1/(2N))");
  c_wp->add_option("--grid-k", wp.grid_k, "Size of the t grid");
  c_wp->add_option("--max-iter", wp.max_iter, "Outer iteration cap");
  c_wp->add_option("--tol", wp.tol, "Relative objective tolerance");
  c_wp->add_option("--t-samples", wp.t_samples, "Times at which each component is sampled");
  c_wp->add_option("--transport", wp.transport, "Solver of the t search")->check(CLI::IsMember({"exact", "sinkhorn"}));
  c_wp->add_option("--projection", wp.projection, "Solver of the map projections")
      ->check(CLI::IsMember({"auto", "exact", "sinkhorn"}));
  c_wp->add_option("--sinkhorn-relaxation", wp.relaxation, "Over-relaxation of Sinkhorn sweeps, in (0, 2)");
  c_wp->add_flag("--translation-only", wp.translation_only, "Restrict fields to translations");

  RenderCmd rc;
  auto* c_rc = app.add_subcommand("render", "SVG scatter plots, PGM rasters and PPM palette strips");
  add_common(c_rc, rc.common);
  c_rc->add_option("inputs", rc.inputs, "Measure files or list manifests");
  c_rc->add_option("--kind", rc.kind, "scatter, raster or palette")->check(CLI::IsMember({"scatter", "raster", "palette"}));
  c_rc->add_option("-o,--output", rc.output, "Output file");
  c_rc->add_option("--manifest", rc.manifest, "Render every component of a wpg manifest");
  c_rc->add_option("--height", rc.height, "Raster or strip height");
  c_rc->add_option("--width", rc.width, "Raster or strip width");
  c_rc->add_flag("--y-down", rc.y_down, "Image convention: y grows downward");
  c_rc->add_option("--axes", rc.axes, "Coordinates shown for 3-D measures")->expected(2);
  c_rc->add_option("--labels", rc.labels, "Legend labels");
  c_rc->add_option("--title", rc.title, "Figure title");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (c_ii->parsed()) return ingest_images(ii);
    if (c_ic->parsed()) return ingest_colors(ic);
    if (c_bc->parsed()) return barycenter_cmd(bc);
    if (c_ip->parsed()) return interpolate_cmd(ip);
    if (c_wp->parsed()) return wpg_cmd(wp);
    if (c_rc->parsed()) return render_cmd(rc);
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 1;
}

}  // namespace wpca
