#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <sstream>

#include "sparsegen/recover.hpp"
#include "sparsegen/vae.hpp"

namespace sparsegen {

enum class SignalDomain { continuous, binary };

struct Dataset {
  std::string name;
  std::vector<Signal> images;  // flattened, values in [0,1]
  SignalDomain domain = SignalDomain::continuous;
};

namespace detail {

inline std::uint32_t read_u32_be(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("truncated ") + what);
  return static_cast<std::uint32_t>(b[0]) << 24 | static_cast<std::uint32_t>(b[1]) << 16 |
         static_cast<std::uint32_t>(b[2]) << 8 | static_cast<std::uint32_t>(b[3]);
}

inline void write_u32_be(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
               static_cast<char>(v)};
  os.write(b, 4);
}

}  // namespace detail

// IDX image container (big-endian, magic 0x00000803, u8 pixels). Pixels are
// scaled by 1/255; the binarize flag thresholds at 0.5 instead.
inline Dataset load_idx(const std::filesystem::path& path, bool binarize = false) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  const std::uint32_t magic = detail::read_u32_be(is, "idx header");
  if (magic != 0x00000803u) throw FormatError("bad idx magic: " + path.string());
  const std::uint32_t count = detail::read_u32_be(is, "idx header");
  const std::uint32_t rows = detail::read_u32_be(is, "idx header");
  const std::uint32_t cols = detail::read_u32_be(is, "idx header");
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw FormatError("idx dimension mismatch: bad image shape");
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buffer(pixels);
  Dataset ds;
  ds.name = path.stem().string();
  ds.domain = binarize ? SignalDomain::binary : SignalDomain::continuous;
  ds.images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!is.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(pixels)))
      throw FormatError("truncated idx payload: " + path.string());
    Signal img(static_cast<Eigen::Index>(pixels));
    for (std::size_t p = 0; p < pixels; ++p) {
      const double v = buffer[p] / 255.0;
      img[static_cast<Eigen::Index>(p)] = binarize ? (v >= 0.5 ? 1.0 : 0.0) : v;
    }
    ds.images.push_back(std::move(img));
  }
  if (is.get() != EOF) throw FormatError("idx dimension mismatch: trailing bytes");
  return ds;
}

inline void save_idx(const Dataset& ds, const std::filesystem::path& path, Eigen::Index side = 28) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  detail::write_u32_be(os, 0x00000803u);
  detail::write_u32_be(os, static_cast<std::uint32_t>(ds.images.size()));
  detail::write_u32_be(os, static_cast<std::uint32_t>(side));
  detail::write_u32_be(os, static_cast<std::uint32_t>(side));
  for (const auto& img : ds.images) {
    if (img.size() != side * side) throw FormatError("save_idx: image size mismatch");
    for (Eigen::Index p = 0; p < img.size(); ++p)
      os.put(static_cast<char>(std::lround(std::clamp(img[p], 0.0, 1.0) * 255.0)));
  }
  if (!os) throw FormatError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic stroke corpora. Real handwriting datasets are not bundled; these
// generators produce deterministic 28x28 images with the same gross structure
// (dark background, bright low-dimensional stroke patterns) so the full
// train/sense/recover pipeline runs self-contained at desk scale.
// ---------------------------------------------------------------------------

namespace detail {

struct Stroke {
  double x0, y0, x1, y1, x2, y2;  // quadratic Bezier control points
};

inline void stamp_stroke(Signal& img, const Stroke& s, double sigma, Eigen::Index side) {
  const int samples = 64;
  const double reach = 3.0 * sigma;
  for (int t = 0; t < samples; ++t) {
    const double u = static_cast<double>(t) / (samples - 1);
    const double w0 = (1 - u) * (1 - u), w1 = 2 * (1 - u) * u, w2 = u * u;
    const double px = w0 * s.x0 + w1 * s.x1 + w2 * s.x2;
    const double py = w0 * s.y0 + w1 * s.y1 + w2 * s.y2;
    const int lo_r = std::max(0, static_cast<int>(std::floor(py - reach)));
    const int hi_r = std::min(static_cast<int>(side) - 1, static_cast<int>(std::ceil(py + reach)));
    const int lo_c = std::max(0, static_cast<int>(std::floor(px - reach)));
    const int hi_c = std::min(static_cast<int>(side) - 1, static_cast<int>(std::ceil(px + reach)));
    for (int r = lo_r; r <= hi_r; ++r)
      for (int c = lo_c; c <= hi_c; ++c) {
        const double d2 = (r - py) * (r - py) + (c - px) * (c - px);
        const double v = std::exp(-d2 / (2 * sigma * sigma));
        double& pixel = img[r * side + c];
        pixel = std::max(pixel, v);
      }
  }
}

struct StrokePrototype {
  std::vector<Stroke> strokes;
};

inline std::vector<StrokePrototype> stroke_prototypes(std::uint64_t corpus_seed, int count,
                                                      int min_strokes, int max_strokes,
                                                      bool curved) {
  std::vector<StrokePrototype> protos;
  for (int p = 0; p < count; ++p) {
    SeededRng rng(corpus_seed, mix_seed(0x70726F746Full, static_cast<std::uint64_t>(p)));
    StrokePrototype proto;
    const int strokes = min_strokes + static_cast<int>(rng.below(max_strokes - min_strokes + 1));
    double px = 6.0 + 16.0 * rng.uniform();
    double py = 6.0 + 16.0 * rng.uniform();
    for (int s = 0; s < strokes; ++s) {
      Stroke st;
      st.x0 = px;
      st.y0 = py;
      st.x2 = 5.0 + 18.0 * rng.uniform();
      st.y2 = 5.0 + 18.0 * rng.uniform();
      if (curved) {
        st.x1 = 0.5 * (st.x0 + st.x2) + 8.0 * (rng.uniform() - 0.5);
        st.y1 = 0.5 * (st.y0 + st.y2) + 8.0 * (rng.uniform() - 0.5);
      } else {
        st.x1 = 0.5 * (st.x0 + st.x2);
        st.y1 = 0.5 * (st.y0 + st.y2);
      }
      proto.strokes.push_back(st);
      px = st.x2;
      py = st.y2;
    }
    protos.push_back(std::move(proto));
  }
  return protos;
}

inline Signal render_stroke_image(const StrokePrototype& proto, SeededRng& rng, double sigma,
                                  double jitter, Eigen::Index side) {
  Signal img = Signal::Zero(side * side);
  const double shift_x = 1.5 * rng.gaussian();
  const double shift_y = 1.5 * rng.gaussian();
  for (const auto& base : proto.strokes) {
    Stroke s = base;
    s.x0 += shift_x + jitter * rng.gaussian();
    s.y0 += shift_y + jitter * rng.gaussian();
    s.x1 += shift_x + jitter * rng.gaussian();
    s.y1 += shift_y + jitter * rng.gaussian();
    s.x2 += shift_x + jitter * rng.gaussian();
    s.y2 += shift_y + jitter * rng.gaussian();
    stamp_stroke(img, s, sigma, side);
  }
  for (Eigen::Index i = 0; i < img.size(); ++i)
    if (img[i] < 0.02) img[i] = 0.0;
  return img;
}

}  // namespace detail

// Continuous handwritten-digit-like corpus: 10 curved-stroke prototypes with
// per-image control-point jitter and global shifts.
inline Dataset make_stroke_digits(long count, std::uint64_t seed) {
  static constexpr Eigen::Index side = 28;
  const auto protos = detail::stroke_prototypes(mix_seed(seed, 0xD161), 10, 2, 3, true);
  Dataset ds;
  ds.name = "strokes";
  ds.domain = SignalDomain::continuous;
  ds.images.resize(count);
  for (long i = 0; i < count; ++i) {
    SeededRng rng(seed, mix_seed(0x696D67ull, static_cast<std::uint64_t>(i)));
    const auto& proto = protos[rng.below(protos.size())];
    ds.images[i] = detail::render_stroke_image(proto, rng, 1.0, 1.2, side);
  }
  return ds;
}

// Binary glyph-like corpus in a different style: more prototypes, straight
// thin segments, thresholded to {0,1}.
inline Dataset make_stroke_glyphs(long count, std::uint64_t seed) {
  static constexpr Eigen::Index side = 28;
  const auto protos = detail::stroke_prototypes(mix_seed(seed, 0x617F), 16, 2, 4, false);
  Dataset ds;
  ds.name = "glyphs";
  ds.domain = SignalDomain::binary;
  ds.images.resize(count);
  for (long i = 0; i < count; ++i) {
    SeededRng rng(seed, mix_seed(0x676C79ull, static_cast<std::uint64_t>(i)));
    const auto& proto = protos[rng.below(protos.size())];
    Signal img = detail::render_stroke_image(proto, rng, 0.8, 0.9, side);
    for (Eigen::Index p = 0; p < img.size(); ++p) img[p] = img[p] >= 0.5 ? 1.0 : 0.0;
    ds.images[i] = std::move(img);
  }
  return ds;
}

inline Dataset slice(const Dataset& ds, std::size_t start, std::size_t count) {
  if (start + count > ds.images.size()) throw std::invalid_argument("slice: out of range");
  Dataset out;
  out.name = ds.name;
  out.domain = ds.domain;
  out.images.assign(ds.images.begin() + start, ds.images.begin() + start + count);
  return out;
}

inline Eigen::MatrixXd to_matrix(const Dataset& ds) {
  if (ds.images.empty()) throw std::invalid_argument("to_matrix: empty dataset");
  Eigen::MatrixXd m(ds.images.front().size(), static_cast<Eigen::Index>(ds.images.size()));
  for (std::size_t i = 0; i < ds.images.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = ds.images[i];
  return m;
}

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string dataset;
  std::string algorithm;
  long m = 0;
  long image_index = 0;
  std::uint64_t seed = 0;
  double l1_err = 0;
  double l2_err = 0;
  double linf_err = 0;
  double measurement_err = 0;
  long wall_ms = 0;
};

struct ExperimentGrid {
  const Dataset* dataset = nullptr;
  std::vector<std::string> algorithms;  // lasso | gen | sparse-gen
  std::vector<long> m_values;           // sorted ascending
  long trials_per_cell = 1;
  std::uint64_t base_seed = 0;
  SolverConfig solver;
  double lasso_mu = 0.1;
  long lasso_iterations = 1000;
  double noise_std = 0.1;
  BasisKind basis = BasisKind::identity;
  EntryScaling scaling = EntryScaling::variance_over_m;
  bool shared_matrix = false;  // one ensemble per m instead of per (m, trial)
  bool timing = false;         // record wall_ms (breaks byte-identical reruns)
  const GeneratorNetwork* generator = nullptr;
  unsigned threads = 0;
  std::string xhat_dir;  // when set, persist each x_hat as raw f64 blob
};

inline std::uint64_t ensemble_seed(std::uint64_t base, long m, long trial) {
  return mix_seed(base, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial));
}

inline std::uint64_t noise_seed(std::uint64_t cell_seed, long image_index) {
  return mix_seed(cell_seed, 0x6E6F697365ull, static_cast<std::uint64_t>(image_index));
}

inline std::uint64_t solver_seed(std::uint64_t cell_seed, long image_index, long alg_id) {
  return mix_seed(cell_seed, static_cast<std::uint64_t>(image_index),
                  1000ull + static_cast<std::uint64_t>(alg_id));
}

namespace detail {

inline void write_xhat_blob(const std::filesystem::path& path, const Signal& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  for (Eigen::Index i = 0; i < x.size(); ++i) write_f64(os, x[i]);
}

inline Signal read_xhat_blob(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  std::vector<double> values;
  while (true) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) break;
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | b[i];
    double v;
    std::memcpy(&v, &bits, 8);
    values.push_back(v);
  }
  return Eigen::Map<Signal>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::string xhat_blob_name(const std::string& alg, long m, long trial, long image) {
  std::ostringstream os;
  os << alg << "_m" << m << "_t" << trial << "_i" << image << ".f64";
  return os.str();
}

}  // namespace detail

inline std::vector<ResultRow> run_experiment(const ExperimentGrid& grid) {
  if (!grid.dataset || grid.dataset->images.empty())
    throw std::invalid_argument("run_experiment: empty dataset");
  if (grid.m_values.empty()) throw std::invalid_argument("run_experiment: empty m_values");
  if (!std::is_sorted(grid.m_values.begin(), grid.m_values.end()))
    throw std::invalid_argument("run_experiment: m_values must be sorted ascending");
  if (grid.algorithms.empty()) throw std::invalid_argument("run_experiment: no algorithms");
  if (grid.trials_per_cell < 1) throw std::invalid_argument("run_experiment: trials_per_cell < 1");
  const Eigen::Index n = grid.dataset->images.front().size();
  for (const auto& alg : grid.algorithms) {
    if (alg != "lasso" && alg != "gen" && alg != "sparse-gen")
      throw std::invalid_argument("run_experiment: unknown algorithm " + alg);
    if (alg != "lasso" && !grid.generator)
      throw std::invalid_argument("run_experiment: generator weights required for " + alg);
  }
  if (grid.generator && grid.generator->output_dim() != n)
    throw std::invalid_argument("run_experiment: generator output does not match image size");

  const long n_m = static_cast<long>(grid.m_values.size());
  const long n_trials = grid.trials_per_cell;
  const long n_images = static_cast<long>(grid.dataset->images.size());
  const long n_algs = static_cast<long>(grid.algorithms.size());

  // Ensembles are shared across images and algorithms within a (m, trial) cell.
  std::vector<SensingEnsemble> ensembles(static_cast<std::size_t>(n_m * n_trials));
  for (long mi = 0; mi < n_m; ++mi)
    for (long t = 0; t < n_trials; ++t) {
      const std::uint64_t seed =
          ensemble_seed(grid.base_seed, grid.m_values[mi], grid.shared_matrix ? 0 : t);
      ensembles[static_cast<std::size_t>(mi * n_trials + t)] =
          gaussian_ensemble(grid.m_values[mi], n, grid.noise_std, seed, grid.scaling);
    }
  const OrthonormalBasis basis = make_signal_basis(grid.basis, n);

  if (!grid.xhat_dir.empty()) std::filesystem::create_directories(grid.xhat_dir);

  const std::size_t n_cells = static_cast<std::size_t>(n_m * n_trials * n_images);
  std::vector<ResultRow> rows(n_cells * static_cast<std::size_t>(n_algs));
  std::exception_ptr failure;
  std::mutex failure_mutex;

  parallel_for(
      n_cells,
      [&](std::size_t cell) {
        try {
          const long image = static_cast<long>(cell % n_images);
          const long trial = static_cast<long>(cell / n_images % n_trials);
          const long mi = static_cast<long>(cell / n_images / n_trials);
          const long m = grid.m_values[mi];
          const SensingEnsemble& e = ensembles[static_cast<std::size_t>(mi * n_trials + trial)];
          const std::uint64_t cell_seed = e.seed;
          const Signal& x = grid.dataset->images[static_cast<std::size_t>(image)];
          const Measurements y = sense(e, x, noise_seed(cell_seed, image));

          for (long ai = 0; ai < n_algs; ++ai) {
            const std::string& alg = grid.algorithms[static_cast<std::size_t>(ai)];
            const auto start_time = std::chrono::steady_clock::now();
            RecoveryResult rec;
            if (alg == "lasso") {
              rec = lasso(e, y, grid.lasso_mu, grid.lasso_iterations, grid.solver.clip_lo,
                          grid.solver.clip_hi);
            } else {
              SolverConfig cfg = grid.solver;
              cfg.seed = solver_seed(cell_seed, image, ai);
              rec = alg == "gen" ? gen_recover(e, y, *grid.generator, cfg)
                                 : sparse_gen(e, y, *grid.generator, basis, cfg);
            }
            const auto stop_time = std::chrono::steady_clock::now();

            ResultRow row;
            row.dataset = grid.dataset->name;
            row.algorithm = alg;
            row.m = m;
            row.image_index = image;
            row.seed = cell_seed;
            const Signal diff = rec.x_hat - x;
            row.l1_err = diff.lpNorm<1>();
            row.l2_err = diff.norm();
            row.linf_err = diff.lpNorm<Eigen::Infinity>();
            row.measurement_err = rec.measurement_error;
            row.wall_ms = grid.timing
                              ? std::chrono::duration_cast<std::chrono::milliseconds>(stop_time -
                                                                                      start_time)
                                    .count()
                              : 0;
            rows[cell * static_cast<std::size_t>(n_algs) + static_cast<std::size_t>(ai)] = row;
            if (!grid.xhat_dir.empty())
              detail::write_xhat_blob(std::filesystem::path(grid.xhat_dir) /
                                          detail::xhat_blob_name(alg, m, trial, image),
                                      rec.x_hat);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      },
      grid.threads);
  if (failure) std::rethrow_exception(failure);

  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.dataset, a.algorithm, a.m, a.image_index, a.seed) <
           std::tie(b.dataset, b.algorithm, b.m, b.image_index, b.seed);
  });
  return rows;
}

// Transfer compressed sensing: identical pipeline with a generator trained on
// a different (source) domain.
inline std::vector<ResultRow> run_transfer(const GeneratorNetwork& source_decoder,
                                           const Dataset& target, ExperimentGrid grid) {
  grid.dataset = &target;
  grid.generator = &source_decoder;
  return run_experiment(grid);
}

// ---------------------------------------------------------------------------
// Results CSV (RFC 4180, LF line endings)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kResultHeader =
    "dataset,algorithm,m,image_index,seed,l1_err,l2_err,linf_err,measurement_err,wall_ms";

inline void write_result_csv(const std::vector<ResultRow>& rows,
                             const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os << kResultHeader << "\n";
  for (const auto& r : rows) {
    os << detail::csv_quote(r.dataset) << ',' << detail::csv_quote(r.algorithm) << ',' << r.m
       << ',' << r.image_index << ',' << r.seed << ',' << detail::format_double(r.l1_err) << ','
       << detail::format_double(r.l2_err) << ',' << detail::format_double(r.linf_err) << ','
       << detail::format_double(r.measurement_err) << ',' << r.wall_ms << "\n";
  }
  if (!os) throw FormatError("write failed: " + path.string());
}

namespace detail {

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace detail

inline std::vector<ResultRow> read_result_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty results csv: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) throw FormatError("results csv missing required columns");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::parse_csv_line(line);
    if (f.size() != 10) throw FormatError("results csv row with wrong field count");
    ResultRow r;
    r.dataset = f[0];
    r.algorithm = f[1];
    r.m = std::stol(f[2]);
    r.image_index = std::stol(f[3]);
    r.seed = std::stoull(f[4]);
    r.l1_err = std::stod(f[5]);
    r.l2_err = std::stod(f[6]);
    r.linf_err = std::stod(f[7]);
    r.measurement_err = std::stod(f[8]);
    r.wall_ms = std::stol(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SVG plotting: one polyline per algorithm, x = m, y = mean metric over
// images, with min/max whiskers and machine-readable mean labels.
// ---------------------------------------------------------------------------

inline double metric_of(const ResultRow& r, const std::string& metric) {
  if (metric == "l1") return r.l1_err;
  if (metric == "l2") return r.l2_err;
  if (metric == "linf") return r.linf_err;
  if (metric == "measurement") return r.measurement_err;
  throw std::invalid_argument("unknown metric: " + metric);
}

struct PlotPoint {
  long m = 0;
  double mean = 0, lo = 0, hi = 0;
};

inline std::map<std::string, std::vector<PlotPoint>> aggregate_for_plot(
    const std::vector<ResultRow>& rows, const std::string& metric) {
  if (rows.empty()) throw FormatError("plot: no data rows");
  std::map<std::string, std::map<long, std::vector<double>>> grouped;
  for (const auto& r : rows) grouped[r.algorithm][r.m].push_back(metric_of(r, metric));
  std::map<std::string, std::vector<PlotPoint>> out;
  for (auto& [alg, by_m] : grouped) {
    for (auto& [m, values] : by_m) {
      PlotPoint p;
      p.m = m;
      p.mean = 0;
      p.lo = values.front();
      p.hi = values.front();
      for (const double v : values) {
        p.mean += v;
        p.lo = std::min(p.lo, v);
        p.hi = std::max(p.hi, v);
      }
      p.mean /= static_cast<double>(values.size());
      out[alg].push_back(p);
    }
  }
  return out;
}

inline void plot_svg(const std::vector<ResultRow>& rows, const std::string& metric,
                     const std::filesystem::path& out_path) {
  const auto series = aggregate_for_plot(rows, metric);

  long m_lo = std::numeric_limits<long>::max(), m_hi = std::numeric_limits<long>::min();
  double y_hi = 0;
  for (const auto& [alg, points] : series)
    for (const auto& p : points) {
      m_lo = std::min(m_lo, p.m);
      m_hi = std::max(m_hi, p.m);
      y_hi = std::max(y_hi, p.hi);
    }
  if (y_hi <= 0) y_hi = 1;
  const double width = 720, height = 480, left = 70, right = 30, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto sx = [&](long m) {
    return m_hi == m_lo ? left + plot_w / 2
                        : left + plot_w * static_cast<double>(m - m_lo) /
                                     static_cast<double>(m_hi - m_lo);
  };
  auto sy = [&](double v) { return top + plot_h * (1.0 - v / (1.05 * y_hi)); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">measurements m</text>\n";
  svg << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">" << metric << " error</text>\n";

  int color = 0;
  double legend_y = top;
  for (const auto& [alg, points] : series) {
    const char* stroke = palette[color % 5];
    if (points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
      for (const auto& p : points) svg << sx(p.m) << ',' << sy(p.mean) << ' ';
      svg << "\"/>\n";
    }
    for (const auto& p : points) {
      svg << "<line x1=\"" << sx(p.m) << "\" y1=\"" << sy(p.lo) << "\" x2=\"" << sx(p.m)
          << "\" y2=\"" << sy(p.hi) << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
      svg << "<circle cx=\"" << sx(p.m) << "\" cy=\"" << sy(p.mean) << "\" r=\"3\" fill=\""
          << stroke << "\"/>\n";
      svg << "<text class=\"mean\" data-alg=\"" << alg << "\" data-m=\"" << p.m << "\" x=\""
          << sx(p.m) + 5 << "\" y=\"" << sy(p.mean) - 5 << "\" font-size=\"9\">"
          << detail::format_double(p.mean) << "</text>\n";
      svg << "<text class=\"tick\" x=\"" << sx(p.m) << "\" y=\"" << top + plot_h + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">" << p.m << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w - 140 << "\" y=\"" << legend_y << "\" font-size=\"13\" "
        << "fill=\"" << stroke << "\">" << alg << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + out_path.string());
  os << svg.str();
  if (!os) throw FormatError("write failed: " + out_path.string());
}

}  // namespace sparsegen
