#include "wpca/io.hpp"

#include "wpca/error.hpp"
#include "wpca/kmeans.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace wpca {

namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidArgument("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument("invalid number '" + s + "' in " + where);
  }
  return v;
}

// Header plus numeric rows of a small CSV file.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  auto in = open_in(path);
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, path + ":" + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InvalidArgument(path + ": missing header");
  return t;
}

DiscreteMeasure normalized_with_warning(Eigen::MatrixXd loc, Eigen::VectorXd w,
                                        const std::string& source) {
  if (w.size() == 0) throw InvalidArgument(source + ": no atoms");
  if (w.minCoeff() < 0.0) throw InvalidArgument(source + ": negative weight");
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidArgument(source + ": weights sum to zero");
  if (std::abs(total - 1.0) > 1e-6) {
    spdlog::warn("{}: weights sum to {}, renormalizing", source, total);
  }
  return DiscreteMeasure::normalized(std::move(loc), std::move(w));
}

// Skips whitespace and '#' comments in a PNM header.
std::string pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(c);
    }
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  Index width = 0;
  Index height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::string& path) {
  PnmHeader h;
  h.magic = pnm_token(in);
  try {
    h.width = std::stol(pnm_token(in));
    h.height = std::stol(pnm_token(in));
    h.maxval = std::stoi(pnm_token(in));
  } catch (const std::logic_error&) {
    throw InvalidArgument(path + ": malformed header");
  }
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    throw InvalidArgument(path + ": malformed header");
  }
  return h;
}

// Reads count samples in ASCII (plain) or big-endian binary form.
std::vector<int> read_samples(std::istream& in, const PnmHeader& h, std::size_t count,
                              bool binary, const std::string& path) {
  std::vector<int> out(count);
  if (binary) {
    const int bytes = h.maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(count * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
      throw InvalidArgument(path + ": truncated pixel data");
    }
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto tok = pnm_token(in);
      if (tok.empty()) throw InvalidArgument(path + ": truncated pixel data");
      out[i] = std::atoi(tok.c_str());
    }
  }
  for (int v : out) {
    if (v < 0 || v > h.maxval) throw InvalidArgument(path + ": sample out of range");
  }
  return out;
}

std::uint8_t to_byte(double unit) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(unit, 0.0, 1.0) * 255.0 + 0.5));
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#bcbd22", "#17becf"};

}  // namespace

DiscreteMeasure image_to_measure(const Eigen::MatrixXd& pixels) {
  if (pixels.size() == 0) throw InvalidArgument("empty image");
  if (!pixels.allFinite() || pixels.minCoeff() < 0.0) {
    throw InvalidArgument("image intensities must be finite and nonnegative");
  }
  const double total = pixels.sum();
  if (!(total > 0.0)) throw InvalidArgument("image has no positive intensity");
  const Index count = (pixels.array() > 0.0).count();
  Eigen::MatrixXd loc(2, count);
  Eigen::VectorXd w(count);
  Index a = 0;
  for (Index r = 0; r < pixels.rows(); ++r) {
    for (Index c = 0; c < pixels.cols(); ++c) {
      if (pixels(r, c) > 0.0) {
        loc.col(a) << static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5;
        w[a] = pixels(r, c) / total;
        ++a;
      }
    }
  }
  return DiscreteMeasure::normalized(std::move(loc), std::move(w));
}

Eigen::MatrixXd measure_to_raster(const DiscreteMeasure& m, Index height, Index width) {
  if (height <= 0 || width <= 0) throw InvalidArgument("raster size must be positive");
  if (m.dim() != 2) throw InvalidArgument("rasterization needs a 2-D measure");
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(height, width);
  Index clipped = 0;
  for (Index j = 0; j < m.size(); ++j) {
    const double x = m.locations()(0, j);
    const double y = m.locations()(1, j);
    if (x < 0.0 || y < 0.0 || x > static_cast<double>(width) || y > static_cast<double>(height)) {
      ++clipped;
    }
    const double u = x - 0.5;
    const double v = y - 0.5;
    const double c0 = std::floor(u);
    const double r0 = std::floor(v);
    const double fx = u - c0;
    const double fy = v - r0;
    const double wj = m.weights()[j];
    auto put = [&](double r, double c, double share) {
      if (share == 0.0) return;
      const auto ri = static_cast<Index>(std::clamp(r, 0.0, static_cast<double>(height - 1)));
      const auto ci = static_cast<Index>(std::clamp(c, 0.0, static_cast<double>(width - 1)));
      R(ri, ci) += share;
    };
    put(r0, c0, wj * (1.0 - fy) * (1.0 - fx));
    put(r0, c0 + 1.0, wj * (1.0 - fy) * fx);
    put(r0 + 1.0, c0, wj * fy * (1.0 - fx));
    put(r0 + 1.0, c0 + 1.0, wj * fy * fx);
  }
  if (clipped > 0) spdlog::warn("{} atoms outside the {}x{} raster were clipped", clipped, height, width);
  return R;
}

std::string pgm_string(const Eigen::MatrixXd& raster) {
  if (raster.size() == 0) throw InvalidArgument("empty raster");
  const double mx = raster.maxCoeff();
  std::ostringstream os;
  os << "P2\n" << raster.cols() << ' ' << raster.rows() << "\n255\n";
  for (Index r = 0; r < raster.rows(); ++r) {
    for (Index c = 0; c < raster.cols(); ++c) {
      const double v = mx > 0.0 ? std::max(raster(r, c), 0.0) / mx : 0.0;
      os << (c ? " " : "") << static_cast<int>(std::floor(v * 255.0 + 0.5));
    }
    os << '\n';
  }
  return os.str();
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& raster) {
  auto out = open_out(path);
  out << pgm_string(raster);
}

Eigen::MatrixXd read_pgm(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  const auto h = read_pnm_header(in, path);
  if (h.magic != "P2" && h.magic != "P5") throw InvalidArgument(path + ": not a PGM file");
  const auto samples = read_samples(in, h, static_cast<std::size_t>(h.width * h.height),
                                    h.magic == "P5", path);
  Eigen::MatrixXd img(h.height, h.width);
  for (Index r = 0; r < h.height; ++r) {
    for (Index c = 0; c < h.width; ++c) img(r, c) = samples[static_cast<std::size_t>(r * h.width + c)];
  }
  return img;
}

std::array<std::uint8_t, 3> RgbImage::at(Index row, Index col) const {
  const auto i = static_cast<std::size_t>(3 * (row * width + col));
  return {data[i], data[i + 1], data[i + 2]};
}

RgbImage read_ppm(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  const auto h = read_pnm_header(in, path);
  if (h.magic != "P3" && h.magic != "P6") throw InvalidArgument(path + ": not a PPM file");
  const auto samples = read_samples(in, h, static_cast<std::size_t>(3 * h.width * h.height),
                                    h.magic == "P6", path);
  RgbImage img{h.height, h.width, {}};
  img.data.reserve(samples.size());
  for (int s : samples) img.data.push_back(to_byte(static_cast<double>(s) / h.maxval));
  return img;
}

void write_ppm(const std::string& path, const RgbImage& image) {
  auto out = open_out(path);
  out << "P3\n" << image.width << ' ' << image.height << "\n255\n";
  for (Index r = 0; r < image.height; ++r) {
    for (Index c = 0; c < image.width; ++c) {
      const auto px = image.at(r, c);
      out << (c ? " " : "") << int(px[0]) << ' ' << int(px[1]) << ' ' << int(px[2]);
    }
    out << '\n';
  }
}

Eigen::MatrixXd rgb_points(const RgbImage& image) {
  const Index n = image.height * image.width;
  Eigen::MatrixXd pts(3, n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 3; ++k) pts(k, i) = image.data[static_cast<std::size_t>(3 * i + k)] / 255.0;
  }
  return pts;
}

DiscreteMeasure quantize_colors(const Eigen::MatrixXd& pixels, Index k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (pixels.rows() != 3) throw InvalidArgument("colors must be 3-D points");
  if (pixels.cols() < 1) throw InvalidArgument("no pixels");
  if (!pixels.allFinite() || pixels.minCoeff() < 0.0 || pixels.maxCoeff() > 1.0) {
    throw InvalidArgument("color coordinates must lie in [0,1]");
  }
  // Identical colors are clustered once, weighted by multiplicity.
  std::map<std::array<double, 3>, double> counts;
  for (Index j = 0; j < pixels.cols(); ++j) {
    counts[{pixels(0, j), pixels(1, j), pixels(2, j)}] += 1.0;
  }
  const auto distinct = static_cast<Index>(counts.size());
  Eigen::MatrixXd pts(3, distinct);
  Eigen::VectorXd w(distinct);
  Index j = 0;
  for (const auto& [c, n] : counts) {
    pts.col(j) << c[0], c[1], c[2];
    w[j] = n / static_cast<double>(pixels.cols());
    ++j;
  }
  if (distinct <= k) {
    if (distinct < k) spdlog::warn("only {} distinct colors for k = {}", distinct, k);
    return DiscreteMeasure::normalized(std::move(pts), std::move(w));
  }
  KMeansOptions opts;
  opts.k = k;
  opts.seed = seed;
  opts.max_iter = 100;
  opts.move_tol = 1e-8;
  auto res = weighted_kmeans(pts, w, opts);
  return DiscreteMeasure::normalized(std::move(res.centroids), std::move(res.mass));
}

std::string render_scatter_svg(const std::vector<ScatterLayer>& layers, const ScatterOptions& opts) {
  Index dim = -1;
  for (const auto& l : layers) {
    if (l.measure.dim() != 2 && l.measure.dim() != 3) {
      throw InvalidArgument("scatter plots support 2-D and 3-D measures only");
    }
    if (dim >= 0 && l.measure.dim() != dim) throw InvalidArgument("layers differ in dimension");
    dim = l.measure.dim();
  }
  const auto [ax, ay] = opts.axes;
  if (dim > 0 && (ax < 0 || ay < 0 || ax >= dim || ay >= dim || ax == ay)) {
    throw InvalidArgument("invalid projection axes");
  }

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  double wmax = 0.0;
  bool first = true;
  for (const auto& l : layers) {
    const auto& L = l.measure.locations();
    for (Index j = 0; j < L.cols(); ++j) {
      const double x = L(ax, j);
      const double y = L(ay, j);
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      wmax = std::max(wmax, l.measure.weights()[j]);
    }
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = 800.0 / span;
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);
  constexpr double kMaxRadius = 18.0;

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" height=\"1000\">\n";
  if (!opts.title.empty()) os << "<title>" << escape_xml(opts.title) << "</title>\n";
  if (dim == 3) {
    os << "<desc>orthographic projection onto coordinates " << ax << " and " << ay << "</desc>\n";
  }
  os << "<style>\n  .axes { fill: none; stroke: #444; stroke-width: 1; }\n"
     << "  .legend { font: 20px sans-serif; fill: #222; }\n";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    os << "  .layer-" << i << " { fill: " << kPalette[i % kPalette.size()]
       << "; fill-opacity: 0.7; stroke: " << kPalette[i % kPalette.size()] << "; stroke-width: 0.5; }\n";
  }
  os << "</style>\n";
  os << "<rect class=\"axes\" x=\"50\" y=\"50\" width=\"900\" height=\"900\"/>\n";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& m = layers[i].measure;
    os << "<g class=\"layer-" << i << "\">\n";
    for (Index j = 0; j < m.size(); ++j) {
      const double px = 500.0 + scale * (m.locations()(ax, j) - cx);
      const double dy = scale * (m.locations()(ay, j) - cy);
      const double py = opts.y_down ? 500.0 + dy : 500.0 - dy;
      const double r = wmax > 0.0 ? kMaxRadius * std::sqrt(m.weights()[j] / wmax) : 0.0;
      os << "  <circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"" << std::setprecision(4) << r
         << std::setprecision(2) << "\"/>\n";
    }
    os << "</g>\n";
  }
  if (!layers.empty()) {
    os << "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const double y = 80.0 + 28.0 * static_cast<double>(i);
      const std::string label = layers[i].label.empty() ? "measure " + std::to_string(i + 1)
                                                        : layers[i].label;
      os << "  <circle class=\"layer-" << i << "\" cx=\"75\" cy=\"" << y << "\" r=\"8\"/>\n"
         << "  <text x=\"92\" y=\"" << y + 7.0 << "\">" << escape_xml(label) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

RgbImage render_palette_strip(const DiscreteMeasure& m, Index width, Index height) {
  if (m.dim() != 3) throw InvalidArgument("palettes need 3-D color measures");
  if (width <= 0 || height <= 0) throw InvalidArgument("strip size must be positive");
  std::vector<Index> order(static_cast<std::size_t>(m.size()));
  std::iota(order.begin(), order.end(), 0);
  auto luminance = [&](Index j) {
    const auto c = m.locations().col(j).cwiseMax(0.0).cwiseMin(1.0);
    return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return luminance(a) < luminance(b); });

  RgbImage img{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(3 * width * height))};
  double cum = 0.0;
  Index start = 0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    const Index j = order[q];
    cum += m.weights()[j];
    const Index stop = q + 1 == order.size()
                           ? width
                           : std::min(width, static_cast<Index>(std::floor(cum * width + 0.5)));
    const std::array<std::uint8_t, 3> px{to_byte(m.locations()(0, j)), to_byte(m.locations()(1, j)),
                                         to_byte(m.locations()(2, j))};
    for (Index c = start; c < stop; ++c) {
      for (Index r = 0; r < height; ++r) {
        const auto i = static_cast<std::size_t>(3 * (r * width + c));
        std::copy(px.begin(), px.end(), img.data.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    start = std::max(start, stop);
  }
  return img;
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  const auto t = read_table(path);
  if (t.header.size() < 2 || t.header.front() != "w") {
    throw InvalidArgument(path + ": expected header w,x1,...,xd");
  }
  const auto d = static_cast<Index>(t.header.size() - 1);
  const auto n = static_cast<Index>(t.rows.size());
  Eigen::MatrixXd loc(d, n);
  Eigen::VectorXd w(n);
  for (Index j = 0; j < n; ++j) {
    const auto& row = t.rows[static_cast<std::size_t>(j)];
    w[j] = row[0];
    for (Index k = 0; k < d; ++k) loc(k, j) = row[static_cast<std::size_t>(k + 1)];
  }
  return normalized_with_warning(std::move(loc), std::move(w), path);
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& m) {
  auto out = open_out(path);
  out << 'w';
  for (Index k = 0; k < m.dim(); ++k) out << ",x" << k + 1;
  out << '\n';
  for (Index j = 0; j < m.size(); ++j) {
    out << m.weights()[j];
    for (Index k = 0; k < m.dim(); ++k) out << ',' << m.locations()(k, j);
    out << '\n';
  }
}

DiscreteMeasure read_measure_json(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto loc = j.at("locations").get<std::vector<std::vector<double>>>();
    if (loc.size() != w.size() || loc.empty()) throw InvalidArgument(path + ": size mismatch");
    const auto d = static_cast<Index>(loc.front().size());
    Eigen::MatrixXd L(d, static_cast<Index>(loc.size()));
    for (std::size_t a = 0; a < loc.size(); ++a) {
      if (static_cast<Index>(loc[a].size()) != d) throw InvalidArgument(path + ": ragged locations");
      for (Index k = 0; k < d; ++k) L(k, static_cast<Index>(a)) = loc[a][static_cast<std::size_t>(k)];
    }
    return normalized_with_warning(std::move(L), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size())), path);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_measure_json(const std::string& path, const DiscreteMeasure& m) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(m.weights().data(), m.weights().data() + m.size());
  auto& loc = j["locations"] = nlohmann::json::array();
  for (Index a = 0; a < m.size(); ++a) {
    loc.push_back(std::vector<double>(m.locations().col(a).data(), m.locations().col(a).data() + m.dim()));
  }
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

DiscreteMeasure read_measure(const std::string& path) {
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? read_measure_json(path) : read_measure_csv(path);
}

void write_field_csv(const std::string& path, const VelocityField& v) {
  auto out = open_out(path);
  for (Index k = 0; k < v.dim(); ++k) out << (k ? ",v" : "v") << k + 1;
  out << '\n';
  for (Index j = 0; j < v.size(); ++j) {
    for (Index k = 0; k < v.dim(); ++k) out << (k ? "," : "") << v.vectors()(k, j);
    out << '\n';
  }
}

VelocityField read_field_csv(const std::string& path) {
  const auto t = read_table(path);
  const auto d = static_cast<Index>(t.header.size());
  Eigen::MatrixXd V(d, static_cast<Index>(t.rows.size()));
  for (std::size_t j = 0; j < t.rows.size(); ++j) {
    for (Index k = 0; k < d; ++k) V(k, static_cast<Index>(j)) = t.rows[j][static_cast<std::size_t>(k)];
  }
  return VelocityField(std::move(V));
}

}  // namespace wpca
