#include "cvkan/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "cvkan/errors.hpp"

namespace cvkan {

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> out;
  out.reserve(feature_info.size());
  for (const auto& f : feature_info) out.push_back(f.name);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.id = id;
  d.task = task;
  d.feature_info = feature_info;
  d.num_classes = num_classes;
  d.class_values = class_values;
  d.split_real = split_real;
  d.split_pairs = split_pairs;
  d.features = features.select_rows(rows);
  if (task == TaskKind::regression) {
    d.targets = targets.select_rows(rows);
  } else {
    d.labels.clear();
    d.labels.reserve(rows.size());
    for (std::size_t r : rows) d.labels.push_back(labels.at(r));
  }
  return d;
}

Dataset Dataset::select_features(std::span<const std::size_t> columns) const {
  if (split_real) throw DataError("feature selection applies to complex datasets, before splitting");
  Dataset d = *this;
  d.features = features.select_cols(columns);
  d.feature_info.clear();
  for (std::size_t c : columns) d.feature_info.push_back(feature_info.at(c));
  return d;
}

namespace {

Complex uniform_point(std::mt19937_64& rng, const GridSpec& grid) {
  std::uniform_real_distribution<double> u(grid.lo, grid.hi);
  const double re = u(rng);
  const double im = u(rng);
  return {re, im};
}

double uniform_real(std::mt19937_64& rng, const GridSpec& grid) {
  std::uniform_real_distribution<double> u(grid.lo, grid.hi);
  return u(rng);
}

Complex complex_sin(Complex z) {
  return {std::sin(z.real()) * std::cosh(z.imag()), std::cos(z.real()) * std::sinh(z.imag())};
}

}  // namespace

SymbolicFunction parse_symbolic(std::string_view id) {
  if (id == "f1" || id == "z2" || id == "square") return SymbolicFunction::f1;
  if (id == "f2" || id == "sin") return SymbolicFunction::f2;
  if (id == "f3" || id == "z1z2" || id == "product") return SymbolicFunction::f3;
  if (id == "f4" || id == "sqsq") return SymbolicFunction::f4;
  throw ConfigError("unknown symbolic function '" + std::string(id) + "'");
}

std::size_t symbolic_arity(SymbolicFunction f) {
  return f == SymbolicFunction::f1 || f == SymbolicFunction::f2 ? 1 : 2;
}

Complex evaluate_symbolic(SymbolicFunction f, std::span<const Complex> z) {
  if (z.size() != symbolic_arity(f)) throw ShapeError("wrong number of arguments for symbolic function");
  switch (f) {
    case SymbolicFunction::f1: return complex_mul(z[0], z[0]);
    case SymbolicFunction::f2: return complex_sin(z[0]);
    case SymbolicFunction::f3: return complex_mul(z[0], z[1]);
    case SymbolicFunction::f4: {
      const Complex s = complex_add(complex_mul(z[0], z[0]), complex_mul(z[1], z[1]));
      return complex_mul(s, s);
    }
  }
  return {};
}

std::pair<double, double> evaluate_symbolic_real(SymbolicFunction f, std::span<const double> xy) {
  if (xy.size() != 2 * symbolic_arity(f)) throw ShapeError("wrong number of arguments for symbolic function");
  switch (f) {
    case SymbolicFunction::f1: {
      const double x = xy[0], y = xy[1];
      return {x * x - y * y, 2.0 * x * y};
    }
    case SymbolicFunction::f2: {
      const double x = xy[0], y = xy[1];
      return {std::sin(x) * std::cosh(y), std::cos(x) * std::sinh(y)};
    }
    case SymbolicFunction::f3: {
      const double x1 = xy[0], y1 = xy[1], x2 = xy[2], y2 = xy[3];
      return {x1 * x2 - y1 * y2, x1 * y2 + x2 * y1};
    }
    case SymbolicFunction::f4: {
      const double x1 = xy[0], y1 = xy[1], x2 = xy[2], y2 = xy[3];
      const double a = x1 * x1 + x2 * x2 - y1 * y1 - y2 * y2;
      const double b = 2.0 * x1 * y1 + 2.0 * x2 * y2;
      // outer square taken in C
      return {a * a - b * b, 2.0 * a * b};
    }
  }
  return {};
}

Dataset gen_symbolic(SymbolicFunction f, std::size_t n, std::uint64_t seed, const GridSpec& grid) {
  grid.validate();
  if (n == 0) throw DataError("dataset size must be at least 1");
  const std::size_t arity = symbolic_arity(f);
  std::mt19937_64 rng(seed);
  Dataset d;
  static constexpr const char* kIds[] = {"f1", "f2", "f3", "f4"};
  d.id = kIds[static_cast<int>(f)];
  d.task = TaskKind::regression;
  d.features = ComplexBatch(n, arity);
  d.targets = ComplexBatch(n, 1);
  if (arity == 1) {
    d.feature_info = {{"z", false}};
  } else {
    d.feature_info = {{"z1", false}, {"z2", false}};
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < arity; ++k) d.features(i, k) = uniform_point(rng, grid);
    d.targets(i, 0) = evaluate_symbolic(f, d.features.row(i));
  }
  return d;
}

Complex holography_target(Complex e_r_hat, Complex e_r, Complex e_0) {
  return e_r_hat * complex_abs2(complex_add(e_r, e_0));
}

Dataset gen_holography(std::size_t n, std::uint64_t seed, const GridSpec& grid) {
  grid.validate();
  if (n == 0) throw DataError("dataset size must be at least 1");
  std::mt19937_64 rng(seed);
  Dataset d;
  d.id = "holography";
  d.features = ComplexBatch(n, 3);
  d.targets = ComplexBatch(n, 1);
  d.feature_info = {{"E_R_hat", false}, {"E_R", false}, {"E_0", false}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 3; ++k) d.features(i, k) = uniform_point(rng, grid);
    d.targets(i, 0) = holography_target(d.features(i, 0), d.features(i, 1), d.features(i, 2));
  }
  return d;
}

Complex circuit_target(const CircuitInputs& in) {
  const double re = 1.0 + in.r_g / in.r_l - in.omega * in.omega * in.l * in.c;
  const double im = in.omega * (in.l / in.r_l + in.r_g * in.c);
  const double den = re * re + im * im;
  // U_G / (re + i im)
  return {(in.u_g.real() * re + in.u_g.imag() * im) / den, (in.u_g.imag() * re - in.u_g.real() * im) / den};
}

CircuitDataset gen_circuit(std::size_t n, std::uint64_t seed, const GridSpec& grid) {
  grid.validate();
  if (n == 0) throw DataError("dataset size must be at least 1");
  std::mt19937_64 rng(seed);
  CircuitDataset out;
  Dataset& d = out.data;
  d.id = "circuit";
  d.features = ComplexBatch(n, 6);
  d.targets = ComplexBatch(n, 1);
  d.feature_info = {{"U_G", false}, {"R_G", true}, {"R_L", true}, {"L", true}, {"C", true}, {"omega", true}};
  std::size_t accepted = 0;
  while (accepted < n) {
    CircuitInputs in;
    in.u_g = uniform_point(rng, grid);
    in.r_g = uniform_real(rng, grid);
    in.r_l = uniform_real(rng, grid);
    in.l = uniform_real(rng, grid);
    in.c = uniform_real(rng, grid);
    in.omega = uniform_real(rng, grid);
    const Complex t = circuit_target(in);
    if (!is_finite(t) || std::abs(t) > 1e6) {
      ++out.rejected;
      if (out.rejected > n) {
        throw DataError("circuit generation rejected more than half of all draws");
      }
      continue;
    }
    d.features(accepted, 0) = in.u_g;
    d.features(accepted, 1) = {in.r_g, 0.0};
    d.features(accepted, 2) = {in.r_l, 0.0};
    d.features(accepted, 3) = {in.l, 0.0};
    d.features(accepted, 4) = {in.c, 0.0};
    d.features(accepted, 5) = {in.omega, 0.0};
    d.targets(accepted, 0) = t;
    ++accepted;
  }
  return out;
}

// Knot data

std::vector<std::string> knot_feature_names() {
  return {"chern_simons",     "cusp_volume",      "hyperbolic_adjoint_torsion_degree",
          "hyperbolic_torsion_degree", "injectivity_radius", "longitud_translat",
          "merid_translat_c", "short_geodesic_c", "symmetry_0",
          "symmetry_d3",      "symmetry_d4",      "symmetry_d6",
          "symmetry_d8",      "symmetry_z2z2",    "volume"};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  double v = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line) + ", column '" + column + "': non-numeric cell '" + cell + "'");
  }
  return v;
}

long long parse_signature(const std::string& cell, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line) + ": signature '" + cell + "' is not an integer");
  }
  return v;
}

double map_to_grid(double v, const KnotNormalization::Channel& ch, const GridSpec& grid) {
  if (ch.max == ch.min) return grid.center();
  return grid.lo + (v - ch.min) / (ch.max - ch.min) * (grid.hi - grid.lo);
}

}  // namespace

KnotLoad parse_knots(std::string_view csv_text, const GridSpec& grid, const KnotNormalization* existing) {
  grid.validate();
  std::istringstream in{std::string(csv_text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("knot CSV is empty");
  const auto header = split_csv_line(line);
  if (header.empty() || header.back() != "signature") {
    throw DataError("knot CSV: the last column must be 'signature'");
  }

  struct Column {
    std::string name;
    bool complex;
    std::size_t re_col;
    std::size_t im_col;
  };
  std::vector<Column> columns;
  std::vector<bool> used(header.size(), false);
  used.back() = true;
  for (std::size_t c = 0; c + 1 < header.size(); ++c) {
    if (used[c]) continue;
    const std::string& h = header[c];
    if (h.empty()) throw DataError("knot CSV: empty column name at position " + std::to_string(c));
    if (ends_with(h, "_re")) {
      const std::string base = h.substr(0, h.size() - 3);
      const auto it = std::find(header.begin(), header.end(), base + "_im");
      if (it == header.end()) throw DataError("knot CSV: column '" + h + "' has no matching '" + base + "_im'");
      const auto im = static_cast<std::size_t>(it - header.begin());
      used[c] = used[im] = true;
      columns.push_back({base, true, c, im});
    } else if (ends_with(h, "_im")) {
      throw DataError("knot CSV: column '" + h + "' has no matching '_re' column");
    } else {
      used[c] = true;
      columns.push_back({h, false, c, c});
    }
  }
  if (columns.empty()) throw DataError("knot CSV: no feature columns");

  std::vector<std::vector<double>> raw;  // rows x header.size()-1
  std::vector<long long> sig;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(header.size() - 1);
    for (std::size_t c = 0; c + 1 < header.size(); ++c) row[c] = parse_number(cells[c], line_no, header[c]);
    raw.push_back(std::move(row));
    sig.push_back(parse_signature(cells.back(), line_no));
  }
  if (raw.empty()) throw DataError("knot CSV has no data rows");

  KnotLoad out;
  KnotNormalization norm;
  if (existing != nullptr) {
    norm = *existing;
    if (norm.feature_names.size() != columns.size()) throw DataError("knot CSV columns differ from the stored normalization");
    for (std::size_t f = 0; f < columns.size(); ++f) {
      if (norm.feature_names[f] != columns[f].name || norm.feature_is_complex[f] != columns[f].complex) {
        throw DataError("knot CSV column '" + columns[f].name + "' differs from the stored normalization");
      }
    }
  } else {
    for (const auto& col : columns) {
      norm.feature_names.push_back(col.name);
      norm.feature_is_complex.push_back(col.complex);
      auto range = [&](std::size_t c) {
        KnotNormalization::Channel ch{raw[0][c], raw[0][c]};
        for (const auto& row : raw) {
          ch.min = std::min(ch.min, row[c]);
          ch.max = std::max(ch.max, row[c]);
        }
        return ch;
      };
      norm.re.push_back(range(col.re_col));
      norm.im.push_back(col.complex ? range(col.im_col) : KnotNormalization::Channel{0.0, 0.0});
      if (norm.re.back().min == norm.re.back().max) {
        out.warnings.push_back("feature '" + col.name + "' is constant; mapped to the grid center");
      }
      if (col.complex && norm.im.back().min == norm.im.back().max) {
        out.warnings.push_back("feature '" + col.name + "' has a constant imaginary part; mapped to the grid center");
      }
    }
    norm.signatures = sig;
    std::sort(norm.signatures.begin(), norm.signatures.end());
    norm.signatures.erase(std::unique(norm.signatures.begin(), norm.signatures.end()), norm.signatures.end());
  }

  Dataset& d = out.data;
  d.id = "knots";
  d.task = TaskKind::classification;
  d.features = ComplexBatch(raw.size(), columns.size());
  for (const auto& col : columns) d.feature_info.push_back({col.name, !col.complex});
  for (std::size_t r = 0; r < raw.size(); ++r) {
    for (std::size_t f = 0; f < columns.size(); ++f) {
      const double re = map_to_grid(raw[r][columns[f].re_col], norm.re[f], grid);
      const double im = columns[f].complex ? map_to_grid(raw[r][columns[f].im_col], norm.im[f], grid) : 0.0;
      d.features(r, f) = {re, im};
    }
    const auto it = std::lower_bound(norm.signatures.begin(), norm.signatures.end(), sig[r]);
    if (it == norm.signatures.end() || *it != sig[r]) {
      throw DataError("unseen signature " + std::to_string(sig[r]) + " at data row " + std::to_string(r + 1));
    }
    d.labels.push_back(static_cast<int>(it - norm.signatures.begin()));
  }
  d.num_classes = norm.signatures.size();
  d.class_values = norm.signatures;
  out.normalization = std::move(norm);
  return out;
}

KnotLoad load_knots(const std::filesystem::path& path, const GridSpec& grid, const KnotNormalization* existing) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open knot CSV '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_knots(ss.str(), grid, existing);
}

Dataset make_knot_surrogate(std::size_t n, std::uint64_t seed, const GridSpec& grid) {
  grid.validate();
  if (n < 14) throw DataError("the knot surrogate needs at least 14 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::bernoulli_distribution coin(0.2);
  const auto names = knot_feature_names();
  Dataset d;
  d.id = "knots_surrogate";
  d.task = TaskKind::classification;
  d.features = ComplexBatch(n, names.size());
  for (const auto& name : names) d.feature_info.push_back({name, !ends_with(name, "_c")});
  const double half = 0.5 * (grid.hi - grid.lo);
  std::vector<double> latent(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < names.size(); ++f) {
      if (names[f].rfind("symmetry_", 0) == 0) {
        d.features(i, f) = {coin(rng) ? grid.hi : grid.lo, 0.0};
      } else if (d.feature_info[f].originally_real) {
        d.features(i, f) = {uniform_real(rng, grid), 0.0};
      } else {
        d.features(i, f) = uniform_point(rng, grid);
      }
    }
    // Signature-like latent: driven by the meridional (complex) and longitudinal translations.
    const Complex m = (d.features(i, 6) - grid.center()) / half;
    const double lon = (d.features(i, 5).real() - grid.center()) / half;
    const double cusp = (d.features(i, 1).real() - grid.center()) / half;
    latent[i] = 1.2 * m.real() + 0.6 * m.imag() * m.imag() + 0.8 * lon + 0.1 * cusp + noise(rng);
  }
  std::vector<double> sorted = latent;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int k = 1; k < 14; ++k) cuts.push_back(sorted[k * n / 14]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), latent[i]) - cuts.begin());
    d.labels.push_back(cls);
  }
  d.num_classes = 14;
  for (int k = 0; k < 14; ++k) d.class_values.push_back(2 * k - 12);
  return d;
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  out << std::setprecision(17);
  std::vector<std::string> header;
  for (const auto& f : d.feature_info) {
    if (f.originally_real) {
      header.push_back(f.name);
    } else {
      header.push_back(f.name + "_re");
      header.push_back(f.name + "_im");
    }
  }
  if (d.task == TaskKind::classification) {
    header.push_back("signature");
  } else {
    for (std::size_t k = 0; k < d.targets.cols(); ++k) {
      header.push_back("target" + std::to_string(k) + "_re");
      header.push_back("target" + std::to_string(k) + "_im");
    }
  }
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < d.rows(); ++r) {
    bool first = true;
    auto put = [&](double v) {
      out << (first ? "" : ",") << v;
      first = false;
    };
    for (std::size_t f = 0; f < d.feature_count(); ++f) {
      put(d.features(r, f).real());
      if (!d.feature_info[f].originally_real) put(d.features(r, f).imag());
    }
    if (d.task == TaskKind::classification) {
      const auto label = static_cast<std::size_t>(d.labels[r]);
      out << ',' << (label < d.class_values.size() ? d.class_values[label] : static_cast<long long>(label));
    } else {
      for (std::size_t k = 0; k < d.targets.cols(); ++k) {
        put(d.targets(r, k).real());
        put(d.targets(r, k).imag());
      }
    }
    out << '\n';
  }
  return out.str();
}

Dataset to_split_real(const Dataset& d) {
  if (d.split_real) throw DataError("dataset is already split into real channels");
  Dataset s = d;
  s.split_real = true;
  s.split_pairs.clear();
  s.feature_info.clear();
  std::vector<std::size_t> width;
  for (const auto& f : d.feature_info) {
    s.split_pairs.push_back(!f.originally_real);
    if (f.originally_real) {
      s.feature_info.push_back({f.name, true});
    } else {
      s.feature_info.push_back({f.name + "_re", true});
      s.feature_info.push_back({f.name + "_im", true});
    }
  }
  s.features = ComplexBatch(d.rows(), s.feature_info.size());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    std::size_t c = 0;
    for (std::size_t f = 0; f < d.feature_count(); ++f) {
      s.features(r, c++) = {d.features(r, f).real(), 0.0};
      if (s.split_pairs[f]) s.features(r, c++) = {d.features(r, f).imag(), 0.0};
    }
  }
  if (d.task == TaskKind::regression) {
    s.targets = ComplexBatch(d.rows(), 2 * d.targets.cols());
    for (std::size_t r = 0; r < d.rows(); ++r) {
      for (std::size_t k = 0; k < d.targets.cols(); ++k) {
        s.targets(r, 2 * k) = {d.targets(r, k).real(), 0.0};
        s.targets(r, 2 * k + 1) = {d.targets(r, k).imag(), 0.0};
      }
    }
  }
  return s;
}

ComplexBatch recombine_pairs(const ComplexBatch& split) {
  if (split.cols() % 2 != 0) throw ShapeError("recombine_pairs needs an even number of columns");
  ComplexBatch out(split.rows(), split.cols() / 2);
  for (std::size_t r = 0; r < split.rows(); ++r) {
    for (std::size_t k = 0; k < out.cols(); ++k) out(r, k) = {split(r, 2 * k).real(), split(r, 2 * k + 1).real()};
  }
  return out;
}

Dataset from_split_real(const Dataset& s) {
  if (!s.split_real) throw DataError("dataset is not split into real channels");
  Dataset d = s;
  d.split_real = false;
  d.split_pairs.clear();
  d.feature_info.clear();
  d.features = ComplexBatch(s.rows(), s.split_pairs.size());
  std::size_t c = 0;
  for (std::size_t f = 0; f < s.split_pairs.size(); ++f) {
    if (s.split_pairs[f]) {
      const std::string& name = s.feature_info[c].name;
      d.feature_info.push_back({name.substr(0, name.size() - 3), false});
      for (std::size_t r = 0; r < s.rows(); ++r) d.features(r, f) = {s.features(r, c).real(), s.features(r, c + 1).real()};
      c += 2;
    } else {
      d.feature_info.push_back(s.feature_info[c]);
      for (std::size_t r = 0; r < s.rows(); ++r) d.features(r, f) = {s.features(r, c).real(), 0.0};
      c += 1;
    }
  }
  if (s.task == TaskKind::regression) d.targets = recombine_pairs(s.targets);
  return d;
}

}  // namespace cvkan
