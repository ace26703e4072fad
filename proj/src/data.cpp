#include "adasamp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adasamp/rng.hpp"

namespace adasamp {

void SynthConfig::validate() const {
  if (classes < 2) throw std::invalid_argument("synth: need at least two classes");
  if (n < classes) throw std::invalid_argument("synth: n must be >= number of classes");
  if (dim < 1) throw std::invalid_argument("synth: dim must be >= 1");
  if (!(imbalance >= 0.0 && imbalance < 1.0)) {
    throw std::invalid_argument("synth: imbalance must lie in [0, 1)");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("synth: noise must lie in [0, 1]");
  if (!(boundary_offset >= 0.0 && boundary_offset < 1.0)) {
    throw std::invalid_argument("synth: boundary offset must lie in [0, 1)");
  }
  if (!(separation >= 0.0) || !(boundary_spread >= 0.0) || !(radius >= 0.0)) {
    throw std::invalid_argument("synth: separation, spread and radius must be >= 0");
  }
}

SynthData synthesize(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng = make_stream(cfg.seed, Stream::data);

  // Cluster centers at distance separation/2 from the origin.
  std::vector<std::vector<double>> centers(cfg.classes, std::vector<double>(cfg.dim));
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    if (cfg.classes == 2 && c == 1) {
      for (std::size_t j = 0; j < cfg.dim; ++j) centers[1][j] = -centers[0][j];
      break;
    }
    double norm = 0.0;
    for (double& v : centers[c]) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : centers[c]) v *= 0.5 * cfg.separation / norm;
  }

  // Class sizes proportional to (1 - imbalance)^c, at least one each.
  std::vector<double> share(cfg.classes);
  double total = 0.0;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    share[c] = std::pow(1.0 - cfg.imbalance, static_cast<double>(c));
    total += share[c];
  }
  std::vector<std::size_t> counts(cfg.classes);
  std::size_t assigned = 0;
  for (std::size_t c = 1; c < cfg.classes; ++c) {
    counts[c] = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(static_cast<double>(cfg.n) * share[c] / total)));
    assigned += counts[c];
  }
  counts[0] = cfg.n - assigned;

  std::vector<Example> examples;
  examples.reserve(cfg.n);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    for (std::size_t k = 0; k < counts[c]; ++k) {
      Example z;
      z.label = c;
      z.features.resize(cfg.dim);
      for (std::size_t j = 0; j < cfg.dim; ++j) z.features[j] = centers[c][j] + rng.normal();
      examples.push_back(std::move(z));
    }
  }

  // Relabel a fixed number of examples and move them next to the midpoint
  // between their own center and the center of the class they now claim,
  // shifted toward the latter by boundary_offset.
  const auto n_flip = static_cast<std::size_t>(std::llround(cfg.noise * static_cast<double>(cfg.n)));
  std::vector<std::size_t> order(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
  for (std::size_t i = 0; i < n_flip; ++i) {
    std::swap(order[i], order[i + rng.index(cfg.n - i)]);
  }
  std::vector<bool> flipped(cfg.n, false);
  for (std::size_t k = 0; k < n_flip; ++k) {
    auto& z = examples[order[k]];
    const std::size_t from = z.label;
    std::size_t to = (from + 1 + rng.index(cfg.classes - 1)) % cfg.classes;
    for (std::size_t j = 0; j < cfg.dim; ++j) {
      const double mid = 0.5 * (centers[from][j] + centers[to][j]);
      z.features[j] = mid + cfg.boundary_offset * (centers[to][j] - mid) +
                      cfg.boundary_spread * rng.normal();
    }
    z.label = to;
    flipped[order[k]] = true;
  }

  // Shuffle so that classes and the noisy subset are interleaved.
  for (std::size_t i = cfg.n - 1; i > 0; --i) {
    const std::size_t j = rng.index(i + 1);
    std::swap(examples[i], examples[j]);
    const bool tmp = flipped[i];
    flipped[i] = flipped[j];
    flipped[j] = tmp;
  }

  if (cfg.radius > 0.0) {
    double r = 0.0;
    for (const auto& z : examples) r = std::max(r, l2_norm(z.features));
    if (r > 0.0) {
      const double s = cfg.radius / r;
      for (auto& z : examples) {
        for (double& v : z.features) v *= s;
      }
    }
  }
  return SynthData{Dataset(std::move(examples), cfg.classes), std::move(flipped)};
}

Dataset synth_data(const SynthConfig& cfg) { return synthesize(cfg).data; }

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw std::runtime_error("csv row " + std::to_string(row) + ": " + what);
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  const auto header = split_fields(line);
  if (header.size() < 2 || trim(header[0]) != "label") {
    throw std::runtime_error("csv: header must be label,f1,...,fd");
  }
  const std::size_t dim = header.size() - 1;

  std::vector<Example> examples;
  std::size_t max_label = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != dim + 1) {
      row_error(row, "expected " + std::to_string(dim + 1) + " columns, found " +
                         std::to_string(fields.size()));
    }
    Example z;
    try {
      std::size_t used = 0;
      const std::string lab = trim(fields[0]);
      const long long label = std::stoll(lab, &used);
      if (used != lab.size() || label < 0) row_error(row, "label must be a nonnegative integer");
      z.label = static_cast<std::size_t>(label);
      z.features.resize(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        const std::string f = trim(fields[j + 1]);
        z.features[j] = std::stod(f, &used);
        if (used != f.size()) row_error(row, "malformed number '" + f + "'");
      }
    } catch (const std::invalid_argument&) {
      row_error(row, "unparseable field");
    } catch (const std::out_of_range&) {
      row_error(row, "value out of range");
    }
    max_label = std::max(max_label, z.label);
    examples.push_back(std::move(z));
  }
  if (examples.empty()) throw std::runtime_error("csv: no data rows");
  return Dataset(std::move(examples), std::max<std::size_t>(max_label + 1, 2));
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  return read_csv(in);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Dataset& ds, std::ostream& out) {
  out << "label";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << (j + 1);
  out << '\n';
  for (const auto& z : ds.examples()) {
    out << z.label;
    for (double v : z.features) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  write_csv(ds, out);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t n_train) {
  if (n_train < 1 || n_train >= ds.size()) {
    throw std::invalid_argument("split_dataset: train size must lie in [1, n)");
  }
  std::vector<Example> a(ds.examples().begin(), ds.examples().begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<Example> b(ds.examples().begin() + static_cast<std::ptrdiff_t>(n_train), ds.examples().end());
  return {Dataset(std::move(a), ds.num_classes()), Dataset(std::move(b), ds.num_classes())};
}

}  // namespace adasamp
