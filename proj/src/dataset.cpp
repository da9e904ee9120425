#include "occafs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace occafs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, size_t line_no, const std::string& msg) {
  throw InvalidInput(path + ":" + std::to_string(line_no) + ": " + msg);
}

// Maps label text to class ids 1..k in first-occurrence order.
struct LabelMapper {
  std::map<std::string, int> ids;
  std::vector<std::string> names;

  int id_for(const std::string& text) {
    auto it = ids.find(text);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(names.size()) + 1;
    ids.emplace(text, id);
    names.push_back(text);
    return id;
  }
};

void validate(const Dataset& ds) {
  if (ds.p() < 1) throw InvalidInput("dataset: no samples");
  if (ds.n() < 1) throw InvalidInput("dataset: no features");
  if (!ds.X.allFinite()) throw InvalidInput("dataset: NaN/Inf feature values");
  if (static_cast<Eigen::Index>(ds.labels.size()) != ds.p())
    throw InvalidInput("dataset: label count mismatch");
  if (ds.num_classes < 2) throw InvalidInput("dataset: fewer than two classes");
  for (int c : ds.labels)
    if (c < 1 || c > ds.num_classes) throw InvalidInput("dataset: label id out of range");
  if (!ds.feature_names.empty() &&
      static_cast<Eigen::Index>(ds.feature_names.size()) != ds.n())
    throw InvalidInput("dataset: feature name count mismatch");
}

}  // namespace

Dataset make_dataset(Eigen::MatrixXd X, const std::vector<int>& labels) {
  Dataset ds;
  ds.X = std::move(X);
  LabelMapper mapper;
  ds.labels.reserve(labels.size());
  for (int raw : labels) ds.labels.push_back(mapper.id_for(std::to_string(raw)));
  ds.num_classes = static_cast<int>(mapper.names.size());
  ds.provenance.format = "memory";
  ds.provenance.label_names = std::move(mapper.names);
  validate(ds);
  return ds;
}

Dataset load_dataset(const std::string& path, DataFormat format, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw InvalidInput(path + ": empty file");

  Dataset ds;
  ds.provenance.path = path;
  LabelMapper mapper;

  if (format == DataFormat::Csv) {
    ds.provenance.format = "csv";
    const auto first = split_csv_line(lines[0]);
    const size_t ncols = first.size();
    if (ncols < 2) parse_fail(path, 1, "need at least one feature column and a label column");
    size_t label_col = opts.label_column < 0 ? ncols - 1 : static_cast<size_t>(opts.label_column);
    if (label_col >= ncols) parse_fail(path, 1, "label column out of range");

    bool has_header = false;
    if (opts.header == LoadOptions::Header::Yes) {
      has_header = true;
    } else if (opts.header == LoadOptions::Header::Auto) {
      // Header row: any non-label cell that does not parse as a number.
      for (size_t c = 0; c < ncols; ++c) {
        double v;
        if (c != label_col && !parse_double(first[c], v)) {
          has_header = true;
          break;
        }
      }
    }

    const size_t start = has_header ? 1 : 0;
    const size_t p = lines.size() - start;
    if (p < 1) parse_fail(path, 1, "no data rows");
    const Eigen::Index n = static_cast<Eigen::Index>(ncols - 1);

    if (has_header) {
      for (size_t c = 0; c < ncols; ++c)
        if (c != label_col) ds.feature_names.push_back(first[c]);
    }

    ds.X.resize(n, static_cast<Eigen::Index>(p));
    ds.labels.reserve(p);
    for (size_t r = 0; r < p; ++r) {
      const size_t line_no = start + r + 1;
      const auto cells = split_csv_line(lines[start + r]);
      if (cells.size() != ncols)
        parse_fail(path, line_no, "expected " + std::to_string(ncols) + " cells, got " +
                                      std::to_string(cells.size()));
      Eigen::Index f = 0;
      for (size_t c = 0; c < ncols; ++c) {
        if (c == label_col) {
          ds.labels.push_back(mapper.id_for(cells[c]));
          continue;
        }
        double v;
        if (!parse_double(cells[c], v))
          parse_fail(path, line_no, "cannot parse '" + cells[c] + "' as a number");
        ds.X(f++, static_cast<Eigen::Index>(r)) = v;
      }
    }
  } else {
    ds.provenance.format = "libsvm";
    const size_t p = lines.size();
    std::vector<std::vector<std::pair<int, double>>> entries(p);
    int max_index = 0;
    for (size_t r = 0; r < p; ++r) {
      const size_t line_no = r + 1;
      std::stringstream ss(lines[r]);
      std::string tok;
      if (!(ss >> tok)) parse_fail(path, line_no, "missing label");
      ds.labels.push_back(mapper.id_for(tok));
      while (ss >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
          parse_fail(path, line_no, "expected idx:val, got '" + tok + "'");
        double idx_d, val;
        if (!parse_double(tok.substr(0, colon), idx_d) || idx_d < 1.0 ||
            idx_d != std::floor(idx_d))
          parse_fail(path, line_no, "bad feature index in '" + tok + "'");
        if (!parse_double(tok.substr(colon + 1), val))
          parse_fail(path, line_no, "bad feature value in '" + tok + "'");
        const int idx = static_cast<int>(idx_d);
        entries[r].emplace_back(idx, val);
        max_index = std::max(max_index, idx);
      }
    }
    if (max_index < 1) throw InvalidInput(path + ": no features present");
    ds.X = Eigen::MatrixXd::Zero(max_index, static_cast<Eigen::Index>(p));
    for (size_t r = 0; r < p; ++r)
      for (const auto& [idx, val] : entries[r])
        ds.X(idx - 1, static_cast<Eigen::Index>(r)) = val;
  }

  ds.num_classes = static_cast<int>(mapper.names.size());
  ds.provenance.label_names = std::move(mapper.names);
  validate(ds);
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open output file: " + path);
  out.precision(17);

  for (Eigen::Index f = 0; f < ds.n(); ++f) {
    if (ds.feature_names.empty())
      out << "f" << (f + 1) << ",";
    else
      out << ds.feature_names[static_cast<size_t>(f)] << ",";
  }
  out << "label\n";

  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    for (Eigen::Index f = 0; f < ds.n(); ++f) out << ds.X(f, j) << ",";
    const int c = ds.labels[static_cast<size_t>(j)];
    if (!ds.provenance.label_names.empty())
      out << ds.provenance.label_names[static_cast<size_t>(c - 1)];
    else
      out << c;
    out << "\n";
  }
  if (!out) throw InvalidInput("failed writing " + path);
}

Dataset slice_samples(const Dataset& ds, const std::vector<int>& sample_indices) {
  if (sample_indices.empty()) throw InvalidInput("slice_samples: empty index set");
  Dataset out;
  out.X.resize(ds.n(), static_cast<Eigen::Index>(sample_indices.size()));
  out.labels.reserve(sample_indices.size());
  Eigen::Index col = 0;
  for (int idx : sample_indices) {
    if (idx < 0 || idx >= ds.p()) throw InvalidInput("slice_samples: index out of range");
    out.X.col(col++) = ds.X.col(idx);
    out.labels.push_back(ds.labels[static_cast<size_t>(idx)]);
  }
  out.num_classes = ds.num_classes;
  out.feature_names = ds.feature_names;
  out.provenance = ds.provenance;
  return out;
}

Dataset inject_noise_features(const Dataset& ds, int t, std::uint64_t seed) {
  if (t < 1) throw InvalidInput("inject_noise_features: t must be >= 1");
  const Eigen::Index extra = 1000 * static_cast<Eigen::Index>(t);

  Dataset out;
  out.X.resize(ds.n() + extra, ds.p());
  out.X.topRows(ds.n()) = ds.X;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 0.01);
  for (Eigen::Index i = 0; i < extra; ++i) {
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      double u;
      do {
        u = uni(rng);
      } while (u <= 0.0);  // the interval is open at 0
      out.X(ds.n() + i, j) = u;
    }
  }

  out.labels = ds.labels;
  out.num_classes = ds.num_classes;
  if (!ds.feature_names.empty()) {
    out.feature_names = ds.feature_names;
    for (Eigen::Index i = 0; i < extra; ++i)
      out.feature_names.push_back("noise" + std::to_string(i + 1));
  }
  out.provenance = ds.provenance;
  out.provenance.format += "+noise(t=" + std::to_string(t) + ")";
  return out;
}

}  // namespace occafs
