#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "occafs/errors.hpp"

namespace occafs {

enum class DataFormat { Csv, Libsvm };

struct DatasetProvenance {
  std::string path;
  std::string format;
  // Class id c (1-based) maps to the original label text label_names[c-1];
  // ids are assigned in first-occurrence order.
  std::vector<std::string> label_names;
};

/// Labeled data, oriented features x samples.
struct Dataset {
  Eigen::MatrixXd X;        // n x p
  std::vector<int> labels;  // p entries in 1..num_classes
  int num_classes = 0;
  std::vector<std::string> feature_names;  // empty, or one name per feature
  DatasetProvenance provenance;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

struct LoadOptions {
  // CSV only: 0-based column holding the label; -1 means the last column.
  int label_column = -1;
  enum class Header { Auto, Yes, No };
  Header header = Header::Auto;
};

/// Canonicalizes and validates an in-memory dataset. Arbitrary integer labels
/// are remapped to 1..k in first-occurrence order.
Dataset make_dataset(Eigen::MatrixXd X, const std::vector<int>& labels);

/// CSV: one sample per row, label in a configurable column (default last),
/// optional header. libsvm: "label idx:val ..." lines with 1-based indices,
/// densified. Labels may be arbitrary strings; they are remapped to 1..k in
/// first-occurrence order and the mapping is recorded in provenance.
Dataset load_dataset(const std::string& path, DataFormat format, const LoadOptions& opts = {});

/// Writes samples as rows with the label in the last column, using original
/// label text. The output loads back with load_dataset(..., Csv).
void save_dataset_csv(const Dataset& ds, const std::string& path);

/// Dataset restricted to the given sample indices (0-based). Class ids are
/// preserved, not re-canonicalized.
Dataset slice_samples(const Dataset& ds, const std::vector<int>& sample_indices);

/// Appends 1000*t noise features drawn i.i.d. uniform on (0, 0.01). Original
/// features and labels are unchanged.
Dataset inject_noise_features(const Dataset& ds, int t, std::uint64_t seed);

}  // namespace occafs
