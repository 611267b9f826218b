#pragma once

#include <string>
#include <vector>

#include "vmf/matrix.hpp"

namespace vmf {

enum class Split { train, test };

// Features are row vectors; labels are dense class indices in [0, C), i.e.
// every class up to the maximum must actually occur.
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;  // optional, may be empty
  Split split = Split::train;
};

// IDX image/label pair (the classic digit-corpus layout): big-endian magic
// 0x00000803 for images and 0x00000801 for labels, big-endian dimension
// sizes, then raw bytes. Pixels land in [0, 1] as value/255, images
// flattened row-major. Throws DataError on bad magic, truncation, or an
// image/label count mismatch.
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

// CSV: first column integer label, remaining columns real features, optional
// '#'-prefixed header lines. Throws DataError on ragged rows, non-numeric
// fields, or sparse labels (a class index in [0, max] never occurring).
LabeledDataset load_csv(const std::string& path);

// Shared label validation: non-negative, dense, at least one sample.
// Returns the class count.
std::size_t validate_dense_labels(const std::vector<int>& labels);

}  // namespace vmf
