#include "vmf/dataset.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "vmf/errors.hpp"

namespace vmf {

std::size_t validate_dense_labels(const std::vector<int>& labels) {
  if (labels.empty()) {
    throw DataError("labels: empty");
  }
  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw DataError("labels: negative label " + std::to_string(y));
    if (y > max_label) max_label = y;
  }
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (int y : labels) seen[static_cast<std::size_t>(y)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw DataError("labels: sparse labels, class " + std::to_string(c) +
                      " never occurs but " + std::to_string(max_label) + " does");
    }
  }
  return seen.size();
}

namespace {

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw DataError(path + ": truncated file (header)");
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  return in;
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  auto img = open_binary(images_path);
  if (read_u32_be(img, images_path) != 0x00000803u) {
    throw DataError(images_path + ": bad magic, expected 0x00000803");
  }
  const std::uint32_t n_images = read_u32_be(img, images_path);
  const std::uint32_t rows = read_u32_be(img, images_path);
  const std::uint32_t cols = read_u32_be(img, images_path);

  auto lab = open_binary(labels_path);
  if (read_u32_be(lab, labels_path) != 0x00000801u) {
    throw DataError(labels_path + ": bad magic, expected 0x00000801");
  }
  const std::uint32_t n_labels = read_u32_be(lab, labels_path);
  if (n_images != n_labels) {
    throw DataError("count mismatch: " + std::to_string(n_images) +
                    " images vs " + std::to_string(n_labels) + " labels");
  }
  if (n_images == 0) {
    throw DataError(images_path + ": zero samples");
  }

  const std::size_t dim = std::size_t(rows) * std::size_t(cols);
  LabeledDataset data;
  data.features = Matrix(n_images, dim);
  std::vector<unsigned char> pixel_buf(dim);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixel_buf.data()),
                  static_cast<std::streamsize>(dim))) {
      throw DataError(images_path + ": truncated file (pixels of image " +
                      std::to_string(i) + ")");
    }
    double* row = data.features.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = pixel_buf[j] / 255.0;
  }

  std::vector<unsigned char> label_buf(n_labels);
  if (!lab.read(reinterpret_cast<char*>(label_buf.data()), n_labels)) {
    throw DataError(labels_path + ": truncated file (labels)");
  }
  data.labels.assign(label_buf.begin(), label_buf.end());
  data.num_classes = validate_dense_labels(data.labels);
  return data;
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  LabeledDataset data;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() < 2) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ragged row, need a label plus at least one feature");
    }
    if (dim == 0) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ragged row, expected " + std::to_string(dim) +
                      " features, got " + std::to_string(fields.size() - 1));
    }
    std::size_t pos = 0;
    int label = 0;
    try {
      label = std::stoi(fields[0], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != fields[0].size()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": non-numeric label field '" + fields[0] + "'");
    }
    data.labels.push_back(label);
    std::vector<double> feat(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const std::string& f = fields[j + 1];
      std::size_t fpos = 0;
      try {
        feat[j] = std::stod(f, &fpos);
      } catch (const std::exception&) {
        fpos = 0;
      }
      if (fpos == 0 || fpos != f.size()) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": non-numeric field '" + f + "'");
      }
    }
    rows.push_back(std::move(feat));
  }
  if (rows.empty()) {
    throw DataError(path + ": no data rows");
  }
  data.features = Matrix(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* row = data.features.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = rows[i][j];
  }
  data.num_classes = validate_dense_labels(data.labels);
  return data;
}

}  // namespace vmf
