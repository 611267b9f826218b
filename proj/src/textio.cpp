#include "vmf/textio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vmf/errors.hpp"

namespace vmf {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError(path + ": cannot open for writing");
  }
  out << content;
  if (!out) {
    throw DataError(path + ": write failed");
  }
}

void write_embeddings(const std::string& path, const std::vector<int>& labels,
                      const Matrix& coords) {
  if (labels.size() != coords.rows()) {
    throw ConfigError("write_embeddings: label count != row count");
  }
  std::ostringstream out;
  out << "# label";
  for (std::size_t j = 0; j < coords.cols(); ++j) out << " x" << j;
  out << "\n";
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    out << labels[i];
    const double* row = coords.row(i);
    for (std::size_t j = 0; j < coords.cols(); ++j) {
      out << ' ' << format_double(row[j]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::pair<std::vector<int>, Matrix> read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int label;
    if (!(ss >> label)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad label field");
    }
    std::vector<double> coords;
    double v;
    while (ss >> v) coords.push_back(v);
    if (!ss.eof()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (coords.size() < 2) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": need at least 2 coordinates");
    }
    if (dim == 0) {
      dim = coords.size();
    } else if (coords.size() != dim) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ragged row");
    }
    labels.push_back(label);
    rows.push_back(std::move(coords));
  }
  if (rows.empty()) {
    throw DataError(path + ": no data rows");
  }
  Matrix coords(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) coords(i, j) = rows[i][j];
  }
  return {std::move(labels), std::move(coords)};
}

void write_points(const std::string& path, const Matrix& coords) {
  std::ostringstream out;
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    const double* row = coords.row(i);
    for (std::size_t j = 0; j < coords.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(row[j]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ostringstream out;
  for (const auto& [key, value] : fields) {
    out << key << ": " << value << "\n";
  }
  write_text_file(path, out.str());
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out << ',';
    out << header[j];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw ConfigError("write_csv: row width != header width");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << row[j];
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::string render_train_log(const TrainLog& log) {
  std::ostringstream out;
  std::size_t next_refresh = 0;
  auto emit_refreshes_at = [&](std::size_t iteration) {
    while (next_refresh < log.refreshes.size() &&
           log.refreshes[next_refresh].iteration == iteration) {
      const auto& r = log.refreshes[next_refresh];
      out << "refresh " << r.iteration << " degenerate ";
      if (r.degenerate.empty()) {
        out << '-';
      } else {
        for (std::size_t i = 0; i < r.degenerate.size(); ++i) {
          if (i > 0) out << ';';
          out << r.degenerate[i];
        }
      }
      out << "\n";
      ++next_refresh;
    }
  };
  for (std::size_t it = 0; it < log.losses.size(); ++it) {
    emit_refreshes_at(it);
    out << "iter " << it << " loss " << format_double(log.losses[it]) << " lr "
        << format_double(log.learning_rates[it]) << "\n";
  }
  emit_refreshes_at(log.losses.size());
  for (const auto& w : log.warnings) {
    out << "warning " << w << "\n";
  }
  return out.str();
}

void write_train_log(const std::string& path, const TrainLog& log) {
  write_text_file(path, render_train_log(log));
}

}  // namespace vmf
