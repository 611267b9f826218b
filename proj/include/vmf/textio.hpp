#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vmf/matrix.hpp"
#include "vmf/trainer.hpp"

namespace vmf {

// Doubles are rendered with %.17g everywhere so that emitted text files are
// byte-identical across reruns and round-trip exactly through strtod.
std::string format_double(double v);

// One line per sample: label, then the coordinates, space separated.
void write_embeddings(const std::string& path, const std::vector<int>& labels,
                      const Matrix& coords);

// Inverse of write_embeddings; the cluster command ingests these.
std::pair<std::vector<int>, Matrix> read_embeddings(const std::string& path);

// Coordinates only, one point per line (sample clouds for plotting).
void write_points(const std::string& path, const Matrix& coords);

// "key: value" lines.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& fields);

// Comma-separated with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Line-oriented training log: "iter <i> loss <l> lr <r>" per iteration with
// "refresh <iter> degenerate <ids|->" markers interleaved, plus any warning
// lines. Deterministic fields only; wall-clock timestamps never appear.
std::string render_train_log(const TrainLog& log);
void write_train_log(const std::string& path, const TrainLog& log);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace vmf
