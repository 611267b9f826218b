// vmfembed: batch front end over the vmf library. Seven commands cover the
// pipeline from raw data to plot-ready coordinates:
//
//   train     fit the embedding network with alternating prototype refreshes
//   eval      nearest-prototype accuracy and loss of a checkpoint on a split
//   retrieve  recall@K and neighbor lists from embedded queries
//   cluster   spherical k-means or movMF EM over an embeddings file
//   embed     emit "label x0 .. x{p-1}" lines for external plotting
//   sample    draw synthetic clouds at several concentrations
//   diagnose  concentration and separation statistics of an embedding space
//
// Configuration is a flat key=value space: keys come from an optional
// --config file and from command-line pairs, with the command line taking
// precedence key by key. Every key is validated against the command's table
// before any file is opened. Errors exit with distinct codes: 2 for
// configuration problems, 3 for data problems, 4 for numeric failures.

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vmf/checkpoint.hpp"
#include "vmf/clustering.hpp"
#include "vmf/dataset.hpp"
#include "vmf/directional.hpp"
#include "vmf/errors.hpp"
#include "vmf/evaluator.hpp"
#include "vmf/network.hpp"
#include "vmf/objective.hpp"
#include "vmf/rng.hpp"
#include "vmf/textio.hpp"
#include "vmf/trainer.hpp"

namespace fs = std::filesystem;
using namespace vmf;

namespace {

// ---------------------------------------------------------------------------
// Key tables. One row per accepted key; anything else is rejected up front.

struct KeyDoc {
  const char* key;
  const char* doc;  // shown by `vmfembed help <command>`
};

const std::vector<KeyDoc> kCommonKeys{
    {"output_dir", "directory for artifacts; created if missing (required)"},
    {"seed", "global seed; sub-streams derive from it per role (default 0)"},
};

const std::vector<KeyDoc> kTrainKeys{
    {"train_images", "IDX image file (pair with train_labels)"},
    {"train_labels", "IDX label file (pair with train_images)"},
    {"train_csv", "CSV file: label,feature,... (alternative to the IDX pair)"},
    {"hidden", "comma list of hidden layer widths (default 64)"},
    {"embed_dim", "embedding dimension p >= 2 (default 3)"},
    {"activation", "hidden activation: relu | tanh (default relu)"},
    {"kappa", "concentration of the loss, >= 0 (default 15)"},
    {"epochs", "passes over the data (default 30)"},
    {"batch_size", "SGD batch size (default 64)"},
    {"refresh_interval",
     "SGD iterations between prototype refreshes; 0 = one epoch (default 0)"},
    {"learning_rate", "constant SGD rate (default 0.1)"},
    {"lr_schedule",
     "piecewise-constant rate, e.g. 0:0.1,200:0.05; excludes learning_rate"},
    {"momentum", "SGD momentum in [0, 1) (default 0.9)"},
    {"refresh_checkpoints",
     "0|1: also write checkpoint_<iter>.bin at every refresh (default 0)"},
};

const std::vector<KeyDoc> kEvalKeys{
    {"checkpoint", "checkpoint file from train (required)"},
    {"test_images", "IDX image file (pair with test_labels)"},
    {"test_labels", "IDX label file (pair with test_images)"},
    {"test_csv", "CSV file (alternative to the IDX pair)"},
};

const std::vector<KeyDoc> kRetrieveKeys{
    {"checkpoint", "checkpoint file from train (required)"},
    {"test_images", "IDX image file (pair with test_labels)"},
    {"test_labels", "IDX label file (pair with test_images)"},
    {"test_csv", "CSV file (alternative to the IDX pair)"},
    {"recall_ks", "comma list of K values (default 1,2,4,8)"},
    {"neighbors", "0|1: write neighbors.txt with top-K indices (default 1)"},
};

const std::vector<KeyDoc> kClusterKeys{
    {"embeddings", "embeddings text file, as written by embed (required)"},
    {"k", "number of clusters, >= 1 (required)"},
    {"method", "kmeans | soft | hard (default kmeans)"},
    {"max_iter", "iteration cap (default 100)"},
    {"tol", "convergence threshold on the objective (default 1e-8)"},
};

const std::vector<KeyDoc> kEmbedKeys{
    {"checkpoint", "checkpoint file from train (required)"},
    {"data_images", "IDX image file (pair with data_labels)"},
    {"data_labels", "IDX label file (pair with data_images)"},
    {"data_csv", "CSV file (alternative to the IDX pair)"},
};

const std::vector<KeyDoc> kSampleKeys{
    {"p", "sphere dimension of the samples, >= 2 (default 3)"},
    {"kappas", "comma list of concentrations, one cloud each (default 1,10,100)"},
    {"n", "points per cloud (default 500)"},
    {"mu", "comma list of p mean-direction coordinates; normalized (default axis 0)"},
};

const std::vector<KeyDoc> kDiagnoseKeys{
    {"checkpoint", "checkpoint file from train (required)"},
    {"data_images", "IDX image file (pair with data_labels)"},
    {"data_labels", "IDX label file (pair with data_images)"},
    {"data_csv", "CSV file (alternative to the IDX pair)"},
};

struct CommandDoc {
  const char* name;
  const char* summary;
  const std::vector<KeyDoc>* keys;
};

const std::vector<CommandDoc> kCommands{
    {"train", "fit the embedding network and write checkpoint + train log",
     &kTrainKeys},
    {"eval", "accuracy and loss of a checkpoint on a labeled split",
     &kEvalKeys},
    {"retrieve", "recall@K and neighbor lists over embedded queries",
     &kRetrieveKeys},
    {"cluster", "spherical k-means or movMF EM over an embeddings file",
     &kClusterKeys},
    {"embed", "write one 'label x0 .. x{p-1}' line per sample", &kEmbedKeys},
    {"sample", "draw synthetic unit-vector clouds per concentration",
     &kSampleKeys},
    {"diagnose", "concentration/separation statistics of an embedding space",
     &kDiagnoseKeys},
};

const CommandDoc* find_command(const std::string& name) {
  for (const CommandDoc& c : kCommands) {
    if (name == c.name) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Config assembly: file pairs overridden by command-line pairs.

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Flat key = value lines; '#' starts a comment anywhere; blank lines are
// skipped. Duplicate keys are rejected rather than silently merged.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    if (!pairs.emplace(key, value).second) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
  }
  return pairs;
}

struct ParsedArgs {
  std::string command;
  std::map<std::string, std::string> flags;   // command-line pairs
  std::optional<std::string> config_path;
};

ParsedArgs parse_args(int argc, char** argv) {
  ParsedArgs out;
  if (argc < 2) throw ConfigError("no command given; try 'vmfembed help'");
  out.command = argv[1];
  auto add = [&](const std::string& key, const std::string& value) {
    if (key == "config") {
      if (out.config_path) throw ConfigError("duplicate --config");
      out.config_path = value;
      return;
    }
    if (!out.flags.emplace(key, value).second) {
      throw ConfigError("duplicate flag '" + key + "'");
    }
  };
  for (int i = 2; i < argc; ++i) {
    std::string tok = argv[i];
    std::size_t dashes = 0;
    while (dashes < tok.size() && tok[dashes] == '-') ++dashes;
    if (dashes > 2) throw ConfigError("malformed argument: " + tok);
    tok = tok.substr(dashes);
    const std::size_t eq = tok.find('=');
    if (eq != std::string::npos) {
      add(tok.substr(0, eq), tok.substr(eq + 1));
    } else if (dashes > 0 && i + 1 < argc) {
      add(tok, argv[++i]);  // --key value form
    } else {
      throw ConfigError("expected key=value, got: " + std::string(argv[i]));
    }
  }
  return out;
}

class RunConfig {
 public:
  RunConfig(std::map<std::string, std::string> values, const CommandDoc& cmd)
      : values_(std::move(values)) {
    std::set<std::string> known;
    for (const KeyDoc& d : kCommonKeys) known.insert(d.key);
    for (const KeyDoc& d : *cmd.keys) known.insert(d.key);
    for (const auto& [key, value] : values_) {
      if (!known.count(key)) {
        throw ConfigError("unknown key '" + key + "' for command '" +
                          cmd.name + "'; see 'vmfembed help " +
                          std::string(cmd.name) + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key: " + key);
    if (it->second.empty()) throw ConfigError(key + ": empty value");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Strict scalar parsing: the whole token must be consumed.

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("");
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& s) {
  return static_cast<std::size_t>(parse_u64(key, s));
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "0" || s == "false") return false;
  if (s == "1" || s == "true") return true;
  throw ConfigError(key + ": expected 0/1/true/false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s, ',')) {
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& s) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(s, ',')) {
    out.push_back(parse_size(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

// "0:0.1,200:0.05" -> LrPoints; the trainer checks ordering and positivity.
std::vector<LrPoint> parse_schedule(const std::string& key,
                                    const std::string& s) {
  std::vector<LrPoint> out;
  for (const std::string& item : split_list(s, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(key + ": expected iteration:rate, got '" + item + "'");
    }
    out.push_back({parse_size(key, trim(item.substr(0, colon))),
                   parse_double(key, trim(item.substr(colon + 1)))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output directory lock: one writer at a time, released on scope exit.

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      throw ConfigError("cannot create output_dir '" + dir.string() +
                        "': " + ec.message());
    }
    path_ = (dir / ".lock").string();
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw ConfigError("output_dir is locked (" + path_ +
                        " exists); another run may be writing here. Remove "
                        "the file if it is stale.");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] ssize_t n = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Shared pieces.

// Exactly one source: either the <prefix>_images/<prefix>_labels IDX pair or
// <prefix>_csv. Mixing or omitting both is a configuration error.
void check_data_keys(const RunConfig& cfg, const std::string& prefix) {
  const bool img = cfg.has(prefix + "_images");
  const bool lab = cfg.has(prefix + "_labels");
  const bool csv = cfg.has(prefix + "_csv");
  if (img != lab) {
    throw ConfigError(prefix + "_images and " + prefix +
                      "_labels must be given together");
  }
  if (img && csv) {
    throw ConfigError("set " + prefix + "_csv or the " + prefix +
                      "_images/" + prefix + "_labels pair, not both");
  }
  if (!img && !csv) {
    throw ConfigError("no input data: set " + prefix + "_csv or the " +
                      prefix + "_images/" + prefix + "_labels pair");
  }
}

LabeledDataset load_data(const RunConfig& cfg, const std::string& prefix) {
  if (cfg.has(prefix + "_csv")) return load_csv(cfg.require(prefix + "_csv"));
  return load_idx(cfg.require(prefix + "_images"),
                  cfg.require(prefix + "_labels"));
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.require("output_dir")) / name).string();
}

// format_double output made filesystem-friendly: 0.5 -> 0p5, -2 -> m2.
std::string sanitize_number(double v) {
  std::string s = format_double(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
    if (c == '+') c = '_';
  }
  return s;
}

Activation parse_activation(const std::string& s) {
  return activation_from_string(s);  // throws ConfigError on anything else
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_train(const RunConfig& cfg) {
  // Validate every key before touching the filesystem.
  check_data_keys(cfg, "train");
  const std::uint64_t seed = parse_u64("seed", cfg.get("seed", "0"));
  const std::vector<std::size_t> hidden =
      parse_size_list("hidden", cfg.get("hidden", "64"));
  const std::size_t embed_dim =
      parse_size("embed_dim", cfg.get("embed_dim", "3"));
  if (embed_dim < 2) throw ConfigError("embed_dim: must be >= 2");
  for (std::size_t w : hidden) {
    if (w == 0) throw ConfigError("hidden: zero width");
  }
  const Activation act = parse_activation(cfg.get("activation", "relu"));

  TrainConfig tc;
  tc.kappa = parse_double("kappa", cfg.get("kappa", "15"));
  if (tc.kappa < 0.0) throw ConfigError("kappa: must be >= 0");
  tc.epochs = parse_size("epochs", cfg.get("epochs", "30"));
  tc.batch_size = parse_size("batch_size", cfg.get("batch_size", "64"));
  tc.prototype_update_interval =
      parse_size("refresh_interval", cfg.get("refresh_interval", "0"));
  tc.momentum = parse_double("momentum", cfg.get("momentum", "0.9"));
  tc.shuffle_seed = seed;
  if (cfg.has("lr_schedule") && cfg.has("learning_rate")) {
    throw ConfigError("set learning_rate or lr_schedule, not both");
  }
  if (cfg.has("lr_schedule")) {
    tc.lr_schedule = parse_schedule("lr_schedule", cfg.require("lr_schedule"));
  } else {
    tc.lr_schedule = {
        {0, parse_double("learning_rate", cfg.get("learning_rate", "0.1"))}};
  }
  const bool refresh_ckpt = parse_bool(
      "refresh_checkpoints", cfg.get("refresh_checkpoints", "0"));

  DirLock lock(cfg.require("output_dir"));
  const LabeledDataset data = load_data(cfg, "train");

  std::vector<std::size_t> widths;
  widths.push_back(data.features.cols());
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(embed_dim);
  Network net = init_network({widths, act, derive_seed(seed, "init")});

  RefreshHook hook;
  if (refresh_ckpt) {
    hook = [&cfg](const Network& n, const PrototypeSet& p, std::size_t iter) {
      save_checkpoint(
          out_path(cfg, "checkpoint_" + std::to_string(iter) + ".bin"), n, p);
    };
  }

  TrainResult result = train(std::move(net), data, tc, hook);
  save_checkpoint(out_path(cfg, "checkpoint.bin"), result.net,
                  result.prototypes);
  write_train_log(out_path(cfg, "train_log.txt"), result.log);

  const double train_acc = accuracy(result.net, result.prototypes, data);
  write_report(
      out_path(cfg, "train_report.txt"),
      {{"samples", std::to_string(data.features.rows())},
       {"input_dim", std::to_string(data.features.cols())},
       {"classes", std::to_string(data.num_classes)},
       {"embed_dim", std::to_string(embed_dim)},
       {"iterations", std::to_string(result.log.losses.size())},
       {"refreshes", std::to_string(result.log.refreshes.size())},
       {"final_loss", result.log.losses.empty()
                          ? "-"
                          : format_double(result.log.losses.back())},
       {"train_accuracy", format_double(train_acc)},
       {"warnings", std::to_string(result.log.warnings.size())}});
  std::cout << "train: " << result.log.losses.size() << " iterations, final "
            << "loss "
            << (result.log.losses.empty()
                    ? std::string("-")
                    : format_double(result.log.losses.back()))
            << ", train accuracy " << format_double(train_acc) << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  check_data_keys(cfg, "test");
  const std::string ckpt = cfg.require("checkpoint");

  DirLock lock(cfg.require("output_dir"));
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const LabeledDataset data = load_data(cfg, "test");

  const Matrix embeddings = forward(loaded.net, data.features);
  const LossReport loss = vmf_loss(embeddings, data.labels, loaded.protos);
  const std::vector<int> preds = predict_batch(embeddings, loaded.protos);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == data.labels[i]) ++correct;
  }
  const double acc = static_cast<double>(correct) /
                     static_cast<double>(preds.size());

  std::string pred_lines;
  for (int p : preds) pred_lines += std::to_string(p) + "\n";
  write_text_file(out_path(cfg, "predictions.txt"), pred_lines);
  write_report(out_path(cfg, "eval_report.txt"),
               {{"samples", std::to_string(data.features.rows())},
                {"classes", std::to_string(data.num_classes)},
                {"accuracy", format_double(acc)},
                {"mean_loss", format_double(loss.mean_loss)}});
  std::cout << "eval: accuracy " << format_double(acc) << ", mean loss "
            << format_double(loss.mean_loss) << "\n";
  return 0;
}

int cmd_retrieve(const RunConfig& cfg) {
  check_data_keys(cfg, "test");
  const std::string ckpt = cfg.require("checkpoint");
  const std::vector<std::size_t> ks =
      parse_size_list("recall_ks", cfg.get("recall_ks", "1,2,4,8"));
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("recall_ks: K must be >= 1");
  }
  const bool write_neighbors =
      parse_bool("neighbors", cfg.get("neighbors", "1"));

  DirLock lock(cfg.require("output_dir"));
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const LabeledDataset data = load_data(cfg, "test");

  const Matrix embeddings = forward(loaded.net, data.features);
  const RetrievalResult result = recall_at_k(embeddings, data.labels, ks);

  std::vector<std::pair<std::string, std::string>> report{
      {"queries", std::to_string(result.evaluated_queries)},
      {"skipped_queries", std::to_string(result.skipped_queries)}};
  std::vector<std::vector<std::string>> csv_rows;
  for (const auto& [k, recall] : result.recall_at) {
    report.push_back({"recall@" + std::to_string(k), format_double(recall)});
    csv_rows.push_back({std::to_string(k), format_double(recall)});
  }
  write_report(out_path(cfg, "retrieval_report.txt"), report);
  write_csv(out_path(cfg, "recall.csv"), {"k", "recall"}, csv_rows);

  if (write_neighbors) {
    std::string lines =
        "# row i: top-" + std::to_string(result.neighbors.empty()
                                             ? 0
                                             : result.neighbors[0].size()) +
        " neighbor indices of query i, cosine descending\n";
    for (const auto& row : result.neighbors) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) lines += ' ';
        lines += std::to_string(row[j]);
      }
      lines += '\n';
    }
    write_text_file(out_path(cfg, "neighbors.txt"), lines);
  }
  for (const auto& [k, recall] : result.recall_at) {
    std::cout << "retrieve: recall@" << k << " " << format_double(recall)
              << "\n";
  }
  return 0;
}

int cmd_cluster(const RunConfig& cfg) {
  const std::string path = cfg.require("embeddings");
  const std::size_t k = parse_size("k", cfg.require("k"));
  if (k == 0) throw ConfigError("k: must be >= 1");
  const std::string method = cfg.get("method", "kmeans");
  if (method != "kmeans" && method != "soft" && method != "hard") {
    throw ConfigError("method: expected kmeans | soft | hard, got '" +
                      method + "'");
  }
  const std::size_t max_iter =
      parse_size("max_iter", cfg.get("max_iter", "100"));
  const double tol = parse_double("tol", cfg.get("tol", "1e-8"));
  if (tol < 0.0) throw ConfigError("tol: must be >= 0");
  const std::uint64_t seed = parse_u64("seed", cfg.get("seed", "0"));

  DirLock lock(cfg.require("output_dir"));
  auto [labels, coords] = read_embeddings(path);
  // Rows are re-normalized so externally produced coordinates work too.
  const SampleCloud cloud = SampleCloud::normalized(std::move(coords));

  const std::uint64_t cluster_seed = derive_seed(seed, "clustering");
  ClusteringResult result;
  if (method == "kmeans") {
    result = spherical_kmeans(cloud, k, cluster_seed, max_iter, tol);
  } else {
    result = movmf_em(cloud, k,
                      method == "soft" ? EmMode::soft : EmMode::hard,
                      cluster_seed, max_iter, tol);
  }

  const double score = nmi(labels, result.assignments);
  const std::string objective = result.objective_trace.empty()
                                    ? "-"
                                    : format_double(result.objective_trace.back());

  std::string lines = "# method " + method + " k " + std::to_string(k) +
                      " iterations " + std::to_string(result.iterations) +
                      "\n# objective " + objective + "\n";
  for (int a : result.assignments) lines += std::to_string(a) + "\n";
  write_text_file(out_path(cfg, "assignments.txt"), lines);
  write_points(out_path(cfg, "centroids.txt"), result.centroids);

  std::vector<std::pair<std::string, std::string>> report{
      {"method", method},
      {"k", std::to_string(k)},
      {"samples", std::to_string(cloud.size())},
      {"iterations", std::to_string(result.iterations)},
      {"objective", objective},
      {"nmi_vs_file_labels", format_double(score)},
      {"events", std::to_string(result.events.size())}};
  for (std::size_t h = 0; h < result.kappas.size(); ++h) {
    report.push_back(
        {"kappa_" + std::to_string(h), format_double(result.kappas[h])});
  }
  for (std::size_t h = 0; h < result.mixing.size(); ++h) {
    report.push_back(
        {"mixing_" + std::to_string(h), format_double(result.mixing[h])});
  }
  write_report(out_path(cfg, "cluster_report.txt"), report);
  std::cout << "cluster: " << method << " k=" << k << " nmi "
            << format_double(score) << "\n";
  return 0;
}

int cmd_embed(const RunConfig& cfg) {
  check_data_keys(cfg, "data");
  const std::string ckpt = cfg.require("checkpoint");

  DirLock lock(cfg.require("output_dir"));
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const LabeledDataset data = load_data(cfg, "data");

  const Matrix embeddings = forward(loaded.net, data.features);
  write_embeddings(out_path(cfg, "embeddings.txt"), data.labels, embeddings);
  std::cout << "embed: wrote " << embeddings.rows() << " points of dimension "
            << embeddings.cols() << "\n";
  return 0;
}

int cmd_sample(const RunConfig& cfg) {
  const std::size_t p = parse_size("p", cfg.get("p", "3"));
  if (p < 2) throw ConfigError("p: must be >= 2");
  const std::vector<double> kappas =
      parse_double_list("kappas", cfg.get("kappas", "1,10,100"));
  for (double kp : kappas) {
    if (kp < 0.0) throw ConfigError("kappas: must be >= 0");
  }
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    for (std::size_t j = i + 1; j < kappas.size(); ++j) {
      if (kappas[i] == kappas[j]) {
        throw ConfigError("kappas: duplicate value " + format_double(kappas[i]));
      }
    }
  }
  const std::size_t n = parse_size("n", cfg.get("n", "500"));
  if (n == 0) throw ConfigError("n: must be >= 1");
  const std::uint64_t seed = parse_u64("seed", cfg.get("seed", "0"));

  std::vector<double> mu_raw(p, 0.0);
  mu_raw[0] = 1.0;
  if (cfg.has("mu")) {
    mu_raw = parse_double_list("mu", cfg.require("mu"));
    if (mu_raw.size() != p) {
      throw ConfigError("mu: expected " + std::to_string(p) +
                        " coordinates, got " + std::to_string(mu_raw.size()));
    }
    if (norm(mu_raw) < 1e-12) throw ConfigError("mu: zero vector");
  }
  const UnitVector mu = UnitVector::from_raw(mu_raw);

  DirLock lock(cfg.require("output_dir"));
  std::vector<std::pair<std::string, std::string>> report{
      {"p", std::to_string(p)}, {"n_per_cloud", std::to_string(n)}};
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const SampleCloud cloud =
        sample_vmf({mu, kappas[i]}, n, derive_seed(seed, "sampling", i));
    const std::string tag = sanitize_number(kappas[i]);
    write_points(out_path(cfg, "samples_kappa_" + tag + ".txt"),
                 cloud.points());

    std::vector<double> resultant(p, 0.0);
    for (std::size_t r = 0; r < cloud.size(); ++r) {
      auto row = cloud.row(r);
      for (std::size_t j = 0; j < p; ++j) resultant[j] += row[j];
    }
    const double rbar = norm(resultant) / static_cast<double>(n);
    report.push_back({"rbar_kappa_" + tag, format_double(rbar)});
    std::cout << "sample: kappa " << format_double(kappas[i]) << " rbar "
              << format_double(rbar) << "\n";
  }
  write_report(out_path(cfg, "sample_report.txt"), report);
  return 0;
}

int cmd_diagnose(const RunConfig& cfg) {
  check_data_keys(cfg, "data");
  const std::string ckpt = cfg.require("checkpoint");

  DirLock lock(cfg.require("output_dir"));
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const LabeledDataset data = load_data(cfg, "data");

  const SpaceDiagnostics diag = diagnostics(loaded.net, loaded.protos, data);
  std::string skipped = "-";
  if (!diag.skipped_classes.empty()) {
    skipped.clear();
    for (std::size_t i = 0; i < diag.skipped_classes.size(); ++i) {
      if (i) skipped += ';';
      skipped += std::to_string(diag.skipped_classes[i]);
    }
  }
  write_report(out_path(cfg, "diagnose_report.txt"),
               {{"samples", std::to_string(data.features.rows())},
                {"classes", std::to_string(loaded.protos.num_classes())},
                {"average_kappa_hat", format_double(diag.average_kappa_hat)},
                {"average_prototype_cosine",
                 format_double(diag.average_cosine)},
                {"kappa_clamped", diag.kappa_clamped ? "1" : "0"},
                {"skipped_classes", skipped}});
  std::cout << "diagnose: average kappa_hat "
            << format_double(diag.average_kappa_hat)
            << ", average prototype cosine "
            << format_double(diag.average_cosine) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Help.

void print_usage(std::ostream& os) {
  os << "usage: vmfembed <command> [--config FILE] [key=value ...]\n\n"
     << "commands:\n";
  for (const CommandDoc& c : kCommands) {
    os << "  " << c.name << std::string(10 - std::string(c.name).size(), ' ')
       << c.summary << "\n";
  }
  os << "  help      this overview, or 'help <command>' for its keys\n\n"
     << "Keys may come from a --config file (flat key = value lines, '#'\n"
     << "comments) and/or the command line as key=value or --key value;\n"
     << "command-line values override file values key by key. Exit codes:\n"
     << "0 success, 2 configuration error, 3 data error, 4 numeric error.\n";
}

void print_command_help(const CommandDoc& cmd) {
  std::cout << "vmfembed " << cmd.name << ": " << cmd.summary << "\n\nkeys:\n";
  auto print_keys = [](const std::vector<KeyDoc>& keys) {
    for (const KeyDoc& d : keys) {
      std::cout << "  " << d.key;
      for (std::size_t i = std::string(d.key).size(); i < 20; ++i) {
        std::cout << ' ';
      }
      std::cout << d.doc << "\n";
    }
  };
  print_keys(*cmd.keys);
  std::cout << "common:\n";
  print_keys(kCommonKeys);
}

int run(int argc, char** argv) {
  // Help takes a bare command name, not key=value pairs, so handle it
  // before the flag parser.
  if (argc >= 2) {
    const std::string first = argv[1];
    if (first == "help" || first == "--help" || first == "-h") {
      if (argc >= 3) {
        const CommandDoc* cmd = find_command(argv[2]);
        if (!cmd) {
          throw ConfigError("unknown command: " + std::string(argv[2]));
        }
        print_command_help(*cmd);
      } else {
        print_usage(std::cout);
      }
      return 0;
    }
  }

  ParsedArgs args = parse_args(argc, argv);
  const CommandDoc* cmd = find_command(args.command);
  if (!cmd) {
    throw ConfigError("unknown command '" + args.command +
                      "'; try 'vmfembed help'");
  }

  std::map<std::string, std::string> merged;
  if (args.config_path) merged = parse_config_file(*args.config_path);
  for (const auto& [key, value] : args.flags) merged[key] = value;
  RunConfig cfg(std::move(merged), *cmd);

  if (args.command == "train") return cmd_train(cfg);
  if (args.command == "eval") return cmd_eval(cfg);
  if (args.command == "retrieve") return cmd_retrieve(cfg);
  if (args.command == "cluster") return cmd_cluster(cfg);
  if (args.command == "embed") return cmd_embed(cfg);
  if (args.command == "sample") return cmd_sample(cfg);
  return cmd_diagnose(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
