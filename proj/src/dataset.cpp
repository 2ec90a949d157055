#include "tpaug/dataset.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tpaug/errors.hpp"

namespace tpaug {

using nlohmann::json;

namespace {

// JSON accessors that report the full path of the offending field.
class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  Field operator[](std::string_view key) const {
    const std::string sub = path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    if (!node_.is_object()) throw ParseError(path_.empty() ? "<root>" : path_, "expected an object");
    const auto it = node_.find(key);
    if (it == node_.end()) throw ParseError(sub, "missing field");
    return Field(*it, sub);
  }

  Field at(std::size_t i) const {
    return Field(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t array_size() const {
    if (!node_.is_array()) throw ParseError(path_, "expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) throw ParseError(path_, "expected a number");
    return node_.get<double>();
  }

  // Non-finite doubles are written as null.
  double number_or_inf() const {
    if (node_.is_null()) return std::numeric_limits<double>::infinity();
    return number();
  }

  long long integer() const {
    if (!node_.is_number_integer()) throw ParseError(path_, "expected an integer");
    return node_.get<long long>();
  }

  int positive_int() const {
    const long long v = integer();
    if (v < 1 || v > std::numeric_limits<int>::max()) throw ParseError(path_, "expected a positive integer");
    return static_cast<int>(v);
  }

  bool boolean() const {
    if (!node_.is_boolean()) throw ParseError(path_, "expected a boolean");
    return node_.get<bool>();
  }

  std::string string() const {
    if (!node_.is_string()) throw ParseError(path_, "expected a string");
    return node_.get<std::string>();
  }

  Eigen::VectorXd vector(Eigen::Index expected = -1) const {
    const auto n = array_size();
    if (expected >= 0 && static_cast<Eigen::Index>(n) != expected) {
      throw ParseError(path_, "expected " + std::to_string(expected) + " entries, got " + std::to_string(n));
    }
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = at(i).number();
    return v;
  }

  Eigen::MatrixXd square(Eigen::Index dim) const {
    const Eigen::VectorXd flat = vector(dim * dim);
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = flat[r * dim + c];
    }
    return m;
  }

  Eigen::MatrixXd matrix() const {
    const int rows = (*this)["rows"].positive_int();
    const int cols = (*this)["cols"].positive_int();
    const Eigen::VectorXd flat = (*this)["data"].vector(static_cast<Eigen::Index>(rows) * cols);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<Eigen::Index>(r) * cols + c];
    }
    return m;
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what), e.what());
  }
}

void check_header(const json& doc, std::string_view kind) {
  const Field root(doc, "");
  if (root["format"].string() != kFormatTag) {
    throw VersionError("not a tpaug container (format tag mismatch)");
  }
  const long long version = root["version"].integer();
  if (version != kFormatVersion) {
    throw VersionError("unsupported format version " + std::to_string(version) + " (this build reads " +
                       std::to_string(kFormatVersion) + ")");
  }
  const std::string k = root["kind"].string();
  if (k != kind) throw ParseError("kind", "expected '" + std::string(kind) + "', got '" + k + "'");
}

json header(std::string_view kind) {
  return json{{"format", kFormatTag}, {"kind", kind}, {"version", kFormatVersion}};
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json row_major_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

json matrix_json(const Eigen::MatrixXd& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", row_major_json(m)}};
}

json frame_json(const Frame& f) {
  return json{{"rotation", row_major_json(f.rotation())}, {"translation", vector_json(f.translation())}};
}

json frames_json(const Situation& s) {
  json arr = json::array();
  for (const auto& f : s.frames()) arr.push_back(frame_json(f));
  return arr;
}

Frame read_frame(const Field& node, int p) {
  Eigen::MatrixXd r = node["rotation"].square(p);
  Eigen::VectorXd b = node["translation"].vector(p);
  if (!is_valid_rotation(r)) {
    throw FrameValidityError("invalid rotation at '" + node.path() +
                             ".rotation' (not orthonormal with determinant 1)");
  }
  return Frame(std::move(r), std::move(b));
}

Situation read_frames(const Field& node, int p, std::size_t expected) {
  const auto n = node.array_size();
  if (expected != 0 && n != expected) {
    throw ParseError(node.path(), "expected " + std::to_string(expected) + " frames, got " + std::to_string(n));
  }
  if (n == 0) throw ParseError(node.path(), "at least one frame is required");
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < n; ++i) frames.push_back(read_frame(node.at(i), p));
  return Situation(std::move(frames));
}

int read_p(const Field& node) {
  const int p = node.positive_int();
  if (p != 2 && p != 3) throw ParseError(node.path(), "p must be 2 or 3");
  return p;
}

Mode read_mode(const Field& node) {
  const std::string m = node.string();
  if (m == "time") return Mode::TimeBased;
  if (m == "trajectory") return Mode::TrajectoryBased;
  throw ParseError(node.path(), "unknown mode '" + m + "'");
}

}  // namespace

DatasetFile DatasetFile::from_demos(std::vector<Demonstration> demos) {
  if (demos.empty()) throw ArgumentError("dataset needs at least one demonstration");
  DatasetFile f;
  f.mode = demos.front().mode();
  f.p = demos.front().position_dim();
  f.n_frames = static_cast<int>(demos.front().situation().size());
  f.demos = std::move(demos);
  f.validate();
  return f;
}

void DatasetFile::validate() const {
  for (const auto& d : demos) {
    if (d.mode() != mode || d.position_dim() != p ||
        static_cast<int>(d.situation().size()) != n_frames) {
      throw ArgumentError("dataset demonstrations disagree with its mode, p or frame count");
    }
  }
}

std::string encode(const DatasetFile& data) {
  data.validate();
  json doc = header("dataset");
  doc["mode"] = to_string(data.mode);
  doc["p"] = data.p;
  doc["n_frames"] = data.n_frames;
  json demos = json::array();
  for (const auto& d : data.demos) {
    demos.push_back(json{{"frames", frames_json(d.situation())},
                         {"inputs", matrix_json(d.inputs())},
                         {"outputs", matrix_json(d.outputs())}});
  }
  doc["demos"] = std::move(demos);
  return doc.dump() + "\n";
}

DatasetFile decode_dataset(std::string_view text) {
  const json doc = parse_json(text, "<document>");
  check_header(doc, "dataset");
  const Field root(doc, "");
  DatasetFile out;
  out.mode = read_mode(root["mode"]);
  out.p = read_p(root["p"]);
  out.n_frames = root["n_frames"].positive_int();
  const Field demos = root["demos"];
  for (std::size_t i = 0; i < demos.array_size(); ++i) {
    const Field d = demos.at(i);
    Situation s = read_frames(d["frames"], out.p, static_cast<std::size_t>(out.n_frames));
    Eigen::MatrixXd in = d["inputs"].matrix();
    Eigen::MatrixXd outm = d["outputs"].matrix();
    try {
      out.demos.emplace_back(out.mode, std::move(in), std::move(outm), std::move(s));
    } catch (const std::exception& e) {
      throw ParseError(d.path(), e.what());
    }
  }
  return out;
}

std::string encode(const TpGmm& model) {
  model.validate();
  json doc = header("model");
  doc["mode"] = to_string(model.mode);
  doc["input_dim"] = model.input_dim;
  doc["dim"] = model.dim();
  doc["weights"] = vector_json(model.weights);
  json frames = json::array();
  for (const auto& comps : model.per_frame) {
    json arr = json::array();
    for (const auto& c : comps) {
      arr.push_back(json{{"mean", vector_json(c.mean)}, {"cov", row_major_json(c.cov)}});
    }
    frames.push_back(std::move(arr));
  }
  doc["frames"] = std::move(frames);
  return doc.dump() + "\n";
}

TpGmm decode_model(std::string_view text) {
  const json doc = parse_json(text, "<document>");
  check_header(doc, "model");
  const Field root(doc, "");
  TpGmm m;
  m.mode = read_mode(root["mode"]);
  m.input_dim = root["input_dim"].positive_int();
  const int dim = root["dim"].positive_int();
  m.weights = root["weights"].vector();
  const auto k = static_cast<std::size_t>(m.weights.size());
  const Field frames = root["frames"];
  if (frames.array_size() == 0) throw ParseError("frames", "at least one frame is required");
  for (std::size_t n = 0; n < frames.array_size(); ++n) {
    const Field comps = frames.at(n);
    if (comps.array_size() != k) {
      throw ParseError(comps.path(), "expected " + std::to_string(k) + " components");
    }
    std::vector<GaussianComponent> list;
    for (std::size_t c = 0; c < k; ++c) {
      const Field comp = comps.at(c);
      GaussianComponent g{comp["mean"].vector(dim), comp["cov"].square(dim)};
      const double size = 1.0 + g.cov.cwiseAbs().maxCoeff();
      if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * size) {
        throw ParseError(comp.path() + ".cov", "covariance is not symmetric");
      }
      if (Eigen::LLT<Eigen::MatrixXd>(g.cov).info() != Eigen::Success) {
        throw ParseError(comp.path() + ".cov", "covariance is not positive-definite");
      }
      list.push_back(std::move(g));
    }
    m.per_frame.push_back(std::move(list));
  }
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw ParseError("<model>", e.what());
  }
  return m;
}

std::string encode(const Situation& situation) {
  json doc = header("situation");
  doc["p"] = situation.dim();
  doc["frames"] = frames_json(situation);
  return doc.dump() + "\n";
}

Situation decode_situation(std::string_view text) {
  const json doc = parse_json(text, "<document>");
  check_header(doc, "situation");
  const Field root(doc, "");
  return read_frames(root["frames"], read_p(root["p"]), 0);
}

std::string encode(const RunLog& log) {
  std::string out;
  json head = header("runlog");
  head["cost"] = to_string(log.cost_kind);
  if (log.cost_kind == CostKind::Dtw) head["dtw_variant"] = kDtwVariant;
  head["initial_demos"] = log.initial_demos;
  head["initial_cost"] = number_json(log.initial_cost);
  out += head.dump() + "\n";
  for (const auto& r : log.iterations) {
    const json rec{{"iter", r.iter},
                   {"method", to_string(r.method)},
                   {"accepted", r.accepted},
                   {"cost_before", number_json(r.cost_before)},
                   {"cost_after", number_json(r.cost_after)},
                   {"n_demos", r.n_demos}};
    out += rec.dump() + "\n";
  }
  const json tail{{"summary", json{{"final_cost", number_json(log.final_cost)},
                                   {"discarded_count", log.discarded_count},
                                   {"iterations", log.iterations.size()}}}};
  out += tail.dump() + "\n";
  return out;
}

RunLog decode_run_log(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.size() < 2) throw ParseError("<runlog>", "expected a header and a summary record");

  RunLog log;
  const json head = parse_json(lines.front(), "line 1");
  check_header(head, "runlog");
  {
    const Field h(head, "");
    const std::string cost = h["cost"].string();
    if (cost == "rms") {
      log.cost_kind = CostKind::Rms;
    } else if (cost == "dtw") {
      log.cost_kind = CostKind::Dtw;
    } else {
      throw ParseError("cost", "unknown cost '" + cost + "'");
    }
    log.initial_demos = h["initial_demos"].positive_int();
    log.initial_cost = h["initial_cost"].number_or_inf();
  }
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const json rec = parse_json(lines[i], "line " + std::to_string(i + 1));
    const Field r(rec, "line " + std::to_string(i + 1));
    IterationRecord ir;
    ir.iter = static_cast<int>(r["iter"].integer());
    try {
      ir.method = method_from_string(r["method"].string());
    } catch (const ArgumentError& e) {
      throw ParseError(r.path() + ".method", e.what());
    }
    ir.accepted = r["accepted"].boolean();
    ir.cost_before = r["cost_before"].number_or_inf();
    ir.cost_after = r["cost_after"].number_or_inf();
    ir.n_demos = r["n_demos"].positive_int();
    log.iterations.push_back(ir);
  }
  const json tail = parse_json(lines.back(), "line " + std::to_string(lines.size()));
  const Field s = Field(tail, "")["summary"];
  log.final_cost = s["final_cost"].number_or_inf();
  log.discarded_count = static_cast<int>(s["discarded_count"].integer());
  if (s["iterations"].integer() != static_cast<long long>(log.iterations.size())) {
    throw ParseError("summary.iterations", "does not match the number of iteration records");
  }
  int rejected = 0;
  for (const auto& r : log.iterations) rejected += r.accepted ? 0 : 1;
  if (rejected != log.discarded_count) {
    throw ParseError("summary.discarded_count", "does not match the rejected iteration records");
  }
  return log;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save(const DatasetFile& data, const std::filesystem::path& path) { write_file_atomic(path, encode(data)); }
void save(const TpGmm& model, const std::filesystem::path& path) { write_file_atomic(path, encode(model)); }
void save(const Situation& situation, const std::filesystem::path& path) {
  write_file_atomic(path, encode(situation));
}
void save(const RunLog& log, const std::filesystem::path& path) { write_file_atomic(path, encode(log)); }

DatasetFile load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }
TpGmm load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }
Situation load_situation(const std::filesystem::path& path) { return decode_situation(read_file(path)); }
RunLog load_run_log(const std::filesystem::path& path) { return decode_run_log(read_file(path)); }

std::string to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << "\n";
  }
  return out.str();
}

}  // namespace tpaug
