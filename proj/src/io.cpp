#include "hypercd/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hypercd::io {

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return line;
}

double parse_double(const std::string& token, int line_no) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("line " + std::to_string(line_no) +
                      ": not a number: '" + token + "'");
  }
  return v;
}

long parse_long(const std::string& token, int line_no) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw FormatError("line " + std::to_string(line_no) +
                      ": not an integer: '" + token + "'");
  }
  return v;
}

void expect_header(const std::vector<std::string>& fields,
                   const std::vector<std::string>& expected) {
  if (fields != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      want += (i ? "," : "") + expected[i];
    }
    throw FormatError("bad header, expected '" + want + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path);
  }
  return out;
}

}  // namespace

std::string format_g6(double v) { return format("%.6g", v); }
std::string format_g17(double v) { return format("%.17g", v); }
std::string format_f4(double v) { return format("%.4f", v); }

EmbeddingData read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty embedding file");
  }
  const std::vector<std::string> header = split_csv(strip_cr(line));
  if (header.size() < 2 || header[0] != "id") {
    throw FormatError("bad header, expected 'id,v0,...'");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "v" + std::to_string(i - 1)) {
      throw FormatError("bad header column '" + header[i] + "', expected 'v" +
                        std::to_string(i - 1) + "'");
    }
  }
  const std::size_t dim = header.size() - 1;

  EmbeddingData data;
  std::vector<Vec> rows;
  std::unordered_set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != dim + 1) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " fields, got " +
                        std::to_string(fields.size()));
    }
    if (!seen.insert(fields[0]).second) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": duplicate id '" + fields[0] + "'");
    }
    data.ids.push_back(fields[0]);
    Vec v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = parse_double(fields[i + 1], line_no);
    }
    rows.push_back(std::move(v));
  }
  data.vectors.resize(static_cast<Index>(rows.size()),
                      static_cast<Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    data.vectors.row(static_cast<Index>(r)) = rows[r].transpose();
  }
  return data;
}

EmbeddingData read_embeddings_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_embeddings(in);
}

void write_embeddings(std::ostream& out, const EmbeddingData& data) {
  if (static_cast<Index>(data.ids.size()) != data.vectors.rows()) {
    throw std::invalid_argument("ids and vector rows must align");
  }
  out << "id";
  for (Index j = 0; j < data.vectors.cols(); ++j) {
    out << ",v" << j;
  }
  out << "\n";
  for (Index i = 0; i < data.vectors.rows(); ++i) {
    out << data.ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < data.vectors.cols(); ++j) {
      out << "," << format_g17(data.vectors(i, j));
    }
    out << "\n";
  }
}

void write_embeddings_file(const std::string& path,
                           const EmbeddingData& data) {
  std::ofstream out = open_output(path);
  write_embeddings(out, data);
}

std::vector<PairSample> read_pairs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty pair file");
  }
  const std::vector<std::string> header = split_csv(strip_cr(line));
  if (header.size() < 4 || (header.size() - 2) % 2 != 0 ||
      header[0] != "id" || header[1] != "label") {
    throw FormatError("bad header, expected 'id,label,x0..,y0..'");
  }
  const std::size_t dim = (header.size() - 2) / 2;
  std::vector<std::string> expected{"id", "label"};
  for (std::size_t i = 0; i < dim; ++i) {
    expected.push_back("x" + std::to_string(i));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    expected.push_back("y" + std::to_string(i));
  }
  expect_header(header, expected);

  std::vector<PairSample> samples;
  std::unordered_set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 2 * dim + 2) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(2 * dim + 2) + " fields, got " +
                        std::to_string(fields.size()));
    }
    if (!seen.insert(fields[0]).second) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": duplicate id '" + fields[0] + "'");
    }
    const long label = parse_long(fields[1], line_no);
    if (label != 0 && label != 1) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": label must be 0 or 1, got '" + fields[1] + "'");
    }
    PairSample sample;
    sample.label = static_cast<int>(label);
    sample.x1 = Vec(dim);
    sample.x2 = Vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      sample.x1[static_cast<Index>(i)] = parse_double(fields[2 + i], line_no);
    }
    for (std::size_t i = 0; i < dim; ++i) {
      sample.x2[static_cast<Index>(i)] =
          parse_double(fields[2 + dim + i], line_no);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<PairSample> read_pairs_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_pairs(in);
}

void write_pairs(std::ostream& out, const std::vector<PairSample>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("cannot write an empty pair file");
  }
  const Index dim = samples.front().x1.size();
  out << "id,label";
  for (Index i = 0; i < dim; ++i) {
    out << ",x" << i;
  }
  for (Index i = 0; i < dim; ++i) {
    out << ",y" << i;
  }
  out << "\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const PairSample& s = samples[r];
    if (s.x1.size() != dim || s.x2.size() != dim) {
      throw std::invalid_argument("pair rows must share one dimension");
    }
    out << r << "," << s.label;
    for (Index i = 0; i < dim; ++i) {
      out << "," << format_g17(s.x1[i]);
    }
    for (Index i = 0; i < dim; ++i) {
      out << "," << format_g17(s.x2[i]);
    }
    out << "\n";
  }
}

void write_pairs_file(const std::string& path,
                      const std::vector<PairSample>& samples) {
  std::ofstream out = open_output(path);
  write_pairs(out, samples);
}

void write_history(std::ostream& out,
                   const std::vector<siamese::EpochStats>& history) {
  out << "epoch,loss,accuracy,f1\n";
  for (const siamese::EpochStats& row : history) {
    out << row.epoch << "," << format_g17(row.loss) << ","
        << format_g17(row.accuracy) << "," << format_g17(row.f1) << "\n";
  }
}

void write_history_file(const std::string& path,
                        const std::vector<siamese::EpochStats>& history) {
  std::ofstream out = open_output(path);
  write_history(out, history);
}

namespace {

constexpr const char* kModelMagic = "hypercd-model v1";

void write_tensor(std::ostream& out, const siamese::ParamRef& ref) {
  out << "tensor " << ref.name << " " << ref.rows;
  if (ref.cols > 0) {
    out << " " << ref.cols;
  }
  out << "\n";
  for (Index i = 0; i < ref.size; ++i) {
    out << (i ? " " : "") << format_g17(ref.data[i]);
  }
  out << "\n";
}

struct TensorRecord {
  std::string name;
  Index rows = 0;
  Index cols = 0;  // 0 for vectors/scalars
  std::vector<double> values;
};

TensorRecord parse_tensor(const std::string& header_line, std::istream& in) {
  std::istringstream header(header_line);
  std::string tag;
  TensorRecord rec;
  header >> tag >> rec.name >> rec.rows;
  if (tag != "tensor" || rec.name.empty() || rec.rows < 1) {
    throw FormatError("bad tensor header: '" + header_line + "'");
  }
  if (!(header >> rec.cols)) {
    rec.cols = 0;
  }
  const Index size = rec.rows * std::max<Index>(rec.cols, 1);
  std::string values_line;
  if (!std::getline(in, values_line)) {
    throw FormatError("missing values for tensor " + rec.name);
  }
  std::istringstream values(strip_cr(values_line));
  double v = 0.0;
  while (values >> v) {
    rec.values.push_back(v);
  }
  if (static_cast<Index>(rec.values.size()) != size) {
    throw FormatError("tensor " + rec.name + " expects " +
                      std::to_string(size) + " values, got " +
                      std::to_string(rec.values.size()));
  }
  return rec;
}

Mat tensor_as_matrix(const TensorRecord& rec) {
  if (rec.cols < 1) {
    throw FormatError("tensor " + rec.name + " is not a matrix");
  }
  // ParamRef flattens Eigen storage, which is column-major.
  return Eigen::Map<const Mat>(rec.values.data(), rec.rows, rec.cols);
}

Vec tensor_as_vector(const TensorRecord& rec) {
  if (rec.cols != 0) {
    throw FormatError("tensor " + rec.name + " is not a vector");
  }
  return Eigen::Map<const Vec>(rec.values.data(), rec.rows);
}

}  // namespace

void save_model(std::ostream& out, siamese::Model& model) {
  out << kModelMagic << "\n";
  out << "mode " << siamese::to_string(model.head.mode) << "\n";
  out << "curvature " << format_g17(model.head.curvature.value()) << "\n";
  out << "clip_radius " << format_g17(model.head.clip.value()) << "\n";
  out << "signed_change_feature " << (model.signed_change_feature ? 1 : 0)
      << "\n";
  for (const siamese::ParamRef& ref : siamese::param_refs(model)) {
    write_tensor(out, ref);
  }
}

void save_model_file(const std::string& path, siamese::Model& model) {
  std::ofstream out = open_output(path);
  save_model(out, model);
}

siamese::Model load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kModelMagic) {
    throw FormatError("not a model file (missing '" +
                      std::string(kModelMagic) + "' header)");
  }

  siamese::Model model;
  bool saw_mode = false;
  std::vector<TensorRecord> tensors;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    std::istringstream stream(line);
    std::string key;
    stream >> key;
    if (key == "tensor") {
      tensors.push_back(parse_tensor(line, in));
    } else if (key == "mode") {
      std::string value;
      stream >> value;
      try {
        model.head.mode = siamese::head_mode_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
      }
      saw_mode = true;
    } else if (key == "curvature") {
      double value = 0.0;
      if (!(stream >> value)) {
        throw FormatError("bad curvature line");
      }
      model.head.curvature = ball::Curvature(value);
    } else if (key == "clip_radius") {
      double value = 0.0;
      if (!(stream >> value)) {
        throw FormatError("bad clip_radius line");
      }
      model.head.clip = hyplayers::ClipRadius(value);
    } else if (key == "signed_change_feature") {
      int value = 0;
      if (!(stream >> value) || (value != 0 && value != 1)) {
        throw FormatError("bad signed_change_feature line");
      }
      model.signed_change_feature = value == 1;
    } else {
      throw FormatError("unknown model key '" + key + "'");
    }
  }
  if (!saw_mode) {
    throw FormatError("model file missing 'mode'");
  }

  for (const TensorRecord& rec : tensors) {
    if (rec.name.rfind("encoder.", 0) == 0) {
      const std::size_t dot = rec.name.rfind('.');
      const std::string kind = rec.name.substr(dot + 1);
      if (kind == "weight") {
        model.encoder.weights.push_back(tensor_as_matrix(rec));
      } else if (kind == "bias") {
        model.encoder.biases.push_back(tensor_as_vector(rec));
      } else {
        throw FormatError("unknown tensor '" + rec.name + "'");
      }
    } else if (rec.name == "fc.weight") {
      model.head.fc_weight = tensor_as_matrix(rec);
    } else if (rec.name == "fc.bias") {
      model.head.fc_bias = tensor_as_vector(rec);
    } else if (rec.name == "head.p0" || rec.name == "head.p1") {
      model.head.hyp.p_raw[rec.name.back() - '0'] = tensor_as_vector(rec);
    } else if (rec.name == "head.t0" || rec.name == "head.t1") {
      model.head.hyp.t[rec.name.back() - '0'] = tensor_as_vector(rec);
    } else if (rec.name == "head.w0" || rec.name == "head.w1") {
      model.head.euc.w[rec.name.back() - '0'] = tensor_as_vector(rec);
    } else if (rec.name == "head.b0" || rec.name == "head.b1") {
      if (rec.rows != 1 || rec.cols != 0) {
        throw FormatError("tensor " + rec.name + " must be a scalar");
      }
      model.head.euc.b[rec.name.back() - '0'] = rec.values.front();
    } else {
      throw FormatError("unknown tensor '" + rec.name + "'");
    }
  }

  if (model.encoder.weights.empty() ||
      model.encoder.weights.size() != model.encoder.biases.size() ||
      model.head.fc_weight.size() == 0 || model.head.fc_bias.size() == 0) {
    throw FormatError("model file is missing required tensors");
  }
  if (model.head.mode == siamese::HeadMode::kHyperbolic) {
    for (int k = 0; k < 2; ++k) {
      if (model.head.hyp.p_raw[k].size() == 0 ||
          model.head.hyp.t[k].size() == 0) {
        throw FormatError("model file is missing hyperbolic head tensors");
      }
    }
  } else {
    for (int k = 0; k < 2; ++k) {
      if (model.head.euc.w[k].size() == 0) {
        throw FormatError("model file is missing euclidean head tensors");
      }
    }
  }
  return model;
}

siamese::Model load_model_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return load_model(in);
}

}  // namespace hypercd::io
