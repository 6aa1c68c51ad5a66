// SPDX-License-Identifier: Apache-2.0
#include "tsa/data_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace tsa {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'A', 'F'};

std::string line_ref(std::size_t line) { return "line " + std::to_string(line); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size())
        lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
      ++i;
    if (i > start)
      out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T> bool parse_number(std::string_view token, T &out) {
  const auto *first = token.data();
  const auto *last = token.data() + token.size();
  if (first != last && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void put_u32(std::string &out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b)
    out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const std::string &bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  return v;
}

template <class E> E parse_enum(const std::string &key, const std::string &value,
                                std::initializer_list<std::pair<const char *, E>> options) {
  for (const auto &[name, e] : options)
    if (value == name)
      return e;
  std::string allowed;
  for (const auto &[name, e] : options)
    allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw Error(ErrorCode::InvalidArgument,
              "config key '" + key + "' expects one of {" + allowed + "}, got '" + value + "'");
}

template <class T> T parse_config_number(const std::string &key, const std::string &value) {
  T out{};
  if (!parse_number(std::string_view(value), out))
    throw Error(ErrorCode::InvalidArgument,
                "config key '" + key + "' has unparsable value '" + value + "'");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 1)
    throw Error(ErrorCode::InvalidArgument,
                "feature matrix needs N >= 2 frames and n >= 1 dims, got " +
                    std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
      if (!std::isfinite(values_(i, j)))
        throw Error(ErrorCode::NonFiniteValue, "entry (" + std::to_string(i) + "," +
                                                   std::to_string(j) + ") is not finite");
}

FeatureFormat parse_feature_format(const std::string &name) {
  if (name == "text")
    return FeatureFormat::text;
  if (name == "binary")
    return FeatureFormat::binary;
  throw Error(ErrorCode::InvalidArgument, "unknown feature format '" + name + "'");
}

FeatureFormat format_from_extension(const std::filesystem::path &path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".tsaf") ? FeatureFormat::binary : FeatureFormat::text;
}

FeatureMatrix parse_text_features(const std::string &text) {
  const auto lines = split_lines(text);
  if (lines.empty())
    throw Error(ErrorCode::MalformedHeader, "line 1: empty file");
  const auto header = split_fields(lines[0]);
  long long rows = 0, cols = 0;
  if (header.size() != 2 || !parse_number(header[0], rows) || !parse_number(header[1], cols) ||
      rows < 2 || cols < 1)
    throw Error(ErrorCode::MalformedHeader,
                "line 1: expected \"N n\" with N >= 2, n >= 1, got \"" + std::string(lines[0]) +
                    "\"");

  std::size_t data_lines = lines.size() - 1;
  while (data_lines > 0 && trim(lines[data_lines]).empty())
    --data_lines;
  if (data_lines != static_cast<std::size_t>(rows))
    throw Error(ErrorCode::RowCountMismatch, "header declares " + std::to_string(rows) +
                                                 " rows but file has " +
                                                 std::to_string(data_lines));

  Matrix values(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    const auto fields = split_fields(lines[i + 1]);
    if (fields.size() != static_cast<std::size_t>(cols))
      throw Error(ErrorCode::RowLengthMismatch,
                  line_ref(i + 2) + ": expected " + std::to_string(cols) + " values, got " +
                      std::to_string(fields.size()));
    for (long long j = 0; j < cols; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v))
        throw Error(ErrorCode::MalformedHeader, line_ref(i + 2) + ": unparsable value \"" +
                                                    std::string(fields[j]) + "\"");
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteValue,
                    line_ref(i + 2) + ", column " + std::to_string(j + 1) + ": non-finite value");
      values(i, j) = v;
    }
  }
  return FeatureMatrix(std::move(values));
}

std::string format_text_matrix(const Matrix &m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j)
        out.push_back(' ');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::string format_text_features(const FeatureMatrix &m) { return format_text_matrix(m.values()); }

FeatureMatrix parse_binary_features(const std::string &bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::MalformedHeader, "offset 0: missing TSAF magic or truncated header");
  const auto rows = get_u32(bytes, 4);
  const auto cols = get_u32(bytes, 8);
  if (rows < 2 || cols < 1)
    throw Error(ErrorCode::MalformedHeader, "offset 4: header declares " + std::to_string(rows) +
                                                "x" + std::to_string(cols));
  const std::uint64_t expected = 12 + 4ull * rows * cols;
  if (bytes.size() != expected) {
    const auto payload = (bytes.size() - 12) / 4;
    if (payload % cols != 0 || bytes.size() % 4 != 0)
      throw Error(ErrorCode::RowLengthMismatch,
                  "offset 12: payload of " + std::to_string(bytes.size() - 12) +
                      " bytes is not a whole number of " + std::to_string(cols) + "-float rows");
    throw Error(ErrorCode::RowCountMismatch, "header declares " + std::to_string(rows) +
                                                 " rows but payload holds " +
                                                 std::to_string(payload / cols));
  }
  Matrix values(rows, cols);
  std::size_t offset = 12;
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j, offset += 4) {
      const float f = std::bit_cast<float>(get_u32(bytes, offset));
      if (!std::isfinite(f))
        throw Error(ErrorCode::NonFiniteValue,
                    "offset " + std::to_string(offset) + ": non-finite value");
      values(i, j) = static_cast<double>(f);
    }
  return FeatureMatrix(std::move(values));
}

std::string format_binary_features(const FeatureMatrix &m) {
  std::string out(kMagic, 4);
  out.reserve(12 + 4 * m.frames() * m.dims());
  put_u32(out, static_cast<std::uint32_t>(m.frames()));
  put_u32(out, static_cast<std::uint32_t>(m.dims()));
  for (Eigen::Index i = 0; i < m.frames(); ++i)
    for (Eigen::Index j = 0; j < m.dims(); ++j) {
      const auto f = static_cast<float>(m.values()(i, j));
      if (!std::isfinite(f))
        throw Error(ErrorCode::NonFiniteValue, "entry (" + std::to_string(i) + "," +
                                                   std::to_string(j) + ") overflows f32");
      put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  return out;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out)
    throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

FeatureMatrix load_features(const std::filesystem::path &path, FeatureFormat format) {
  const auto contents = read_file(path);
  try {
    return format == FeatureFormat::binary ? parse_binary_features(contents)
                                           : parse_text_features(contents);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_features(const FeatureMatrix &m, const std::filesystem::path &path,
                   FeatureFormat format) {
  write_file(path, format == FeatureFormat::binary ? format_binary_features(m)
                                                   : format_text_features(m));
}

LabelSequence parse_labels(const std::string &text, const std::optional<std::string> &background) {
  auto lines = split_lines(text);
  if (lines.empty())
    throw Error(ErrorCode::EmptyLabels, "label file has no lines");
  LabelSequence seq;
  std::unordered_map<std::string, int> ids;
  seq.labels.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto token = trim(lines[i]);
    if (token.empty())
      throw Error(ErrorCode::BlankLabelLine, line_ref(i + 1) + ": blank line");
    const std::string key(token);
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(seq.names.size()));
    if (inserted)
      seq.names.push_back(key);
    seq.labels.push_back(it->second);
  }
  if (background) {
    if (auto it = ids.find(*background); it != ids.end())
      seq.background_id = it->second;
  }
  return seq;
}

LabelSequence load_labels(const std::filesystem::path &path,
                          const std::optional<std::string> &background) {
  try {
    return parse_labels(read_file(path), background);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::Io)
      throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_labels(const std::vector<int> &labels, const std::filesystem::path &path,
                 const std::vector<std::string> &names) {
  std::string out;
  for (const int label : labels) {
    if (!names.empty() && label >= 0 && static_cast<std::size_t>(label) < names.size())
      out += names[label];
    else
      out += std::to_string(label);
    out.push_back('\n');
  }
  write_file(path, out);
}

LabelSequence labels_from_ids(const std::vector<int> &ids) {
  std::string text;
  for (const int id : ids)
    text += std::to_string(id) + "\n";
  return parse_labels(text);
}

void RunConfig::validate() const {
  auto fail = [](const std::string &what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (L < 1) fail("L must be a positive integer");
  if (!(h > 0.0)) fail("h must be positive");
  if (batch_size < 1) fail("batch_size must be a positive integer");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must lie in (0, 1]");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(epsilon_stop > 0.0)) fail("epsilon_stop must be positive");
  if (patience < 1) fail("patience must be a positive integer");
  if (min_epochs < 1 || max_epochs < 1) fail("min_epochs and max_epochs must be positive");
  if (min_epochs > max_epochs) fail("min_epochs must not exceed max_epochs");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0))
    fail("positive_fraction must lie in (0, 1)");
  if (!(kl_smoothing > 0.0)) fail("kl_smoothing must be positive");
  if (hidden_layers < 1) fail("hidden_layers must be at least 1");
  if (hidden_units < 0) fail("hidden_units must be non-negative");
  if (per_anchor < 1) fail("per_anchor must be at least 1");
  if (steps_per_epoch < 1) fail("steps_per_epoch must be at least 1");
}

void set_config_value(RunConfig &c, const std::string &key, const std::string &value) {
  if (key == "L") c.L = parse_config_number<int>(key, value);
  else if (key == "h") c.h = parse_config_number<double>(key, value);
  else if (key == "batch_size") c.batch_size = parse_config_number<int>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_config_number<double>(key, value);
  else if (key == "lr_decay") c.lr_decay = parse_config_number<double>(key, value);
  else if (key == "weight_decay") c.weight_decay = parse_config_number<double>(key, value);
  else if (key == "epsilon_stop") c.epsilon_stop = parse_config_number<double>(key, value);
  else if (key == "patience") c.patience = parse_config_number<int>(key, value);
  else if (key == "min_epochs") c.min_epochs = parse_config_number<int>(key, value);
  else if (key == "max_epochs") c.max_epochs = parse_config_number<int>(key, value);
  else if (key == "seed") c.seed = parse_config_number<std::uint64_t>(key, value);
  else if (key == "positive_fraction") c.positive_fraction = parse_config_number<double>(key, value);
  else if (key == "kl_smoothing") c.kl_smoothing = parse_config_number<double>(key, value);
  else if (key == "loss_orientation")
    c.loss_orientation = parse_enum<LossOrientation>(
        key, value, {{"standard", LossOrientation::standard}, {"literal", LossOrientation::literal}});
  else if (key == "semantic_kernel")
    c.semantic_kernel = parse_enum<SemanticKernel>(
        key, value, {{"similarity", SemanticKernel::similarity}, {"distance", SemanticKernel::distance}});
  else if (key == "mixing")
    c.mixing = parse_enum<Mixing>(key, value,
                                  {{"learned", Mixing::learned},
                                   {"temporal_only", Mixing::temporal_only},
                                   {"semantic_only", Mixing::semantic_only}});
  else if (key == "loss_space")
    c.loss_space = parse_enum<LossSpace>(key, value, {{"pdf", LossSpace::pdf}, {"raw", LossSpace::raw}});
  else if (key == "pooling")
    c.pooling = parse_enum<Pooling>(
        key, value, {{"self_affinity", Pooling::self_affinity}, {"uniform", Pooling::uniform}});
  else if (key == "init")
    c.init = parse_enum<InitScheme>(key, value,
                                    {{"identity", InitScheme::identity}, {"uniform", InitScheme::uniform}});
  else if (key == "hidden_layers") c.hidden_layers = parse_config_number<int>(key, value);
  else if (key == "hidden_units") c.hidden_units = parse_config_number<int>(key, value);
  else if (key == "per_anchor") c.per_anchor = parse_config_number<int>(key, value);
  else if (key == "steps_per_epoch") c.steps_per_epoch = parse_config_number<int>(key, value);
  else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string &text, RunConfig config) {
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument, line_ref(i + 1) + ": expected \"key = value\"");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      set_config_value(config, std::string(key), std::string(value));
    } catch (const Error &e) {
      throw Error(e.code(), line_ref(i + 1) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path &path, RunConfig base) {
  return parse_config(read_file(path), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig &c) {
  auto name = [](auto e, std::initializer_list<const char *> names) {
    return std::string(*(names.begin() + static_cast<int>(e)));
  };
  return {
      {"L", std::to_string(c.L)},
      {"h", format_double(c.h)},
      {"batch_size", std::to_string(c.batch_size)},
      {"learning_rate", format_double(c.learning_rate)},
      {"lr_decay", format_double(c.lr_decay)},
      {"weight_decay", format_double(c.weight_decay)},
      {"epsilon_stop", format_double(c.epsilon_stop)},
      {"patience", std::to_string(c.patience)},
      {"min_epochs", std::to_string(c.min_epochs)},
      {"max_epochs", std::to_string(c.max_epochs)},
      {"seed", std::to_string(c.seed)},
      {"positive_fraction", format_double(c.positive_fraction)},
      {"kl_smoothing", format_double(c.kl_smoothing)},
      {"loss_orientation", name(c.loss_orientation, {"standard", "literal"})},
      {"semantic_kernel", name(c.semantic_kernel, {"similarity", "distance"})},
      {"mixing", name(c.mixing, {"learned", "temporal_only", "semantic_only"})},
      {"loss_space", name(c.loss_space, {"pdf", "raw"})},
      {"pooling", name(c.pooling, {"self_affinity", "uniform"})},
      {"init", name(c.init, {"identity", "uniform"})},
      {"hidden_layers", std::to_string(c.hidden_layers)},
      {"hidden_units", std::to_string(c.hidden_units)},
      {"per_anchor", std::to_string(c.per_anchor)},
      {"steps_per_epoch", std::to_string(c.steps_per_epoch)},
  };
}

std::string format_config(const RunConfig &config, const std::string &line_prefix) {
  std::string out;
  for (const auto &[key, value] : config_entries(config))
    out += line_prefix + key + " = " + value + "\n";
  return out;
}

} // namespace tsa
